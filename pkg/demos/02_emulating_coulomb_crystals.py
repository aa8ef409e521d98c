"""
Emulating Coulomb crystals with pump light
==========================================

A linearized ion crystal is a set of coupled oscillators.  Choosing pump
strengths on an evenly spaced frequency comb reproduces its coupling
matrix on fiber-trapped particles.
"""
import numpy as np

from fibersim import presets
from fibersim.coulombmap import design_line_spectrum, design_planar_spectrum, emulate_and_compare

# three ions on a line, emulated by three traps 3/8 of a wavelength apart
line = presets.line3_target()
res = design_line_spectrum(line, presets.line3_fiber(), dk=presets.LINE_DK)
print("line design:", res.method, "residual", f"{res.residual:.1e}")
print("Omega_l / Omega~ =", np.round(res.ratios, 4))
cmp = emulate_and_compare(line, res.problem.fiber, res.ratios, res.problem.wavenumbers)
print("worst relative mismatch, 1 and 2 quanta:",
      f"{cmp.max_relative_deviation(1):.1e}", f"{cmp.max_relative_deviation(2):.1e}")

# %%
# A planar triangle needs x and y motion of every ion, so six traps.
# Switching off the base pair is something real ions cannot do.
for label, mask in (("triangle", ()), ("triangle without base pair", ((0, 2),))):
    target = presets.triangle_target(mask)
    res = design_planar_spectrum(target, presets.triangle_fiber())
    cmp = emulate_and_compare(target, res.problem.fiber, res.ratios, res.problem.wavenumbers, sectors=(1,))
    print(f"\n{label}: {res.problem.A.shape[0]} equations, rank-deficient least squares ({res.method})")
    print("normalized strengths:", np.round(res.ratios / res.ratios.max(), 3))
    print("single-quantum energies at D = 1:", np.round(cmp.target[1][0], 6))
    print("worst relative mismatch over the D sweep:", f"{cmp.max_relative_deviation(1):.1e}")
