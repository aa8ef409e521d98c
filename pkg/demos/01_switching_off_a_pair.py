"""
Switching off a pair and building two-qubit gates
=================================================

Three particles sit along the fiber.  Two pump colours are tuned so that
the third particle drops out of the exchange while the first two keep
swapping their excitation.
"""
import numpy as np

from fibersim import FockSpace, presets
from fibersim.dynamics import ISWAP, SQISW, evolve_many, extract_two_qubit_gate, gate_time
from fibersim.hamiltonian import build_rwa_hamiltonian, coupling_matrix
from fibersim.model import ChainGeometry, PumpSpectrum

# d01 = 3/4, d12 = 7/8 wavelengths, k2 = 4/3 k1 and Omega2 = 0.82 Omega1
omega1 = 0.01
geometry, spectrum = presets.fig5_chain(omega1)
print("couplings / Omega1:")
print(np.round(coupling_matrix(geometry, spectrum) / omega1, 5))

# start with the first particle excited and watch the populations
space = FockSpace(3, cutoff=1)
H = build_rwa_hamiltonian(geometry, spectrum, space, frequency_shifts=False)
theta = np.linspace(0, 20, 9)
states = evolve_many(space.basis_state((1, 0, 0)), H, theta / omega1)
for th, s in zip(theta, states):
    print(f"theta={th:5.1f}  populations={np.round(s.populations(), 5)}")

# %%
# A single pair with g = Omega at a quarter-wavelength spacing gives the
# exchange unitary; stopping at g t = pi/2 or pi/4 yields iSWAP or SQiSW.
pair = ChainGeometry([0.0, 0.25])
sp = PumpSpectrum.single(2 * np.pi, 0.02)
space2 = FockSpace(2, cutoff=1)
H2 = build_rwa_hamiltonian(pair, sp, space2)
g = coupling_matrix(pair, sp)[0, 1]
for name, V, angle in (("iSWAP", ISWAP, np.pi / 2), ("SQiSW", SQISW, np.pi / 4)):
    U, rep = extract_two_qubit_gate(H2, space2, (0, 1), gate_time(g, angle), name)
    print(f"{name}: t = {rep.time:.2f}, fidelity = {rep.fidelity:.12f}")
    print(np.round(U, 6))

# bosonic modes with two quanta leak out of the qubit subspace
try:
    big = FockSpace(2, cutoff=2)
    extract_two_qubit_gate(build_rwa_hamiltonian(pair, sp, big), big, (0, 1), gate_time(g, np.pi / 4))
except RuntimeError as exc:
    print("cutoff 2:", exc)
