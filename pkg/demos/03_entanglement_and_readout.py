"""
Spreading entanglement and reading it out
=========================================

With d01 = lambda/2 the first two particles do not talk to each other, but
both couple to the third with opposite sign.  An excitation on the third
particle spreads into a W state, then a Bell pair, then comes back.
"""
from fibersim.figures import fig6, fig7, fig8

t = fig6()
for name, m in t.meta["markers"].items():
    print(f"{name:>6}: t = {m['t']:7.2f}  S(1|23) = {m['S_1|23']:.4f}  S(12|3) = {m['S_12|3']:.4f}")

# %%
# The light leaving the left end only sees distances measured from the
# first particle, so |100> and |011> look identical there.
t7 = fig7()
print("\nmax |I-(100) - I-(011)| =", t7.meta["max_abs_diff_minus"])
print("max |I+(100) - I+(011)| =", round(t7.meta["max_abs_diff_plus"], 4))

# along the entangling trajectory the right output never changes
t8 = fig8()
ip, im = t8.column("I_plus"), t8.column("I_minus")
print("I+ range:", ip.min(), ip.max())
print("I- range:", round(im.min(), 4), round(im.max(), 4))
