# %% [markdown]
# Floquet stability map
#
# The damped Mathieu oscillator has instability tongues at nu = 2 w0 / N.
# We map the exponent over (nu/w0, A) and pick out the tongue tips.

# %%
import numpy as np

from parametric_dipole.floquet import exponent_curve, stability_map, threshold_amplitude

w0 = 1.0
gamma = 2e-3

smap = stability_map(w0, gamma, nu_range=(0.6, 2.4), A_range=(0.0, 0.6), grid=(180, 61))
for tip in smap.tongue_tips():
    print(f"tip near nu/w0 = {tip['nu_ratio']:.3f} (2/N = {tip['nearest_2_over_N']:.3f}), A_min = {tip['A_min']:.3f}")

# %%
# first tongue threshold by bisection, compared with 4 gamma / w0
res = threshold_amplitude(w0, gamma, 2 * w0)
print("A_th =", res.A_th, " 4 gamma/w0 =", 4 * gamma / w0)

# %%
# at tongue centre the linear growth law holds far beyond small A
A = np.linspace(0.01, 1.0, 100)
ex, dev, A_bad = exponent_curve(w0, gamma, 2 * w0, A)
print("exponent at A = 0.2:", ex[19], " linear:", 0.2 / 4 - gamma)
print("first A off by more than 10 %:", A_bad)

# %%
with open("stability_map.svg", "w") as fh:
    fh.write(smap.to_svg())
print("wrote stability_map.svg")
