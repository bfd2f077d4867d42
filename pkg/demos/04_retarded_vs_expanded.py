# %% [markdown]
# Retarded image field against its small-distance expansion
#
# At R = lambda/100 the round-trip delay is a fraction of a radian, and the
# expanded equation (shifted frequency, doubled damping, renormalised mass)
# should track the delay-differential model closely.

# %%
import numpy as np

from parametric_dipole.boundary_fields import effective_coefficients
from parametric_dipole.dynamics import measure_growth_rate, simulate_expanded, simulate_retarded
from parametric_dipole.quantities import DipoleTransition, GratingKinematics, MediumPair, radiative_rate

w0 = 1e11
lam = DipoleTransition.classical(w0).wavelength
R = lam / 100
medium = MediumPair()

# oscillator strength picked so the image shift is 1 % of w0^2
s = 0.01
osc = DipoleTransition.classical_with_coupling(w0, s * 4 * R**3 * w0**2)
coef = effective_coefficients(osc, R, medium)
print("frequency shift / w0^2:", coef.freq_shift_sq / w0**2)
print("pdot coefficient / gamma:", coef.damping_rate / radiative_rate(osc, medium))

# %%
grating = GratingKinematics(R, 0.0, 1.0, 1e5)
ret = simulate_retarded(osc, grating, medium, ic=(1.0, 0.0), periods=100)
exp = simulate_expanded(osc, R, medium, ic=(1.0, 0.0), periods=100)
err = np.max(np.abs(ret.p_samples - exp.p_samples)) / np.max(np.abs(exp.p_samples))
print("max relative difference over 100 periods:", err)

# %%
long = simulate_retarded(osc, grating, medium, ic=(1.0, 0.0), periods=1500)
fit = measure_growth_rate(long)
print("fitted amplitude decay / gamma:", -fit.omega_pp / radiative_rate(osc, medium))
