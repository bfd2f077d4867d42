# %% [markdown]
# Baseline estimate
#
# A 100 GHz two-level transition with a 1 Debye matrix element flies at
# 1 km/s over a corrugated perfect conductor.  Everything below uses the
# estimator layer only, so it runs in well under a second.

# %%
import math

from parametric_dipole.estimators import Scenario, report_text, scenario_report
from parametric_dipole.quantities import DipoleTransition, GratingKinematics, MediumPair

w0 = 1e11
molecule = DipoleTransition.two_level(w0, 1e-18)
print("wavelength (cm):", molecule.wavelength)

# %%
# the period is chosen so the grating drives at twice the transition frequency
v = 1e5
grating = GratingKinematics(R0=1e-5, a=0.1, L=math.pi * v / w0, v=v)
print("drive frequency / w0:", grating.nu / w0)

# %%
scenario = Scenario(molecule, grating, MediumPair(), beam_density=1e17, plate=(1.0, 10.0), delta_n=1.0)
report = scenario_report(scenario)
print(report_text(report))

# %% [markdown]
# The threshold ratio is many orders above one, so the dipole is deep in the
# unstable regime.  The validity warnings point out that the nominal grating
# period here is shorter than the height, which the estimate does not model.

