"""Parametric self-excitation of a dipole moving above a corrugated surface.

Modules
-------
quantities       units, constants and validated scenario types
boundary_fields  image-dipole reaction fields and effective oscillator coefficients
dynamics         time-domain integrators and envelope growth fits
floquet          monodromy matrices, thresholds and stability maps
estimators       closed-form threshold, growth and power estimates
runner           config files, commands, sweeps and the command-line entry point
"""

__version__ = "0.1.0"
