"""Image-dipole reaction fields at the position of the radiating dipole.

Two surface models are supported.  The perfect conductor has the full
retarded image field (three terms in p, pdot and pddot at t - t1); a
dielectric eps2 only has the instantaneous near-field image factor.

Signs follow the usual convention: where a formula carries ``∓`` or ``±``,
the upper sign is the perpendicular dipole and the lower sign the parallel
one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .quantities import (
    CONSTANTS,
    DipoleTransition,
    MediumPair,
    radiative_rate,
    retardation_time,
)

__all__ = [
    "DipoleState",
    "EffectiveCoefficients",
    "SurfacePlasmonPoleError",
    "image_dipole",
    "near_field",
    "near_field_factor",
    "retarded_coefficients",
    "boundary_field_retarded",
    "free_space_field",
    "effective_coefficients",
]

_C = CONSTANTS.c


class SurfacePlasmonPoleError(ZeroDivisionError):
    """eps1 + eps2 = 0: the image factor has a resonant denominator."""


@dataclass(frozen=True)
class DipoleState:
    p: float
    p_dot: float = 0.0
    p_ddot: float = 0.0
    p_dddot: float | None = None

    def __post_init__(self):
        for v in (self.p, self.p_dot, self.p_ddot, self.p_dddot):
            if v is not None and not cmath.isfinite(v):
                raise ValueError("dipole state must be finite")


@dataclass(frozen=True)
class EffectiveCoefficients:
    """Coefficients of ``mass_factor * pddot + damping_rate * pdot + (w0^2 - freq_shift_sq) p = 0``.

    ``damping_rate`` is the full pdot coefficient, so the amplitude decays at
    half of it.  For a perpendicular dipole above a conductor it equals 2 gamma.
    """

    damping_rate: float
    freq_shift_sq: float
    retardation: float
    mass_factor: float = 1.0
    method: str = "expansion"

    def shifted_frequency(self, omega0: float) -> float:
        return math.sqrt((omega0**2 - self.freq_shift_sq) / self.mass_factor)


def _upper(medium: MediumPair) -> bool:
    return medium.perpendicular


def image_dipole(p, medium: MediumPair):
    """Moment of the image dipole, p' = ∓ p (eps1 - eps2)/(eps1 + eps2).

    The perfect conductor returns the |eps2| -> infinity limit: +p for a
    perpendicular dipole, -p for a parallel one.
    """
    sign = -1.0 if _upper(medium) else 1.0
    if medium.perfect_conductor:
        return -sign * p
    eps1, eps2 = medium.eps1, complex(medium.eps2)
    denom = eps1 + eps2
    if abs(denom) <= 1e-15 * max(abs(eps1), abs(eps2), 1.0):
        raise SurfacePlasmonPoleError("eps1 + eps2 = 0")
    ratio = (eps1 - eps2) / denom
    if ratio.imag == 0:
        ratio = ratio.real
    return sign * p * ratio


def near_field_factor(R: float, medium: MediumPair):
    """E/p of the instantaneous image near field, -(∓3 - 1) p'/p / (16 R^3 eps1)."""
    if not R > 0:
        raise ValueError("distance R must be positive")
    if not medium.eps1 > 0:
        raise ValueError("near field needs eps1 > 0")
    k = -3.0 if _upper(medium) else 3.0
    return -(k - 1.0) * image_dipole(1.0, medium) / (16 * R**3 * medium.eps1)


def near_field(p, R: float, medium: MediumPair):
    """Non-retarded field of the image dipole at the real dipole (statvolt/cm)."""
    return near_field_factor(R, medium) * p


def retarded_coefficients(R: float, medium: MediumPair) -> tuple[float, float, float]:
    """Perfect-conductor field coefficients (c0, c1, c2) of p, pdot, pddot at t - t1.

    Perpendicular: (1/(4 R^3 eps1), 1/(2 R^2 c sqrt eps1), 0).
    Parallel:      (1/(8 R^3 eps1), 1/(4 R^2 c sqrt eps1), 1/(2 R c^2)).
    """
    if not np.all(np.asarray(R) > 0):
        raise ValueError("distance R must be positive")
    if not medium.perfect_conductor:
        raise ValueError("the retarded boundary field is only available for a perfect conductor")
    eps1 = medium.eps1
    s = -1.0 if _upper(medium) else 1.0  # the ∓ of the formula
    c2 = (1 + s) / (4 * R * _C**2)
    c1 = 1.0 / ((3 + s) * R**2 * _C * math.sqrt(eps1))
    c0 = 1.0 / (2 * (3 + s) * R**3 * eps1)
    return c0, c1, c2


def boundary_field_retarded(history: DipoleState, R: float, medium: MediumPair) -> float:
    """Boundary field at t given the dipole state sampled at t - t1."""
    c0, c1, c2 = retarded_coefficients(R, medium)
    return c0 * history.p + c1 * history.p_dot + c2 * history.p_ddot


def free_space_field(state: DipoleState, medium: MediumPair) -> float:
    """Free-space reaction field 2 sqrt(eps1) p''' / (3 c^3)."""
    if state.p_dddot is None:
        raise ValueError("free-space field needs the third derivative of p")
    return 2 * state.p_dddot * math.sqrt(medium.eps1) / (3 * _C**3)


def _expanded(transition: DipoleTransition, R: float, medium: MediumPair) -> EffectiveCoefficients:
    # Taylor-expand p(t - t1) in t1 up to third order and use p''' = -w0^2 pdot
    # for the third-order (radiative) terms.
    c0, c1, c2 = retarded_coefficients(R, medium)
    t1 = retardation_time(R, medium)
    kappa = transition.coupling
    w0 = transition.omega0
    e1 = c1 - c0 * t1
    e2 = c2 - c1 * t1 + c0 * t1**2 / 2
    e3 = -c2 * t1 + c1 * t1**2 / 2 - c0 * t1**3 / 6
    e3 += 2 * math.sqrt(medium.eps1) / (3 * _C**3)  # free-space term
    return EffectiveCoefficients(
        damping_rate=kappa * (w0**2 * e3 - e1),
        freq_shift_sq=kappa * c0,
        retardation=t1,
        mass_factor=1.0 - kappa * e2,
        method="expansion",
    )


def _harmonic(transition: DipoleTransition, R: float, medium: MediumPair) -> EffectiveCoefficients:
    # Evaluate the delayed field on p ~ exp(-i w0 t) without expanding in t1.
    c0, c1, c2 = retarded_coefficients(R, medium)
    t1 = retardation_time(R, medium)
    w0 = transition.omega0
    kappa = transition.coupling
    g = (c0 - 1j * w0 * c1 - w0**2 * c2) * cmath.exp(1j * w0 * t1)
    return EffectiveCoefficients(
        damping_rate=radiative_rate(transition, medium) + kappa * g.imag / w0,
        freq_shift_sq=kappa * g.real,
        retardation=t1,
        method="harmonic",
    )


def _dielectric(transition: DipoleTransition, R: float, medium: MediumPair) -> EffectiveCoefficients:
    # Only the instantaneous image factor is known here; a lossy eps2 makes
    # it complex and Im(kappa g)/w0 acts as extra pdot damping.
    g = complex(near_field_factor(R, medium))
    kappa = transition.coupling
    return EffectiveCoefficients(
        damping_rate=radiative_rate(transition, medium) + kappa * g.imag / transition.omega0,
        freq_shift_sq=kappa * g.real,
        retardation=retardation_time(R, medium),
        method="near-field",
    )


def effective_coefficients(
    transition: DipoleTransition, R: float, medium: MediumPair, method: str = "expansion"
) -> EffectiveCoefficients:
    """Collapse the reaction fields into an ordinary oscillator equation.

    Parameters
    ----------
    method : {"expansion", "harmonic"}
        ``"expansion"`` expands the retarded field in powers of R/lambda and
        is what the Mathieu reduction uses: for a perpendicular dipole above a
        conductor it gives damping 2 gamma and shift e^2/(4 m R^3 eps1).  It is
        only meaningful in the near zone.  ``"harmonic"`` evaluates the delayed
        field on a single harmonic at w0 and stays valid at any distance
        (boundary terms vanish as R -> infinity); the mass renormalisation is
        folded into the shift there.

    A dielectric surface always uses the instantaneous near field.
    """
    if not medium.perfect_conductor:
        return _dielectric(transition, R, medium)
    if method == "expansion":
        return _expanded(transition, R, medium)
    if method == "harmonic":
        return _harmonic(transition, R, medium)
    raise ValueError(f"unknown method {method!r}")
