"""Physical constants, input-unit conversion and the parameter records.

Everything inside the package is Gaussian CGS: cm, g, s, esu, statvolt/cm,
erg.  SI-flavoured inputs are converted once, at the boundary, by
:func:`from_si`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
import scipy.constants as sc

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "TransitionMode",
    "Orientation",
    "DipoleTransition",
    "GratingKinematics",
    "MediumPair",
    "ResonanceSpec",
    "ResonanceGeometry",
    "ConfigurationError",
    "ValidityWarning",
    "from_si",
    "to_si",
    "radiative_rate",
    "resonance_geometry",
    "plasma_epsilon",
    "critical_density",
    "boltzmann_delta_n",
]


class ConfigurationError(ValueError):
    """A parameter record lacks the fields an operation needs."""


class ValidityWarning(UserWarning):
    """A model assumption (near zone, R0 < L, small a) is not satisfied."""


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA values expressed in Gaussian CGS."""

    c: float = sc.c * 1e2  # cm/s
    hbar: float = sc.hbar * 1e7  # erg s
    e_electron: float = sc.e * sc.c * 10.0  # esu (1 C = 10 c[m/s] esu)
    m_electron: float = sc.m_e * 1e3  # g
    k_boltzmann: float = sc.k * 1e7  # erg/K
    debye_to_cgs: float = 1e-18  # esu cm

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"constant {name} must be positive")


CONSTANTS = PhysicalConstants()

_C = CONSTANTS.c
_HBAR = CONSTANTS.hbar

# multiplicative factors SI-ish unit -> CGS
_UNIT_FACTORS = {
    "Debye": CONSTANTS.debye_to_cgs,
    "micrometer": 1e-4,
    "nanometer": 1e-7,
    "cm": 1.0,
    "km_per_s": 1e5,
    "per_cm3": 1.0,
    "Kelvin": 1.0,
    "Hz_angular": 1.0,
}


def from_si(value: float, unit: str) -> float:
    """Convert ``value`` given in ``unit`` to its Gaussian-CGS equivalent.

    Recognised units: Debye, micrometer, nanometer, cm, km_per_s, per_cm3,
    Kelvin, Hz_angular (rad/s).
    """
    try:
        factor = _UNIT_FACTORS[unit]
    except KeyError:
        raise ValueError(f"unknown unit {unit!r}; expected one of {sorted(_UNIT_FACTORS)}") from None
    if not math.isfinite(value):
        raise ValueError(f"value must be finite, got {value!r}")
    return value * factor


def to_si(value: float, unit: str) -> float:
    """Inverse of :func:`from_si`."""
    try:
        factor = _UNIT_FACTORS[unit]
    except KeyError:
        raise ValueError(f"unknown unit {unit!r}") from None
    return value / factor


class TransitionMode(str, Enum):
    CLASSICAL = "classical"
    TWO_LEVEL = "two-level"


class Orientation(str, Enum):
    PERPENDICULAR = "perpendicular"
    PARALLEL = "parallel"


# relative tolerance of the e^2/m = 2 w0 d^2 / hbar correspondence check
BRIDGE_RTOL = 1e-6


@dataclass(frozen=True)
class DipoleTransition:
    """A dipole transition, classical (charge/mass) or two-level (matrix element).

    ``coupling`` is the oscillator-strength factor e^2/m that multiplies the
    reaction field in the equation of motion.  For a two-level transition it
    is obtained through the correspondence e^2/m = 2 w0 d^2 / hbar.
    """

    omega0: float
    mode: TransitionMode = TransitionMode.TWO_LEVEL
    d: float | None = None
    charge: float | None = None
    mass: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", TransitionMode(self.mode))
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        if self.mode is TransitionMode.TWO_LEVEL:
            if self.d is None or not self.d > 0:
                raise ConfigurationError("two-level transition needs a positive dipole matrix element d")
        else:
            if self.charge is None or self.mass is None or not (self.charge > 0 and self.mass > 0):
                raise ConfigurationError("classical transition needs positive charge and mass")
        if self.d is not None and self.charge is not None and self.mass is not None:
            classical = self.charge**2 / self.mass
            quantum = 2 * self.omega0 * self.d**2 / _HBAR
            if abs(classical - quantum) > BRIDGE_RTOL * quantum:
                raise ConfigurationError(
                    f"e^2/m = {classical:.6g} disagrees with 2 w0 d^2/hbar = {quantum:.6g}"
                )

    @classmethod
    def two_level(cls, omega0: float, d: float) -> "DipoleTransition":
        return cls(omega0=omega0, mode=TransitionMode.TWO_LEVEL, d=d)

    @classmethod
    def classical(cls, omega0: float, charge: float = CONSTANTS.e_electron,
                  mass: float = CONSTANTS.m_electron) -> "DipoleTransition":
        return cls(omega0=omega0, mode=TransitionMode.CLASSICAL, charge=charge, mass=mass)

    @classmethod
    def classical_with_coupling(cls, omega0: float, coupling: float) -> "DipoleTransition":
        """Classical oscillator with unit charge-to-mass bookkeeping: e^2/m = coupling."""
        return cls(omega0=omega0, mode=TransitionMode.CLASSICAL, charge=1.0, mass=1.0 / coupling)

    @property
    def wavelength(self) -> float:
        """Vacuum wavelength 2 pi c / w0 (cm)."""
        return 2 * math.pi * _C / self.omega0

    @property
    def coupling(self) -> float:
        """e^2/m in esu^2/g."""
        if self.mode is TransitionMode.CLASSICAL:
            return self.charge**2 / self.mass
        return 2 * self.omega0 * self.d**2 / _HBAR

    @property
    def zero_point_dipole(self) -> float:
        """Initial-fluctuation dipole scale: d for two-level, 1 otherwise."""
        return self.d if self.d is not None else 1.0


@dataclass(frozen=True)
class GratingKinematics:
    """Standoff R0 (cm), corrugation a, period L (cm), speed v (cm/s).

    The standoff follows R(t) = R0 (1 + a cos nu t) with nu = 2 pi v / L.
    """

    R0: float
    a: float
    L: float
    v: float

    def __post_init__(self):
        if not self.R0 > 0:
            raise ValueError("standoff R0 must be positive")
        if not self.a < 1:
            raise ValueError("corrugation amplitude must be < 1 (R(t) would touch the surface)")
        if self.a < 0:
            raise ValueError("corrugation amplitude must be non-negative")
        if not self.L > 0:
            raise ValueError("grating period L must be positive")
        if self.v < 0:
            raise ValueError("speed must be non-negative")

    @property
    def nu(self) -> float:
        return 2 * math.pi * self.v / self.L

    @property
    def period(self) -> float:
        return self.L / self.v if self.v > 0 else math.inf

    def standoff(self, t):
        return self.R0 * (1 + self.a * np.cos(self.nu * t))

    def below_period(self) -> bool:
        return self.R0 < self.L

    def near_zone(self, transition: DipoleTransition, medium: "MediumPair") -> bool:
        return retardation_phase(self.R0, transition, medium) < NEAR_ZONE_PHASE

    def validity(self, transition: DipoleTransition, medium: "MediumPair") -> dict[str, bool]:
        return {
            "near_zone": self.near_zone(transition, medium),
            "standoff_below_period": self.below_period(),
            "corrugation_below_one": self.a < 1,
            "small_corrugation": self.a <= SMALL_A,
        }

    def warnings(self, transition: DipoleTransition, medium: "MediumPair") -> list[str]:
        msgs = []
        flags = self.validity(transition, medium)
        if not flags["near_zone"]:
            msgs.append("standoff is not in the near zone (w0 t1 >= %.2g)" % NEAR_ZONE_PHASE)
        if not flags["standoff_below_period"]:
            msgs.append("standoff R0 >= grating period L; the grating is averaged out")
        if not flags["small_corrugation"]:
            msgs.append("corrugation a > %.2g; linearised drive amplitude is inaccurate" % SMALL_A)
        return msgs


# near zone <=> retardation phase w0 t1 = 2 w0 R sqrt(eps1)/c below this
NEAR_ZONE_PHASE = 0.5
SMALL_A = 0.3


@dataclass(frozen=True)
class MediumPair:
    """Upper medium eps1 and the surface model below it.

    ``eps2=None`` is the perfect conductor (|eps2| -> infinity); otherwise a
    complex dielectric constant used by the near-field image factor only.
    """

    eps1: float = 1.0
    eps2: complex | None = None
    orientation: Orientation = Orientation.PERPENDICULAR

    def __post_init__(self):
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        if not self.eps1 >= 0:
            raise ValueError("eps1 must be non-negative")

    @property
    def perfect_conductor(self) -> bool:
        return self.eps2 is None

    @property
    def perpendicular(self) -> bool:
        return self.orientation is Orientation.PERPENDICULAR


@dataclass(frozen=True)
class ResonanceSpec:
    """Mathieu resonance of order N: nu = 2 w0 / N."""

    order: int = 1
    rtol: float = 1e-6

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError("resonance order must be an integer >= 1")

    def target_nu(self, omega0: float) -> float:
        return 2 * omega0 / self.order

    def is_resonant(self, nu: float, omega0: float) -> bool:
        target = self.target_nu(omega0)
        return abs(nu - target) <= self.rtol * target


class ResonanceGeometry(NamedTuple):
    nu: float
    omega0: float
    wavelength: float


def resonance_geometry(v: float, L: float, order: int = 1) -> ResonanceGeometry:
    """Transition frequency and wavelength that resonate with a grating.

    >>> g = resonance_geometry(1e5, 1e-5)
    >>> round(g.wavelength, 6)
    5.995849
    """
    if not (v > 0 and L > 0):
        raise ValueError("v and L must be positive")
    ResonanceSpec(order)
    nu = 2 * math.pi * v / L
    omega0 = order * nu / 2
    # 2 pi c / omega0 written so that N = 1 gives 2cL/v exactly
    wavelength = 2 * _C * L / (order * v)
    return ResonanceGeometry(nu, omega0, wavelength)


def radiative_rate(transition: DipoleTransition, medium: MediumPair) -> float:
    """Free-space radiative rate gamma = 2 (e^2/m) w0^2 sqrt(eps1) / (3 c^3).

    In the oscillator equation this appears as ``gamma * pdot``; a
    perpendicular dipole above a conductor picks up a second ``gamma`` from
    the retarded image field.
    """
    w0 = transition.omega0
    return 2 * transition.coupling * w0**2 * math.sqrt(medium.eps1) / (3 * _C**3)


def retardation_time(R: float, medium: MediumPair) -> float:
    """Round-trip delay t1 = 2 R sqrt(eps1) / c."""
    return 2 * R * math.sqrt(medium.eps1) / _C


def retardation_phase(R: float, transition: DipoleTransition, medium: MediumPair) -> float:
    return transition.omega0 * retardation_time(R, medium)


def plasma_epsilon(n_e: float, omega: float) -> float:
    """Dielectric constant 1 - wp^2/w^2 of a cold collisionless plasma."""
    if n_e < 0 or not omega > 0:
        raise ValueError("need n_e >= 0 and omega > 0")
    wp2 = 4 * math.pi * n_e * CONSTANTS.e_electron**2 / CONSTANTS.m_electron
    return 1.0 - wp2 / omega**2


def critical_density(omega: float) -> float:
    """Electron density whose plasma frequency equals ``omega``."""
    return CONSTANTS.m_electron * omega**2 / (4 * math.pi * CONSTANTS.e_electron**2)


def boltzmann_delta_n(omega0: float, temperature: float) -> float:
    """Thermal fractional population difference tanh(hbar w0 / 2 kT).

    Not part of the instability model itself; a convenience for choosing
    delta_n at a given temperature.
    """
    if temperature <= 0:
        return 1.0
    return math.tanh(_HBAR * omega0 / (2 * CONSTANTS.k_boltzmann * temperature))


def warn_validity(grating: GratingKinematics, transition: DipoleTransition, medium: MediumPair) -> list[str]:
    msgs = grating.warnings(transition, medium)
    for msg in msgs:
        warnings.warn(msg, ValidityWarning, stacklevel=3)
    return msgs
