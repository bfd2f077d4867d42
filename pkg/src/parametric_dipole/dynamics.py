"""Time-domain models of the dipole oscillator above a grating.

All integrators run in dimensionless time tau = w0 t with a fixed-step
classical RK4 scheme.  ``steps_per_period`` counts steps per 2 pi / w0.

Models
------
simulate_mathieu
    p'' + 2 gamma p' + w0^2 (1 + A cos nu t) p = 0.
simulate_exact_modulation
    The expanded oscillator with the full R(t)^-3 dependence of the image shift.
simulate_expanded
    Constant standoff, coefficients from :func:`effective_coefficients`.
simulate_retarded
    Delay equation with the retarded perfect-conductor image field.
simulate_bloch
    Two-level oscillator coupled to the population difference.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from . import _integrate
from .boundary_fields import effective_coefficients, retarded_coefficients
from .quantities import (
    CONSTANTS,
    ConfigurationError,
    DipoleTransition,
    GratingKinematics,
    MediumPair,
    radiative_rate,
    retardation_time,
)

__all__ = [
    "ModulationModel",
    "Trajectory",
    "BlochState",
    "ExternalField",
    "GrowthFit",
    "InsufficientDataError",
    "simulate_mathieu",
    "simulate_exact_modulation",
    "simulate_expanded",
    "simulate_retarded",
    "simulate_bloch",
    "measure_growth_rate",
    "initial_condition",
]

MIN_STEPS_PER_PERIOD = 64
MIN_DELAY_SAMPLES = 4


class InsufficientDataError(ValueError):
    """Too few oscillation extrema to fit a growth rate."""


@dataclass(frozen=True)
class ModulationModel:
    """Which oscillator model to integrate and with what drive."""

    kind: str
    A: float | None = None
    geometry: GratingKinematics | None = None

    KINDS = ("linearized-mathieu", "exact-inverse-cube", "retarded")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}")
        if self.kind == "linearized-mathieu" and self.A is None:
            raise ConfigurationError("linearized Mathieu model needs A")
        if self.kind != "linearized-mathieu" and self.geometry is None:
            raise ConfigurationError(f"{self.kind} model needs grating geometry")

    @property
    def perturbative(self) -> bool:
        return self.A is None or abs(self.A) < 1


@dataclass(frozen=True)
class Trajectory:
    """Sampled dipole history.

    ``times`` is dimensionless tau = w0 t; ``p_dot_samples`` is the physical
    derivative dp/dt.  ``meta["omega0"]`` converts back to seconds.
    """

    times: np.ndarray
    p_samples: np.ndarray
    p_dot_samples: np.ndarray
    delta_n_samples: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        arrays = [self.times, self.p_samples, self.p_dot_samples]
        if self.delta_n_samples is not None:
            arrays.append(self.delta_n_samples)
        for arr in arrays:
            if len(arr) != n:
                raise ValueError("trajectory arrays must have equal length")
            arr.flags.writeable = False
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    @property
    def omega0(self) -> float:
        return self.meta["omega0"]

    @property
    def seconds(self) -> np.ndarray:
        return self.times / self.omega0

    def columns(self) -> dict[str, np.ndarray]:
        cols = {"tau": self.times, "p": self.p_samples, "p_dot": self.p_dot_samples}
        if self.delta_n_samples is not None:
            cols["delta_n"] = self.delta_n_samples
        return cols

    def to_csv(self, stride: int = 1) -> str:
        from .serialize import fmt

        cols = self.columns()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(list(cols))
        for row in zip(*(c[::stride] for c in cols.values())):
            writer.writerow([fmt(x) for x in row])
        return buf.getvalue()

    def run_record(self) -> dict:
        return {"meta": self.meta, "n_samples": len(self.times)}


@dataclass(frozen=True)
class BlochState:
    """Dipole moment per molecule and its fractional population difference.

    ``delta_n`` and ``delta_n_pump`` are normalised to the molecular density,
    i.e. (n1 - n2)/n, so they lie in [-1, 1].
    """

    p: float
    p_dot: float = 0.0
    delta_n: float = 1.0
    delta_n_pump: float = 1.0

    def __post_init__(self):
        if abs(self.delta_n) > 1 or abs(self.delta_n_pump) > 1:
            raise ValueError("fractional population difference must lie in [-1, 1]")


@dataclass(frozen=True)
class ExternalField:
    """External classical field E_ext(t) in statvolt/cm, t in seconds."""

    waveform: Callable[[float], float]
    description: str = ""


def _grid(periods: float, steps_per_period: int):
    if steps_per_period < MIN_STEPS_PER_PERIOD:
        raise ConfigurationError(f"steps_per_period must be >= {MIN_STEPS_PER_PERIOD}")
    if not periods > 0:
        raise ConfigurationError("horizon must be positive")
    h = 2 * math.pi / steps_per_period
    n = int(round(periods * steps_per_period))
    tau = h * np.arange(n + 1)
    return h, n, tau


def initial_condition(transition: DipoleTransition, seed: int | None = None,
                      random_phase: bool = False) -> tuple[float, float]:
    """Fluctuation-scale start (p0, pdot0): amplitude d, optional seeded phase."""
    amp = transition.zero_point_dipole
    if not random_phase:
        return amp, 0.0
    phase = np.random.default_rng(seed).uniform(0.0, 2 * math.pi)
    return amp * math.cos(phase), -transition.omega0 * amp * math.sin(phase)


def _resolve_ic(ic, transition, seed, random_phase):
    if ic is None:
        return initial_condition(transition, seed, random_phase)
    return float(ic[0]), float(ic[1])


def _trajectory(tau, p, q, omega0, meta, dn=None) -> Trajectory:
    meta = dict(meta, omega0=omega0)
    return Trajectory(tau, p, q * omega0, dn, meta)


def _settings(periods, steps_per_period):
    return {"integrator": "rk4", "periods": periods, "steps_per_period": steps_per_period}


def simulate_mathieu(omega0: float, gamma: float, A: float, nu: float,
                     ic=(1.0, 0.0), periods: float = 100, steps_per_period: int = 256) -> Trajectory:
    """Damped Mathieu oscillator p'' + 2 gamma p' + w0^2 (1 + A cos nu t) p = 0.

    ``ic`` is (p0, dp/dt at 0) in physical units; ``gamma`` and ``nu`` in 1/s.
    """
    if not omega0 > 0:
        raise ConfigurationError("omega0 must be positive")
    if gamma < 0:
        raise ConfigurationError("gamma must be non-negative")
    h, n, tau = _grid(periods, steps_per_period)
    r = nu / omega0
    k_full = 1.0 + A * np.cos(r * tau)
    k_half = 1.0 + A * np.cos(r * (tau[:-1] + 0.5 * h))
    p, q = _integrate.linear_oscillator(k_full, k_half, 2 * gamma / omega0, 1.0,
                                        ic[0], ic[1] / omega0, h)
    meta = {"model": "linearized-mathieu", "gamma": gamma, "A": A, "nu": nu,
            "ic": list(ic), "seed": None, **_settings(periods, steps_per_period)}
    return _trajectory(tau, p, q, omega0, meta)


def _shift_profile(grating: GratingKinematics, omega0: float, tau):
    """(R(t)/R0)^-3 on the dimensionless grid."""
    return (1.0 + grating.a * np.cos(grating.nu / omega0 * tau)) ** -3


def simulate_exact_modulation(transition: DipoleTransition, grating: GratingKinematics,
                              medium: MediumPair, ic=None, periods: float = 100,
                              steps_per_period: int = 256, seed: int | None = None,
                              random_phase: bool = False) -> Trajectory:
    """p'' + 2 gamma p' + (w0^2 - S0 (1 + a cos nu t)^-3) p = 0.

    S0 and the damping are the expanded near-zone coefficients at R0 (for a
    perpendicular dipole over a conductor S0 = e^2/(4 m R0^3 eps1) and the
    damping is 2 gamma).  No linearisation in ``a``.
    """
    if grating.a >= 1:
        raise ValueError("corrugation amplitude must be < 1")
    w0 = transition.omega0
    eff = effective_coefficients(transition, grating.R0, medium)
    s0 = eff.freq_shift_sq / w0**2
    h, n, tau = _grid(periods, steps_per_period)
    k_full = 1.0 - s0 * _shift_profile(grating, w0, tau)
    k_half = 1.0 - s0 * _shift_profile(grating, w0, tau[:-1] + 0.5 * h)
    p0, q0 = _resolve_ic(ic, transition, seed, random_phase)
    p, q = _integrate.linear_oscillator(k_full, k_half, eff.damping_rate / w0, 1.0, p0, q0 / w0, h)
    meta = {"model": "exact-inverse-cube", "R0": grating.R0, "a": grating.a, "nu": grating.nu,
            "freq_shift_sq": eff.freq_shift_sq, "damping_rate": eff.damping_rate,
            "ic": [p0, q0], "seed": seed, **_settings(periods, steps_per_period)}
    return _trajectory(tau, p, q, w0, meta)


def simulate_expanded(transition: DipoleTransition, R: float, medium: MediumPair, ic=None,
                      periods: float = 100, steps_per_period: int = 256,
                      mass_renormalization: bool = True) -> Trajectory:
    """Fixed-standoff oscillator with the expanded reaction-field coefficients.

    With ``mass_renormalization=False`` this is the constant-shift equation
    p'' + 2 gamma p' + (w0^2 - e^2/(4 m R^3 eps1)) p = 0 exactly; with it,
    the O((R/lambda)^2) effective-mass correction from the delayed field is
    kept as well.
    """
    w0 = transition.omega0
    eff = effective_coefficients(transition, R, medium)
    s0 = eff.freq_shift_sq / w0**2
    mass = eff.mass_factor if mass_renormalization else 1.0
    h, n, tau = _grid(periods, steps_per_period)
    # same arithmetic as simulate_exact_modulation with a = 0
    k_full = 1.0 - s0 * np.ones_like(tau)
    k_half = 1.0 - s0 * np.ones(n)
    p0, q0 = _resolve_ic(ic, transition, None, False)
    p, q = _integrate.linear_oscillator(k_full, k_half, eff.damping_rate / w0, mass, p0, q0 / w0, h)
    meta = {"model": "expanded", "R": R, "mass_factor": mass, "freq_shift_sq": eff.freq_shift_sq,
            "damping_rate": eff.damping_rate, "ic": [p0, q0], "seed": None,
            **_settings(periods, steps_per_period)}
    return _trajectory(tau, p, q, w0, meta)


def _retarded_tables(transition, grating, medium, tau):
    w0 = transition.omega0
    kappa = transition.coupling
    R = grating.standoff(tau / w0)
    c0, c1, c2 = retarded_coefficients(np.asarray(R), medium)
    theta = w0 * retardation_time(R, medium)
    return np.stack([kappa * c0 / w0**2, kappa * c1 / w0, kappa * c2 * np.ones_like(tau), theta])


def simulate_retarded(transition: DipoleTransition, grating: GratingKinematics, medium: MediumPair,
                      ic=None, periods: float = 100, steps_per_period: int = 256,
                      history: Callable | None = None, seed: int | None = None,
                      random_phase: bool = False) -> Trajectory:
    """Delay-equation model with the retarded image field of a perfect conductor.

        pddot + gamma pdot + w0^2 p = (e^2/m) E_b(t),

    where E_b is built from p, pdot, pddot at t - t1(t), t1 = 2 R(t) sqrt(eps1)/c.
    The free-space reaction term 2 sqrt(eps1) p'''/(3 c^3) enters as its
    harmonic equivalent gamma pdot; the boundary's share of the radiative
    damping comes out of the delay itself.

    ``history(t)`` (t < 0, seconds) returns (p, pdot, pddot); by default the
    initial state is extended as a constant.
    """
    if not medium.perfect_conductor:
        raise ConfigurationError("retarded model requires a perfect-conductor surface")
    w0 = transition.omega0
    h, n, tau = _grid(periods, steps_per_period)
    tau_half = tau[:-1] + 0.5 * h
    full = _retarded_tables(transition, grating, medium, tau)
    half = _retarded_tables(transition, grating, medium, tau_half)
    min_delay = min(full[3].min(), half[3].min())
    if min_delay < MIN_DELAY_SAMPLES * h:
        need = int(math.ceil(MIN_DELAY_SAMPLES * 2 * math.pi / min_delay))
        raise ConfigurationError(
            f"retardation w0 t1 = {min_delay:.3g} is resolved by fewer than {MIN_DELAY_SAMPLES} "
            f"steps; use steps_per_period >= {need}"
        )
    p0, q0 = _resolve_ic(ic, transition, seed, random_phase)
    if history is None:
        hist_state = (p0, q0 / w0, 0.0)

        def hist(_tau):
            return hist_state
    else:
        def hist(t_):
            pv, dv, av = history(t_ / w0)
            return pv, dv / w0, av / w0**2
    gamma = radiative_rate(transition, medium)
    p, q = _integrate.delayed_oscillator(full, half, gamma / w0, p0, q0 / w0, h, hist)
    meta = {"model": "retarded", "R0": grating.R0, "a": grating.a, "nu": grating.nu,
            "free_damping": gamma, "orientation": medium.orientation.value,
            "ic": [p0, q0], "seed": seed, "history": "constant" if history is None else "callable",
            **_settings(periods, steps_per_period)}
    return _trajectory(tau, p, q, w0, meta)


def simulate_bloch(transition: DipoleTransition, grating: GratingKinematics, medium: MediumPair,
                   pump: float | None = None, ext: ExternalField | None = None,
                   ic: BlochState | None = None, periods: float = 100,
                   steps_per_period: int = 256, relaxation_rate: float | None = None,
                   freeze_delta_n: bool = False) -> Trajectory:
    """Modified Bloch equations for a two-level molecule above the grating.

        pddot + 2 gamma pdot + (w0^2 - d^2 w0 dn / (2 hbar R(t)^3 eps1)) p = 2 dn d^2 w0 E_ext / hbar
        d(dn)/dt + gamma_r (dn - dn_p) = -(2 / hbar w0) E_ext pdot

    ``dn`` is the fractional population difference.  ``gamma_r`` defaults to
    the radiative rate; pass ``relaxation_rate`` to model a faster
    phenomenological relaxation.  ``freeze_delta_n`` holds dn fixed.
    """
    if transition.d is None:
        raise ConfigurationError("Bloch equations need a dipole matrix element d")
    w0 = transition.omega0
    hbar = CONSTANTS.hbar
    if ic is None:
        ic = BlochState(p=transition.d)
    pump = ic.delta_n_pump if pump is None else pump
    gamma = radiative_rate(DipoleTransition.two_level(w0, transition.d), medium)
    relax = gamma if relaxation_rate is None else relaxation_rate
    h, n, tau = _grid(periods, steps_per_period)
    # the two-level shift at dn = 1 equals the classical one through e^2/m = 2 w0 d^2/hbar
    eff = effective_coefficients(DipoleTransition.two_level(w0, transition.d), grating.R0, medium)
    s0 = eff.freq_shift_sq / w0**2
    shift_full = s0 * _shift_profile(grating, w0, tau)
    shift_half = s0 * _shift_profile(grating, w0, tau[:-1] + 0.5 * h)
    drive = None
    if ext is not None:
        fp = 2 * transition.d**2 / (hbar * w0)
        fn = 2 / (hbar * w0)

        def drive(tau_):
            e = ext.waveform(tau_ / w0)
            return fp * e, fn * e
    p, q, dn = _integrate.bloch_system(shift_full, shift_half, 2 * gamma / w0, relax / w0, pump,
                                       drive, ic.p, ic.p_dot / w0, ic.delta_n, h, freeze_delta_n)
    meta = {"model": "bloch", "R0": grating.R0, "a": grating.a, "nu": grating.nu,
            "gamma": gamma, "relaxation_rate": relax, "delta_n_pump": pump,
            "external_field": ext.description if ext is not None else None,
            "freeze_delta_n": freeze_delta_n, "ic": [ic.p, ic.p_dot, ic.delta_n], "seed": None,
            **_settings(periods, steps_per_period)}
    return _trajectory(tau, p, q, w0, meta, dn)


@dataclass(frozen=True)
class GrowthFit:
    omega_pp: float  # 1/s, negative for decay
    r_squared: float
    n_extrema: int
    low_confidence: bool


def _extrema(tau, p, q):
    """Times and |p| of the extrema of p, refined on the cubic Hermite interpolant."""
    h = np.diff(tau)
    q0, q1 = q[:-1], q[1:]
    idx = np.nonzero((q0 > 0) & (q1 <= 0) | (q0 < 0) & (q1 >= 0))[0]
    times, amps = [], []
    for i in idx:
        hi = h[i]
        y0, y1 = p[i], p[i + 1]
        d0, d1 = q[i] * hi, q[i + 1] * hi
        # derivative of the Hermite cubic in s, a quadratic: A s^2 + B s + C
        A = 3 * (2 * y0 + d0 - 2 * y1 + d1)
        B = 2 * (-3 * y0 - 2 * d0 + 3 * y1 - d1)
        C = d0
        roots = np.roots([A, B, C]) if abs(A) > 0 else np.array([-C / B])
        roots = roots[np.isreal(roots)].real
        roots = roots[(roots >= -1e-9) & (roots <= 1 + 1e-9)]
        s = float(roots[0]) if len(roots) else float(q0[i] / (q0[i] - q1[i]))
        s2, s3 = s * s, s * s * s
        val = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * d1
        times.append(tau[i] + s * hi)
        amps.append(abs(val))
    return np.array(times), np.array(amps)


def measure_growth_rate(traj: Trajectory, fit_window: float = 0.8, min_extrema: int = 10,
                        r2_threshold: float = 0.9) -> GrowthFit:
    """Exponential growth rate of the oscillation envelope.

    Fits log|p| at the extrema of p against time over the trailing
    ``fit_window`` fraction of the run.  Returns the rate in 1/s.
    """
    if not 0 < fit_window <= 1:
        raise ValueError("fit_window must be in (0, 1]")
    tau = traj.times
    w0 = traj.omega0
    t_ext, a_ext = _extrema(tau, traj.p_samples, traj.p_dot_samples / w0)
    start = tau[-1] - fit_window * (tau[-1] - tau[0])
    keep = (t_ext >= start) & (a_ext > 0)
    t_ext, a_ext = t_ext[keep], a_ext[keep]
    if len(t_ext) < min_extrema:
        raise InsufficientDataError(f"found {len(t_ext)} extrema in the fit window, need {min_extrema}")
    fit = stats.linregress(t_ext, np.log(a_ext))
    r2 = float(fit.rvalue**2) if np.isfinite(fit.rvalue) else 0.0
    return GrowthFit(omega_pp=float(fit.slope) * w0, r_squared=r2, n_extrema=len(t_ext),
                     low_confidence=r2 < r2_threshold)
