"""Closed-form drive amplitude, threshold, growth and power estimates.

These are the order-of-magnitude formulas used to judge whether a given
molecule/grating/beam combination self-excites, and how much it would
radiate if it did.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .boundary_fields import effective_coefficients
from .quantities import (
    CONSTANTS,
    ConfigurationError,
    DipoleTransition,
    GratingKinematics,
    MediumPair,
    ResonanceSpec,
    TransitionMode,
    radiative_rate,
    retardation_phase,
)

__all__ = [
    "ParametricDrive",
    "GrowthEstimate",
    "BeamRadiationEstimate",
    "Scenario",
    "drive_amplitude",
    "threshold_lhs",
    "growth_rate",
    "radiated_power",
    "scenario_report",
    "report_text",
    "excitation_length",
]

ERG_PER_S_TO_W = 1e-7


@dataclass(frozen=True)
class ParametricDrive:
    A: float
    source: str  # "classical" or "two-level"
    delta_n: float | None = None


@dataclass(frozen=True)
class GrowthEstimate:
    omega_pp: float  # raw growth rate w0 A / 4, 1/s
    net_growth: float  # omega_pp minus the amplitude damping, 1/s
    excitation_length: float  # v / omega_pp, cm (inf if no growth)
    above_threshold: bool


@dataclass(frozen=True)
class BeamRadiationEstimate:
    n: float
    N_total: float
    N_bunch: float
    W1: float  # erg/s
    P_incoherent: float  # erg/s
    P_coherent_bunch: float  # erg/s
    plate: tuple[float, float]

    @property
    def W1_watt(self) -> float:
        return self.W1 * ERG_PER_S_TO_W

    @property
    def P_incoherent_watt(self) -> float:
        return self.P_incoherent * ERG_PER_S_TO_W

    @property
    def P_coherent_bunch_watt(self) -> float:
        return self.P_coherent_bunch * ERG_PER_S_TO_W


def _shift_per_R3(transition: DipoleTransition, medium: MediumPair) -> float:
    """Mean image shift times R^3 (the 1/R^3 coefficient)."""
    return effective_coefficients(transition, 1.0, medium).freq_shift_sq


def drive_amplitude(transition: DipoleTransition, grating: GratingKinematics, medium: MediumPair,
                    delta_n: float | None = None) -> ParametricDrive:
    """Mathieu amplitude A from linearising the R(t)^-3 image shift in ``a``.

    Classical:  A = 3 e^2 a / (4 m R0^3 w0^2 eps1)
    Two-level:  A = 3 d^2 a dn / (2 hbar R0^3 w0 eps1)

    A parallel dipole has half the perpendicular shift and hence half A.
    ``delta_n`` is only used for a two-level transition (default 1).
    """
    w0 = transition.omega0
    shift = _shift_per_R3(transition, medium) / grating.R0**3
    A = 3 * grating.a * shift / w0**2
    if transition.mode is TransitionMode.TWO_LEVEL:
        dn = 1.0 if delta_n is None else delta_n
        return ParametricDrive(A * dn, "two-level", dn)
    return ParametricDrive(A, "classical")


def threshold_lhs(transition: DipoleTransition, grating: GratingKinematics, medium: MediumPair) -> float:
    """9 a (lambda0/R0)^3 / (256 pi^3 eps1^(3/2)); above 1 the N = 1 resonance is unstable."""
    ratio = transition.wavelength / grating.R0
    return 9 * grating.a * ratio**3 / (256 * math.pi**3 * medium.eps1**1.5)


def _damping(transition: DipoleTransition, grating: GratingKinematics, medium: MediumPair) -> float:
    """Amplitude decay rate: half the pdot coefficient (gamma for the perpendicular case)."""
    return effective_coefficients(transition, grating.R0, medium).damping_rate / 2


def growth_rate(transition: DipoleTransition, grating: GratingKinematics, medium: MediumPair,
                delta_n: float | None = None) -> GrowthEstimate:
    """Parametric growth rate w0 A / 4 well above threshold.

    For a two-level transition this is 3 d^2 a dn / (8 hbar R0^3 eps1); the
    classical form is 3 e^2 a / (16 m w0 R0^3 eps1).  ``net_growth``
    subtracts the amplitude damping, which is what a simulation would show.
    """
    drive = drive_amplitude(transition, grating, medium, delta_n)
    omega_pp = transition.omega0 * drive.A / 4
    net = omega_pp - _damping(transition, grating, medium)
    length = grating.v / omega_pp if omega_pp > 0 else math.inf
    return GrowthEstimate(omega_pp, net, length, net > 0)


def excitation_length(v: float, omega_pp: float) -> float:
    return v / omega_pp if omega_pp > 0 else math.inf


def radiated_power(transition: DipoleTransition, n: float, plate: tuple[float, float], R0: float,
                   wavelength: float | None = None, medium: MediumPair | None = None) -> BeamRadiationEstimate:
    """Incoherent and coherent-bunch emission of the excited beam.

    N_total counts molecules within one standoff layer R0 over the plate;
    a coherent bunch holds n lambda^2 R0 molecules and radiates N_bunch^2 W1
    with W1 = gamma hbar w0.  ``wavelength`` defaults to lambda0.
    """
    width, length = plate
    if min(width, length, R0) <= 0 or n < 0:
        raise ValueError("plate, R0 must be positive and n non-negative")
    medium = medium or MediumPair()
    lam = transition.wavelength if wavelength is None else wavelength
    gamma = radiative_rate(transition, medium)
    W1 = gamma * CONSTANTS.hbar * transition.omega0
    N_total = n * width * length * R0
    N_bunch = n * lam**2 * R0
    return BeamRadiationEstimate(n, N_total, N_bunch, W1, N_total * W1, N_bunch**2 * W1, (width, length))


@dataclass(frozen=True)
class Scenario:
    """Everything needed for a feasibility report."""

    transition: DipoleTransition
    grating: GratingKinematics
    medium: MediumPair = field(default_factory=MediumPair)
    resonance: ResonanceSpec = field(default_factory=ResonanceSpec)
    beam_density: float = 0.0
    plate: tuple[float, float] = (1.0, 10.0)
    delta_n: float | None = None
    bunch_wavelength: float | None = None


def _field(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"{name}: {exc}") from exc


def scenario_report(s: Scenario) -> dict:
    """Combine resonance, validity, threshold, growth and power estimates.

    Component failures are re-raised as ConfigurationError prefixed with the
    report field they belong to.
    """
    t, g, m = s.transition, s.grating, s.medium
    w0 = t.omega0
    nu = g.nu
    gamma = _field("radiative_rate", radiative_rate, t, m)
    eff = _field("effective_coefficients", effective_coefficients, t, g.R0, m)
    dn = s.delta_n if t.mode is TransitionMode.TWO_LEVEL else None
    drive = _field("drive_amplitude", drive_amplitude, t, g, m, dn)
    lhs = _field("threshold_lhs", threshold_lhs, t, g, m)
    growth = _field("growth_rate", growth_rate, t, g, m, dn)
    power = _field("radiated_power", radiated_power, t, s.beam_density, s.plate, g.R0,
                   s.bunch_wavelength, m)
    shift = eff.freq_shift_sq * (1.0 if dn is None else dn)
    w_eff = math.sqrt(max(w0**2 - shift, 0.0))
    target = s.resonance.target_nu(w0)
    no_drive = nu == 0 or g.a == 0
    if no_drive:
        verdict = "no parametric drive"
    elif growth.above_threshold:
        verdict = "unstable"
    else:
        verdict = "stable"
    report = {
        "verdict": verdict,
        "resonance": {
            "order": s.resonance.order,
            "nu": nu,
            "target_nu": target,
            "resonant": s.resonance.is_resonant(nu, w0),
            "nu_over_omega0": nu / w0,
            # the mean image shift moves the oscillator; compare the detuning
            # with the instability half-width w0 A / 2 in nu
            "shifted_omega": w_eff,
            "shifted_target_nu": 2 * w_eff / s.resonance.order,
            "detuning_from_shifted": nu - 2 * w_eff / s.resonance.order,
            "tongue_half_width": w0 * drive.A / 2,
            "inside_tongue": abs(nu - 2 * w_eff / s.resonance.order) < w0 * drive.A / 2,
        },
        "validity": {**g.validity(t, m), "retardation_phase": retardation_phase(g.R0, t, m)},
        "warnings": g.warnings(t, m) + ([] if no_drive or abs(nu - 2 * w_eff / s.resonance.order)
                                           < w0 * drive.A / 2 else
                                           ["the mean image shift detunes nu outside the instability tongue; "
                                            "tune to shifted_target_nu"]),
        "transition": {"omega0": w0, "wavelength": t.wavelength, "mode": t.mode.value,
                       "coupling_e2_over_m": t.coupling, "gamma": gamma},
        "drive": asdict(drive),
        "threshold": {"lhs": lhs, "unstable_by_lhs": lhs > 1, "A_over_threshold": drive.A / (4 * gamma / w0)
                      if gamma > 0 else math.inf},
        "growth": {
            "omega_pp": growth.omega_pp,
            "net_growth": growth.net_growth,
            "amplitude_damping": growth.omega_pp - growth.net_growth,
            "excitation_length_cm": growth.excitation_length,
            "plate_length_cm": s.plate[1],
            "excitation_length_over_plate": growth.excitation_length / s.plate[1],
        },
        "power": {
            "n_per_cm3": power.n,
            "N_total": power.N_total,
            "N_bunch": power.N_bunch,
            "W1_erg_per_s": power.W1,
            "W1_W": power.W1_watt,
            "P_incoherent_erg_per_s": power.P_incoherent,
            "P_incoherent_W": power.P_incoherent_watt,
            "P_coherent_bunch_erg_per_s": power.P_coherent_bunch,
            "P_coherent_bunch_W": power.P_coherent_bunch_watt,
        },
    }
    return report


def report_text(report: dict) -> str:
    """Human-readable rendering of :func:`scenario_report`."""
    r = report
    lines = [
        f"verdict: {r['verdict']}",
        f"transition: w0 = {r['transition']['omega0']:.4g} rad/s, lambda0 = {r['transition']['wavelength']:.4g} cm, "
        f"gamma = {r['transition']['gamma']:.4g} 1/s",
        f"resonance N = {r['resonance']['order']}: nu/w0 = {r['resonance']['nu_over_omega0']:.6g} "
        f"({'on' if r['resonance']['resonant'] else 'off'} 2 w0/N)",
        f"drive amplitude A = {r['drive']['A']:.4g} ({r['drive']['source']})",
        f"threshold lhs = {r['threshold']['lhs']:.4g} (> 1 is unstable)",
        f"growth rate = {r['growth']['omega_pp']:.4g} 1/s, net = {r['growth']['net_growth']:.4g} 1/s",
        f"excitation length = {r['growth']['excitation_length_cm']:.4g} cm "
        f"(plate {r['growth']['plate_length_cm']:.4g} cm)",
        f"molecules over plate = {r['power']['N_total']:.3g}, per bunch = {r['power']['N_bunch']:.3g}",
        f"incoherent power = {r['power']['P_incoherent_W']:.3g} W, "
        f"coherent bunch power = {r['power']['P_coherent_bunch_W']:.3g} W",
    ]
    lines += [f"warning: {w}" for w in r["warnings"]]
    return "\n".join(lines) + "\n"
