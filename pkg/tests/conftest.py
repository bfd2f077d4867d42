import math

import pytest

from parametric_dipole.quantities import CONSTANTS, DipoleTransition, GratingKinematics, MediumPair

W0 = 1e11
LAMBDA0 = 2 * math.pi * CONSTANTS.c / W0


def strong_oscillator(s: float, R_over_lambda: float):
    """Classical oscillator whose image shift is ``s`` w0^2 at R = R_over_lambda * lambda0.

    Physical couplings give shifts and damping far too small to resolve in a
    few thousand periods; this keeps the ratios between them intact.
    """
    R = R_over_lambda * LAMBDA0
    return DipoleTransition.classical_with_coupling(W0, s * 4 * R**3 * W0**2), R


def shifted_nu(transition, R, medium, order=1, delta_n=1.0):
    from parametric_dipole.boundary_fields import effective_coefficients

    shift = effective_coefficients(transition, R, medium).freq_shift_sq * delta_n
    return 2 * math.sqrt(W0**2 - shift) / order


def grating_for_nu(R0, a, nu, v=1e5):
    return GratingKinematics(R0, a, 2 * math.pi * v / nu, v)


@pytest.fixture
def perp():
    return MediumPair()


CRITERIA = {
    1: "threshold equivalence (Floquet bisection vs 4 gamma / w0)",
    2: "growth-rate triangle (time domain, Floquet, w0 A / 4 - gamma)",
    3: "expansion validity (retarded vs expanded trajectory)",
    4: "reproduction of the quoted numbers",
    5: "structural invariants",
    6: "two-level consistency (Bloch growth and relaxation)",
    7: "reproducibility (byte-identical outputs, worker independence)",
}
_outcomes: dict[int, list[bool]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for key in report.keywords:
        if key.startswith("criterion_"):
            _outcomes.setdefault(int(key.split("_")[1]), []).append(report.passed)


def pytest_collection_modifyitems(items):
    # expose the criterion number as a keyword the report hook can see
    for item in items:
        for mark in item.iter_markers("criterion"):
            item.keywords[f"criterion_{mark.args[0]}"] = True


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {title} ({len(results or [])} checks)")
