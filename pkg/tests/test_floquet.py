import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import mathieu_a, mathieu_b

from parametric_dipole.floquet import (
    MIN_STEPS,
    exponent_curve,
    exponents_batch,
    floquet_exponent,
    monodromy,
    monodromy_batch,
    stability_map,
    threshold_amplitude,
)

W0 = 1e11


def test_free_oscillator_is_a_rotation():
    m = monodromy(W0, 0.0, 0.0, 2 * W0)
    v = floquet_exponent(m)
    T = m.period
    mus = sorted(v.multipliers, key=lambda z: z.imag)
    expected = sorted([np.exp(1j * W0 * T), np.exp(-1j * W0 * T)], key=lambda z: z.imag)
    assert np.allclose(mus, expected, atol=1e-9)
    assert all(abs(abs(mu) - 1) < 1e-10 for mu in v.multipliers)


def test_damped_free_oscillator_multipliers():
    gamma = 1e-2 * W0
    m = monodromy(W0, gamma, 0.0, 1.7 * W0)
    for mu in floquet_exponent(m).multipliers:
        assert abs(mu) == pytest.approx(math.exp(-gamma * m.period), rel=1e-9)


def test_determinant_is_abel_identity_at_random_points():
    rng = np.random.default_rng(20240611)
    g = rng.uniform(0, 0.05, 100)
    A = rng.uniform(0, 1, 100)
    r = rng.uniform(0.3, 3, 100)
    m = monodromy_batch(g, A, r)
    det = np.linalg.det(m)
    expected = np.exp(-2 * g * 2 * np.pi / r)
    assert np.max(np.abs(det / expected - 1)) < 1e-8


def test_batch_agrees_with_single():
    m = monodromy(W0, 1e-3 * W0, 0.2, 1.9 * W0).matrix
    b = monodromy_batch([1e-3, 0.0], [0.2, 0.1], [1.9, 1.0])
    assert b.shape == (2, 2, 2)
    assert np.array_equal(b[0], m)


def test_steps_floor():
    with pytest.raises(ValueError):
        monodromy_batch(0.0, 0.1, 2.0, MIN_STEPS - 1)
    with pytest.raises(ValueError):
        monodromy(W0, 0.0, 0.1, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 0.05), st.floats(0, 0.5), st.floats(0.5, 2.5))
def test_damping_factors_out_exactly(g, A, r):
    # p = exp(-gamma t) q turns the damped equation into an undamped one with
    # w^2 = w0^2 - gamma^2 and drive A w0^2 / w^2
    damped = exponents_batch(g, A, r)
    scale = 1 - g * g
    undamped = exponents_batch(0.0, A / scale, r / math.sqrt(scale)) * math.sqrt(scale)
    assert damped == pytest.approx(undamped - g, abs=1e-9)


def test_first_tongue_exponent():
    v = floquet_exponent(monodromy(W0, 1e-3 * W0, 1e-2, 2 * W0))
    assert v.exponent == pytest.approx(1.5e-3 * W0, rel=0.05)
    assert not v.stable


def test_zero_drive_exponent_is_minus_gamma():
    gamma = 3e-3 * W0
    assert floquet_exponent(monodromy(W0, gamma, 0.0, 2 * W0)).exponent == pytest.approx(-gamma, rel=1e-9)


@pytest.mark.parametrize("g", [1e-2, 1e-3, 1e-4])
def test_exponent_vanishes_at_formula_threshold(g):
    v = floquet_exponent(monodromy(W0, g * W0, 4 * g, 2 * W0))
    assert abs(v.exponent) <= 0.05 * g * W0


def test_threshold_bisection():
    res = threshold_amplitude(W0, 1e-3 * W0, 2 * W0)
    assert res.A_th == pytest.approx(4e-3, rel=0.05)
    doubled = threshold_amplitude(W0, 2e-3 * W0, 2 * W0)
    assert doubled.A_th / res.A_th == pytest.approx(2.0, rel=0.05)
    second = threshold_amplitude(W0, 1e-3 * W0, W0)
    assert second.A_th > res.A_th


def test_threshold_sentinel_and_guard():
    far = threshold_amplitude(W0, 5e-2 * W0, 5.0 * W0, A_max=0.2, scan_points=16)
    assert far.A_th is None and far.stable_up_to_one
    with pytest.raises(ValueError):
        threshold_amplitude(W0, 0.0, 2 * W0)


def test_stability_against_mathieu_characteristic_values():
    # y'' + (a - 2 q cos 2z) y = 0 with z = r tau / 2: a = 4/r^2, q = 2A/r^2 (sign irrelevant)
    A = 0.2
    r = np.linspace(1.8, 2.2, 81)
    ex = exponents_batch(0.0, A, r)
    a = 4 / r**2
    q = 2 * A / r**2
    lo, hi = mathieu_b(1, q), mathieu_a(1, q)
    inside = (a > lo) & (a < hi)
    margin = np.minimum(np.abs(a - lo), np.abs(a - hi)) > 2e-3
    assert np.all((ex[margin] > 1e-6) == inside[margin])
    assert inside.sum() > 10


@pytest.fixture(scope="module")
def undamped_map():
    return stability_map(W0, 0.0, (0.5, 2.5), (0.0, 0.5), grid=(81, 41))


def test_undamped_tongue_tips(undamped_map):
    tips = undamped_map.tongue_tips()
    cell = undamped_map.nu_axis[1] - undamped_map.nu_axis[0]
    for n in (1, 2, 3):
        near = [t for t in tips if abs(t["nu_ratio"] - 2 / n) <= cell]
        assert near, f"no tongue tip near 2/{n}"
        assert near[0]["order"] == n
    # the first two tongues reach the lowest nonzero row of the map; the third
    # is O(A^3) wide, narrower than a nu cell, so it is resolved by a fine scan
    for t in tips:
        if t["order"] in (1, 2):
            assert t["A_min"] == undamped_map.A_axis[1]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_undamped_tongues_reach_small_A(n):
    r = np.linspace(2 / n - 0.02, 2 / n + 0.02, 4001)
    ex = exponents_batch(0.0, 0.05, r)
    assert ex.max() > 0
    assert abs(r[ex.argmax()] - 2 / n) < 0.025


def test_damped_tips_lift_off():
    smap = stability_map(W0, 5e-3 * W0, (0.9, 2.1), (0.0, 0.2), grid=(25, 41))
    tips = smap.tongue_tips(tol=0.0)
    assert tips
    for t in tips:
        assert t["A_min"] > 0
    first = [t for t in tips if t["order"] == 1][0]
    assert first["A_min"] >= 4 * 5e-3 - (smap.A_axis[1] - smap.A_axis[0])


def test_map_with_no_drive_is_flat():
    gamma = 2e-3 * W0
    smap = stability_map(W0, gamma, (1.0, 3.0), (0.0, 0.0), grid=(8, 8))
    assert np.allclose(smap.exponents, -gamma / W0, rtol=1e-9)
    lines = smap.to_csv().split("\r\n")
    assert lines[0] == "nu_ratio,A,exponent"
    assert len([l for l in lines if l]) == 65
    assert all(float(l.split(",")[2]) == pytest.approx(-gamma / W0, rel=1e-9) for l in lines[1:] if l)


def test_map_contour_agrees_with_bisection():
    gamma = 1e-3 * W0
    smap = stability_map(W0, gamma, (1.99, 2.01), (0.0, 0.01), grid=(9, 41))
    centre = smap.threshold_contour[4]
    assert centre[0] == pytest.approx(2.0)
    th = threshold_amplitude(W0, gamma, 2 * W0).A_th
    assert abs(centre[1] - th) <= smap.A_axis[1] - smap.A_axis[0]


def test_map_is_continuous_in_A(undamped_map):
    # an eigenvalue-branch glitch would put a midpoint far outside its neighbours
    ex = undamped_map.exponents
    assert np.all(np.isfinite(ex))
    A = undamped_map.A_axis
    for inu in range(0, len(undamped_map.nu_axis), 8):
        nu = undamped_map.nu_axis[inu]
        mid = exponents_batch(0.0, 0.5 * (A[:-1] + A[1:]), nu)
        lo = np.minimum(ex[:-1, inu], ex[1:, inu])
        hi = np.maximum(ex[:-1, inu], ex[1:, inu])
        spread = hi - lo
        assert np.all(mid >= lo - spread - 1e-9)
        assert np.all(mid <= hi + spread + 1e-9)


def test_map_outputs_are_deterministic(undamped_map):
    again = stability_map(W0, 0.0, (0.5, 2.5), (0.0, 0.5), grid=(81, 41))
    assert undamped_map.to_csv() == again.to_csv()
    svg = again.to_svg()
    assert svg == undamped_map.to_svg()
    assert svg.startswith("<svg") and "<script" not in svg
    rec = again.record()
    assert rec["tongue_tips"] == undamped_map.record()["tongue_tips"]


def test_grid_minimum():
    with pytest.raises(ValueError):
        stability_map(W0, 0.0, (1, 3), (0, 1), grid=(4, 8))


def test_exponent_curve_reports_linear_breakdown():
    gamma = 1e-3 * W0
    A = np.linspace(0.01, 0.6, 30)
    # at the tongue centre the linear law holds to a few percent even at large A
    ex, dev, first_bad = exponent_curve(W0, gamma, 2 * W0, A)
    assert first_bad is None
    assert dev[0] < 0.02
    # off centre the detuning spoils it at small A, where the tongue is narrow
    ex, dev, first_bad = exponent_curve(W0, gamma, 1.99 * W0, A)
    assert first_bad is not None
    assert np.all(dev[A < first_bad] <= 0.1)
    assert dev[-1] < 0.1
