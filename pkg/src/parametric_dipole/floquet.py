"""Floquet stability of the damped Mathieu oscillator.

The monodromy matrix maps (p, pdot/w0) over one modulation period
T = 2 pi / nu.  Everything is computed in batches: a stability map is one
vectorised RK4 sweep over all grid cells at once.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import _integrate
from .serialize import fmt, heatmap_svg

__all__ = [
    "Monodromy",
    "StabilityVerdict",
    "StabilityMap",
    "ThresholdResult",
    "monodromy",
    "monodromy_batch",
    "floquet_exponent",
    "exponents_batch",
    "threshold_amplitude",
    "stability_map",
    "exponent_curve",
]

DEFAULT_STEPS = 1024
MIN_STEPS = 256


@dataclass(frozen=True)
class Monodromy:
    matrix: np.ndarray
    omega0: float
    gamma: float
    A: float
    nu: float

    @property
    def period(self) -> float:
        return 2 * math.pi / self.nu

    @property
    def expected_det(self) -> float:
        return math.exp(-2 * self.gamma * self.period)


@dataclass(frozen=True)
class StabilityVerdict:
    exponent: float  # 1/s
    multipliers: tuple[complex, complex]
    stable: bool


def monodromy_batch(gamma_ratio, A, nu_ratio, steps_per_period: int = DEFAULT_STEPS) -> np.ndarray:
    """Monodromy matrices for broadcast arrays of gamma/w0, A and nu/w0.

    Returns an array of shape ``batch + (2, 2)``.
    """
    if steps_per_period < MIN_STEPS:
        raise ValueError(f"steps_per_period must be >= {MIN_STEPS}")
    gamma_ratio, A, nu_ratio = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (gamma_ratio, A, nu_ratio)))
    if np.any(nu_ratio <= 0):
        raise ValueError("nu must be positive")
    h = 2 * math.pi / nu_ratio / steps_per_period
    # the two fundamental solutions ride along a leading axis of length 2
    y0 = (np.stack([np.ones_like(A), np.zeros_like(A)]), np.stack([np.zeros_like(A), np.ones_like(A)]))
    final = _integrate.linear_oscillator_batch(
        lambda tau: 1.0 + A * np.cos(nu_ratio * tau), 2 * gamma_ratio, steps_per_period, h, y0
    )
    # final[state, column, ...] -> [..., state, column]
    return np.moveaxis(final, (0, 1), (-2, -1))


def monodromy(omega0: float, gamma: float, A: float, nu: float,
              steps_per_period: int = DEFAULT_STEPS) -> Monodromy:
    """One-period propagator of p'' + 2 gamma p' + w0^2 (1 + A cos nu t) p = 0."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    m = monodromy_batch(gamma / omega0, A, nu / omega0, steps_per_period)
    return Monodromy(np.array(m), omega0, gamma, A, nu)


def _multipliers(m: np.ndarray):
    tr = m[..., 0, 0] + m[..., 1, 1]
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    disc = np.sqrt((tr * tr - 4 * det).astype(complex))
    return (tr + disc) / 2, (tr - disc) / 2


def exponents_batch(gamma_ratio, A, nu_ratio, steps_per_period: int = DEFAULT_STEPS) -> np.ndarray:
    """Largest Floquet exponent in units of w0, max ln|mu| * nu / (2 pi)."""
    m = monodromy_batch(gamma_ratio, A, nu_ratio, steps_per_period)
    mu1, mu2 = _multipliers(m)
    with np.errstate(divide="ignore"):
        lmax = np.maximum(np.log(np.abs(mu1)), np.log(np.abs(mu2)))
    return lmax * np.broadcast_to(nu_ratio, lmax.shape) / (2 * math.pi)


def floquet_exponent(m: Monodromy) -> StabilityVerdict:
    mu1, mu2 = _multipliers(m.matrix)
    mu1, mu2 = complex(mu1), complex(mu2)
    exponent = max(math.log(abs(mu1)), math.log(abs(mu2))) / m.period
    return StabilityVerdict(exponent, (mu1, mu2), exponent < 0)


@dataclass(frozen=True)
class ThresholdResult:
    """Smallest unstable drive amplitude, or ``A_th=None`` if stable up to A = 1."""

    A_th: float | None
    stable_up_to_one: bool
    iterations: int = 0


def threshold_amplitude(omega0: float, gamma: float, nu: float, steps_per_period: int = DEFAULT_STEPS,
                        rtol: float = 1e-4, A_max: float = 1.0, scan_points: int = 64) -> ThresholdResult:
    """Instability threshold in A by bisection on the sign of the Floquet exponent.

    A coarse vectorised scan over (0, A_max] brackets the first sign change,
    then bisection refines it to relative tolerance ``rtol``.
    """
    if not gamma > 0:
        raise ValueError("threshold needs gamma > 0 (an undamped resonance is unstable at any A)")
    g, r = gamma / omega0, nu / omega0
    grid = np.linspace(0.0, A_max, scan_points + 1)
    ex = exponents_batch(g, grid, r, steps_per_period)
    unstable = np.nonzero(ex > 0)[0]
    if len(unstable) == 0:
        return ThresholdResult(None, True)
    i = unstable[0]
    lo, hi = grid[i - 1], grid[i]

    def f(A):
        return float(exponents_batch(g, A, r, steps_per_period))

    root, info = optimize.bisect(f, lo, hi, xtol=1e-15, rtol=rtol, full_output=True)
    return ThresholdResult(float(root), False, info.iterations)


@dataclass(frozen=True)
class StabilityMap:
    """Floquet exponents (units of w0) on a grid; ``exponents[iA, inu]``."""

    nu_axis: np.ndarray
    A_axis: np.ndarray
    exponents: np.ndarray
    threshold_contour: tuple
    omega0: float
    gamma: float
    meta: dict = field(default_factory=dict)

    def column_thresholds(self, tol: float = 0.0) -> np.ndarray:
        """Index of the first A with exponent > tol in each nu column (-1 if none)."""
        unstable = self.exponents > tol
        first = np.argmax(unstable, axis=0)
        return np.where(unstable.any(axis=0), first, -1)

    def tongue_tips(self, tol: float = 1e-7, max_order: int = 12) -> list[dict]:
        """Locate tongue tips as local minima of the column thresholds.

        Each tip is labelled with the nearest ratio 2/N; the label is a
        reading of the detected position, not an input to the scan.
        """
        idx = self.column_thresholds(tol).astype(float)
        idx[idx < 0] = np.inf
        tips = []
        n = len(idx)
        j = 0
        while j < n:
            if not np.isfinite(idx[j]):
                j += 1
                continue
            k = j
            while k + 1 < n and idx[k + 1] == idx[j]:
                k += 1
            left = idx[j - 1] if j > 0 else np.inf
            right = idx[k + 1] if k + 1 < n else np.inf
            if idx[j] < left and idx[j] < right:
                nu_tip = 0.5 * (self.nu_axis[j] + self.nu_axis[k])
                order = min(max_order, max(1, int(round(2 / nu_tip))))
                tips.append({"nu_ratio": float(nu_tip), "A_min": float(self.A_axis[int(idx[j])]),
                             "order": order, "nearest_2_over_N": 2 / order})
            j = k + 1
        return tips

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["nu_ratio", "A", "exponent"])
        for iA, A in enumerate(self.A_axis):
            for inu, nu in enumerate(self.nu_axis):
                writer.writerow([fmt(nu), fmt(A), fmt(self.exponents[iA, inu])])
        return buf.getvalue()

    def to_svg(self) -> str:
        return heatmap_svg(self.nu_axis, self.A_axis, self.exponents, self.threshold_contour,
                           title=f"Floquet exponent / w0, gamma/w0 = {self.gamma / self.omega0:.3g}",
                           xlabel="nu / w0", ylabel="A")

    def record(self) -> dict:
        return {
            "omega0": self.omega0,
            "gamma": self.gamma,
            "nu_axis": self.nu_axis.tolist(),
            "A_axis": self.A_axis.tolist(),
            "threshold_contour": [list(pt) for pt in self.threshold_contour],
            "tongue_tips": self.tongue_tips(),
            "meta": self.meta,
        }


def _contour(nu_axis, A_axis, ex, tol):
    pts = []
    for inu, nu in enumerate(nu_axis):
        col = ex[:, inu]
        above = np.nonzero(col > tol)[0]
        if len(above) == 0:
            pts.append((float(nu), math.nan))
            continue
        i = above[0]
        if i == 0:
            pts.append((float(nu), float(A_axis[0])))
            continue
        e0, e1 = col[i - 1] - tol, col[i] - tol
        w = -e0 / (e1 - e0) if e1 != e0 else 0.0
        pts.append((float(nu), float(A_axis[i - 1] + w * (A_axis[i] - A_axis[i - 1]))))
    return tuple(pts)


def stability_map(omega0: float, gamma: float, nu_range, A_range, grid=(64, 64),
                  steps_per_period: int = DEFAULT_STEPS, contour_tol: float = 0.0,
                  chunk: int = 4096) -> StabilityMap:
    """Floquet exponents over (nu/w0, A).

    ``nu_range`` is given as ratios nu/w0.  The threshold contour is the
    linearly interpolated first crossing of ``exponent = contour_tol`` along
    each A column (NaN where a column never goes unstable).
    """
    n_nu, n_A = grid
    if n_nu < 8 or n_A < 8:
        raise ValueError("grid must be at least 8 x 8")
    nu_axis = np.linspace(nu_range[0], nu_range[1], n_nu)
    A_axis = np.linspace(A_range[0], A_range[1], n_A)
    NU, AA = np.meshgrid(nu_axis, A_axis)
    flat_nu, flat_A = NU.ravel(), AA.ravel()
    ex = np.empty(flat_nu.size)
    for s in range(0, flat_nu.size, chunk):
        ex[s:s + chunk] = exponents_batch(gamma / omega0, flat_A[s:s + chunk], flat_nu[s:s + chunk],
                                          steps_per_period)
    ex = ex.reshape(NU.shape)
    meta = {"steps_per_period": steps_per_period, "contour_tol": contour_tol, "grid": [n_nu, n_A]}
    return StabilityMap(nu_axis, A_axis, ex, _contour(nu_axis, A_axis, ex, contour_tol), omega0, gamma, meta)


def exponent_curve(omega0: float, gamma: float, nu: float, A_values, steps_per_period: int = DEFAULT_STEPS):
    """Exponent (1/s) against A and its relative deviation from w0 A/4 - gamma.

    Returns (exponents, deviation, A_first_deviating) where the last item is
    the smallest A whose deviation exceeds 10 % (None if none does).
    """
    A_values = np.asarray(A_values, dtype=float)
    ex = exponents_batch(gamma / omega0, A_values, nu / omega0, steps_per_period) * omega0
    linear = omega0 * A_values / 4 - gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        dev = np.abs(ex - linear) / np.abs(linear)
    bad = np.nonzero(dev > 0.1)[0]
    return ex, dev, (float(A_values[bad[0]]) if len(bad) else None)
