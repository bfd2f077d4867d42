"""Fixed-step classical RK4 kernels in dimensionless time tau = w0 t.

The kernels work on plain Python floats: the states are two- or
three-dimensional, so per-step numpy overhead would dominate.  Time-varying
coefficients are tabulated with numpy beforehand at the grid points and the
half steps, which are the only stage times RK4 needs.
"""

from __future__ import annotations

import numpy as np


def linear_oscillator(k_full, k_half, damping, mass, p0, q0, h):
    """Integrate ``mass p'' + damping p' + k(tau) p = 0``.

    ``k_full[n]`` is k at tau_n (length n_steps + 1), ``k_half[n]`` at
    tau_n + h/2.  Returns arrays (p, q) with q = p'.
    """
    n = len(k_half)
    p_out = np.empty(n + 1)
    q_out = np.empty(n + 1)
    inv_m = 1.0 / mass
    c = damping * inv_m
    kf = (np.asarray(k_full, dtype=float) * inv_m).tolist()
    kh = (np.asarray(k_half, dtype=float) * inv_m).tolist()
    p, q = float(p0), float(q0)
    p_out[0], q_out[0] = p, q
    h2 = 0.5 * h
    h6 = h / 6.0
    for i in range(n):
        k0 = kf[i]
        km = kh[i]
        a1 = -c * q - k0 * p
        pb = p + h2 * q
        qb = q + h2 * a1
        a2 = -c * qb - km * pb
        pc = p + h2 * qb
        qc = q + h2 * a2
        a3 = -c * qc - km * pc
        pd = p + h * qc
        qd = q + h * a3
        a4 = -c * qd - kf[i + 1] * pd
        p = p + h6 * (q + 2.0 * qb + 2.0 * qc + qd)
        q = q + h6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        p_out[i + 1] = p
        q_out[i + 1] = q
    return p_out, q_out


def linear_oscillator_batch(k_of_tau, damping, n_steps, h, y0):
    """Vectorised RK4 for ``p'' + damping p' + k(tau) p = 0`` over many systems.

    ``k_of_tau(tau)`` returns an array broadcastable against the batch; ``h``
    and ``damping`` may be arrays.  ``y0`` has shape (2, ...) and the final
    state of the same shape is returned.
    """
    p, q = (np.array(y, dtype=float) for y in y0)
    h = np.asarray(h, dtype=float)
    tau = np.zeros_like(h)
    for _ in range(n_steps):
        k0 = k_of_tau(tau)
        km = k_of_tau(tau + 0.5 * h)
        k1 = k_of_tau(tau + h)
        a1 = -damping * q - k0 * p
        pb = p + 0.5 * h * q
        qb = q + 0.5 * h * a1
        a2 = -damping * qb - km * pb
        pc = p + 0.5 * h * qb
        qc = q + 0.5 * h * a2
        a3 = -damping * qc - km * pc
        pd = p + h * qc
        qd = q + h * a3
        a4 = -damping * qd - k1 * pd
        p = p + h / 6.0 * (q + 2.0 * qb + 2.0 * qc + qd)
        q = q + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        tau = tau + h
    return np.stack([p, q])


def _hermite(h, y0, d0, y1, d1, s):
    """Cubic Hermite value and derivative at fraction s of an interval of width h."""
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    val = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    dh00 = 6 * s2 - 6 * s
    dh10 = 3 * s2 - 4 * s + 1
    dh01 = -6 * s2 + 6 * s
    dh11 = 3 * s2 - 2 * s
    der = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1
    return val, der


def delayed_oscillator(coef_full, coef_half, free_damping, p0, q0, h, history):
    """RK4 method of steps for

        p'' + free_damping p' + p = b0 p(tau - th) + b1 p'(tau - th) + b2 p''(tau - th)

    with tau-dependent coefficients (b0, b1, b2, th) tabulated in
    ``coef_full`` (shape (4, n + 1)) and ``coef_half`` (shape (4, n)).

    The accepted p'' at every grid point (the first RK stage) is stored next
    to p and p', so the delayed state is interpolated with cubic Hermite on
    (p, p') for p and on (p', p'') for p' and p''.  ``history(tau)`` gives
    (p, p', p'') for tau < 0.  Requires th >= h everywhere.
    """
    b0f, b1f, b2f, thf = (np.asarray(c, dtype=float).tolist() for c in coef_full)
    b0h, b1h, b2h, thh = (np.asarray(c, dtype=float).tolist() for c in coef_half)
    n = len(b0h)
    P = [0.0] * (n + 1)
    Q = [0.0] * (n + 1)
    Acc = [0.0] * (n + 1)
    p, q = float(p0), float(q0)
    P[0], Q[0] = p, q
    g = free_damping

    def delayed(td):
        if td < 0.0:
            return history(td)
        j = int(td / h)
        s = td / h - j
        if j >= n:  # td exactly at the end of the grid
            j, s = n - 1, 1.0
        pv, _ = _hermite(h, P[j], Q[j], P[j + 1], Q[j + 1], s)
        qv, av = _hermite(h, Q[j], Acc[j], Q[j + 1], Acc[j + 1], s)
        return pv, qv, av

    h2 = 0.5 * h
    h6 = h / 6.0
    for i in range(n):
        tau = i * h
        pd_, qd_, ad_ = delayed(tau - thf[i])
        a1 = -g * q - p + b0f[i] * pd_ + b1f[i] * qd_ + b2f[i] * ad_
        Acc[i] = a1
        pd_, qd_, ad_ = delayed(tau + h2 - thh[i])
        forcing = b0h[i] * pd_ + b1h[i] * qd_ + b2h[i] * ad_
        pb = p + h2 * q
        qb = q + h2 * a1
        a2 = -g * qb - pb + forcing
        pc = p + h2 * qb
        qc = q + h2 * a2
        a3 = -g * qc - pc + forcing
        pd_, qd_, ad_ = delayed(tau + h - thf[i + 1])
        pe = p + h * qc
        qe = q + h * a3
        a4 = -g * qe - pe + b0f[i + 1] * pd_ + b1f[i + 1] * qd_ + b2f[i + 1] * ad_
        p = p + h6 * (q + 2.0 * qb + 2.0 * qc + qe)
        q = q + h6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        P[i + 1] = p
        Q[i + 1] = q
    return np.array(P), np.array(Q)


def bloch_system(shift_full, shift_half, damping, relax, pump, drive, p0, q0, dn0, h, freeze):
    """RK4 for the two-level oscillator plus population equation.

        p'' + damping p' + (1 - S(tau) dn) p = F_p(tau) dn
        dn' = -relax (dn - pump) - F_n(tau) p'

    ``drive(tau)`` returns (F_p, F_n) or is None for no external field.
    ``freeze`` holds dn at its initial value.
    """
    sf = np.asarray(shift_full, dtype=float).tolist()
    sh = np.asarray(shift_half, dtype=float).tolist()
    n = len(sh)
    P = np.empty(n + 1)
    Q = np.empty(n + 1)
    D = np.empty(n + 1)
    p, q, dn = float(p0), float(q0), float(dn0)
    P[0], Q[0], D[0] = p, q, dn
    zero = (0.0, 0.0)

    def rhs(tau, shift, p, q, dn):
        fp, fn = drive(tau) if drive is not None else zero
        a = -damping * q - (1.0 - shift * dn) * p + fp * dn
        ddn = 0.0 if freeze else -relax * (dn - pump) - fn * q
        return a, ddn

    h2 = 0.5 * h
    for i in range(n):
        tau = i * h
        a1, r1 = rhs(tau, sf[i], p, q, dn)
        p2, q2, d2 = p + h2 * q, q + h2 * a1, dn + h2 * r1
        a2, r2 = rhs(tau + h2, sh[i], p2, q2, d2)
        p3, q3, d3 = p + h2 * q2, q + h2 * a2, dn + h2 * r2
        a3, r3 = rhs(tau + h2, sh[i], p3, q3, d3)
        p4, q4, d4 = p + h * q3, q + h * a3, dn + h * r3
        a4, r4 = rhs(tau + h, sf[i + 1], p4, q4, d4)
        p += h / 6.0 * (q + 2 * q2 + 2 * q3 + q4)
        q += h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        dn += h / 6.0 * (r1 + 2 * r2 + 2 * r3 + r4)
        P[i + 1], Q[i + 1], D[i + 1] = p, q, dn
    return P, Q, D
