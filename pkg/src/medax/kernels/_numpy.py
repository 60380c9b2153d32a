"""Pure-numpy kernels.

Everything is vectorised over query points.  These are the reference
implementations: the numba backend must agree with them to rounding.
"""

from __future__ import annotations

import numpy as np

from ._common import (
    BUMP,
    CIRCLE,
    CURVE,
    FINITE,
    GOLDEN_ITERS,
    INV_PHI,
    POINT,
    SEGMENT,
    TWIST,
    UNBOUNDED,
    ZERO,
)

_CHUNK = 512


def eta(t, t0):
    """C^{1,1} taper: 1 on [0, t0], two quadratic pieces down to 0 at 1."""
    t = np.asarray(t, dtype=float)
    w = 1.0 - t0
    s = (t - t0) / w
    out = np.where(s <= 0.5, 1.0 - 2.0 * s * s, 2.0 * (1.0 - s) ** 2)
    out = np.where(t <= t0, 1.0, out)
    return np.where(t >= 1.0, 0.0, out)


def deta(t, t0):
    t = np.asarray(t, dtype=float)
    w = 1.0 - t0
    s = (t - t0) / w
    out = np.where(s <= 0.5, -4.0 * s / w, -4.0 * (1.0 - s) / w)
    return np.where((t <= t0) | (t >= 1.0), 0.0, out)


def field_apply(X, kind, params):
    """Forward map F(x) = x + phi(x) for an (M, 2) array."""
    X = np.asarray(X, dtype=float)
    if kind == 0:
        return X.copy()
    c0 = params[0:2]
    r, t0 = params[2], params[3]
    Y = X - c0
    rho = np.hypot(Y[:, 0], Y[:, 1])
    e = eta(rho / r, t0)
    if kind == BUMP:
        return X + e[:, None] * params[4:6]
    if kind == TWIST:
        a = params[4] * e
        ca, sa = np.cos(a), np.sin(a)
        out = np.empty_like(X)
        out[:, 0] = c0[0] + ca * Y[:, 0] - sa * Y[:, 1]
        out[:, 1] = c0[1] + sa * Y[:, 0] + ca * Y[:, 1]
        return out
    raise ValueError(f"unknown field kind {kind}")


def field_jacobian(X, kind, params):
    """D_xF for an (M, 2) array, returned as (M, 2, 2)."""
    X = np.asarray(X, dtype=float)
    M = X.shape[0]
    J = np.zeros((M, 2, 2))
    J[:, 0, 0] = 1.0
    J[:, 1, 1] = 1.0
    if kind == 0:
        return J
    c0 = params[0:2]
    r, t0 = params[2], params[3]
    Y = X - c0
    rho = np.hypot(Y[:, 0], Y[:, 1])
    safe = np.where(rho > 0.0, rho, 1.0)
    yh = Y / safe[:, None]
    de = deta(rho / r, t0) / r
    if kind == BUMP:
        v = params[4:6]
        J += v[None, :, None] * (de[:, None] * yh)[:, None, :]
        return J
    if kind == TWIST:
        theta = params[4]
        a = theta * eta(rho / r, t0)
        ca, sa = np.cos(a), np.sin(a)
        k = theta * de
        # I + k (J y) yhat^T, with J the quarter turn
        m00 = 1.0 - k * Y[:, 1] * yh[:, 0]
        m01 = -k * Y[:, 1] * yh[:, 1]
        m10 = k * Y[:, 0] * yh[:, 0]
        m11 = 1.0 + k * Y[:, 0] * yh[:, 1]
        J[:, 0, 0] = ca * m00 - sa * m10
        J[:, 0, 1] = ca * m01 - sa * m11
        J[:, 1, 0] = sa * m00 + ca * m10
        J[:, 1, 1] = sa * m01 + ca * m11
        return J
    raise ValueError(f"unknown field kind {kind}")


def curve_base(kind, data, t):
    """Base parametrisation gamma(t) of a segment or circle."""
    t = np.asarray(t, dtype=float)
    if kind == SEGMENT:
        return np.stack(
            [data[0] + t * (data[2] - data[0]), data[1] + t * (data[3] - data[1])], axis=-1
        )
    return np.stack([data[0] + data[2] * np.cos(t), data[1] + data[2] * np.sin(t)], axis=-1)


def _segment_nearest(X, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    t = ((X[..., 0] - ax) * dx + (X[..., 1] - ay) * dy) / L2
    t = np.clip(t, 0.0, 1.0)
    qx = ax + t * dx
    qy = ay + t * dy
    return np.hypot(X[..., 0] - qx, X[..., 1] - qy), qx, qy, t


def _curve_nearest(X, pk, ci):
    """Distance from X to curve ``ci`` by polyline search + golden refinement."""
    o0, o1 = pk.curve_off[ci], pk.curve_off[ci + 1]
    ts = pk.curve_t[o0:o1]
    xy = pk.curve_xy[o0:o1]
    K = ts.shape[0]
    bk = pk.curve_kind[ci]
    bd = pk.curve_data[ci]
    slack = pk.curve_slack[ci]
    dt0 = ts[1] - ts[0]
    dt1 = ts[K - 1] - ts[K - 2]

    M = X.shape[0]
    dist = np.empty(M)
    near = np.empty((M, 2))
    for s0 in range(0, M, _CHUNK):
        Xc = X[s0 : s0 + _CHUNK]
        m = Xc.shape[0]
        dseg, _, _, _ = _segment_nearest(
            Xc[:, None, :], xy[:-1, 0], xy[:-1, 1], xy[1:, 0], xy[1:, 1]
        )
        dbest = dseg.min(axis=1)
        left = np.concatenate([np.full((m, 1), np.inf), dseg[:, :-1]], axis=1)
        right = np.concatenate([dseg[:, 1:], np.full((m, 1), np.inf)], axis=1)
        cand = (dseg <= dbest[:, None] + slack) & (dseg <= left) & (dseg <= right)
        cand[np.arange(m), dseg.argmin(axis=1)] = True
        pi, sj = np.nonzero(cand)
        lo = np.where(sj >= 1, ts[np.maximum(sj - 1, 0)], ts[0] - dt0)
        hi = np.where(sj + 2 <= K - 1, ts[np.minimum(sj + 2, K - 1)], ts[K - 1] + dt1)
        if bk == SEGMENT:
            lo = np.maximum(lo, 0.0)
            hi = np.minimum(hi, 1.0)
        Y = Xc[pi]

        def f(t):
            q = field_apply(curve_base(bk, bd, t), pk.field_kind, pk.field_params)
            return np.hypot(q[:, 0] - Y[:, 0], q[:, 1] - Y[:, 1])

        a, b = lo.copy(), hi.copy()
        c = b - INV_PHI * (b - a)
        d = a + INV_PHI * (b - a)
        fc, fd = f(c), f(d)
        for _ in range(GOLDEN_ITERS):
            left_side = fc < fd
            b = np.where(left_side, d, b)
            a = np.where(left_side, a, c)
            nc = np.where(left_side, b - INV_PHI * (b - a), d)
            nd = np.where(left_side, c, a + INV_PHI * (b - a))
            tnew = np.where(left_side, nc, nd)
            fnew = f(tnew)
            fc, fd = np.where(left_side, fnew, fd), np.where(left_side, fc, fnew)
            c, d = nc, nd
        tbest = np.where(fc < fd, c, d)
        fbest = np.minimum(fc, fd)
        order = np.lexsort((fbest, pi))
        first = np.ones(order.shape[0], dtype=bool)
        first[1:] = pi[order][1:] != pi[order][:-1]
        sel = order[first]
        dist[s0 + pi[sel]] = fbest[sel]
        q = field_apply(curve_base(bk, bd, tbest[sel]), pk.field_kind, pk.field_params)
        near[s0 + pi[sel]] = q
    return dist, near


def nearest_points(X, pk):
    """Per-primitive distances (M, P) and nearest points (M, P, 2)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    M, P = X.shape[0], pk.n_primitives
    D = np.empty((M, P))
    Q = np.empty((M, P, 2))
    for j in range(P):
        k = pk.kinds[j]
        row = pk.data[j]
        if k == POINT:
            D[:, j] = np.hypot(X[:, 0] - row[0], X[:, 1] - row[1])
            Q[:, j, 0] = row[0]
            Q[:, j, 1] = row[1]
        elif k == SEGMENT:
            d, qx, qy, _ = _segment_nearest(X, row[0], row[1], row[2], row[3])
            D[:, j] = d
            Q[:, j, 0] = qx
            Q[:, j, 1] = qy
        elif k == CIRCLE:
            dx, dy = X[:, 0] - row[0], X[:, 1] - row[1]
            n = np.hypot(dx, dy)
            D[:, j] = np.abs(n - row[2])
            safe = n > 0.0
            ux = np.where(safe, dx / np.where(safe, n, 1.0), 1.0)
            uy = np.where(safe, dy / np.where(safe, n, 1.0), 0.0)
            Q[:, j, 0] = row[0] + row[2] * ux
            Q[:, j, 1] = row[1] + row[2] * uy
        elif k == CURVE:
            d, q = _curve_nearest(X, pk, int(row[0]))
            D[:, j] = d
            Q[:, j] = q
        else:
            raise ValueError(f"unknown primitive kind {k}")
    return D, Q


def shape_distance(X, pk):
    D, _ = nearest_points(X, pk)
    return D.min(axis=1)


def bisect_ranges(P, U, pk, lam_max, tau, lam_probe, max_iter):
    """Lock-step bisection of the monotone deficit predicate for all shots."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    U = np.atleast_2d(np.asarray(U, dtype=float))
    n = P.shape[0]
    lam = np.zeros(n)
    status = np.full(n, ZERO, dtype=np.int64)
    iters = np.zeros(n, dtype=np.int64)
    if n == 0:
        return lam, status, iters
    dmax = shape_distance(P + lam_max * U, pk)
    unb = lam_max - dmax <= tau
    dpr = shape_distance(P + lam_probe * U, pk)
    zero = (~unb) & (lam_probe - dpr > tau)
    status[unb] = UNBOUNDED
    lam[unb] = np.inf
    act = ~(unb | zero)
    status[act] = FINITE
    lo = np.full(n, lam_probe)
    hi = np.full(n, lam_max)
    for _ in range(max_iter):
        idx = np.nonzero(act)[0]
        if idx.size == 0:
            break
        mid = 0.5 * (lo[idx] + hi[idx])
        d = shape_distance(P[idx] + mid[:, None] * U[idx], pk)
        ok = mid - d <= tau
        lo[idx] = np.where(ok, mid, lo[idx])
        hi[idx] = np.where(ok, hi[idx], mid)
        iters[idx] += 1
        act[idx] = hi[idx] - lo[idx] >= tau
    fin = status == FINITE
    lam[fin] = lo[fin]
    return lam, status, iters


def directed_hausdorff(A, B):
    """max over a in A of min over b in B of |a - b| (exact, brute force)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    best = 0.0
    for s0 in range(0, A.shape[0], _CHUNK):
        a = A[s0 : s0 + _CHUNK]
        d = np.hypot(a[:, None, 0] - B[None, :, 0], a[:, None, 1] - B[None, :, 1])
        best = max(best, float(d.min(axis=1).max()))
    return best
