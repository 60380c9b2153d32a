"""numba-compiled twins of :mod:`medax.kernels._numpy`.

Scalar loops over query points; same algorithms and iteration counts as
the numpy path so both backends agree to rounding.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

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

_opts = dict(cache=True, nogil=True, error_model="numpy")


@njit(**_opts)
def _eta(t, t0):
    if t <= t0:
        return 1.0
    if t >= 1.0:
        return 0.0
    s = (t - t0) / (1.0 - t0)
    if s <= 0.5:
        return 1.0 - 2.0 * s * s
    return 2.0 * (1.0 - s) ** 2


@njit(**_opts)
def _deta(t, t0):
    if t <= t0 or t >= 1.0:
        return 0.0
    w = 1.0 - t0
    s = (t - t0) / w
    if s <= 0.5:
        return -4.0 * s / w
    return -4.0 * (1.0 - s) / w


@njit(**_opts)
def _map(x, y, fk, fp):
    if fk == 0:
        return x, y
    yx = x - fp[0]
    yy = y - fp[1]
    e = _eta(math.hypot(yx, yy) / fp[2], fp[3])
    if fk == BUMP:
        return x + e * fp[4], y + e * fp[5]
    a = fp[4] * e
    ca = math.cos(a)
    sa = math.sin(a)
    return fp[0] + ca * yx - sa * yy, fp[1] + sa * yx + ca * yy


@njit(**_opts)
def field_apply(X, fk, fp):
    out = np.empty_like(X)
    for i in range(X.shape[0]):
        out[i, 0], out[i, 1] = _map(X[i, 0], X[i, 1], fk, fp)
    return out


@njit(**_opts)
def field_jacobian(X, fk, fp):
    M = X.shape[0]
    J = np.zeros((M, 2, 2))
    for i in range(M):
        J[i, 0, 0] = 1.0
        J[i, 1, 1] = 1.0
        if fk == 0:
            continue
        yx = X[i, 0] - fp[0]
        yy = X[i, 1] - fp[1]
        rho = math.hypot(yx, yy)
        safe = rho if rho > 0.0 else 1.0
        hx = yx / safe
        hy = yy / safe
        de = _deta(rho / fp[2], fp[3]) / fp[2]
        if fk == BUMP:
            J[i, 0, 0] += fp[4] * de * hx
            J[i, 0, 1] += fp[4] * de * hy
            J[i, 1, 0] += fp[5] * de * hx
            J[i, 1, 1] += fp[5] * de * hy
        elif fk == TWIST:
            theta = fp[4]
            a = theta * _eta(rho / fp[2], fp[3])
            ca = math.cos(a)
            sa = math.sin(a)
            k = theta * de
            m00 = 1.0 - k * yy * hx
            m01 = -k * yy * hy
            m10 = k * yx * hx
            m11 = 1.0 + k * yx * hy
            J[i, 0, 0] = ca * m00 - sa * m10
            J[i, 0, 1] = ca * m01 - sa * m11
            J[i, 1, 0] = sa * m00 + ca * m10
            J[i, 1, 1] = sa * m01 + ca * m11
    return J


@njit(**_opts)
def _base(bk, bd, t):
    if bk == SEGMENT:
        return bd[0] + t * (bd[2] - bd[0]), bd[1] + t * (bd[3] - bd[1])
    return bd[0] + bd[2] * math.cos(t), bd[1] + bd[2] * math.sin(t)


@njit(**_opts)
def _seg(x, y, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    t = ((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    qx = ax + t * dx
    qy = ay + t * dy
    return math.hypot(x - qx, y - qy), qx, qy


@njit(**_opts)
def _curve_f(x, y, bk, bd, t, fk, fp):
    bx, by = _base(bk, bd, t)
    qx, qy = _map(bx, by, fk, fp)
    return math.hypot(qx - x, qy - y), qx, qy


@njit(**_opts)
def _golden(x, y, bk, bd, lo, hi, fk, fp):
    a = lo
    b = hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = _curve_f(x, y, bk, bd, c, fk, fp)[0]
    fd = _curve_f(x, y, bk, bd, d, fk, fp)[0]
    for _ in range(GOLDEN_ITERS):
        if fc < fd:
            b = d
            d = c
            fd = fc
            c = b - INV_PHI * (b - a)
            fc = _curve_f(x, y, bk, bd, c, fk, fp)[0]
        else:
            a = c
            c = d
            fc = fd
            d = a + INV_PHI * (b - a)
            fd = _curve_f(x, y, bk, bd, d, fk, fp)[0]
    t = c if fc < fd else d
    return _curve_f(x, y, bk, bd, t, fk, fp)


@njit(**_opts)
def _curve_nearest(x, y, ci, ck, cd, coff, ct, cxy, cslack, fk, fp):
    o0 = coff[ci]
    o1 = coff[ci + 1]
    K = o1 - o0
    nseg = K - 1
    bk = ck[ci]
    bd = cd[ci]
    dseg = np.empty(nseg)
    best = np.inf
    ibest = 0
    for j in range(nseg):
        d = _seg(x, y, cxy[o0 + j, 0], cxy[o0 + j, 1], cxy[o0 + j + 1, 0], cxy[o0 + j + 1, 1])[0]
        dseg[j] = d
        if d < best:
            best = d
            ibest = j
    dt0 = ct[o0 + 1] - ct[o0]
    dt1 = ct[o1 - 1] - ct[o1 - 2]
    out_d = np.inf
    out_x = 0.0
    out_y = 0.0
    for j in range(nseg):
        if j != ibest:
            if dseg[j] > best + cslack[ci]:
                continue
            if j > 0 and dseg[j] > dseg[j - 1]:
                continue
            if j < nseg - 1 and dseg[j] > dseg[j + 1]:
                continue
        lo = ct[o0 + j - 1] if j >= 1 else ct[o0] - dt0
        hi = ct[o0 + j + 2] if j + 2 <= K - 1 else ct[o1 - 1] + dt1
        if bk == SEGMENT:
            lo = max(lo, 0.0)
            hi = min(hi, 1.0)
        d, qx, qy = _golden(x, y, bk, bd, lo, hi, fk, fp)
        if d < out_d:
            out_d = d
            out_x = qx
            out_y = qy
    return out_d, out_x, out_y


@njit(**_opts)
def _simple_nearest(x, y, k, a0, a1, a2, a3):
    """Point, segment or circle with its parameters passed as scalars."""
    if k == POINT:
        return math.hypot(x - a0, y - a1), a0, a1
    if k == SEGMENT:
        return _seg(x, y, a0, a1, a2, a3)
    dx = x - a0
    dy = y - a1
    n = math.hypot(dx, dy)
    if n > 0.0:
        ux = dx / n
        uy = dy / n
    else:
        ux = 1.0
        uy = 0.0
    return abs(n - a2), a0 + a2 * ux, a1 + a2 * uy


# The primitive loops below are written out in each kernel on purpose: a
# helper taking the packed arrays costs an atomic incref/decref per array
# per call, which made the compiled path slower than numpy.


@njit(**_opts)
def nearest_points(X, kinds, data, ck, cd, coff, ct, cxy, cslack, fk, fp):
    M = X.shape[0]
    P = kinds.shape[0]
    D = np.empty((M, P))
    Q = np.empty((M, P, 2))
    for i in range(M):
        x = X[i, 0]
        y = X[i, 1]
        for j in range(P):
            k = kinds[j]
            if k == CURVE:
                d, qx, qy = _curve_nearest(x, y, int(data[j, 0]), ck, cd, coff, ct, cxy,
                                           cslack, fk, fp)
            else:
                d, qx, qy = _simple_nearest(x, y, k, data[j, 0], data[j, 1], data[j, 2],
                                            data[j, 3])
            D[i, j] = d
            Q[i, j, 0] = qx
            Q[i, j, 1] = qy
    return D, Q


@njit(**_opts)
def shape_distance(X, kinds, data, ck, cd, coff, ct, cxy, cslack, fk, fp):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        x = X[i, 0]
        y = X[i, 1]
        best = np.inf
        for j in range(kinds.shape[0]):
            k = kinds[j]
            if k == CURVE:
                d = _curve_nearest(x, y, int(data[j, 0]), ck, cd, coff, ct, cxy,
                                   cslack, fk, fp)[0]
            else:
                d = _simple_nearest(x, y, k, data[j, 0], data[j, 1], data[j, 2], data[j, 3])[0]
            if d < best:
                best = d
        out[i] = best
    return out


@njit(**_opts)
def bisect_ranges(P, U, lam_max, tau, lam_probe, max_iter,
                  kinds, data, ck, cd, coff, ct, cxy, cslack, fk, fp):
    """One distance evaluation per pass: stage 0 tests lam_max, stage 1 the
    probe, later stages bisect. Same decisions as the numpy lock-step loop."""
    n = P.shape[0]
    lam = np.zeros(n)
    status = np.zeros(n, dtype=np.int64)
    iters = np.zeros(n, dtype=np.int64)
    for i in range(n):
        px = P[i, 0]
        py = P[i, 1]
        ux = U[i, 0]
        uy = U[i, 1]
        lo = lam_probe
        hi = lam_max
        it = 0
        stage = 0
        while True:
            if stage == 0:
                t = lam_max
            elif stage == 1:
                t = lam_probe
            else:
                if it >= max_iter or hi - lo < tau:
                    break
                t = 0.5 * (lo + hi)
            x = px + t * ux
            y = py + t * uy
            dist = np.inf
            for j in range(kinds.shape[0]):
                k = kinds[j]
                if k == CURVE:
                    d = _curve_nearest(x, y, int(data[j, 0]), ck, cd, coff, ct, cxy,
                                       cslack, fk, fp)[0]
                else:
                    d = _simple_nearest(x, y, k, data[j, 0], data[j, 1], data[j, 2],
                                        data[j, 3])[0]
                if d < dist:
                    dist = d
            below = t - dist <= tau
            if stage == 0:
                if below:
                    status[i] = UNBOUNDED
                    break
            elif stage == 1:
                if not below:
                    status[i] = ZERO
                    break
                status[i] = FINITE
            else:
                if below:
                    lo = t
                else:
                    hi = t
                it += 1
            stage += 1
        if status[i] == UNBOUNDED:
            lam[i] = np.inf
        elif status[i] == FINITE:
            lam[i] = lo
            iters[i] = it
    return lam, status, iters


@njit(**_opts)
def directed_hausdorff(A, B):
    best = 0.0
    for i in range(A.shape[0]):
        m = np.inf
        for j in range(B.shape[0]):
            d = math.hypot(A[i, 0] - B[j, 0], A[i, 1] - B[j, 1])
            if d < m:
                m = d
                if m <= best:
                    break
        if m > best:
            best = m
    return best
