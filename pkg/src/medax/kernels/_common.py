"""Array layout shared by the numpy and numba kernel backends."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# primitive kinds
POINT = 0
SEGMENT = 1
CIRCLE = 2
CURVE = 3  # image of a segment/circle under a displacement field

# field kinds; params layout: [c0x, c0y, r, t0, a, b, 0, 0]
# bump: (a, b) = translation vector v; twist: a = angle theta
IDENTITY = 0
BUMP = 1
TWIST = 2

# projection range status codes
ZERO = 0
FINITE = 1
UNBOUNDED = 2

GOLDEN_ITERS = 64
INV_PHI = 0.6180339887498949


@dataclass(frozen=True)
class PackedShape:
    """Flat-array view of a primitive union, the only thing kernels see.

    ``data`` rows hold ``(x, y)`` for points, ``(ax, ay, bx, by)`` for
    segments, ``(cx, cy, R)`` for circles and ``(curve_index,)`` for
    curves.  Curves are images ``F(gamma(t))`` of a base segment
    (``t`` in [0, 1]) or circle (``t`` in [0, 2 pi]); a dense polyline of
    the image is stored in ``curve_t``/``curve_xy`` between offsets
    ``curve_off[i]`` and ``curve_off[i+1]``.
    """

    kinds: np.ndarray
    data: np.ndarray
    curve_kind: np.ndarray
    curve_data: np.ndarray
    curve_off: np.ndarray
    curve_t: np.ndarray
    curve_xy: np.ndarray
    curve_slack: np.ndarray
    field_kind: int
    field_params: np.ndarray

    @property
    def n_primitives(self) -> int:
        return int(self.kinds.shape[0])

    def as_args(self) -> tuple:
        return (
            self.kinds,
            self.data,
            self.curve_kind,
            self.curve_data,
            self.curve_off,
            self.curve_t,
            self.curve_xy,
            self.curve_slack,
            np.int64(self.field_kind),
            self.field_params,
        )


def pack(kinds, data, curves=(), field_kind=IDENTITY, field_params=None) -> PackedShape:
    """Build a :class:`PackedShape`.

    ``curves`` is a sequence of ``(base_kind, base_data, t, xy, slack)``.
    """
    kinds = np.asarray(kinds, dtype=np.int64)
    d = np.zeros((len(kinds), 4))
    for i, row in enumerate(data):
        d[i, : len(row)] = row
    ck = np.array([c[0] for c in curves], dtype=np.int64)
    cd = np.zeros((len(curves), 4))
    off = [0]
    ts, xys, slack = [], [], []
    for i, (bk, bd, t, xy, s) in enumerate(curves):
        cd[i, : len(bd)] = bd
        ts.append(np.asarray(t, dtype=float))
        xys.append(np.asarray(xy, dtype=float).reshape(-1, 2))
        off.append(off[-1] + len(t))
        slack.append(float(s))
    fp = np.zeros(8)
    if field_params is not None:
        fp[: len(field_params)] = field_params
    return PackedShape(
        kinds=kinds,
        data=d,
        curve_kind=ck,
        curve_data=cd,
        curve_off=np.asarray(off, dtype=np.int64),
        curve_t=np.concatenate(ts) if ts else np.zeros(0),
        curve_xy=np.concatenate(xys) if xys else np.zeros((0, 2)),
        curve_slack=np.asarray(slack, dtype=float),
        field_kind=int(field_kind),
        field_params=fp,
    )
