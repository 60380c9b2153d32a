"""Projection ranges, back-projection directions and the axis map (p, u) -> p + range * u.

Every function accepts any shape-like object exposing ``packed``, ``r`` and
``distances`` (a :class:`~medax.geometry.Shape` or an image shape).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotBackProjection, NotOnSet
from .geometry import Circle, Segment, SinglePoint

MAX_ITER = 80
PROBE_FACTOR = 16.0
DEFAULT_TAU_BIS = 1e-8

STATUS_NAMES = {kernels.ZERO: "zero", kernels.FINITE: "finite", kernels.UNBOUNDED: "unbounded"}


@dataclass(frozen=True)
class ProjectionRange:
    origin: np.ndarray
    direction: np.ndarray
    lam: float  # math.inf when unbounded
    status: str
    iterations: int

    @property
    def unbounded(self) -> bool:
        return self.status == "unbounded"

    @property
    def is_back_projection(self) -> bool:
        return self.status == "finite"


@dataclass
class RangeBatch:
    """Projection ranges for many shots at once (the form the samplers use)."""

    origins: np.ndarray
    directions: np.ndarray
    lam: np.ndarray
    status: np.ndarray
    iterations: np.ndarray

    @property
    def finite(self) -> np.ndarray:
        return self.status == kernels.FINITE

    @property
    def centers(self) -> np.ndarray:
        lam = np.where(self.finite, self.lam, 0.0)
        return self.origins + lam[:, None] * self.directions

    def __len__(self):
        return self.lam.shape[0]

    def __getitem__(self, i) -> ProjectionRange:
        return ProjectionRange(
            self.origins[i], self.directions[i], float(self.lam[i]),
            STATUS_NAMES[int(self.status[i])], int(self.iterations[i]),
        )

    def rows(self):
        """CSV rows: px, py, ux, uy, lambda, status, iterations."""
        for i in range(len(self)):
            yield (*self.origins[i], *self.directions[i], self.lam[i],
                   STATUS_NAMES[int(self.status[i])], int(self.iterations[i]))


def _on_set(shape, P, tau):
    tau = 1e-9 * shape.r if tau is None else tau
    d = shape.distances(P)
    bad = np.nonzero(d > tau)[0]
    if bad.size:
        i = bad[0]
        raise NotOnSet(f"point {P[i].tolist()} is at distance {d[i]:.3g} > {tau:.3g} from the set")


def deficit(shape, p, u, lam: float, tau: float | None = None) -> float:
    """lam - d(p + lam u, S); nondecreasing in lam for p on S."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    _on_set(shape, p[None, :], tau)
    return float(lam - shape.distance(p + lam * u))


def projection_ranges(shape, P, U, lam_max: float | None = None,
                      tau_bis: float = DEFAULT_TAU_BIS, tau: float | None = None,
                      check: bool = True) -> RangeBatch:
    P = np.atleast_2d(np.asarray(P, dtype=float))
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if check and P.shape[0]:
        _on_set(shape, P, tau)
    lam_max = 2.0 * shape.r if lam_max is None else lam_max
    lam, status, iters = kernels.active.bisect_ranges(
        P, U, shape.packed, lam_max, tau_bis, PROBE_FACTOR * tau_bis, MAX_ITER
    )
    return RangeBatch(P, U, lam, status, iters)


def projection_range(shape, p, u, lam_max: float | None = None,
                     tau_bis: float = DEFAULT_TAU_BIS, tau: float | None = None) -> ProjectionRange:
    return projection_ranges(shape, p, u, lam_max, tau_bis, tau)[0]


@dataclass(frozen=True)
class BackProjectionPair:
    p: np.ndarray
    u: np.ndarray
    range: ProjectionRange

    @property
    def lam(self) -> float:
        return self.range.lam


def back_projection_pair(shape, p, u, tau_bis: float = DEFAULT_TAU_BIS) -> BackProjectionPair:
    rng = projection_range(shape, p, u, tau_bis=tau_bis)
    if not rng.is_back_projection:
        raise NotBackProjection(f"direction {np.asarray(u).tolist()} has {rng.status} range")
    return BackProjectionPair(np.asarray(p, dtype=float), np.asarray(u, dtype=float), rng)


def medial_projection(shape, pair: BackProjectionPair) -> np.ndarray:
    """Center p + lam u of the maximal empty ball tangent at p along u."""
    if not pair.range.is_back_projection:
        raise NotBackProjection(f"range status is {pair.range.status}")
    return pair.p + pair.lam * pair.u


def ubp_membership(shape, p, u, tau_bis: float = DEFAULT_TAU_BIS) -> bool:
    u = np.asarray(u, dtype=float)
    if abs(math.hypot(*u) - 1.0) > 1e-12:
        raise ValueError(f"direction {u.tolist()} is not a unit vector")
    return projection_range(shape, p, u, tau_bis=tau_bis).is_back_projection


@dataclass(frozen=True)
class TangentProbe:
    p: np.ndarray
    directions: np.ndarray  # (k, 2) unit tangent directions; empty means Tan = {0}
    points: np.ndarray  # (k, 2) points of S realising each direction
    resolution: float


def tangent_probe(shape, p, eps_tan: float = 1e-6, tau: float | None = None) -> TangentProbe:
    """Analytic tangent directions of every primitive through ``p``."""
    p = np.asarray(p, dtype=float)
    tau = 1e-9 * shape.r if tau is None else tau
    h = 0.5 * eps_tan
    dirs, pts = [], []
    for prim in shape.primitives:
        if isinstance(prim, SinglePoint):
            continue
        if isinstance(prim, Segment):
            a, b = np.array(prim.a), np.array(prim.b)
            L = prim.length
            e = (b - a) / L
            t = float(np.dot(p - a, e))
            if np.hypot(*(a + t * e - p)) > tau or t < -tau or t > L + tau:
                continue
            if t < L - h:
                dirs.append(e)
                pts.append(p + h * e)
            if t > h:
                dirs.append(-e)
                pts.append(p - h * e)
        elif isinstance(prim, Circle):
            c = np.array(prim.center)
            R = prim.radius
            if abs(np.hypot(*(p - c)) - R) > tau:
                continue
            ang = math.atan2(p[1] - c[1], p[0] - c[0])
            dth = h / R
            for sgn in (1.0, -1.0):
                dirs.append(sgn * np.array([-math.sin(ang), math.cos(ang)]))
                pts.append(c + R * np.array([math.cos(ang + sgn * dth), math.sin(ang + sgn * dth)]))
    return TangentProbe(p, np.array(dirs).reshape(-1, 2), np.array(pts).reshape(-1, 2), eps_tan)


def normal_cone_margin(v, probe: TangentProbe) -> float:
    """max <v, t> / |v| over the probe's tangent directions (-inf when Tan = {0})."""
    v = np.asarray(v, dtype=float)
    nv = math.hypot(*v)
    if probe.directions.shape[0] == 0 or nv == 0.0:
        return -math.inf
    return float((probe.directions @ v).max() / nv)


def normal_cone_check(shape, p, v, probe: TangentProbe | None = None,
                      tau_angle: float = 1e-9) -> bool:
    probe = tangent_probe(shape, p) if probe is None else probe
    return normal_cone_margin(v, probe) <= tau_angle
