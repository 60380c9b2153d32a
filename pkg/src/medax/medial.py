"""Medial-axis sampling by normal shooting, a brute-force grid oracle, lfs and reach."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoAxis
from .geometry import Circle, Segment, SinglePoint, multiplicity_scan
from .projection import DEFAULT_TAU_BIS, projection_ranges

DEFAULT_N_DIR = 256


def _count(length: float, h: float) -> int:
    # the tiny offset keeps counts stable under exact rescaling of length and h
    return max(1, math.ceil(length / h - 1e-9))


@dataclass
class BoundarySamples:
    """Flattened shots: one row per (boundary point, candidate normal)."""

    points: np.ndarray  # (N, 2)
    normals: np.ndarray  # (N, 2)
    primitive: np.ndarray  # (N,) owning primitive index
    point_index: np.ndarray  # (N,) index into the distinct boundary points

    def __len__(self):
        return self.points.shape[0]

    @property
    def distinct_points(self) -> np.ndarray:
        _, first = np.unique(self.point_index, return_index=True)
        return self.points[first]

    def as_list(self):
        out = []
        for k in np.unique(self.point_index):
            m = self.point_index == k
            out.append((self.points[m][0], self.normals[m]))
        return out

    def transformed(self, fn_points, fn_normals) -> "BoundarySamples":
        return BoundarySamples(fn_points(self.points), fn_normals(self.normals),
                               self.primitive.copy(), self.point_index.copy())


def boundary_samples(shape, h_b: float, n_dir: int = DEFAULT_N_DIR) -> BoundarySamples:
    if not 0 < h_b < 2.0 * shape.r:
        raise ValueError(f"need 0 < h_b < 2r, got h_b={h_b}")
    P, U, prim, pidx = [], [], [], []
    k = 0

    def emit(p, normals, j):
        nonlocal k
        for u in normals:
            P.append(p)
            U.append(u)
            prim.append(j)
            pidx.append(k)
        k += 1

    for j, g in enumerate(shape.primitives):
        if isinstance(g, Circle):
            n = max(3, _count(2.0 * math.pi * g.radius, h_b))
            for i in range(n):
                a = 2.0 * math.pi * i / n
                e = np.array([math.cos(a), math.sin(a)])
                emit(np.array(g.center) + g.radius * e, (-e, e), j)
        elif isinstance(g, Segment):
            a, b = np.array(g.a), np.array(g.b)
            m = _count(g.length, h_b)
            e = (b - a) / g.length
            nrm = np.array([-e[1], e[0]])
            for i in range(m + 1):
                emit(a + (i / m) * (b - a), (nrm, -nrm), j)
        elif isinstance(g, SinglePoint):
            ang = 2.0 * math.pi * np.arange(n_dir) / n_dir
            emit(np.array(g.p), np.stack([np.cos(ang), np.sin(ang)], axis=1), j)
    return BoundarySamples(np.array(P), np.array(U), np.array(prim), np.array(pidx))


def sample_boundary(shape, h_b: float, n_dir: int = DEFAULT_N_DIR):
    """List of (point, candidate unit normals) over every primitive."""
    return boundary_samples(shape, h_b, n_dir).as_list()


@dataclass(frozen=True)
class MedialSample:
    center: np.ndarray
    radius: float
    witness: np.ndarray
    direction: np.ndarray


@dataclass
class MedialCloud:
    centers: np.ndarray
    radii: np.ndarray
    witnesses: np.ndarray
    directions: np.ndarray
    source: str  # "shooting" | "grid"
    h_b: float = math.nan
    n_dir: int = 0
    h_g: float = math.nan

    def __len__(self):
        return self.centers.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield MedialSample(self.centers[i], float(self.radii[i]),
                               self.witnesses[i], self.directions[i])

    def subset(self, idx) -> "MedialCloud":
        return MedialCloud(self.centers[idx], self.radii[idx], self.witnesses[idx],
                           self.directions[idx], self.source, self.h_b, self.n_dir, self.h_g)

    def deduplicated(self, sep: float) -> "MedialCloud":
        return self.subset(dedup_indices(self.centers, sep))

    def rows(self):
        """CSV rows: cx, cy, lambda, px, py, ux, uy, source."""
        for i in range(len(self)):
            yield (*self.centers[i], self.radii[i], *self.witnesses[i],
                   *self.directions[i], self.source)


def dedup_indices(centers: np.ndarray, sep: float) -> np.ndarray:
    """Greedy thinning in lexicographic order: keep a center unless a kept one is within sep."""
    if len(centers) == 0:
        return np.zeros(0, dtype=int)
    order = np.lexsort((centers[:, 1], centers[:, 0]))
    cells: dict = {}
    kept = []
    for i in order:
        c = centers[i]
        key = (int(math.floor(c[0] / sep)), int(math.floor(c[1] / sep)))
        close = False
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in cells.get((key[0] + dx, key[1] + dy), ()):
                    if math.hypot(*(centers[j] - c)) < sep:
                        close = True
                        break
                if close:
                    break
            if close:
                break
        if not close:
            kept.append(i)
            cells.setdefault(key, []).append(i)
    return np.sort(np.array(kept, dtype=int))


def shoot_medial_cloud(shape, h_b: float, n_dir: int = DEFAULT_N_DIR,
                       tau_bis: float = DEFAULT_TAU_BIS, samples: BoundarySamples | None = None,
                       dedup: bool = True) -> MedialCloud:
    """Centers p + range * u for every sampled shot with finite positive range."""
    samples = boundary_samples(shape, h_b, n_dir) if samples is None else samples
    rb = projection_ranges(shape, samples.points, samples.normals, tau_bis=tau_bis)
    ok = rb.finite
    cloud = MedialCloud(rb.centers[ok], rb.lam[ok], samples.points[ok], samples.normals[ok],
                        "shooting", h_b=h_b, n_dir=n_dir)
    return cloud.deduplicated(0.5 * h_b) if dedup else cloud


def grid_points(center, radius: float, h_g: float) -> np.ndarray:
    n = int(math.floor(radius / h_g + 1e-9))
    k = np.arange(-n, n + 1) * h_g
    gx, gy = np.meshgrid(k, k, indexing="ij")
    G = np.stack([gx.ravel(), gy.ravel()], axis=1)
    G = G[np.hypot(G[:, 0], G[:, 1]) <= radius]
    return G + np.asarray(center, dtype=float)


def oracle_scan(shape_like, X, tau: float, delta: float) -> MedialCloud:
    scan = multiplicity_scan(shape_like, X, tau, delta)
    m = scan.multiple
    C = X[m]
    W = scan.first_witness[m]
    d = scan.distance[m]
    U = (C - W) / np.where(d > 0, d, 1.0)[:, None]
    return MedialCloud(C, d, W, U, "grid")


def grid_medial_oracle(shape, h_g: float, tau: float | None = None,
                       delta: float | None = None) -> MedialCloud:
    """Grid points of the bounding ball with two or more separated tau-near witnesses.

    The default tau = sqrt(2) h_g guarantees every axis point has a flagged
    grid neighbour, since distance differences are 2-Lipschitz.
    """
    if not h_g > 0:
        raise ValueError("h_g must be positive")
    tau = math.sqrt(2.0) * h_g if tau is None else tau
    delta = 1e-3 * shape.r if delta is None else delta
    cloud = oracle_scan(shape, grid_points(shape.bounding.center, shape.r, h_g), tau, delta)
    cloud.h_g = h_g
    return cloud


def local_feature_size(shape, p, cloud: MedialCloud) -> float:
    if len(cloud) == 0:
        raise NoAxis("empty medial cloud")
    p = np.asarray(p, dtype=float)
    return float(np.hypot(*(cloud.centers - p).T).min())


def reach(shape, cloud: MedialCloud, h_b: float) -> float:
    """Minimum lfs over boundary samples at spacing h_b."""
    if len(cloud) == 0:
        raise NoAxis("empty medial cloud")
    pts = boundary_samples(shape, h_b, 1).distinct_points
    C = cloud.centers
    best = math.inf
    for s0 in range(0, len(pts), 256):
        blk = pts[s0 : s0 + 256]
        d = np.hypot(blk[:, None, 0] - C[None, :, 0], blk[:, None, 1] - C[None, :, 1])
        best = min(best, float(d.min()))
    return best
