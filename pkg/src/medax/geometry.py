"""Planar primitives, the bounded Shape container and nearest-point queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from . import kernels
from .errors import EmptySet, ShapeError

DEFAULT_TAU_REL = 1e-9
DEFAULT_DELTA_REL = 1e-3


def _pt(p, what="point") -> tuple[float, float]:
    try:
        x, y = (float(c) for c in p)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"{what} must be a pair of numbers, got {p!r}") from exc
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ShapeError(f"{what} has non-finite coordinates: {p!r}")
    return (x, y)


@dataclass(frozen=True)
class SinglePoint:
    p: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "p", _pt(self.p))

    def to_dict(self):
        return {"type": "point", "p": list(self.p)}


@dataclass(frozen=True)
class Segment:
    a: tuple[float, float]
    b: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "a", _pt(self.a, "segment endpoint"))
        object.__setattr__(self, "b", _pt(self.b, "segment endpoint"))
        if self.a == self.b:
            raise ShapeError(f"segment endpoints coincide at {self.a}")

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def to_dict(self):
        return {"type": "segment", "a": list(self.a), "b": list(self.b)}


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _pt(self.center, "circle center"))
        r = float(self.radius)
        if not (math.isfinite(r) and r > 0):
            raise ShapeError(f"circle radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "radius", r)

    def to_dict(self):
        return {"type": "circle", "center": list(self.center), "radius": self.radius}


Primitive = Union[SinglePoint, Segment, Circle]


def primitive_from_dict(d: dict) -> Primitive:
    kind = d.get("type")
    try:
        if kind == "point":
            return SinglePoint(d["p"])
        if kind == "segment":
            return Segment(d["a"], d["b"])
        if kind == "circle":
            return Circle(d["center"], d["radius"])
    except KeyError as exc:
        raise ShapeError(f"primitive {d!r} is missing field {exc}") from None
    raise ShapeError(f"unknown primitive type {kind!r} in {d!r}")


def pack_primitives(prims: Sequence[Primitive]) -> kernels.PackedShape:
    kinds, data = [], []
    for p in prims:
        if isinstance(p, SinglePoint):
            kinds.append(kernels.POINT)
            data.append(p.p)
        elif isinstance(p, Segment):
            kinds.append(kernels.SEGMENT)
            data.append(p.a + p.b)
        else:
            kinds.append(kernels.CIRCLE)
            data.append(p.center + (p.radius,))
    return kernels.pack(kinds, data)


@dataclass(frozen=True)
class Shape:
    """A closed set given as a union of primitives, including its bounding circle."""

    primitives: tuple
    bounding: Circle

    def __post_init__(self):
        prims = tuple(self.primitives)
        object.__setattr__(self, "primitives", prims)
        if self.bounding not in prims:
            raise ShapeError("the bounding circle must be one of the primitives")
        c0, r = self.bounding.center, self.bounding.radius
        slack = 1e-12 * r
        for i, p in enumerate(prims):
            if isinstance(p, SinglePoint):
                far = math.dist(p.p, c0)
            elif isinstance(p, Segment):
                far = max(math.dist(p.a, c0), math.dist(p.b, c0))
            elif isinstance(p, Circle):
                far = math.dist(p.center, c0) + p.radius
            else:
                raise ShapeError(f"primitive #{i} has unsupported type {type(p).__name__}")
            if far > r + slack:
                raise ShapeError(
                    f"primitive #{i} ({p.to_dict()}) leaves the bounding ball "
                    f"B({c0}, {r})"
                )

    @classmethod
    def bounded(cls, center, radius, *others: Primitive) -> "Shape":
        b = Circle(center, radius)
        return cls((b,) + tuple(others), b)

    @property
    def r(self) -> float:
        return self.bounding.radius

    @property
    def center(self) -> np.ndarray:
        return np.array(self.bounding.center)

    @cached_property
    def packed(self) -> kernels.PackedShape:
        return pack_primitives(self.primitives)

    def distances(self, X) -> np.ndarray:
        return kernels.active.shape_distance(X, self.packed)

    def distance(self, x) -> float:
        return float(self.distances(np.asarray(x, dtype=float)[None, :])[0])

    def transformed(self, fn) -> "Shape":
        """Apply a similarity ``fn`` (point -> point, scaling by ``|fn'|``)."""
        def scale_of(c, r):
            a = np.asarray(fn(c))
            b = np.asarray(fn((c[0] + r, c[1])))
            return float(np.hypot(*(b - a)))

        def tr(p):
            if isinstance(p, SinglePoint):
                return SinglePoint(fn(p.p))
            if isinstance(p, Segment):
                return Segment(fn(p.a), fn(p.b))
            return Circle(fn(p.center), scale_of(p.center, p.radius))

        prims = tuple(tr(p) for p in self.primitives)
        return Shape(prims, prims[self.primitives.index(self.bounding)])

    def rotated(self, theta: float) -> "Shape":
        c0 = self.bounding.center
        c, s = math.cos(theta), math.sin(theta)
        return self.transformed(
            lambda p: (c0[0] + c * (p[0] - c0[0]) - s * (p[1] - c0[1]),
                       c0[1] + s * (p[0] - c0[0]) + c * (p[1] - c0[1]))
        )

    def scaled(self, lam: float) -> "Shape":
        return self.transformed(lambda p: (lam * p[0], lam * p[1]))

    def to_dict(self) -> dict:
        return {
            "bounding": {"center": list(self.bounding.center), "radius": self.bounding.radius},
            "primitives": [p.to_dict() for p in self.primitives],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Shape":
        if "preset" in d:
            return preset_shape(d["preset"], float(d.get("radius", 3.0)),
                                tuple(d.get("center", (0.0, 0.0))))
        try:
            b = d["bounding"]
            bounding = Circle(b["center"], b["radius"])
            prims = [primitive_from_dict(p) for p in d["primitives"]]
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"shape document is missing {exc}") from None
        return cls(tuple(prims), bounding)


@dataclass(frozen=True)
class PrimitiveSet:
    """A primitive union with no bounding circle.

    Only used to exhibit what goes wrong without one; every bound-facing
    code path takes a :class:`Shape`.
    """

    primitives: tuple

    @cached_property
    def packed(self) -> kernels.PackedShape:
        return pack_primitives(self.primitives)

    def distances(self, X) -> np.ndarray:
        return kernels.active.shape_distance(X, self.packed)


PRESETS = ("circle", "circle+center", "two-points+circle", "segment+circle")


def preset_shape(name: str, radius: float = 3.0, center=(0.0, 0.0)) -> Shape:
    """Corpus shapes; inner features sit at a third of the bounding radius."""
    cx, cy = center
    a = radius / 3.0
    if name == "circle":
        return Shape.bounded(center, radius)
    if name == "circle+center":
        return Shape.bounded(center, radius, SinglePoint((cx, cy)))
    if name == "two-points+circle":
        return Shape.bounded(center, radius, SinglePoint((cx - a, cy)), SinglePoint((cx + a, cy)))
    if name == "segment+circle":
        return Shape.bounded(center, radius, Segment((cx - a, cy), (cx + a, cy)))
    raise ShapeError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


def distance_to_primitive(x, prim: Primitive) -> float:
    pk = pack_primitives([prim])
    return float(kernels.active.nearest_points(np.asarray(x, dtype=float)[None, :], pk)[0][0, 0])


def distance(shape, x) -> float:
    return shape.distance(x)


@dataclass(frozen=True)
class NearestSet:
    distance: float
    witnesses: tuple  # of (point ndarray, primitive index)
    tau: float
    delta: float
    continuum: bool = False

    @property
    def points(self) -> np.ndarray:
        return np.array([w[0] for w in self.witnesses])

    @property
    def multiple(self) -> bool:
        return self.continuum or len(self.witnesses) >= 2


def default_tolerances(shape) -> tuple[float, float]:
    return DEFAULT_TAU_REL * shape.r, DEFAULT_DELTA_REL * shape.r


def nearest_set(shape, x, tau: float | None = None, delta: float | None = None) -> NearestSet:
    """All tau-near witnesses of ``x`` merged greedily at separation ``delta``."""
    t0, d0 = default_tolerances(shape)
    tau = t0 if tau is None else tau
    delta = d0 if delta is None else delta
    if not (tau > 0 and delta > tau):
        raise ValueError("need 0 < tau < delta")
    x = np.asarray(x, dtype=float)
    pk = shape.packed
    D, Q = kernels.active.nearest_points(x[None, :], pk)
    D, Q = D[0], Q[0]
    d = float(D.min())
    order = sorted((j for j in range(D.size) if D[j] <= d + tau), key=lambda j: (D[j], j))
    cands = []
    continuum = False
    for j in order:
        cands.append((Q[j].copy(), j))
        if pk.kinds[j] == kernels.CIRCLE:
            c = pk.data[j, :2]
            if math.hypot(*(x - c)) <= 0.5 * tau:
                continuum = True
                cands.append((2.0 * c - Q[j], j))
    reps: list = []
    for q, j in cands:
        if all(math.hypot(*(q - r[0])) > delta for r in reps):
            reps.append((q, j))
    return NearestSet(d, tuple(reps), tau, delta, continuum)


@dataclass
class MultiplicityScan:
    """Vectorised nearest_set summary for many query points."""

    distance: np.ndarray
    multiple: np.ndarray
    continuum: np.ndarray
    first_witness: np.ndarray
    first_index: np.ndarray = field(repr=False)


def multiplicity_scan(shape, X, tau: float, delta: float) -> MultiplicityScan:
    """Flag points whose greedy witness clustering yields two or more clusters.

    Equivalent to ``nearest_set(shape, x, tau, delta).multiple`` per row.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    pk = shape.packed
    D, Q = kernels.active.nearest_points(X, pk)
    d = D.min(axis=1)
    cand = D <= d[:, None] + tau
    first = D.argmin(axis=1)
    rows = np.arange(X.shape[0])
    rep = Q[rows, first]
    sep = np.hypot(Q[..., 0] - rep[:, None, 0], Q[..., 1] - rep[:, None, 1]) > delta
    multiple = np.any(cand & sep, axis=1)
    circ = pk.kinds == kernels.CIRCLE
    cont = np.zeros(X.shape[0], dtype=bool)
    if circ.any():
        cc = pk.data[circ, :2]
        near_c = np.hypot(X[:, None, 0] - cc[None, :, 0], X[:, None, 1] - cc[None, :, 1])
        hit = cand[:, circ] & (near_c <= 0.5 * tau)
        # the antipode of a continuum circle is 2R away from its own witness
        big = 2.0 * pk.data[circ, 2] > delta
        cont = np.any(hit & big[None, :], axis=1)
    return MultiplicityScan(d, multiple | cont, cont, rep, first)


def hausdorff(A, B) -> float:
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise EmptySet("Hausdorff distance needs two nonempty point sets")
    k = kernels.active
    return max(k.directed_hausdorff(A, B), k.directed_hausdorff(B, A))


def directed_hausdorff(A, B) -> float:
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise EmptySet("Hausdorff distance needs two nonempty point sets")
    return kernels.active.directed_hausdorff(A, B)
