"""The image F(S) of a shape under a diffeomorphism.

Points map to points and the bounding circle is fixed by construction.
Every other segment or circle becomes a curve ``F(gamma(t))`` whose
distance queries run on a dense polyline and are then refined on the
exact parametrisation, so distances are exact to rounding rather than to
polyline resolution.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from . import kernels
from .geometry import Circle, Segment, SinglePoint

POLY_SPACING_REL = 1e-3
POLY_MIN, POLY_MAX = 256, 20_000


class ImageShape:
    def __init__(self, shape, diffeo, poly_spacing: float | None = None):
        self.source = shape
        self.diffeo = diffeo
        self.bounding = shape.bounding
        self.poly_spacing = POLY_SPACING_REL * shape.r if poly_spacing is None else poly_spacing
        fixes_sphere = (
            np.allclose(diffeo.center, shape.bounding.center, rtol=0, atol=1e-12 * shape.r)
            and diffeo.r <= shape.r
        )
        if not fixes_sphere:
            raise ValueError("the displacement field must vanish outside the bounding ball")

    @property
    def r(self) -> float:
        return self.source.r

    @property
    def center(self) -> np.ndarray:
        return self.source.center

    @cached_property
    def packed(self) -> kernels.PackedShape:
        phi = self.diffeo.phi
        if phi.kind == "identity":
            return self.source.packed
        kinds, data, curves = [], [], []
        for g in self.source.primitives:
            if isinstance(g, SinglePoint):
                kinds.append(kernels.POINT)
                data.append(tuple(self.diffeo.forward(np.array(g.p))[0]))
            elif g == self.bounding:
                kinds.append(kernels.CIRCLE)
                data.append(g.center + (g.radius,))
            else:
                kinds.append(kernels.CURVE)
                data.append((len(curves),))
                curves.append(self._curve(g))
        return kernels.pack(kinds, data, curves, phi.field_kind, phi.field_params)

    def _curve(self, g):
        if isinstance(g, Segment):
            bk, bd, length, span = kernels.SEGMENT, g.a + g.b, g.length, 1.0
        elif isinstance(g, Circle):
            bk, bd = kernels.CIRCLE, g.center + (g.radius,)
            length, span = 2.0 * math.pi * g.radius, 2.0 * math.pi
        else:  # pragma: no cover
            raise TypeError(type(g))
        K = int(np.clip(math.ceil(length / self.poly_spacing), POLY_MIN, POLY_MAX)) + 1
        t = np.linspace(0.0, span, K)
        fwd = lambda tt: self.diffeo.forward(kernels.curve_base(bk, np.array(bd), tt))  # noqa: E731
        xy = fwd(t)
        mid = fwd(0.5 * (t[1:] + t[:-1]))
        sag = np.hypot(*(mid - 0.5 * (xy[1:] + xy[:-1])).T).max()
        return bk, bd, t, xy, 4.0 * sag + 1e-12 * self.r

    def distances(self, X) -> np.ndarray:
        return kernels.active.shape_distance(X, self.packed)

    def distance(self, x) -> float:
        return float(self.distances(np.asarray(x, dtype=float)[None, :])[0])

    def distance_bracket(self, Y) -> tuple[np.ndarray, np.ndarray]:
        """Pullback bracket d(F^-1 y, S) / L_F <= d(y, F(S)) <= L_F d(F^-1 y, S)."""
        L = self.diffeo.constants.L_F
        d0 = self.source.distances(self.diffeo.inverse(Y))
        return d0 / L, d0 * L
