from __future__ import annotations

import math

import numpy as np
import pytest

from medax import kernels
from medax.diffeo import Diffeomorphism, bump_translation_field, diffeo_from_spec
from medax.geometry import Circle, Segment, preset_shape
from medax.image import ImageShape

PRESETS = ["circle", "circle+center", "two-points+circle", "segment+circle"]


def _bump(shape, v=(0.1, 0.05)):
    return Diffeomorphism(bump_translation_field(v, shape.r, 0.5, tuple(shape.center)))


def _dense_image(shape, diffeo, n=400_001):
    """Brute-force oracle: F applied to a very fine sampling of every primitive."""
    pts = []
    for g in shape.primitives:
        if isinstance(g, Segment):
            t = np.linspace(0, 1, n)[:, None]
            P = (1 - t) * np.array(g.a) + t * np.array(g.b)
        elif isinstance(g, Circle):
            a = np.linspace(0, 2 * math.pi, n)
            P = np.array(g.center) + g.radius * np.stack([np.cos(a), np.sin(a)], axis=1)
        else:
            P = np.array([g.p])
        pts.append(diffeo.forward(P))
    return np.concatenate(pts)


def test_identity_image_reuses_packed_shape():
    s = preset_shape("segment+circle")
    img = ImageShape(s, diffeo_from_spec(None, s.r))
    assert img.packed is s.packed


def test_support_must_sit_in_bounding_ball():
    s = preset_shape("circle")
    with pytest.raises(ValueError):
        ImageShape(s, Diffeomorphism(bump_translation_field((0.1, 0), 1.0, 0.5, (0.5, 0))))


def test_points_move_and_sphere_is_fixed(backend):
    s = preset_shape("two-points+circle")
    d = _bump(s, (0.2, 0.0))
    img = ImageShape(s, d)
    for x in ((1.0, 0.0), (-1.0, 0.0)):
        y = d.forward(np.array(x))[0]
        assert img.distance(y) == 0.0
    ang = np.linspace(0, 2 * math.pi, 17)
    S1 = s.r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    assert np.abs(img.distances(S1)).max() <= 1e-15 * s.r


@pytest.mark.parametrize("name", ["segment+circle", "circle+center"])
def test_curve_distance_matches_dense_oracle(name, backend):
    s = preset_shape(name)
    d = _bump(s)
    img = ImageShape(s, d)
    dense = _dense_image(s, d)
    rng = np.random.default_rng(0)
    Y = rng.uniform(-s.r, s.r, (80, 2))
    got = img.distances(Y)
    D = np.hypot(Y[:, None, 0] - dense[None, :, 0], Y[:, None, 1] - dense[None, :, 1]).min(axis=1)
    # the oracle samples the curve, so it can only overestimate, by at most the spacing
    spacing = 2 * math.pi * s.r / 400_000 * d.constants.L_F
    assert np.all(got <= D + 1e-12)
    assert np.all(D - got <= spacing)


@pytest.mark.parametrize("name", PRESETS)
def test_pullback_bracket(name):
    s = preset_shape(name)
    img = ImageShape(s, _bump(s))
    Y = np.random.default_rng(1).uniform(-s.r, s.r, (2000, 2))
    lo, hi = img.distance_bracket(Y)
    d = img.distances(Y)
    assert np.all(lo <= d + 1e-9) and np.all(d <= hi + 1e-9)


@pytest.mark.parametrize("name", PRESETS)
def test_backends_agree_on_image(name):
    s = preset_shape(name)
    img = ImageShape(s, _bump(s))
    Y = np.random.default_rng(2).uniform(-s.r, s.r, (1000, 2))
    a = kernels.get_backend("numpy").shape_distance(Y, img.packed)
    b = kernels.get_backend("numba").shape_distance(Y, img.packed)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)
