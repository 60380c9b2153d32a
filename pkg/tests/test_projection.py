from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from medax.errors import NotBackProjection, NotOnSet
from medax.geometry import Segment, Shape, SinglePoint, nearest_set, preset_shape
from medax.medial import boundary_samples
from medax.projection import (
    BackProjectionPair,
    back_projection_pair,
    deficit,
    medial_projection,
    normal_cone_check,
    projection_range,
    projection_ranges,
    tangent_probe,
    ubp_membership,
)

TAU_BIS = 1e-8
CC = preset_shape("circle+center")
UNIT = Shape.bounded((0, 0), 1)
PRESETS = ["circle", "circle+center", "two-points+circle", "segment+circle"]


def test_deficit_examples(backend):
    assert deficit(CC, (3, 0), (-1, 0), 1.0) == 0
    assert deficit(CC, (3, 0), (-1, 0), 2.0) == 1
    assert deficit(CC, (3, 0), (-1, 0), 1.5) == 0


def test_deficit_off_set_raises():
    with pytest.raises(NotOnSet):
        deficit(CC, (2, 0), (-1, 0), 1.0)


def test_projection_range_examples(backend):
    r = projection_range(CC, (3, 0), (-1, 0), tau_bis=TAU_BIS)
    assert r.status == "finite"
    assert abs(r.lam - 1.5) <= TAU_BIS
    r = projection_range(UNIT, (1, 0), (-1, 0), tau_bis=TAU_BIS)
    assert abs(r.lam - 1.0) <= TAU_BIS
    r = projection_range(Shape.bounded((0, 0), 3), (3, 0), (1, 0))
    assert r.unbounded and r.lam == math.inf


def test_medial_projection_examples(backend):
    c = medial_projection(CC, back_projection_pair(CC, (3, 0), (-1, 0)))
    np.testing.assert_allclose(c, (1.5, 0), atol=TAU_BIS)
    c = medial_projection(CC, back_projection_pair(CC, (0, 3), (0, -1)))
    np.testing.assert_allclose(c, (0, 1.5), atol=TAU_BIS)
    two = Shape.bounded((0, 0), 3, SinglePoint((-1, 0)), SinglePoint((1, 0)))
    pair = back_projection_pair(two, (1, 0), (-1, 0))
    np.testing.assert_allclose(medial_projection(two, pair), (0, 0), atol=TAU_BIS)
    assert abs(pair.lam - 1.0) <= TAU_BIS
    # the grid oracle flags the same center
    assert nearest_set(two, (0, 0), 1e-9, 1e-3).multiple


def test_medial_projection_rejects_non_back_projection():
    with pytest.raises(NotBackProjection):
        back_projection_pair(UNIT, (1, 0), (1, 0))
    bad = BackProjectionPair(np.array([1.0, 0]), np.array([0.0, 1]),
                             projection_range(UNIT, (1, 0), (0, 1)))
    with pytest.raises(NotBackProjection):
        medial_projection(UNIT, bad)


def test_ubp_membership_examples(backend):
    assert ubp_membership(UNIT, (1, 0), (-1, 0))
    assert projection_range(UNIT, (1, 0), (0, 1)).status == "zero"
    assert not ubp_membership(UNIT, (1, 0), (0, 1))
    assert not ubp_membership(UNIT, (1, 0), (1, 0))
    with pytest.raises(ValueError):
        ubp_membership(UNIT, (1, 0), (-2, 0))


def test_normal_cone_examples():
    assert normal_cone_check(UNIT, (1, 0), (-1, 0))
    # (1, 0) is orthogonal to both tangents +-(0, 1): the cone boundary
    assert normal_cone_check(UNIT, (1, 0), (1, 0))
    # (0, 1) is itself a tangent direction, so it is outside the normal cone
    assert not normal_cone_check(UNIT, (1, 0), (0, 1))
    s = Shape.bounded((0, 0), 3, Segment((-1, 0), (1, 0)))
    assert not normal_cone_check(s, (0, 0), (0.5, 1))
    assert normal_cone_check(s, (0, 0), (0, 1))


def test_isolated_point_has_trivial_tangent_cone():
    probe = tangent_probe(CC, (0, 0))
    assert probe.directions.shape == (0, 2)
    assert normal_cone_check(CC, (0, 0), (0.3, -0.7), probe)


def test_range_rows_format():
    rb = projection_ranges(CC, [(3, 0), (3, 0)], [(-1, 0), (1, 0)])
    rows = list(rb.rows())
    assert rows[0][5] == "finite" and rows[1][5] == "unbounded"
    assert len(rows[0]) == 7


# invariants

shapes = st.sampled_from(PRESETS)


def _shots(name, h_b=0.3, n_dir=24):
    s = preset_shape(name)
    return s, boundary_samples(s, h_b, n_dir)


@given(shapes, st.data())
def test_deficit_is_monotone(name, data):
    s, sm = _shots(name)
    i = data.draw(st.integers(0, len(sm) - 1))
    a = data.draw(st.floats(0, 2 * s.r))
    b = data.draw(st.floats(0, 2 * s.r))
    lo, hi = min(a, b), max(a, b)
    p, u = sm.points[i], sm.normals[i]
    assert deficit(s, p, u, lo) <= deficit(s, p, u, hi) + 1e-12


@pytest.mark.parametrize("name", PRESETS)
def test_back_projection_in_normal_cone(name, backend):
    s, sm = _shots(name)
    rb = projection_ranges(s, sm.points, sm.normals)
    for i in np.nonzero(rb.finite)[0]:
        assert normal_cone_check(s, sm.points[i], sm.normals[i])


@pytest.mark.parametrize("name", PRESETS)
def test_empty_ball_and_multiplicity_beyond_range(name, backend):
    s, sm = _shots(name)
    rb = projection_ranges(s, sm.points, sm.normals, tau_bis=TAU_BIS)
    ok = rb.finite
    C, lam = rb.centers[ok], rb.lam[ok]
    assert np.all(s.distances(C) >= lam - 2 * TAU_BIS)
    kappa = 10 * TAU_BIS
    for p, u, l in zip(sm.points[ok], sm.normals[ok], lam):
        ns = nearest_set(s, p + (l + kappa) * u, 1e-9, 1e-3)
        assert np.any(np.hypot(*(ns.points - p).T) > 1e-3)


@pytest.mark.parametrize("name", PRESETS)
def test_weak_tangency(name):
    s, sm = _shots(name)
    rb = projection_ranges(s, sm.points, sm.normals, tau_bis=TAU_BIS)
    eps_tan = 1e-6
    for i in np.nonzero(rb.finite)[0]:
        probe = tangent_probe(s, sm.points[i], eps_tan)
        c = rb.centers[i]
        for q in probe.points:
            assert np.hypot(*(c - q)) >= rb.lam[i] - eps_tan ** 2


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_ranges_bounded_by_diameter(ux, uy):
    n = math.hypot(ux, uy)
    assume(n > 1e-3)
    r = projection_range(CC, (0, 0), (ux / n, uy / n))
    assert r.status == "finite"
    assert abs(r.lam - 1.5) <= TAU_BIS
