from __future__ import annotations

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from medax.errors import EmptySet, ShapeError
from medax.geometry import (
    Circle,
    Segment,
    Shape,
    SinglePoint,
    distance,
    distance_to_primitive,
    hausdorff,
    multiplicity_scan,
    nearest_set,
    preset_shape,
)

coord = st.floats(-2.5, 2.5, allow_nan=False)


def brute_hausdorff(A, B):
    A, B = np.asarray(A, float), np.asarray(B, float)
    D = np.hypot(A[:, None, 0] - B[None, :, 0], A[:, None, 1] - B[None, :, 1])
    return max(D.min(axis=1).max(), D.min(axis=0).max())


# examples


def test_distance_to_primitive_examples(backend):
    assert distance_to_primitive((0, 0), Circle((0, 0), 1)) == 1
    assert distance_to_primitive((2, 0), Segment((0, -1), (0, 1))) == 2
    assert distance_to_primitive((3, 4), SinglePoint((0, 0))) == 5


def test_distance_examples(backend):
    only = Shape.bounded((0, 0), 3)
    cc = preset_shape("circle+center")
    assert distance(only, (0, 0)) == 3
    assert distance(cc, (1, 0)) == 1
    assert distance(cc, (1.5, 0)) == 1.5


def test_nearest_set_equidistant_pair(backend):
    ns = nearest_set(preset_shape("circle+center"), (1.5, 0), 1e-9, 1e-3)
    assert ns.distance == 1.5
    pts = sorted(map(tuple, ns.points))
    assert pts == [(0.0, 0.0), (3.0, 0.0)]


def test_nearest_set_circle_center_is_continuum(backend):
    ns = nearest_set(Shape.bounded((0, 0), 3), (0, 0))
    assert ns.distance == 3
    assert ns.continuum and ns.multiple
    assert len(ns.witnesses) >= 2


def test_nearest_set_two_points(backend):
    s = Shape.bounded((0, 0), 3, SinglePoint((-1, 0)), SinglePoint((1, 0)))
    ns = nearest_set(s, (0, 0.2), 1e-9, 1e-3)
    # oracle: brute force over the three primitives
    cands = [((-1.0, 0.0), math.hypot(1, 0.2)), ((1.0, 0.0), math.hypot(1, 0.2)),
             ((0.0, 3.0), 2.8)]
    d = min(c[1] for c in cands)
    assert ns.distance == pytest.approx(math.sqrt(1.04), abs=1e-15)
    assert ns.distance == pytest.approx(d, abs=1e-15)
    assert sorted(map(tuple, ns.points)) == [(-1.0, 0.0), (1.0, 0.0)]


def test_hausdorff_examples(backend):
    assert hausdorff([(0, 0)], [(3, 4)]) == 5
    A = [(0, 0), (1, 2), (-3, 0.5)]
    assert hausdorff(A, A) == 0
    assert hausdorff([(0, 0), (10, 0)], [(0, 1)]) == pytest.approx(math.sqrt(101), rel=1e-15)
    assert hausdorff([(0, 0), (10, 0)], [(0, 1)]) == pytest.approx(
        brute_hausdorff([(0, 0), (10, 0)], [(0, 1)]), rel=1e-15)


def test_hausdorff_empty_raises():
    with pytest.raises(EmptySet):
        hausdorff([], [(0, 0)])


# shape validation and serialisation


def test_shape_requires_bounding_member():
    c = Circle((0, 0), 3)
    with pytest.raises(ShapeError):
        Shape((SinglePoint((0, 0)),), c)


def test_shape_rejects_primitive_outside_ball():
    with pytest.raises(ShapeError, match="primitive #1"):
        Shape.bounded((0, 0), 1, Segment((0, 0), (2, 0)))


@pytest.mark.parametrize("bad", [
    lambda: Segment((0, 0), (0, 0)),
    lambda: Circle((0, 0), 0.0),
    lambda: SinglePoint((math.nan, 0)),
])
def test_primitive_invariants(bad):
    with pytest.raises(ShapeError):
        bad()


def test_shape_roundtrip_json():
    s = preset_shape("segment+circle")
    d = json.loads(json.dumps(s.to_dict()))
    assert Shape.from_dict(d) == s
    assert Shape.from_dict({"preset": "segment+circle"}) == s


# invariants


@given(st.sampled_from(["circle", "circle+center", "two-points+circle", "segment+circle"]),
       coord, coord)
def test_distance_is_min_over_primitives(name, x, y):
    s = preset_shape(name)
    d = s.distance((x, y))
    for prim in s.primitives:
        assert d <= distance_to_primitive((x, y), prim)
    assert nearest_set(s, (x, y)).distance == d


point_sets = st.lists(st.tuples(coord, coord), min_size=1, max_size=20)


@given(point_sets, point_sets, point_sets)
def test_hausdorff_metric_axioms(A, B, C):
    ab, ba = hausdorff(A, B), hausdorff(B, A)
    assert ab == ba >= 0
    assert ab == pytest.approx(brute_hausdorff(A, B), abs=1e-12)
    assert hausdorff(A, C) <= ab + hausdorff(B, C) + 1e-12
    if set(A) == set(B):
        assert ab == 0
    elif ab == 0:
        assert set(A) == set(B)


@given(st.floats(-math.pi, math.pi), coord, coord)
def test_rotation_equivariance_of_witnesses(theta, x, y):
    s = preset_shape("two-points+circle")
    c, sn = math.cos(theta), math.sin(theta)
    R = np.array([[c, -sn], [sn, c]])
    ns0 = nearest_set(s, (x, y), 1e-9, 1e-3)
    ns1 = nearest_set(s.rotated(theta), R @ np.array([x, y]), 1e-9, 1e-3)
    # a near-tie can flip across the tolerance under rounding
    assume(len(ns0.witnesses) == len(ns1.witnesses))
    W0 = ns0.points @ R.T
    for w in ns1.points:
        assert np.hypot(*(W0 - w).T).min() <= 1e-12


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=40),
       st.sampled_from(["circle+center", "two-points+circle", "segment+circle"]))
def test_multiplicity_scan_matches_nearest_set(X, name):
    s = preset_shape(name)
    X = np.array(X)
    scan = multiplicity_scan(s, X, 1e-3, 1e-2)
    for i, x in enumerate(X):
        assert bool(scan.multiple[i]) == nearest_set(s, x, 1e-3, 1e-2).multiple


def test_backends_agree_on_nearest_points():
    from medax import kernels

    rng = np.random.default_rng(3)
    X = rng.uniform(-3, 3, (500, 2))
    for name in ("circle+center", "two-points+circle", "segment+circle"):
        pk = preset_shape(name).packed
        a = kernels.get_backend("numpy").nearest_points(X, pk)
        b = kernels.get_backend("numba").nearest_points(X, pk)
        for u, v in itertools.zip_longest(a, b):
            np.testing.assert_allclose(u, v, rtol=0, atol=1e-14)
