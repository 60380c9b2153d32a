from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from medax import kernels
from medax.diffeo import (
    Diffeomorphism,
    angle_cosine_floor,
    bump_translation_field,
    certify_constants,
    diffeo_from_spec,
    identity_field,
    invert,
    magnitude_for_lip,
    transport_normal,
    transport_normals,
    twist_field,
)
from medax.errors import BadFamily, NotContraction, OutOfRegime, SingularJacobian


def _fields():
    return [
        bump_translation_field((0.1, 0.0), 1.0),
        bump_translation_field((0.05, -0.02), 3.0, 0.3),
        twist_field(0.1, 1.0),
        twist_field(-0.05, 3.0, 0.7),
    ]


def _ball(rng, n, r, lo=0.0, hi=1.0):
    rad = r * np.sqrt(rng.uniform(lo * lo, hi * hi, n))
    ang = rng.uniform(0, 2 * math.pi, n)
    return np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)


# families


def test_zero_bump_is_zero_field():
    f = bump_translation_field((0.0, 0.0), 1.0)
    assert (f.sup_phi, f.lip_phi, f.sup_dphi, f.lip_dphi) == (0, 0, 0, 0)
    X = np.random.default_rng(0).uniform(-1, 1, (50, 2))
    assert np.all(f.evaluate(X) == 0)


def test_bump_constants_example():
    f = bump_translation_field((0.1, 0.0), 1.0, 0.5)
    assert f.sup_phi == 0.1
    # oracle: maximum of the taper derivative on a dense grid
    t = np.linspace(0, 1, 200_001)
    max_deta = np.abs(kernels.deta(t, 0.5)).max()
    assert f.lip_phi == pytest.approx(0.1 * max_deta / 1.0, rel=1e-9)


def test_fields_vanish_on_the_sphere():
    for f in _fields():
        ang = np.linspace(0, 2 * math.pi, 33)
        X = f.r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        assert np.abs(f.evaluate(X)).max() <= 1e-15 * f.r


def test_twist_examples():
    f = twist_field(0.0, 1.0)
    assert np.all(f.evaluate(np.array([[0.3, 0.1]])) == 0)
    f = twist_field(0.1, 2.0, 0.5)
    assert np.all(f.evaluate(np.array([[2.5, 0.0], [0.0, -3.0]])) == 0)
    x = np.array([[0.25 * 2.0, 0.0]])
    assert np.hypot(*f.evaluate(x)[0]) == pytest.approx(2 * 0.25 * 2.0 * math.sin(0.05),
                                                        rel=1e-14)


@pytest.mark.parametrize("bad", [
    lambda: bump_translation_field((0.1, 0.0), 1.0, 1.0),
    lambda: bump_translation_field((math.inf, 0.0), 1.0),
    lambda: twist_field(0.1, -1.0),
    lambda: twist_field(4.0, 1.0),
    lambda: diffeo_from_spec({"family": "wobble"}, 1.0),
    lambda: diffeo_from_spec({"family": "bump", "params": {}}, 1.0),
])
def test_bad_family(bad):
    with pytest.raises(BadFamily):
        bad()


@pytest.mark.parametrize("kind", ["bump", "twist"])
@pytest.mark.parametrize("eps", [1e-4, 0.01, 0.05])
def test_magnitude_for_lip_inverts_constant(kind, eps):
    spec = {"family": kind, "params": {"eps": eps}}
    assert diffeo_from_spec(spec, 3.0).phi.lip_dphi == pytest.approx(eps, rel=1e-12)


def test_scaled_field_is_conjugate():
    rng = np.random.default_rng(2)
    for f in _fields():
        lam = 2.5
        g = f.scaled(lam)
        X = _ball(rng, 200, f.r)
        np.testing.assert_allclose(g.evaluate(lam * X), lam * f.evaluate(X), atol=1e-14)
        assert g.lip_dphi == pytest.approx(f.lip_dphi / lam, rel=1e-14)
        assert g.sup_dphi == pytest.approx(f.sup_dphi, rel=1e-14)


# inverse


def test_invert_identity_and_exterior():
    d = Diffeomorphism(identity_field(1.0))
    Y = np.random.default_rng(0).uniform(-2, 2, (100, 2))
    assert np.array_equal(invert(d, Y), Y)
    b = Diffeomorphism(bump_translation_field((0.1, 0.0), 1.0))
    far = Y[np.hypot(*Y.T) >= 1.0]
    assert np.array_equal(invert(b, far), far)


def test_invert_round_trip():
    d = Diffeomorphism(bump_translation_field((0.1, 0.0), 1.0))
    Y = _ball(np.random.default_rng(1), 1000, 1.2)
    tau_inv = 1e-12
    assert np.abs(d.forward(invert(d, Y, tau_inv)) - Y).max() <= tau_inv


def test_invert_requires_contraction():
    d = Diffeomorphism(bump_translation_field((1.0, 0.0), 1.0))
    with pytest.raises(NotContraction):
        invert(d, [[0.0, 0.0]])


# certified constants


def test_certify_identity():
    const, audit = certify_constants(Diffeomorphism(identity_field(1.0)), 1000)
    assert (const.L_F, const.L_DF, const.eps1, const.eps2) == (1.0, 0.0, 0.0, 0.0)


def test_certify_bump_audit():
    const, audit = certify_constants(Diffeomorphism(bump_translation_field((0.1, 0), 1.0)),
                                     10_000, seed=0)
    assert const.eps1 == 0.1
    checks = {k: v for k, v in audit.items() if isinstance(v, dict)}
    assert {"sup_phi", "lip_phi", "sup_dphi", "lip_dphi", "lip_F_inverse",
            "lip_dphi_tilde"} <= set(checks)
    assert all(v["ok"] for v in checks.values())
    assert checks["lip_dphi_tilde"]["label"] == "majorant"
    # sampled inverse-side constant respects eps_banach
    assert checks["lip_dphi_tilde"]["sampled"] <= const.eps_banach


@pytest.mark.parametrize("f", _fields(), ids=lambda f: f.kind)
def test_certify_families(f):
    const, audit = certify_constants(Diffeomorphism(f), 10_000, seed=3)
    assert const.L_F >= 1.0
    assert const.eps2 < 1.0


# invariants


@pytest.mark.parametrize("f", _fields(), ids=lambda f: f.kind)
def test_support_exact(f, backend):
    X = _ball(np.random.default_rng(4), 1000, f.r, 1.0, 3.0)
    X = X[np.hypot(*X.T) >= f.r]
    d = Diffeomorphism(f)
    assert np.all(f.evaluate(X) == 0.0)
    assert np.all(f.jacobian(X) == 0.0)
    assert np.array_equal(np.hypot(*d.forward(X).T), np.hypot(*X.T))


@given(st.sampled_from(["bump", "twist"]), st.floats(1e-4, 0.2), st.floats(0.3, 10.0),
       st.floats(0.05, 0.95))
def test_norm_relations(kind, eps, r, t0):
    f = diffeo_from_spec({"family": kind, "params": {"eps": eps, "t0": t0}}, r).phi
    assert f.sup_dphi <= r * f.lip_dphi * (1 + 1e-12)
    assert f.sup_phi <= r * f.lip_phi * (1 + 1e-12)
    assert f.sup_phi <= r * r * f.lip_dphi * (1 + 1e-12)


@pytest.mark.parametrize("f", _fields(), ids=lambda f: f.kind)
def test_jacobian_matches_finite_differences(f, backend):
    rng = np.random.default_rng(5)
    r, h = f.r, 1e-4 * f.r
    X = _ball(rng, 1000, r)
    s = np.hypot(*X.T) / r
    J = f.jacobian(X)
    fd = np.empty_like(J)
    for k, e in enumerate(np.eye(2)):
        fd[:, :, k] = (f.evaluate(X + h * e) - f.evaluate(X - h * e)) / (2 * h)
    err = np.abs(fd - J).max(axis=(1, 2))
    # the taper is piecewise quadratic: away from its three break radii the
    # central difference is second order, next to them only first order
    kinks = (f.t0, 0.5 * (1 + f.t0), 1.0)
    smooth = np.all([np.abs(s - k) > 2 * h / r for k in kinks], axis=0)
    assert err[smooth].max() <= 10 * h * h * f.lip_dphi
    assert err.max() <= h * f.lip_dphi


def test_backends_agree_on_fields():
    rng = np.random.default_rng(6)
    X = _ball(rng, 500, 1.3)
    nb, npy = kernels.get_backend("numba"), kernels.get_backend("numpy")
    for f in _fields():
        Xs = X * f.r
        np.testing.assert_allclose(nb.field_apply(Xs, f.field_kind, f.field_params),
                                   npy.field_apply(Xs, f.field_kind, f.field_params),
                                   rtol=0, atol=1e-14)
        np.testing.assert_allclose(nb.field_jacobian(Xs, f.field_kind, f.field_params),
                                   npy.field_jacobian(Xs, f.field_kind, f.field_params),
                                   rtol=0, atol=1e-13)


# normal transport


def test_transport_examples():
    u = np.array([0.6, -0.8])
    np.testing.assert_allclose(transport_normal(np.eye(2), u), u)
    np.testing.assert_allclose(transport_normal(np.diag([2.0, 1.0]), (0, 1)), (0, 1))
    J = np.array([[1.0, 0.5], [0.0, 1.0]])
    up = transport_normal(J, (1, 0))
    np.testing.assert_allclose(up, np.array([1, -0.5]) / math.sqrt(1.25), atol=1e-15)
    assert abs(up @ (J @ np.array([0.0, 1.0]))) <= 1e-15


def test_transport_singular():
    with pytest.raises(SingularJacobian):
        transport_normal(np.zeros((2, 2)), (1, 0))
    with pytest.raises(SingularJacobian):
        transport_normals(np.zeros((1, 2, 2)), np.array([[1.0, 0.0]]))


def test_angle_floor_examples():
    assert angle_cosine_floor(0.0) == 1.0
    assert angle_cosine_floor(0.5) == pytest.approx(math.sqrt(0.75), rel=1e-15)
    assert angle_cosine_floor(0.99) == pytest.approx(0.141067, abs=1e-6)
    with pytest.raises(OutOfRegime):
        angle_cosine_floor(1.0)


def _random_near_identity(rng, n, eps2):
    A = rng.normal(size=(n, 2, 2))
    A /= np.linalg.norm(A, ord=2, axis=(1, 2))[:, None, None]
    return np.eye(2) + eps2 * rng.uniform(0, 1, n)[:, None, None] * A


def test_transport_orthogonality():
    rng = np.random.default_rng(7)
    J = _random_near_identity(rng, 10_000, 0.5)
    ang = rng.uniform(0, 2 * math.pi, 10_000)
    U = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    T = np.stack([-U[:, 1], U[:, 0]], axis=1)
    Up = transport_normals(J, U)
    JT = np.einsum("nij,nj->ni", J, T)
    assert np.abs(np.einsum("ni,ni->n", Up, JT)).max() <= 1e-10
    # points into the image ball
    assert np.all(np.einsum("ni,ni->n", np.einsum("nij,nj->ni", J, U), Up) > 0)
    np.testing.assert_allclose(Up[:50], [transport_normal(j, u) for j, u in zip(J[:50], U[:50])],
                               atol=1e-15)


@pytest.mark.parametrize("eps2", [1e-3, 0.1, 0.5, 0.9])
def test_angle_bound(eps2):
    rng = np.random.default_rng(8)
    J = _random_near_identity(rng, 10_000, eps2)
    ang = rng.uniform(0, 2 * math.pi, 10_000)
    U = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    cos = np.einsum("ni,ni->n", U, transport_normals(J, U))
    assert cos.min() >= angle_cosine_floor(eps2) - 1e-10
