"""C^{1,1} diffeomorphisms F = id + phi with phi supported in the bounding ball.

Two families are provided, a tapered translation (``bump``) and a tapered
rotation (``twist``).  Both use the piecewise-quadratic radial taper
:func:`medax.kernels.eta`, whose derivative is Lipschitz but which is not
C^2.  Their constants are closed-form upper bounds; random sampling only
audits them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import BadFamily, ConstantBreach, NotContraction, OutOfRegime, SingularJacobian

MAX_INVERSE_STEPS = 200


def _taper_extrema(t0: float) -> dict:
    """Closed-form maxima of the taper quantities used by the constants."""
    w = 1.0 - t0
    g = lambda s: (t0 + s * w) * (1.0 - 2.0 * s * s)  # noqa: E731  t*eta(t) on the first quadratic
    s_star = (-4.0 * t0 + math.sqrt(16.0 * t0 * t0 + 24.0 * w * w)) / (12.0 * w)
    s_star = min(max(s_star, 0.0), 0.5)
    return {
        "deta": 2.0 / w,  # max |eta'|
        "t_deta": (1.0 + t0) / w,  # max t |eta'|
        "d2": 4.0 / (w * w),  # max |eta''| = max |eta' + t eta''|
        "t_eta": max(t0, g(s_star), g(0.5)),  # max t eta
    }


@dataclass(frozen=True)
class DisplacementField:
    kind: str  # "identity" | "bump" | "twist"
    center: tuple
    r: float
    t0: float = 0.5
    v: tuple = (0.0, 0.0)
    theta: float = 0.0
    sup_phi: float = field(init=False)
    lip_phi: float = field(init=False)
    sup_dphi: float = field(init=False)
    lip_dphi: float = field(init=False)

    def __post_init__(self):
        if self.kind not in ("identity", "bump", "twist"):
            raise BadFamily(f"unknown family {self.kind!r}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise BadFamily(f"support radius must be positive, got {self.r}")
        if not 0.0 < self.t0 < 1.0:
            raise BadFamily(f"plateau t0 must lie in (0, 1), got {self.t0}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "v", tuple(float(c) for c in self.v))
        ext = _taper_extrema(self.t0)
        r = self.r
        if self.kind == "bump":
            nv = math.hypot(*self.v)
            sup_phi = nv
            sup_dphi = nv * ext["deta"] / r
            lip_dphi = nv * ext["d2"] / (r * r)
        elif self.kind == "twist":
            a = abs(self.theta)
            A, B, C = ext["deta"], ext["t_deta"], ext["d2"]
            sup_phi = r * a * ext["t_eta"]
            sup_dphi = a * (1.0 + B)
            lip_dphi = (a / r) * (3.0 * A + C + a * A * B)
        else:
            sup_phi = sup_dphi = lip_dphi = 0.0
        object.__setattr__(self, "sup_phi", sup_phi)
        object.__setattr__(self, "sup_dphi", sup_dphi)
        object.__setattr__(self, "lip_phi", sup_dphi)  # Lip(phi) = sup |D phi| on a convex domain
        object.__setattr__(self, "lip_dphi", lip_dphi)

    @property
    def field_kind(self) -> int:
        return {"identity": kernels.IDENTITY, "bump": kernels.BUMP, "twist": kernels.TWIST}[self.kind]

    @property
    def field_params(self) -> np.ndarray:
        a, b = (self.v if self.kind == "bump" else (self.theta, 0.0))
        return np.array([self.center[0], self.center[1], self.r, self.t0, a, b, 0.0, 0.0])

    def evaluate(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return kernels.active.field_apply(X, self.field_kind, self.field_params) - X

    def jacobian(self, X) -> np.ndarray:
        J = kernels.active.field_jacobian(X, self.field_kind, self.field_params)
        return J - np.eye(2)

    def scaled(self, lam: float) -> "DisplacementField":
        """Conjugate field of x -> lam F(x / lam)."""
        return DisplacementField(
            self.kind, (lam * self.center[0], lam * self.center[1]), lam * self.r, self.t0,
            (lam * self.v[0], lam * self.v[1]), self.theta,
        )

    def describe(self) -> dict:
        d = {"family": self.kind, "center": list(self.center), "r": self.r, "t0": self.t0}
        if self.kind == "bump":
            d["v"] = list(self.v)
        elif self.kind == "twist":
            d["theta"] = self.theta
        return d


def identity_field(r: float, center=(0.0, 0.0)) -> DisplacementField:
    return DisplacementField("identity", center, r)


def bump_translation_field(v, r: float, t0: float = 0.5, center=(0.0, 0.0)) -> DisplacementField:
    """phi(x) = v * eta(|x - c0| / r): a plateau translation fading out at the sphere."""
    v = tuple(float(c) for c in v)
    if len(v) != 2 or not all(math.isfinite(c) for c in v):
        raise BadFamily(f"translation vector must be two finite numbers, got {v}")
    return DisplacementField("bump", center, r, t0, v=v)


def twist_field(theta: float, r: float, t0: float = 0.5, center=(0.0, 0.0)) -> DisplacementField:
    """Rotation about c0 by theta * eta(|x - c0| / r)."""
    if not math.isfinite(theta) or abs(theta) > math.pi:
        raise BadFamily(f"twist angle must be finite with |theta| <= pi, got {theta}")
    return DisplacementField("twist", center, r, t0, theta=float(theta))


def magnitude_for_lip(kind: str, eps: float, r: float, t0: float = 0.5) -> float:
    """Family magnitude (|v| or |theta|) whose Lip(D phi) equals ``eps``."""
    if eps < 0:
        raise BadFamily(f"eps must be nonnegative, got {eps}")
    ext = _taper_extrema(t0)
    if kind == "bump":
        return eps * r * r / ext["d2"]
    if kind == "twist":
        A, B, C = ext["deta"], ext["t_deta"], ext["d2"]
        b = 3.0 * A + C
        return (-b + math.sqrt(b * b + 4.0 * A * B * r * eps)) / (2.0 * A * B)
    if kind == "identity":
        return 0.0
    raise BadFamily(f"unknown family {kind!r}")


@dataclass(frozen=True)
class Constants:
    L_F: float
    L_DF: float
    eps1: float
    eps2: float
    eps_banach: float
    lip_dphi: float
    lip_dphi_tilde_majorant: float

    def to_dict(self) -> dict:
        return asdict(self)


class Diffeomorphism:
    """F = id + phi together with its certified constants."""

    def __init__(self, phi: DisplacementField):
        self.phi = phi
        a = phi.lip_phi
        if a < 1.0:
            majorant = phi.lip_dphi / (1.0 - phi.sup_dphi) ** 3
            L_F = 1.0 / (1.0 - a)  # >= 1 + a, and bounds Lip(F^-1)
        else:
            majorant = math.inf
            L_F = math.inf
        self.constants = Constants(
            L_F=L_F,
            L_DF=majorant,  # dominates Lip(DF) = Lip(D phi) as well
            eps1=phi.sup_phi,
            eps2=phi.sup_dphi,
            eps_banach=max(phi.lip_dphi, majorant),
            lip_dphi=phi.lip_dphi,
            lip_dphi_tilde_majorant=majorant,
        )

    @property
    def r(self) -> float:
        return self.phi.r

    @property
    def center(self) -> np.ndarray:
        return np.array(self.phi.center)

    def forward(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return kernels.active.field_apply(X, self.phi.field_kind, self.phi.field_params)

    def jacobian(self, X) -> np.ndarray:
        return kernels.active.field_jacobian(X, self.phi.field_kind, self.phi.field_params)

    def inverse(self, Y, tau_inv: float | None = None) -> np.ndarray:
        return invert(self, Y, tau_inv)

    def scaled(self, lam: float) -> "Diffeomorphism":
        return Diffeomorphism(self.phi.scaled(lam))


def diffeo_from_spec(spec: dict | None, r: float, center=(0.0, 0.0)) -> Diffeomorphism:
    """Build from ``{"family": ..., "params": {...}}``; support is the bounding ball."""
    spec = spec or {"family": "identity"}
    fam = spec.get("family", "identity")
    p = dict(spec.get("params", {}))
    t0 = float(p.get("t0", 0.5))
    if fam == "identity":
        return Diffeomorphism(identity_field(r, center))
    if fam == "bump":
        if "v" in p:
            v = p["v"]
        elif "eps" in p:
            d = np.asarray(p.get("direction", (1.0, 0.0)), dtype=float)
            d = d / np.hypot(*d)
            v = magnitude_for_lip("bump", float(p["eps"]), r, t0) * d
        else:
            raise BadFamily("bump family needs params.v or params.eps")
        return Diffeomorphism(bump_translation_field(v, r, t0, center))
    if fam == "twist":
        if "theta" in p:
            theta = float(p["theta"])
        elif "eps" in p:
            theta = math.copysign(magnitude_for_lip("twist", float(p["eps"]), r, t0),
                                  float(p.get("sign", 1.0)))
        else:
            raise BadFamily("twist family needs params.theta or params.eps")
        return Diffeomorphism(twist_field(theta, r, t0, center))
    raise BadFamily(f"unknown family {fam!r}")


def invert(diffeo: Diffeomorphism, Y, tau_inv: float | None = None) -> np.ndarray:
    """Fixed-point iteration x <- y - phi(x); a contraction when Lip(phi) < 1."""
    if diffeo.phi.lip_phi >= 1.0:
        raise NotContraction(f"Lip(phi) = {diffeo.phi.lip_phi:.3g} >= 1")
    tau_inv = 1e-12 * diffeo.r if tau_inv is None else tau_inv
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    X = Y.copy()
    for _ in range(MAX_INVERSE_STEPS):
        Xn = Y - diffeo.phi.evaluate(X)
        step = np.abs(Xn - X).max() if X.size else 0.0
        X = Xn
        if step < tau_inv:
            break
    return X


def _opnorm(A):
    return np.linalg.norm(A, ord=2, axis=(-2, -1))


def _ball(rng, n, c0, r):
    rad = r * np.sqrt(rng.random(n))
    ang = rng.random(n) * 2.0 * math.pi
    return c0 + np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)


def certify_constants(diffeo: Diffeomorphism, n_probe: int = 10_000, seed: int = 0):
    """Return the analytic constants plus an audit of sampled lower bounds.

    Raises ConstantBreach when any sampled value exceeds its analytic bound.
    """
    rng = np.random.default_rng(seed)
    phi = diffeo.phi
    c0, r = diffeo.center, diffeo.r
    X = _ball(rng, n_probe, c0, 1.05 * r)
    step = r * 10.0 ** rng.uniform(-4, 0, n_probe)
    ang = rng.random(n_probe) * 2.0 * math.pi
    Yp = X + step[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    dxy = np.hypot(*(Yp - X).T)

    PX, PY = phi.evaluate(X), phi.evaluate(Yp)
    DX, DY = phi.jacobian(X), phi.jacobian(Yp)
    sampled = {
        "sup_phi": float(np.hypot(*PX.T).max()),
        "sup_dphi": float(_opnorm(DX).max()),
        "lip_phi": float((np.hypot(*(PX - PY).T) / dxy).max()),
        "lip_dphi": float((_opnorm(DX - DY) / dxy).max()),
    }
    analytic = {k: getattr(phi, k) for k in sampled}
    labels = {k: "analytic" for k in sampled}

    const = diffeo.constants
    if phi.lip_phi < 1.0:
        # inverse side: phi~ = F^-1 - id, D phi~(y) = (I + D phi(F^-1 y))^-1 - I
        IX, IY = diffeo.inverse(X), diffeo.inverse(Yp)
        sampled["lip_F_inverse"] = float((np.hypot(*(IX - IY).T) / dxy).max())
        analytic["lip_F_inverse"] = const.L_F
        labels["lip_F_inverse"] = "analytic"
        I2 = np.eye(2)
        TX = np.linalg.inv(I2 + phi.jacobian(IX)) - I2
        TY = np.linalg.inv(I2 + phi.jacobian(IY)) - I2
        sampled["lip_dphi_tilde"] = float((_opnorm(TX - TY) / dxy).max())
        analytic["lip_dphi_tilde"] = const.lip_dphi_tilde_majorant
        labels["lip_dphi_tilde"] = "majorant"

    audit = {}
    for k, s in sampled.items():
        a = analytic[k]
        ok = s <= a * (1.0 + 1e-9) + 1e-12
        audit[k] = {"sampled": s, "bound": a, "label": labels[k], "ok": bool(ok)}
        if not ok:
            raise ConstantBreach(f"{k}: sampled {s!r} exceeds {labels[k]} bound {a!r}")
    audit["n_probe"] = n_probe
    audit["seed"] = seed
    return const, audit


def transport_normal(J, u) -> np.ndarray:
    """u' = (J^T)^-1 u / |(J^T)^-1 u|: the normal of the image tangent line J(u^perp)."""
    J = np.asarray(J, dtype=float)
    if abs(np.linalg.det(J)) <= 1e-12:
        raise SingularJacobian(f"det J = {np.linalg.det(J):.3g}")
    w = np.linalg.solve(J.T, np.asarray(u, dtype=float))
    return w / math.hypot(*w)


def transport_normals(J, U) -> np.ndarray:
    """Vectorised :func:`transport_normal` for (M, 2, 2) Jacobians and (M, 2) normals."""
    J = np.asarray(J, dtype=float)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    if np.any(np.abs(det) <= 1e-12):
        raise SingularJacobian("singular Jacobian in batch")
    # (J^T)^-1 = adj(J)^T / det
    wx = (J[:, 1, 1] * U[:, 0] - J[:, 1, 0] * U[:, 1]) / det
    wy = (-J[:, 0, 1] * U[:, 0] + J[:, 0, 0] * U[:, 1]) / det
    n = np.hypot(wx, wy)
    return np.stack([wx / n, wy / n], axis=1)


def angle_cosine_floor(eps2: float) -> float:
    if not 0.0 <= eps2 < 1.0:
        raise OutOfRegime("eps2<1", f"eps2 = {eps2}")
    return math.sqrt(1.0 - eps2 * eps2)
