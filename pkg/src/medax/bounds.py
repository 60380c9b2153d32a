"""Closed-form stability bounds: reach under diffeomorphisms, the radius
interval of the image ball, the medial-axis Hausdorff bound and its
Banach-norm leading term.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import OutOfRegime

SQRT50 = math.sqrt(50.0)
RADICAND_CLAMP = -1e-15


@dataclass(frozen=True)
class BoundInput:
    r: float
    rho: float
    L_F: float = 1.0
    L_DF: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    eps_banach: float = 0.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if not 0 < self.rho <= self.r * (1 + 1e-12):
            raise ValueError(f"rho must lie in (0, r], got {self.rho}")
        if self.L_F < 1.0:
            raise ValueError(f"L_F >= 1 is forced by sphere invariance, got {self.L_F}")
        if self.L_DF < 0:
            raise ValueError(f"L_DF must be nonnegative, got {self.L_DF}")


@dataclass
class BoundReport:
    rho1: float
    rho2: float
    hausdorff_bound: float
    banach_bound_leading: float
    regime_flags: dict = field(default_factory=dict)
    measured_dH: float = math.nan
    margin: float = math.nan

    def to_dict(self) -> dict:
        return asdict(self)


def federer_reach_bound(t: float, s: float, lipF: float, lipFinv: float, lipDF: float) -> float:
    """Lower bound on rch(F(S)) for 0 < t < rch(S) and F defined on the s-tube."""
    if t <= 0:
        raise OutOfRegime("t>0", f"t = {t}")
    if s <= 0:
        raise OutOfRegime("s>0", f"s = {s}")
    return min(s / lipFinv, 1.0 / ((lipF / t + lipDF) * lipFinv * lipFinv))


def rho_prime_interval(rho: float, L_F: float, L_DF: float) -> tuple[float, float]:
    """Radius range of the maximal empty ball at F(p) along the transported normal."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    L2 = L_F * L_F
    den2 = 1.0 - rho * L_DF * L2
    if den2 <= 0:
        raise OutOfRegime("rho*L_DF*L_F^2<1", f"rho*L_DF*L_F^2 = {rho * L_DF * L2}")
    return rho / (L2 * L_F + rho * L_DF * L2), L2 * L_F * rho / den2


def hausdorff_bound_main(r: float, L_F: float, L_DF: float, eps1: float, eps2: float) -> float:
    """2r sqrt(1 + L^6 k^2 - 2 L^3 k sqrt(1 - eps2^2)) + eps1 with k = 1 + 4 r L_DF L^2."""
    if not eps2 < 1.0:
        raise OutOfRegime("eps2<1", f"eps2 = {eps2}")
    L2 = L_F * L_F
    if r * L_DF * L2 > 0.5:
        raise OutOfRegime("r*L_DF*L_F^2<=1/2", f"r*L_DF*L_F^2 = {r * L_DF * L2}")
    k = 1.0 + 4.0 * r * L_DF * L2
    L3k = L2 * L_F * k
    # same radicand, rearranged so that nothing cancels as L -> 1 and eps2 -> 0:
    # (L^3 k - 1)^2 + 2 L^3 k (1 - sqrt(1 - eps2^2))
    m = (L_F - 1.0) * (L2 + L_F + 1.0) * k + (k - 1.0)
    rad = m * m + 2.0 * L3k * eps2 * eps2 / (1.0 + math.sqrt(1.0 - eps2 * eps2))
    if rad < 0.0:
        if rad < RADICAND_CLAMP:
            raise ArithmeticError(f"negative radicand {rad!r}")
        rad = 0.0
    return 2.0 * r * math.sqrt(rad) + eps1


def banach_bound(r: float, eps_banach: float) -> tuple[float, bool]:
    """Leading term (1 + sqrt 50) r^2 eps and whether r eps <= 1/4.

    The O(r^3 eps^2) remainder has no explicit constant and is never evaluated.
    """
    return (1.0 + SQRT50) * r * r * eps_banach, r * eps_banach <= 0.25


def constants_from_banach(r: float, lip_dphi: float, lip_dphi_tilde: float) -> BoundInput:
    """Upper-bound constants implied by eps = max(Lip D phi, Lip D phi~)."""
    eps = max(lip_dphi, lip_dphi_tilde)
    return BoundInput(
        r=r, rho=r, L_F=1.0 + r * eps, L_DF=eps, eps1=r * r * eps, eps2=r * eps, eps_banach=eps
    )


def regime_flags(b: BoundInput) -> dict:
    L2 = b.L_F * b.L_F
    return {
        "eps2<1": b.eps2 < 1.0,
        "r*L_DF*L_F^2<=1/2": b.r * b.L_DF * L2 <= 0.5,
        "r*eps<=1/4": b.r * b.eps_banach <= 0.25,
    }


def evaluate(b: BoundInput, measured_dH: float = math.nan, slack: float = 0.0) -> BoundReport:
    """Evaluate every bound for ``b``; raises OutOfRegime if the main bound does not apply."""
    rho1, rho2 = rho_prime_interval(b.rho, b.L_F, b.L_DF)
    hb = hausdorff_bound_main(b.r, b.L_F, b.L_DF, b.eps1, b.eps2)
    lead, _ = banach_bound(b.r, b.eps_banach)
    margin = hb + slack - measured_dH if not math.isnan(measured_dH) else math.nan
    return BoundReport(rho1, rho2, hb, lead, regime_flags(b), measured_dH, margin)
