"""Experiment orchestration: configs, matched-pair verification, sweeps,
scaling checks, oracle comparison and the unbounded two-point demo."""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .bounds import BoundInput, banach_bound, evaluate, hausdorff_bound_main
from .diffeo import angle_cosine_floor, certify_constants, diffeo_from_spec, transport_normals
from .errors import ConfigError, InputError, NoAxis, OutOfRegime
from .geometry import PrimitiveSet, Shape, SinglePoint, directed_hausdorff, hausdorff
from .image import ImageShape
from .medial import (
    MedialCloud,
    boundary_samples,
    grid_medial_oracle,
    grid_points,
    oracle_scan,
    shoot_medial_cloud,
)
from .projection import DEFAULT_TAU_BIS, projection_ranges

MODES = ("verify", "sweep", "scaling", "oracle-compare", "demo-unbounded")
COSINE_TOL = 1e-10


@dataclass
class ExperimentConfig:
    mode: str = "verify"
    shape: dict = field(default_factory=lambda: {"preset": "circle+center", "radius": 3.0})
    diffeo: dict = field(default_factory=lambda: {"family": "identity"})
    h_b: float = 0.05
    n_dir: int = 256
    h_g: float = 0.05
    tau: float | None = None  # multiplicity tolerance, default 1e-9 r
    delta: float | None = None  # witness separation, default 1e-3 r
    tau_bis: float = DEFAULT_TAU_BIS
    tau_inv: float | None = None
    tau_angle: float = 1e-9
    seed: int = 0
    n_probe: int = 10_000
    out: str | None = None
    sweep: dict | None = None
    lambdas: list = field(default_factory=lambda: [1.0, 2.0, 5.0])
    windows: list = field(default_factory=lambda: [10.0, 20.0, 30.0, 40.0, 50.0])

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        for name in ("h_b", "h_g", "tau_bis", "tau_angle"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be a positive number, got {v!r}")
        for name in ("tau", "delta", "tau_inv"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive when given, got {v!r}")
        if int(self.n_dir) < 1:
            raise ConfigError(f"n_dir must be >= 1, got {self.n_dir}")
        if self.mode == "sweep" and not self.sweep:
            raise ConfigError("sweep mode needs a 'sweep' grid")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        for group in ("densities", "tolerances"):
            d.update(d.pop(group, {}) or {})
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        d = self.to_dict()
        d.pop("out", None)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def build_shape(self) -> Shape:
        return Shape.from_dict(self.shape)


@dataclass
class PairTable:
    """Matched pairs (p, u) on S and (F p, u') on F(S)."""

    p: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    rho_prime: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray
    cosine: np.ndarray
    c_dist: np.ndarray
    rho_ok: np.ndarray
    c_ok: np.ndarray
    cos_ok: np.ndarray

    def __len__(self):
        return self.p.shape[0]

    @property
    def ok(self) -> np.ndarray:
        return self.rho_ok & self.c_ok & self.cos_ok

    def rows(self):
        """px, py, ux, uy, rho, rho_prime, cosine, c_dist, bound_ok."""
        ok = self.ok
        for i in range(len(self)):
            yield (*self.p[i], *self.u[i], self.rho[i], self.rho_prime[i],
                   self.cosine[i], self.c_dist[i], bool(ok[i]))


@dataclass
class RunRecord:
    config_hash: str
    constants: dict
    audit: dict
    measured_dH: float
    report: dict
    slack: float
    verdict: bool
    n_pairs: int
    n_dropped: int
    violations: dict
    wall_clock: float
    pairs: PairTable = field(repr=False, default=None)
    cloud_S: MedialCloud = field(repr=False, default=None)
    cloud_FS: MedialCloud = field(repr=False, default=None)
    shape: Shape = field(repr=False, default=None)
    diffeo: object = field(repr=False, default=None)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "config_hash", "constants", "audit", "measured_dH", "report", "slack",
            "verdict", "n_pairs", "n_dropped", "violations", "wall_clock")}
        d["diffeo"] = self.diffeo.phi.describe() if self.diffeo is not None else None
        d["shape"] = self.shape.to_dict() if self.shape is not None else None
        return d


def check_regime(const, r: float) -> None:
    if not const.eps2 < 1.0:
        raise OutOfRegime("eps2<1", f"eps2 = {const.eps2}")
    if not math.isfinite(const.L_F):
        raise OutOfRegime("Lip(phi)<1", "the displacement is not a contraction")
    q = r * const.L_DF * const.L_F ** 2
    if q > 0.5:
        raise OutOfRegime("r*L_DF*L_F^2<=1/2", f"r*L_DF*L_F^2 = {q}")


def matched_pairs(shape, diffeo, const, h_b, n_dir, tau_bis, tau=None):
    """Shoot on S, push the finite shots forward and shoot again on F(S)."""
    samples = boundary_samples(shape, h_b, n_dir)
    rS = projection_ranges(shape, samples.points, samples.normals, tau_bis=tau_bis, tau=tau)
    ok = rS.finite
    P, U, rho = samples.points[ok], samples.normals[ok], rS.lam[ok]
    cS = rS.centers[ok]

    image = ImageShape(shape, diffeo)
    L2 = const.L_F ** 2
    tau_img = tau_bis * L2
    FP = diffeo.forward(P)
    U2 = transport_normals(diffeo.jacobian(P), U)
    on_tol = max(1e-9 * shape.r if tau is None else tau, tau_img)
    rF = projection_ranges(image, FP, U2, tau_bis=tau_img, tau=on_tol)
    keep = rF.finite
    n_dropped = int((~keep).sum())

    p, u, rho, cS = P[keep], U[keep], rho[keep], cS[keep]
    rho_p = rF.lam[keep]
    cF = rF.centers[keep]
    L3 = L2 * const.L_F
    rho1 = rho / (L3 + rho * const.L_DF * L2)
    rho2 = L3 * rho / (1.0 - rho * const.L_DF * L2)
    cosine = np.einsum("ij,ij->i", u, U2[keep])
    c_dist = np.hypot(*(cS - cF).T)
    bound = hausdorff_bound_main(shape.r, const.L_F, const.L_DF, const.eps1, const.eps2)
    table = PairTable(
        p, u, rho, rho_p, rho1, rho2, cosine, c_dist,
        rho_ok=(rho_p >= rho1 - tau_img) & (rho_p <= rho2 + tau_img),
        c_ok=c_dist <= bound + 2.0 * tau_bis,
        cos_ok=cosine >= angle_cosine_floor(const.eps2) - COSINE_TOL,
    )
    # clouds keep every finite shot so that the measured distance is not swamped by thinning
    cloud_S = MedialCloud(rS.centers[ok], rS.lam[ok], P, U, "shooting", h_b=h_b, n_dir=n_dir)
    cloud_FS = MedialCloud(rF.centers[keep], rho_p, FP[keep], U2[keep], "shooting",
                           h_b=h_b, n_dir=n_dir)
    return table, cloud_S, cloud_FS, n_dropped, bound


def run_verify(cfg: ExperimentConfig, shape: Shape | None = None, diffeo=None) -> RunRecord:
    t_start = time.perf_counter()
    shape = cfg.build_shape() if shape is None else shape
    if diffeo is None:
        diffeo = diffeo_from_spec(cfg.diffeo, shape.r, tuple(shape.center))
    const, audit = certify_constants(diffeo, cfg.n_probe, cfg.seed)
    check_regime(const, shape.r)

    table, cS, cF, n_dropped, bound = matched_pairs(
        shape, diffeo, const, cfg.h_b, cfg.n_dir, cfg.tau_bis, cfg.tau)
    if len(cS) == 0 or len(cF) == 0:
        raise NoAxis("no finite projection range on S or F(S)")
    dH = hausdorff(cS.centers, cF.centers)
    slack = 2.0 * (cfg.h_b + cfg.h_g)
    b = BoundInput(shape.r, shape.r, const.L_F, const.L_DF, const.eps1, const.eps2,
                   const.eps_banach)
    rep = evaluate(b, dH, slack)
    violations = {
        "rho_prime": int((~table.rho_ok).sum()),
        "center_distance": int((~table.c_ok).sum()),
        "cosine": int((~table.cos_ok).sum()),
        "hausdorff": int(not dH <= bound + slack),
    }
    return RunRecord(
        config_hash=cfg.digest(), constants=const.to_dict(), audit=audit, measured_dH=dH,
        report=rep.to_dict(), slack=slack, verdict=not any(violations.values()),
        n_pairs=len(table), n_dropped=n_dropped, violations=violations,
        wall_clock=time.perf_counter() - t_start, pairs=table, cloud_S=cS, cloud_FS=cF,
        shape=shape, diffeo=diffeo,
    )


@dataclass
class SweepReport:
    records: list
    labels: list  # (shape name, family, eps) per record
    fits: list  # one dict per (shape, family) group

    @property
    def verdict(self) -> bool:
        return all(r.verdict for r in self.records)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "runs": [dict(r.to_dict(), shape_label=s, family=f, eps=e)
                     for (s, f, e), r in zip(self.labels, self.records)],
            "fits": self.fits,
        }


def loglog_slope(eps, dH, level: float = 0.95) -> dict:
    """Least-squares slope of log dH against log eps with a t-based confidence band."""
    from scipy import stats

    x, y = np.log(np.asarray(eps, float)), np.log(np.asarray(dH, float))
    fit = stats.linregress(x, y)
    n = len(x)
    half = stats.t.ppf(0.5 + level / 2, n - 2) * fit.stderr if n > 2 else math.inf
    return {"slope": float(fit.slope), "intercept": float(fit.intercept),
            "ci": [float(fit.slope - half), float(fit.slope + half)],
            "r2": float(fit.rvalue ** 2), "n": n}


def _shape_label(spec: dict) -> str:
    return spec.get("preset", "custom")


def run_sweep(cfg: ExperimentConfig) -> SweepReport:
    """Grid ``{"shapes": [...], "families": [...], "eps": [...], "t0": ...}``.

    Missing keys fall back to the base config. eps = 0 runs the identity map.
    """
    g = cfg.sweep or {}
    shapes = g.get("shapes") or [cfg.shape]
    shapes = [{"preset": s, "radius": cfg.shape.get("radius", 3.0)} if isinstance(s, str) else s
              for s in shapes]
    families = g.get("families") or [cfg.diffeo.get("family", "bump")]
    eps_list = [float(e) for e in g.get("eps", [])]
    if not eps_list:
        raise ConfigError("sweep grid needs an 'eps' list")
    extra = dict(g.get("params", {}))

    records, labels, fits = [], [], []
    for sspec in shapes:
        shape = Shape.from_dict(sspec)
        r = shape.r
        for fam in families:
            if sum(1 for e in eps_list if 0 < r * e <= 0.25) < 5:
                raise ConfigError("a sweep needs at least 5 grid points with 0 < r*eps <= 1/4")
            for e in eps_list:
                spec = ({"family": "identity"} if e == 0
                        else {"family": fam, "params": {"eps": e, **extra}})
                sub = replace(cfg, mode="verify", shape=sspec, diffeo=spec)
                diffeo = diffeo_from_spec(spec, r, tuple(shape.center))
                if r * diffeo.constants.eps_banach > 0.25:
                    raise OutOfRegime("r*eps<=1/4", f"r*eps = {r * diffeo.constants.eps_banach}")
                records.append(run_verify(sub, shape, diffeo))
                labels.append((_shape_label(sspec), fam, e))
            grp = [(e, rec.measured_dH) for (s, f, e), rec in zip(labels, records)
                   if s == _shape_label(sspec) and f == fam and e > 0]
            fit = loglog_slope(*zip(*grp)) if all(d > 0 for _, d in grp) else {"slope": math.nan}
            lead = (1.0 + math.sqrt(50.0)) * r * r
            fit.update(shape=_shape_label(sspec), family=fam,
                       max_dH_over_eps=max(d / e for e, d in grp),
                       leading_coefficient=lead)
            fits.append(fit)
    return SweepReport(records, labels, fits)


@dataclass
class ScalingReport:
    lambdas: list
    records: list
    leading: list
    leading_ratio_ok: list
    dH_ratio: list
    dH_ratio_ok: list

    @property
    def verdict(self) -> bool:
        return all(self.leading_ratio_ok) and all(self.dH_ratio_ok) and all(
            r.verdict for r in self.records)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "lambdas": self.lambdas,
            "leading": self.leading,
            "leading_ratio_ok": self.leading_ratio_ok,
            "dH": [r.measured_dH for r in self.records],
            "dH_ratio": self.dH_ratio,
            "dH_ratio_ok": self.dH_ratio_ok,
            "runs": [r.to_dict() for r in self.records],
        }


def run_scaling(cfg: ExperimentConfig, lambdas=None) -> ScalingReport:
    """Rescale shape, field, densities and tolerances by each lambda; compare to lambda = 1."""
    lambdas = [float(x) for x in (cfg.lambdas if lambdas is None else lambdas)]
    if not lambdas or any(not x > 0 for x in lambdas):
        raise ConfigError("scaling needs positive lambdas")
    shape0 = cfg.build_shape()
    diffeo0 = diffeo_from_spec(cfg.diffeo, shape0.r, tuple(shape0.center))
    base = run_verify(cfg, shape0, diffeo0)
    lead0, _ = banach_bound(shape0.r, diffeo0.constants.eps_banach)

    records, leading, lead_ok, ratio, ratio_ok = [], [], [], [], []
    for lam in lambdas:
        if lam == 1.0:
            rec = base
        else:
            sub = replace(
                cfg, h_b=lam * cfg.h_b, h_g=lam * cfg.h_g, tau_bis=lam * cfg.tau_bis,
                tau=None if cfg.tau is None else lam * cfg.tau,
                delta=None if cfg.delta is None else lam * cfg.delta,
                tau_inv=None if cfg.tau_inv is None else lam * cfg.tau_inv,
            )
            rec = run_verify(sub, shape0.scaled(lam), diffeo0.scaled(lam))
        lead, _ = banach_bound(rec.shape.r, rec.diffeo.constants.eps_banach)
        records.append(rec)
        leading.append(lead)
        lead_ok.append(abs(lead / lead0 - lam) <= 1e-12 * lam)
        q = rec.measured_dH / base.measured_dH if base.measured_dH > 0 else math.nan
        ratio.append(q)
        scaled_slack = 2.0 * lam * (cfg.h_b + cfg.h_g)
        ratio_ok.append(bool(abs(q - lam) <= 2.0 * scaled_slack) if math.isfinite(q)
                        else rec.measured_dH <= 2.0 * scaled_slack)
    return ScalingReport(lambdas, records, leading, lead_ok, ratio, ratio_ok)


@dataclass
class OracleReport:
    shape: str
    dH: float
    threshold: float
    n_shooting: int
    n_grid: int
    wall_clock: float
    shooting: MedialCloud = field(repr=False, default=None)
    grid: MedialCloud = field(repr=False, default=None)

    @property
    def verdict(self) -> bool:
        return self.dH <= self.threshold

    def to_dict(self) -> dict:
        return {"shape": self.shape, "dH": self.dH, "threshold": self.threshold,
                "n_shooting": self.n_shooting, "n_grid": self.n_grid,
                "verdict": self.verdict, "wall_clock": self.wall_clock}


def run_oracle_compare(cfg: ExperimentConfig, shape: Shape | None = None) -> OracleReport:
    t0 = time.perf_counter()
    shape = cfg.build_shape() if shape is None else shape
    shoot = shoot_medial_cloud(shape, cfg.h_b, cfg.n_dir, cfg.tau_bis)
    grid = grid_medial_oracle(shape, cfg.h_g, delta=cfg.delta)
    if len(shoot) == 0 or len(grid) == 0:
        raise NoAxis("empty medial cloud")
    dH = hausdorff(shoot.centers, grid.centers)
    return OracleReport(_shape_label(cfg.shape), dH, 2.0 * (cfg.h_g + cfg.h_b), len(shoot),
                        len(grid), time.perf_counter() - t0, shoot, grid)


@dataclass
class DemoReport:
    windows: list
    directed: list
    slope: float
    r2: float
    monotone: bool

    @property
    def verdict(self) -> bool:
        return self.monotone and self.slope > 0 and self.r2 > 0.99

    def to_dict(self) -> dict:
        return {"windows": self.windows, "directed_hausdorff": self.directed,
                "slope": self.slope, "r2": self.r2, "monotone": self.monotone,
                "verdict": self.verdict}


def run_demo_unbounded(windows=(10.0, 20.0, 30.0, 40.0, 50.0), h_g: float = 0.1,
                       offset: float = 0.1) -> DemoReport:
    """Two points and a slightly moved copy, with no bounding circle.

    Their axes are two non-parallel lines, so the directed distance between
    the grid-oracle axes grows with the scan window.
    """
    from scipy import stats

    windows = [float(w) for w in windows]
    if len(windows) < 2 or any(not w > 0 for w in windows):
        raise ConfigError("the demo needs at least two positive window sizes")
    if len(set(windows)) != len(windows):
        raise InputError("window sizes must be distinct")
    a = PrimitiveSet((SinglePoint((-1.0, 0.0)), SinglePoint((1.0, 0.0))))
    b = PrimitiveSet((SinglePoint((-1.0, 0.0)), SinglePoint((1.0, offset))))
    tau, delta = math.sqrt(2.0) * h_g, 1e-3
    vals = []
    for w in windows:
        X = grid_points((0.0, 0.0), w, h_g)
        ca, cb = oracle_scan(a, X, tau, delta), oracle_scan(b, X, tau, delta)
        vals.append(directed_hausdorff(ca.centers, cb.centers))
    order = np.argsort(windows)
    ws, ds = np.array(windows)[order], np.array(vals)[order]
    fit = stats.linregress(ws, ds)
    return DemoReport(ws.tolist(), ds.tolist(), float(fit.slope), float(fit.rvalue ** 2),
                      bool(np.all(np.diff(ds) > 0)))
