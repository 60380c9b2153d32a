"""Command line entry point.

Exit codes: 0 pass, 1 fail (bound violated), 2 regime error, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import kernels
from .bounds import BoundInput, evaluate
from .errors import InputError, MedaxError, OutOfRegime
from .harness import (
    ExperimentConfig,
    run_demo_unbounded,
    run_oracle_compare,
    run_scaling,
    run_sweep,
    run_verify,
)
from .io import CLOUD_HEADER, write_json, write_rows, write_run, write_svg, write_sweep

log = logging.getLogger("medax")

EXIT_PASS, EXIT_FAIL, EXIT_REGIME, EXIT_INPUT = 0, 1, 2, 3


def _config(args, mode: str) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig(
        mode=mode, sweep={"eps": [0.0, 0.002, 0.004, 0.007, 0.01, 0.014, 0.02]}
        if mode == "sweep" else None)
    cfg = replace(cfg, mode=mode)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out=args.out)
    return cfg


def _summary(d: dict) -> None:
    print(json.dumps(d, indent=2, sort_keys=True, default=str))


def cmd_verify(args) -> int:
    cfg = _config(args, "verify")
    rec = run_verify(cfg)
    if cfg.out:
        write_run(rec, cfg.out, args.svg)
    _summary({"verdict": rec.verdict, "measured_dH": rec.measured_dH,
              "hausdorff_bound": rec.report["hausdorff_bound"], "slack": rec.slack,
              "n_pairs": rec.n_pairs, "n_dropped": rec.n_dropped,
              "violations": rec.violations})
    return EXIT_PASS if rec.verdict else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = _config(args, "sweep")
    rep = run_sweep(cfg)
    if cfg.out:
        write_sweep(rep, cfg.out, args.svg)
    _summary({"verdict": rep.verdict, "fits": rep.fits,
              "runs": [{"shape": s, "family": f, "eps": e, "dH": r.measured_dH,
                        "bound": r.report["hausdorff_bound"], "verdict": r.verdict}
                       for (s, f, e), r in zip(rep.labels, rep.records)]})
    return EXIT_PASS if rep.verdict else EXIT_FAIL


def cmd_scaling(args) -> int:
    cfg = _config(args, "scaling")
    lambdas = args.lambdas if args.lambdas else None
    rep = run_scaling(cfg, lambdas)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        for lam, rec in zip(rep.lambdas, rep.records):
            write_run(rec, out / f"lambda_{lam:g}", args.svg)
        write_json(out / "run.json", rep.to_dict())
    d = rep.to_dict()
    d.pop("runs")
    _summary(d)
    return EXIT_PASS if rep.verdict else EXIT_FAIL


def cmd_oracle(args) -> int:
    cfg = _config(args, "oracle-compare")
    rep = run_oracle_compare(cfg)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "run.json", rep.to_dict())
        write_rows(out / "clouds_shooting.csv", CLOUD_HEADER, rep.shooting.rows())
        write_rows(out / "clouds_grid.csv", CLOUD_HEADER, rep.grid.rows())
        if args.svg:
            write_svg(out / "figure.svg", cfg.build_shape(), [rep.shooting, rep.grid])
    _summary(rep.to_dict())
    return EXIT_PASS if rep.verdict else EXIT_FAIL


def cmd_demo(args) -> int:
    cfg = _config(args, "demo-unbounded")
    windows = args.windows if args.windows else cfg.windows
    rep = run_demo_unbounded(windows)
    if cfg.out:
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        write_json(Path(cfg.out) / "run.json", rep.to_dict())
    _summary(rep.to_dict())
    return EXIT_PASS if rep.verdict else EXIT_FAIL


def cmd_bounds(args) -> int:
    vals = {}
    if args.config:
        try:
            with open(args.config) as fh:
                vals = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read {args.config}: {exc}") from None
        vals = vals.get("bounds", vals)
    for k in ("r", "rho", "L_F", "L_DF", "eps1", "eps2", "eps_banach"):
        v = getattr(args, k)
        if v is not None:
            vals[k] = v
    if "r" not in vals:
        raise InputError("bounds needs at least --r")
    vals.setdefault("rho", vals["r"])
    try:
        b = BoundInput(**vals)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None
    rep = evaluate(b)
    d = rep.to_dict()
    d.pop("measured_dH")
    d.pop("margin")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_json(Path(args.out) / "run.json", d)
    _summary(d)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="medax", description=__doc__.splitlines()[0])
    p.add_argument("--backend", choices=("numba", "numpy"), default=None,
                   help="kernel backend (default: numba unless MEDAX_NO_NUMBA is set)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--svg", action="store_true", help="also write figure.svg")
        return sp

    common(sub.add_parser("verify", help="matched-pair check of the Hausdorff bound")).set_defaults(
        fn=cmd_verify)
    common(sub.add_parser("sweep", help="run verify over a magnitude grid")).set_defaults(
        fn=cmd_sweep)
    sp = common(sub.add_parser("scaling", help="rescale everything by lambda"))
    sp.add_argument("--lambdas", type=float, nargs="+")
    sp.set_defaults(fn=cmd_scaling)
    common(sub.add_parser("oracle-compare", help="shooting cloud vs grid oracle")).set_defaults(
        fn=cmd_oracle)
    sp = common(sub.add_parser("demo-unbounded", help="two points without a bounding circle"))
    sp.add_argument("--windows", type=float, nargs="+")
    sp.set_defaults(fn=cmd_demo)
    sp = common(sub.add_parser("bounds", help="evaluate the closed-form bounds only"))
    for k in ("r", "rho", "L_F", "L_DF", "eps1", "eps2", "eps_banach"):
        sp.add_argument(f"--{k.replace('_', '-')}", dest=k, type=float)
    sp.set_defaults(fn=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.backend:
        kernels.set_backend(args.backend)
    try:
        return args.fn(args)
    except OutOfRegime as exc:
        print(f"medax: out of regime ({exc.flag}): {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (InputError, ValueError) as exc:
        print(f"medax: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MedaxError as exc:
        print(f"medax: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
