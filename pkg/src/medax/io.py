"""Report writers: run.json, CSV tables and an SVG sketch.

Floats go out with 17 significant digits so a CSV round-trips bit-exactly.
CSVs carry no timing data, so equal inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .geometry import Circle, Segment, SinglePoint

SAMPLE_HEADER = ("px", "py", "ux", "uy", "rho", "rho_prime", "cosine", "c_dist", "bound_ok")
CLOUD_HEADER = ("cx", "cy", "lambda", "px", "py", "ux", "uy", "source")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_run(record, out, svg: bool = False, extra: dict | None = None) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    d = record.to_dict()
    if extra:
        d.update(extra)
    write_json(out / "run.json", d)
    write_rows(out / "samples.csv", SAMPLE_HEADER, record.pairs.rows())
    write_rows(out / "clouds_S.csv", CLOUD_HEADER, record.cloud_S.rows())
    write_rows(out / "clouds_FS.csv", CLOUD_HEADER, record.cloud_FS.rows())
    if svg:
        write_svg(out / "figure.svg", record.shape, [record.cloud_S, record.cloud_FS],
                  diffeo=record.diffeo)
    return out


def write_sweep(report, out, svg: bool = False) -> Path:
    """One subdirectory per run plus a concatenated samples.csv in run order."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for i, ((s, f, e), rec) in enumerate(zip(report.labels, report.records)):
        write_run(rec, out / f"run_{i:03d}", svg, extra={"shape_label": s, "family": f, "eps": e})
    rows = (row for rec in report.records for row in rec.pairs.rows())
    write_rows(out / "samples.csv", SAMPLE_HEADER, rows)
    write_json(out / "run.json", report.to_dict())
    return out


def _shape_paths(shape, to_px, scale, diffeo=None) -> list[str]:
    els = []
    for g in shape.primitives:
        if isinstance(g, SinglePoint):
            pts = np.array([g.p])
            if diffeo is not None:
                pts = diffeo.forward(pts)
            x, y = to_px(pts[0])
            els.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2.5" fill="{{c}}"/>')
            continue
        if isinstance(g, Segment):
            t = np.linspace(0.0, 1.0, 64)[:, None]
            pts = np.array(g.a) + t * (np.array(g.b) - np.array(g.a))
        else:
            assert isinstance(g, Circle)
            t = np.linspace(0.0, 2.0 * math.pi, 361)
            pts = np.array(g.center) + g.radius * np.stack([np.cos(t), np.sin(t)], axis=1)
        if diffeo is not None:
            pts = diffeo.forward(pts)
        d = " ".join(f"{x:.3f},{y:.3f}" for x, y in (to_px(p) for p in pts))
        els.append(f'<polyline points="{d}" fill="none" stroke="{{c}}" stroke-width="1.2"/>')
    return els


def write_svg(path, shape, clouds, diffeo=None, size: int = 600) -> None:
    """Shape in black (image in blue), clouds in green and orange, witnesses in gray."""
    c0, r = shape.center, shape.r
    scale = 0.45 * size / r

    def to_px(p):
        return (size / 2 + scale * (p[0] - c0[0]), size / 2 - scale * (p[1] - c0[1]))

    body = [e.format(c="black") for e in _shape_paths(shape, to_px, scale)]
    if diffeo is not None and diffeo.phi.kind != "identity":
        body += [e.format(c="steelblue") for e in _shape_paths(shape, to_px, scale, diffeo)]
    for cloud, color in zip(clouds, ("green", "darkorange")):
        for w in cloud.witnesses[:: max(1, len(cloud) // 400)]:
            x, y = to_px(w)
            body.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="1" fill="gray"/>')
        for c in cloud.centers:
            x, y = to_px(c)
            body.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="1.2" fill="{color}"/>')
    with open(path, "w") as fh:
        fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
                 f'viewBox="0 0 {size} {size}">\n')
        fh.write('<rect width="100%" height="100%" fill="white"/>\n')
        fh.write("\n".join(body))
        fh.write("\n</svg>\n")
