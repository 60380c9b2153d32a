"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--h-b 0.02]

Each kernel runs once untimed (JIT warm-up) and then ``--repeat`` times;
the best wall time is reported together with the max absolute difference
between the two backends.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from medax import kernels
from medax.diffeo import diffeo_from_spec
from medax.geometry import preset_shape
from medax.image import ImageShape
from medax.medial import boundary_samples, grid_points


def best_of(fn, repeat):
    fn()
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        ts.append(time.perf_counter() - t)
    return min(ts), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--h-b", type=float, default=0.02)
    ap.add_argument("--h-g", type=float, default=0.02)
    args = ap.parse_args(argv)

    shape = preset_shape("two-points+circle")
    sm = boundary_samples(shape, args.h_b, 256)
    G = grid_points(shape.center, shape.r, args.h_g)
    # a segment turns into a curve primitive under the map
    seg = preset_shape("segment+circle")
    diffeo = diffeo_from_spec({"family": "bump", "params": {"eps": 0.01}}, seg.r)
    image = ImageShape(seg, diffeo)
    smF = boundary_samples(seg, args.h_b, 256)
    FP = diffeo.forward(smF.points)

    cases = {
        "shape_distance(grid)": lambda k: k.shape_distance(G, shape.packed),
        "bisect_ranges(S)": lambda k: k.bisect_ranges(
            sm.points, sm.normals, shape.packed, 2 * shape.r, 1e-8, 16e-8, 80)[0],
        "bisect_ranges(F(S))": lambda k: k.bisect_ranges(
            FP, smF.normals, image.packed, 2 * shape.r, 1e-8, 16e-8, 80)[0],
        "directed_hausdorff": lambda k: np.array(
            [k.directed_hausdorff(G[::8], G[1::8] + 1e-3)]),
    }
    backends = {n: kernels.get_backend(n) for n in ("numpy", "numba")}
    print(f"{len(sm)} shots on S, {len(smF)} on F(S), {len(G)} grid points, "
          f"best of {args.repeat}")
    print(f"{'kernel':<24}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max|diff|':>12}")
    for name, fn in cases.items():
        t_np, a = best_of(lambda: fn(backends["numpy"]), args.repeat)
        t_nb, b = best_of(lambda: fn(backends["numba"]), args.repeat)
        a, b = np.asarray(a), np.asarray(b)
        same = (a == b) | (np.isinf(a) & np.isinf(b))
        with np.errstate(invalid="ignore"):
            diff = float(np.max(np.where(same, 0.0, np.abs(a - b))))
        print(f"{name:<24}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
