"""Hot kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import: numba when it imports cleanly,
unless ``MEDAX_NO_NUMBA`` is set to a non-empty value other than ``0``.
Both backends can be requested explicitly through :func:`get_backend`,
which is what the benchmark and the cross-backend tests do.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

from . import _numpy
from ._common import (  # noqa: F401
    BUMP,
    CIRCLE,
    CURVE,
    FINITE,
    IDENTITY,
    POINT,
    SEGMENT,
    TWIST,
    UNBOUNDED,
    ZERO,
    PackedShape,
    pack,
)

try:
    from . import _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAVE_NUMBA = False


def _numba_backend():
    nb = _numba

    def nearest_points(X, pk):
        return nb.nearest_points(_as2d(X), *pk.as_args())

    def shape_distance(X, pk):
        return nb.shape_distance(_as2d(X), *pk.as_args())

    def bisect_ranges(P, U, pk, lam_max, tau, lam_probe, max_iter):
        return nb.bisect_ranges(
            _as2d(P), _as2d(U), float(lam_max), float(tau), float(lam_probe), int(max_iter),
            *pk.as_args(),
        )

    def directed_hausdorff(A, B):
        return float(nb.directed_hausdorff(_as2d(A), _as2d(B)))

    def field_apply(X, kind, params):
        return nb.field_apply(_as2d(X), np.int64(kind), np.asarray(params, dtype=float))

    def field_jacobian(X, kind, params):
        return nb.field_jacobian(_as2d(X), np.int64(kind), np.asarray(params, dtype=float))

    return SimpleNamespace(
        name="numba",
        nearest_points=nearest_points,
        shape_distance=shape_distance,
        bisect_ranges=bisect_ranges,
        directed_hausdorff=directed_hausdorff,
        field_apply=field_apply,
        field_jacobian=field_jacobian,
    )


def _numpy_backend():
    return SimpleNamespace(
        name="numpy",
        nearest_points=lambda X, pk: _numpy.nearest_points(_as2d(X), pk),
        shape_distance=lambda X, pk: _numpy.shape_distance(_as2d(X), pk),
        bisect_ranges=_numpy.bisect_ranges,
        directed_hausdorff=lambda A, B: _numpy.directed_hausdorff(_as2d(A), _as2d(B)),
        field_apply=lambda X, kind, params: _numpy.field_apply(
            _as2d(X), kind, np.asarray(params, dtype=float)
        ),
        field_jacobian=lambda X, kind, params: _numpy.field_jacobian(
            _as2d(X), kind, np.asarray(params, dtype=float)
        ),
    )


def _as2d(X):
    return np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=float)))


_BACKENDS = {"numpy": _numpy_backend()}
if HAVE_NUMBA:
    _BACKENDS["numba"] = _numba_backend()


def _default_name() -> str:
    flag = os.environ.get("MEDAX_NO_NUMBA", "")
    if flag and flag != "0":
        return "numpy"
    return "numba" if HAVE_NUMBA else "numpy"


def get_backend(name: str | None = None):
    return _BACKENDS[name or _default_name()]


active = get_backend()
eta = _numpy.eta
deta = _numpy.deta
curve_base = _numpy.curve_base


def set_backend(name: str) -> None:
    """Switch the process-wide backend (used by tests and the benchmark)."""
    global active
    active = get_backend(name)
