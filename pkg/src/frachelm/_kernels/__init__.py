"""Hot-kernel backend selection.

The compiled Cython core is preferred; the numpy fallback is used when the
extension is missing or FRACHELM_PURE_PYTHON is set.  Public entry points
coerce arrays to the contiguous layouts both backends expect, so callers can
stay layout-agnostic.
"""
import os

import numpy as np

from . import _fallback

if os.environ.get("FRACHELM_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from . import _native as _impl
    except ImportError:
        _impl = _fallback


def backend_name() -> str:
    return "native" if _impl is not _fallback else "fallback"


def get_backend(name=None):
    """Return a backend module by name ('native'/'fallback', default: active)."""
    if name is None:
        return _impl
    if name == "fallback":
        return _fallback
    if name == "native":
        from . import _native
        return _native
    raise ValueError(f"unknown backend {name!r}")


def _c3(a, dtype):
    return np.ascontiguousarray(a, dtype=dtype)


def cubic_source(q, u, backend=None):
    impl = get_backend(backend)
    return impl.cubic_source(_c3(q, np.float64), _c3(u, np.complex128))


def phase_sums(f, px, py, pz, backend=None):
    # BLAS-backed contraction beats the typed loop here (see benchmarks);
    # the native path stays available for the comparison harness
    impl = get_backend("fallback" if backend is None else backend)
    return impl.phase_sums(_c3(f, np.complex128), _c3(px, np.complex128),
                           _c3(py, np.complex128), _c3(pz, np.complex128))


def green_sum_points(points, ax, ay, az, f, kphase, c1, logr0, dlogr, corr, h3,
                     backend=None):
    impl = get_backend(backend)
    return impl.green_sum_points(
        _c3(np.atleast_2d(points), np.float64),
        _c3(ax, np.float64), _c3(ay, np.float64), _c3(az, np.float64),
        _c3(f, np.complex128), float(kphase), complex(c1),
        float(logr0), float(dlogr), _c3(corr, np.float64), float(h3))


def herglotz_sums(points, nodes, coef, k, backend=None):
    impl = get_backend(backend)
    return impl.herglotz_sums(_c3(np.atleast_2d(points), np.float64),
                              _c3(nodes, np.float64),
                              _c3(coef, np.complex128), float(k))
