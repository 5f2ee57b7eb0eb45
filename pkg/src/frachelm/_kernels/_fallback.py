"""Pure-numpy reference implementations of the hot grid kernels.

Selected at import time when the compiled extension is unavailable (or when
FRACHELM_PURE_PYTHON is set).  Semantics must match `_native` exactly; the
equivalence is pinned by tests/test_kernels.py.
"""
import numpy as np

_CHUNK = 32


def cubic_source(q, u):
    """q * |u|^2 * u, elementwise."""
    return q * (u.real * u.real + u.imag * u.imag) * u


def phase_sums(f, px, py, pz):
    """sum_{ijl} f[i,j,l] * px[m,i] * py[m,j] * pz[m,l] for each row m."""
    t1 = np.tensordot(px, f, axes=(1, 0))          # (M, ny, nz)
    t2 = np.einsum("mj,mjk->mk", py, t1)           # (M, nz)
    return np.einsum("mk,mk->m", pz, t2)


def green_sum_points(points, ax, ay, az, f, kphase, c1, logr0, dlogr, corr, h3):
    """Direct Green's summation u(p) = h3 * sum_j Phi(|p - y_j|) f_j.

    Phi is split as c1 * exp(i*kphase*r)/r plus a real correction linearly
    interpolated from a log-uniform radial table (empty table -> no
    correction).
    """
    out = np.empty(len(points), dtype=complex)
    ncorr = len(corr)
    for p, (x0, x1, x2) in enumerate(points):
        r2 = ((x0 - ax) ** 2)[:, None, None] \
            + ((x1 - ay) ** 2)[None, :, None] \
            + ((x2 - az) ** 2)[None, None, :]
        r = np.sqrt(r2)
        kern = c1 * np.exp(1j * kphase * r) / r
        if ncorr:
            t = (np.log(r) - logr0) / dlogr
            t = np.clip(t, 0.0, ncorr - 1.000001)
            i0 = t.astype(np.intp)
            frac = t - i0
            kern = kern + corr[i0] * (1.0 - frac) + corr[i0 + 1] * frac
        out[p] = np.sum(kern * f)
    return out * h3


def herglotz_sums(points, nodes, coef, k):
    """sum_m coef[m] * exp(i*k* p.n_m) for each point p, chunked over p."""
    out = np.empty(len(points), dtype=complex)
    step = _CHUNK * 1024 // max(1, len(nodes) // 64 + 1)
    step = max(1024, step)
    for lo in range(0, len(points), step):
        blk = points[lo:lo + step]
        out[lo:lo + step] = np.exp(1j * k * (blk @ nodes.T)) @ coef
    return out
