"""Compiled-core vs numpy-fallback equivalence on the hot grid kernels."""
import numpy as np
import pytest

from frachelm import _kernels

RNG = np.random.default_rng(2718)

HAS_NATIVE = _kernels.backend_name() == "native"

needs_native = pytest.mark.skipif(not HAS_NATIVE,
                                  reason="compiled extension not built")


def _rand_complex(shape):
    return RNG.normal(size=shape) + 1j * RNG.normal(size=shape)


def test_backend_name_valid():
    assert _kernels.backend_name() in ("native", "fallback")


def test_cubic_source_fallback_semantics():
    q = RNG.normal(size=(6, 6, 6))
    u = _rand_complex((6, 6, 6))
    out = _kernels.cubic_source(q, u, backend="fallback")
    assert np.allclose(out, q * np.abs(u) ** 2 * u, rtol=1e-14)


@needs_native
def test_cubic_source_backends_agree():
    q = RNG.normal(size=(8, 8, 8))
    u = _rand_complex((8, 8, 8))
    a = _kernels.cubic_source(q, u, backend="native")
    b = _kernels.cubic_source(q, u, backend="fallback")
    assert np.max(np.abs(a - b)) < 1e-14 * np.max(np.abs(b))


@needs_native
def test_phase_sums_backends_agree():
    f = _rand_complex((8, 8, 8))
    px, py, pz = (_rand_complex((5, 8)) for _ in range(3))
    a = _kernels.phase_sums(f, px, py, pz, backend="native")
    b = _kernels.phase_sums(f, px, py, pz, backend="fallback")
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(b))


def test_phase_sums_against_direct_contraction():
    f = _rand_complex((6, 6, 6))
    px, py, pz = (_rand_complex((3, 6)) for _ in range(3))
    ref = np.einsum("ijk,mi,mj,mk->m", f, px, py, pz)
    got = _kernels.phase_sums(f, px, py, pz)
    assert np.max(np.abs(got - ref)) < 1e-12 * np.max(np.abs(ref))


def _green_args():
    ax = np.linspace(-0.9, 0.9, 8)
    f = _rand_complex((8, 8, 8))
    pts = np.array([[2.0, 0.3, -0.5], [0.0, 3.5, 0.0]])
    corr = np.exp(-np.linspace(0.0, 3.0, 50))
    return pts, ax, f, 2.0, 0.3 - 0.1j, np.log(0.5), 0.02, corr, 1e-3


@needs_native
def test_green_sum_backends_agree():
    pts, ax, f, kph, c1, logr0, dlogr, corr, h3 = _green_args()
    a = _kernels.green_sum_points(pts, ax, ax, ax, f, kph, c1, logr0, dlogr,
                                  corr, h3, backend="native")
    b = _kernels.green_sum_points(pts, ax, ax, ax, f, kph, c1, logr0, dlogr,
                                  corr, h3, backend="fallback")
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(b))


def test_green_sum_against_direct_loop():
    pts, ax, f, kph, c1, logr0, dlogr, corr, h3 = _green_args()
    got = _kernels.green_sum_points(pts, ax, ax, ax, f, kph, c1, logr0, dlogr,
                                    corr, h3)
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
    for p, pt in enumerate(pts):
        r = np.sqrt((pt[0] - x) ** 2 + (pt[1] - y) ** 2 + (pt[2] - z) ** 2)
        t = np.clip((np.log(r) - logr0) / dlogr, 0.0, len(corr) - 1.000001)
        i0 = t.astype(int)
        cval = corr[i0] * (1 - (t - i0)) + corr[i0 + 1] * (t - i0)
        ref = np.sum((c1 * np.exp(1j * kph * r) / r + cval) * f) * h3
        assert got[p] == pytest.approx(ref, rel=1e-12)


def test_green_sum_empty_correction_table():
    pts, ax, f, kph, c1, logr0, dlogr, _, h3 = _green_args()
    got = _kernels.green_sum_points(pts, ax, ax, ax, f, kph, c1, logr0, dlogr,
                                    np.zeros(0), h3)
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
    r = np.sqrt((pts[0, 0] - x) ** 2 + (pts[0, 1] - y) ** 2 + (pts[0, 2] - z) ** 2)
    ref = np.sum(c1 * np.exp(1j * kph * r) / r * f) * h3
    assert got[0] == pytest.approx(ref, rel=1e-12)


@needs_native
def test_herglotz_sums_backends_agree():
    pts = RNG.normal(size=(40, 3))
    nodes = RNG.normal(size=(25, 3))
    nodes /= np.linalg.norm(nodes, axis=1)[:, None]
    coef = _rand_complex(25)
    a = _kernels.herglotz_sums(pts, nodes, coef, 2.5, backend="native")
    b = _kernels.herglotz_sums(pts, nodes, coef, 2.5, backend="fallback")
    assert np.max(np.abs(a - b)) < 1e-12 * np.max(np.abs(b))


def test_herglotz_sums_against_matrix_form():
    pts = RNG.normal(size=(10, 3))
    nodes = RNG.normal(size=(7, 3))
    coef = _rand_complex(7)
    ref = np.exp(1j * 2.5 * pts @ nodes.T) @ coef
    got = _kernels.herglotz_sums(pts, nodes, coef, 2.5)
    assert np.max(np.abs(got - ref)) < 1e-12 * np.max(np.abs(ref))
