"""Benchmark the compiled kernel core against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times the four hot grid kernels at production-like sizes and prints a
speedup table.  The fallback is always measured; the native column is
skipped when the extension is not built.
"""
import argparse
import time

import numpy as np

from frachelm import _kernels

RNG = np.random.default_rng(7)


def timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    n = 32
    q = RNG.normal(size=(n, n, n))
    u = RNG.normal(size=(n, n, n)) + 1j * RNG.normal(size=(n, n, n))
    yield (f"cubic_source {n}^3",
           lambda b: _kernels.cubic_source(q, u, backend=b))

    f = u.copy()
    M = 24
    px, py, pz = (np.exp(1j * RNG.normal(size=(M, n))) for _ in range(3))
    yield (f"phase_sums {n}^3 x {M} dirs",
           lambda b: _kernels.phase_sums(f, px, py, pz, backend=b))

    ax = np.linspace(-1, 1, n) + 1 / n
    pts = RNG.normal(size=(48, 3)) * 10.0 + 20.0
    corr = np.exp(-np.linspace(0, 5, 512))
    yield (f"green_sum {n}^3 x 48 pts",
           lambda b: _kernels.green_sum_points(pts, ax, ax, ax, f, 2.0,
                                               0.1 - 0.2j, np.log(0.01), 0.02,
                                               corr, 1e-3, backend=b))

    P, Mh = 32 ** 3, 289
    points = RNG.normal(size=(P, 3))
    nodes = RNG.normal(size=(Mh, 3))
    nodes /= np.linalg.norm(nodes, axis=1)[:, None]
    coef = RNG.normal(size=Mh) + 1j * RNG.normal(size=Mh)
    yield (f"herglotz_sums {P} pts x {Mh} nodes",
           lambda b: _kernels.herglotz_sums(points, nodes, coef, 3.0, backend=b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    have_native = _kernels.backend_name() == "native"
    if not have_native:
        try:
            _kernels.get_backend("native")
            have_native = True
        except (ImportError, ValueError):
            pass

    print(f"active backend: {_kernels.backend_name()}")
    hdr = f"{'kernel':38s} {'fallback':>12s} {'native':>12s} {'speedup':>9s}"
    print(hdr)
    print("-" * len(hdr))
    for name, run in cases():
        t_fb = timeit(lambda: run("fallback"), args.repeat)
        if have_native:
            t_nat = timeit(lambda: run("native"), args.repeat)
            print(f"{name:38s} {t_fb*1e3:10.2f}ms {t_nat*1e3:10.2f}ms "
                  f"{t_fb/t_nat:8.2f}x")
        else:
            print(f"{name:38s} {t_fb*1e3:10.2f}ms {'n/a':>12s} {'':>9s}")


if __name__ == "__main__":
    main()
