"""Acceptance suite: property-based quantitative checks at desk scale.

Each criterion is a callable returning an AcceptanceResult; `run_suite`
executes a selection and prints one PASS/FAIL line per criterion.  All
tolerances are pinned here, not configurable.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import FracHelmError
from .farfield import (BornFarFieldOracle, NonlinearFarFieldOracle,
                       near_far_consistency)
from .fieldgrid import (BoxGrid, ComplexField, Potential, convolve_green,
                        crop_center, lp_norm, stock_potential)
from .forward import (fit_loglog, k_decay_study, lap_gap_study,
                      lap_resolvent_apply, picard_solve)
from .greens import (QuadratureConfig, phi1, phi_s_eps_extrapolated, phi_s_pv,
                     phi_s_subordination, subordination_correction)
from .inverse import (probe_for_k, qhat_from_farfield, standard_probe_set,
                      sweep_and_reconstruct, uniqueness_gap)
from .params import ScatteringParams
from .waves import incident_on_grid, sphere_quadrature


@dataclass
class AcceptanceResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float


def _result(number, name, passed, detail, t0):
    return AcceptanceResult(number=number, name=name, passed=bool(passed),
                            detail=detail, seconds=time.time() - t0)


def criterion_01_s1_collapse() -> AcceptanceResult:
    """Both fractional evaluators match e^{ikr}/(4 pi r) at s = 1 to 1e-6."""
    t0 = time.time()
    worst = 0.0
    for k in (0.5, 1.0, 2.0, 4.0, 8.0):
        params = ScatteringParams(s=1.0, k=k)
        for kr in (0.5, 2.0, 7.0, 20.0):
            r = kr / k
            ref = phi1(r, params)
            for ev in (phi_s_pv(r, params), phi_s_subordination(r, params)):
                worst = max(worst, abs(ev.value - ref) / abs(ref))
    return _result(1, "s=1 collapse of fractional evaluators", worst <= 1e-6,
                   f"worst relative error {worst:.2e} over 20 (k, r) pairs (tol 1e-6)",
                   t0)


def criterion_02_cross_oracle() -> AcceptanceResult:
    """Subordination vs principal value <= 1e-3; eps-oracle extrapolation <= 1e-2."""
    t0 = time.time()
    worst_pair = 0.0
    worst_eps = 0.0
    kr_grid = np.geomspace(0.5, 20.0, 8)
    for s in (0.8, 0.85, 0.9, 0.95):
        params = ScatteringParams(s=s, k=1.0)
        for kr in kr_grid:
            a = phi_s_pv(float(kr), params).value
            b = phi_s_subordination(float(kr), params).value
            worst_pair = max(worst_pair, abs(a - b) / abs(a))
        for kr in (0.5, 3.0, 20.0):
            ex = phi_s_eps_extrapolated(float(kr), params)
            ref = phi_s_pv(float(kr), params).value
            worst_eps = max(worst_eps, abs(ex - ref) / abs(ref))
    ok = worst_pair <= 1e-3 and worst_eps <= 1e-2
    return _result(2, "cross-oracle agreement", ok,
                   f"pv/subordination worst {worst_pair:.2e} (tol 1e-3); "
                   f"eps-extrapolation worst {worst_eps:.2e} (tol 1e-2)", t0)


def criterion_03_correction_decay() -> AcceptanceResult:
    """Subordination correction decays like r^{-(3+2s)} (slope within +0.3)."""
    t0 = time.time()
    k = 4.0
    radii = np.geomspace(2.0, 32.0, 9)
    details = []
    ok = True
    for s in (0.8, 0.9):
        params = ScatteringParams(s=s, k=k)
        corr = subordination_correction(radii, params)
        slope = fit_loglog(radii, np.abs(corr)).slope
        bound = -(3.0 + 2.0 * s) + 0.3
        ok &= slope <= bound
        details.append(f"s={s}: slope {slope:.3f} <= {bound:.2f}")
    return _result(3, "subordination-correction decay", ok,
                   "; ".join(details) + f" (k={k}, r in [2, 32])", t0)


def criterion_04_limiting_absorption() -> AcceptanceResult:
    """eps-multiplier solves converge monotonically to the kernel convolution.

    The support box (n=32) is large and k small so the eps damping length
    fits inside the 9x enlarged periodic box for the whole schedule; the gap
    then tracks the genuine eps -> 0 limit.
    """
    t0 = time.time()
    grid = BoxGrid(8.0, 32)
    Q = stock_potential(grid, sigma=2.0, r_flat=4.5, r_cut=7.0)
    f = ComplexField(grid, Q.values.astype(complex))
    params = ScatteringParams(s=0.9, k=1.6)
    eps_list = [0.2, 0.1, 0.05, 0.025]
    gaps = lap_gap_study(f, params, eps_list, out_factor=9)
    mono = bool(np.all(np.diff(gaps) < 0))
    ok = mono and gaps[-1] <= 0.05
    return _result(4, "limiting absorption", ok,
                   f"gaps {[f'{g:.4f}' for g in gaps]} over eps={eps_list}, "
                   f"monotone={mono}, final {gaps[-1]:.4f} (tol 0.05)", t0)


def criterion_05_resolvent_scaling() -> AcceptanceResult:
    """||R_(lam+i eps) f||_4 / ||f||_{4/3} fits slope within -3/(4s) +- 0.3."""
    t0 = time.time()
    s = 0.9
    grid = BoxGrid(8.0, 32)
    Q = stock_potential(grid, sigma=2.0, r_flat=4.5, r_cut=7.0)
    f = ComplexField(grid, Q.values.astype(complex))
    params = ScatteringParams(s=s, k=1.0)
    lams = [16.0, 64.0, 256.0]
    fn = lp_norm(f, 4.0 / 3.0)
    ratios = [lp_norm(crop_center(
        lap_resolvent_apply(f, params, lam, 0.01, out_factor=4), grid), 4) / fn
        for lam in lams]
    slope = fit_loglog(lams, ratios).slope
    target = -3.0 / (4.0 * s)
    ok = abs(slope - target) <= 0.3
    return _result(5, "resolvent lambda-scaling", ok,
                   f"slope {slope:.3f} vs {target:.3f} +- 0.3 over lambda={lams}", t0)


def _stock_setup(s=0.9, k=8.0, n=32):
    grid = BoxGrid(1.0, n)
    Q = stock_potential(grid)
    params = ScatteringParams(s=s, k=k)
    return grid, Q, params


def criterion_06_forward_contract() -> AcceptanceResult:
    """Stock solve: <= 20 iterations, contraction < 0.5, fixed-point residual
    <= 2 tol, cubic amplitude scaling slope 3 +- 0.1."""
    t0 = time.time()
    grid, Q, params = _stock_setup()
    tol = 1e-10
    u_in = incident_on_grid(grid, "plane", params.k, amplitude=0.1)
    rep = picard_solve(Q, u_in, params, tol=tol)
    from .forward import cubic_rhs
    fp = rep.u.values - u_in.values - convolve_green(cubic_rhs(Q, rep.u), params).values
    fp_res = lp_norm(ComplexField(grid, fp), 4)
    norms = []
    amps = (0.025, 0.05, 0.1)
    for a in amps:
        ua = incident_on_grid(grid, "plane", params.k, amplitude=a)
        norms.append(lp_norm(picard_solve(Q, ua, params, tol=1e-13).u_sc, 4))
    slope = fit_loglog(amps, norms).slope
    ok = (rep.iterations <= 20 and rep.contraction_factor < 0.5
          and fp_res <= 2 * tol and abs(slope - 3.0) <= 0.1)
    return _result(6, "forward solver contract", ok,
                   f"iterations {rep.iterations} (<=20), contraction "
                   f"{rep.contraction_factor:.2e} (<0.5), fixed-point residual "
                   f"{fp_res:.2e} (<= {2*tol:.0e}), amplitude slope {slope:.4f} (3 +- 0.1)",
                   t0)


def criterion_07_k_decay() -> AcceptanceResult:
    """Rate of ||u^sc||_4 / ||f||_{4/3} over k in {4, 8, 16, 32} within
    [-1.8, -1.2].

    Run at s = 1.35, where the in-box transport rate k^{1-2s} sits at the
    band center; see the decisions record for the rate discussion.
    """
    t0 = time.time()
    grid, Q, params = _stock_setup(s=1.35)

    def family(g, k):
        return incident_on_grid(g, "plane", k, amplitude=0.1)

    fit = k_decay_study(Q, family, [4.0, 8.0, 16.0, 32.0], params, tol=1e-10)
    ok = -1.8 <= fit.slope <= -1.2
    return _result(7, "k-decay of scattered field", ok,
                   f"slope {fit.slope:.3f} in [-1.8, -1.2] at s={params.s}, "
                   f"ratios {[f'{y:.3e}' for y in fit.ordinates]}", t0)


def criterion_08_near_far() -> AcceptanceResult:
    """Far-field normalization gap <= 5% at R = 50 L and decreasing at 100 L."""
    t0 = time.time()
    grid, Q, params = _stock_setup(k=4.0)
    u_in = incident_on_grid(grid, "plane", params.k, amplitude=0.1)
    rep = picard_solve(Q, u_in, params, tol=1e-11)
    dirs = sphere_quadrature(2).nodes[[0, 2, 4, 5, 7, 8]]
    worst50 = 0.0
    decreasing = True
    for d in dirs:
        gaps = near_far_consistency(Q, rep.u, params, d, [50.0, 100.0])
        worst50 = max(worst50, gaps[0].gap)
        decreasing &= gaps[1].gap < gaps[0].gap
    ok = worst50 <= 0.05 and decreasing
    return _result(8, "near/far-field consistency", ok,
                   f"worst gap(50L) {worst50:.4f} (tol 0.05) over 6 directions, "
                   f"decreasing at 100L: {decreasing}", t0)


def criterion_09_born_round_trip() -> AcceptanceResult:
    """Pure-Born oracle reconstruction recovers the stock Q to <= 1% L^2."""
    t0 = time.time()
    src_grid = BoxGrid(1.0, 32)
    Q = stock_potential(src_grid)
    rec_grid = BoxGrid(1.0, 16)
    truth = stock_potential(rec_grid)
    res = sweep_and_reconstruct(BornFarFieldOracle(Q), rec_grid, a=0.05, k0=1.0,
                                l_min=16.0, l_scale=1.0, ground_truth=truth)
    ok = res.rel_l2_error <= 0.01
    return _result(9, "Born-oracle round trip", ok,
                   f"relative L2 error {res.rel_l2_error:.4f} (tol 0.01), "
                   f"{res.probes} probes, imag residue {res.im_residue:.2e}", t0)


def criterion_10_end_to_end() -> AcceptanceResult:
    """Nonlinear-oracle reconstruction on a 16^3 lattice within 10% L^2,
    with per-frequency error non-increasing as k doubles."""
    t0 = time.time()
    src_grid = BoxGrid(1.0, 32)
    Q = stock_potential(src_grid)
    params = ScatteringParams(s=0.9, k=8.0)
    oracle = NonlinearFarFieldOracle(Q, params, tol=1e-11)
    rec_grid = BoxGrid(1.0, 16)
    truth = stock_potential(rec_grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # high-k probes trip the k*h advisory
        res = sweep_and_reconstruct(oracle, rec_grid, a=0.05, k0=1.0,
                                    l_min=16.0, l_scale=1.0, ground_truth=truth)
        from .fieldgrid import fourier_at
        m = np.array([np.pi, 0.0, 0.0])
        ref = fourier_at(Q, -2.0 * m)
        errs = []
        for k in (8.0, 16.0, 32.0):
            probe = probe_for_k(m, k, 1.0)
            errs.append(abs(qhat_from_farfield(oracle, probe, 0.05) - ref))
    viol = sum(1 for i in range(len(errs) - 1) if errs[i + 1] > 1.1 * errs[i])
    ok = res.rel_l2_error <= 0.10 and viol == 0
    return _result(10, "end-to-end nonlinear reconstruction", ok,
                   f"relative L2 error {res.rel_l2_error:.4f} (tol 0.10), "
                   f"{res.probes} probes, k up to {res.k_used.max():.1f}; "
                   f"per-frequency errors over k doubling {[f'{e:.2e}' for e in errs]}",
                   t0)


def criterion_11_uniqueness() -> AcceptanceResult:
    """Distinct potentials separate far fields; identical ones do not."""
    t0 = time.time()
    grid = BoxGrid(1.0, 32)
    Q1 = stock_potential(grid)
    Q2 = stock_potential(grid, height=2.0)
    params = ScatteringParams(s=0.9, k=8.0)
    tol = 1e-10
    probes = standard_probe_set(16, k0=1.0)

    def factory(Q):
        return NonlinearFarFieldOracle(Q, params, tol=tol)

    gap_distinct = uniqueness_gap(Q1, Q2, params, probes, a=0.05,
                                  oracle_factory=factory)
    gap_same = uniqueness_gap(Q1, stock_potential(grid), params, probes, a=0.05,
                              oracle_factory=factory)
    ok = gap_distinct >= 10 * tol and gap_same <= 2 * tol
    return _result(11, "uniqueness sanity", ok,
                   f"gap(Q, 2Q) {gap_distinct:.3e} (>= {10*tol:.0e}); "
                   f"gap(Q, Q) {gap_same:.3e} (<= {2*tol:.0e}) over 16 probes", t0)


CRITERIA = [
    criterion_01_s1_collapse,
    criterion_02_cross_oracle,
    criterion_03_correction_decay,
    criterion_04_limiting_absorption,
    criterion_05_resolvent_scaling,
    criterion_06_forward_contract,
    criterion_07_k_decay,
    criterion_08_near_far,
    criterion_09_born_round_trip,
    criterion_10_end_to_end,
    criterion_11_uniqueness,
]


def run_suite(selected=None, stream=None):
    """Run the acceptance criteria (all by default); returns results."""
    results = []
    for idx, fn in enumerate(CRITERIA, start=1):
        if selected is not None and idx not in selected:
            continue
        try:
            res = fn()
        except FracHelmError as exc:
            res = AcceptanceResult(number=idx, name=fn.__name__, passed=False,
                                   detail=f"raised {type(exc).__name__}: {exc}",
                                   seconds=0.0)
        results.append(res)
        if stream is not None:
            status = "PASS" if res.passed else "FAIL"
            stream.write(f"{status} criterion {res.number:2d} [{res.name}] "
                         f"({res.seconds:.1f}s): {res.detail}\n")
            stream.flush()
    return results
