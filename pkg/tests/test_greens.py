"""Kernel evaluator tests: closed forms, cross-oracle agreement, decay rates.

Frozen reference values were computed with mpmath at 30 digits (closed
forms) or by seeded Monte-Carlo integration with the independent
principal-value evaluator (cell weight).
"""
import numpy as np
import pytest

from frachelm.errors import NonpositiveRadius, QuadratureNotConverged
from frachelm.greens import (DEFAULT_QUAD, QuadratureConfig, cell_self_weight,
                             kernel_eval, phi1, phi_s_eps_oracle,
                             phi_s_eps_extrapolated, phi_s_farfield, phi_s_pv,
                             phi_s_subordination, s3_kernel,
                             subordination_correction)
from frachelm.params import ScatteringParams

SQRT_2_OVER_PI = 0.7978845608028654  # sqrt(2/pi), 30-digit value rounded


def test_s3_kernel_at_zero():
    # continuous limit 2^{-1/2}/Gamma(3/2) = sqrt(2/pi)
    assert s3_kernel(0.0) == pytest.approx(SQRT_2_OVER_PI, rel=1e-14)


def test_s3_kernel_at_pi():
    assert abs(s3_kernel(np.pi)) < 1e-15


def test_s3_kernel_at_one():
    # sqrt(2/pi) * sin(1), extended-precision reference
    assert s3_kernel(1.0) == pytest.approx(0.671396707141803, rel=1e-14)


def test_s3_kernel_series_branch_matches_formula():
    # the small-t series must join the sin(t)/t branch smoothly
    for t in (1e-5, 5e-5, 9.9e-5, 1.01e-4, 2e-4):
        exact = SQRT_2_OVER_PI * np.sin(t) / t
        assert s3_kernel(t) == pytest.approx(exact, rel=1e-14)


def test_s3_kernel_bounded_by_value_at_zero():
    t = np.linspace(0.0, 40.0, 1000)
    assert np.all(np.abs(s3_kernel(t)) <= s3_kernel(0.0) + 1e-15)


def test_s3_kernel_rejects_negative():
    with pytest.raises(ValueError):
        s3_kernel(-1.0)


class TestPhi1:
    def test_full_period_phase(self):
        params = ScatteringParams(s=1.0, k=2.0 * np.pi)
        val = phi1(1.0, params)
        assert val == pytest.approx(1.0 / (4.0 * np.pi), abs=1e-15)

    def test_small_k_expansion(self):
        params = ScatteringParams(s=1.0, k=1e-4)
        val = phi1(2.0, params)
        assert val.real == pytest.approx(1.0 / (8.0 * np.pi), rel=1e-7)
        # Im e^{ikr}/(4 pi r) ~ k/(4 pi) independently of r
        assert val.imag == pytest.approx(1e-4 / (4.0 * np.pi), rel=1e-7)

    def test_unit_arguments(self):
        params = ScatteringParams(s=1.0, k=1.0)
        val = phi1(1.0, params)
        assert val.real == pytest.approx(0.042995891371431804, rel=1e-12)
        assert val.imag == pytest.approx(0.066962133350290946, rel=1e-12)

    def test_branch_conjugates(self):
        plus = phi1(0.7, ScatteringParams(s=1.0, k=3.0, branch=+1))
        minus = phi1(0.7, ScatteringParams(s=1.0, k=3.0, branch=-1))
        assert minus == pytest.approx(np.conj(plus), rel=1e-15)

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(NonpositiveRadius):
            phi1(0.0, ScatteringParams(s=1.0, k=1.0))
        with pytest.raises(NonpositiveRadius):
            phi1(-2.0, ScatteringParams(s=1.0, k=1.0))


class TestSubordination:
    def test_s1_collapses_to_phi1(self):
        params = ScatteringParams(s=1.0, k=3.0)
        for r in (0.2, 1.0, 7.0):
            ev = phi_s_subordination(r, params)
            assert ev.value == pytest.approx(phi1(r, params), rel=1e-14)
            assert ev.est_error == 0.0

    def test_cross_oracle_against_pv(self):
        params = ScatteringParams(s=0.9, k=1.0)
        a = phi_s_subordination(5.0, params).value
        b = phi_s_pv(5.0, params).value
        assert abs(a - b) / abs(a) < 1e-4

    def test_correction_decay_rate(self):
        # fitted log-log slope of the correction over a dyadic r ladder;
        # k = 4 puts the window into the r^{-(3+2s)} regime
        s = 0.85
        params = ScatteringParams(s=s, k=4.0)
        radii = np.array([2.0, 4.0, 8.0, 16.0])
        corr = subordination_correction(radii, params)
        slope = np.polyfit(np.log(radii), np.log(np.abs(corr)), 1)[0]
        assert slope <= -(3.0 + 2.0 * s) + 0.3

    def test_correction_is_real_and_single_signed(self):
        params = ScatteringParams(s=0.8, k=2.0)
        corr = subordination_correction(np.geomspace(0.1, 30, 40), params)
        assert np.all(corr > 0)  # sin(s pi) > 0 below s = 1

    def test_unconverged_raises(self):
        # coarse Laplace grid so the nested halves visibly disagree
        tight = QuadratureConfig(laplace_nodes=16, rel_tol=1e-14)
        with pytest.raises(QuadratureNotConverged):
            phi_s_subordination(2.0, ScatteringParams(s=0.8, k=1.0), tight)


class TestPrincipalValue:
    def test_s1_matches_closed_form(self):
        # backed by P.V. int t sin(at)/(t^2-1) dt = (pi/2) cos a
        params = ScatteringParams(s=1.0, k=1.0)
        for r in (0.5, 1.0, 4.0, 18.0):
            ev = phi_s_pv(r, params)
            assert abs(ev.value - phi1(r, params)) / abs(phi1(r, params)) < 1e-6

    def test_cross_oracle_s_above_one(self):
        params = ScatteringParams(s=1.2, k=2.0)
        a = phi_s_pv(3.0, params).value
        b = phi_s_subordination(3.0, params).value
        assert abs(a - b) / abs(a) < 1e-4

    def test_cross_oracle_near_origin(self):
        # both routes must capture the r^{2s-3} blowup; check deep into it
        params = ScatteringParams(s=0.85, k=1.0)
        for r in (1e-3, 1e-2):
            a = phi_s_pv(r, params).value
            b = phi_s_subordination(r, params).value
            assert abs(a - b) / abs(a) < 1e-6
        # the real part grows like r^{2s-3} = r^{-1.3}
        v1 = phi_s_pv(1e-3, params).value.real
        v2 = phi_s_pv(1e-2, params).value.real
        assert np.log10(v1 / v2) == pytest.approx(3 - 2 * params.s, abs=0.05)

    def test_imaginary_part_is_sphere_term(self):
        # Im Phi_s = (k^{2(1-s)}/s) sin(kr)/(4 pi r): positive for kr in (0, pi)
        params = ScatteringParams(s=0.85, k=1.0)
        for r in (0.5, 1.5, 3.0):
            ev = phi_s_pv(r, params)
            analytic = params.k ** (2 * (1 - params.s)) / params.s \
                * np.sin(params.k * r) / (4.0 * np.pi * r)
            assert ev.value.imag == pytest.approx(analytic, rel=1e-9)
            assert ev.value.imag > 0

    def test_wavenumber_homogeneity(self):
        # value(k, r) * k^{-(3-2s)} depends on kr alone
        s = 0.9
        g1 = phi_s_pv(4.0, ScatteringParams(s=s, k=1.0)).value
        g2 = phi_s_pv(2.0, ScatteringParams(s=s, k=2.0)).value * 2.0 ** -(3 - 2 * s)
        assert g2 == pytest.approx(g1, rel=1e-9)

    def test_est_error_nonnegative_finite(self):
        ev = phi_s_pv(2.5, ScatteringParams(s=1.3, k=1.5))
        assert ev.est_error >= 0 and np.isfinite(ev.value)


class TestEpsOracle:
    def test_converges_to_pv_as_eps_shrinks(self):
        params = ScatteringParams(s=0.9, k=1.0)
        ref = phi_s_pv(2.0, params).value
        errs = [abs(phi_s_eps_oracle(2.0, params, eps) - ref)
                for eps in (0.2, 0.1, 0.05)]
        assert errs[0] > errs[1] > errs[2]

    def test_s1_limit(self):
        params = ScatteringParams(s=1.0, k=1.0)
        val = phi_s_eps_oracle(np.array([1.0, 0.0, 0.0]), params, 1e-3)
        assert abs(val - phi1(1.0, params)) < 1e-2 * abs(phi1(1.0, params))

    def test_damping_beats_one_over_r(self):
        # with the pole off the axis, |Phi_eps| decays faster than 1/r
        params = ScatteringParams(s=0.9, k=1.0)
        v1 = abs(phi_s_eps_oracle(5.0, params, 0.3))
        v2 = abs(phi_s_eps_oracle(10.0, params, 0.3))
        assert v2 < v1 * (5.0 / 10.0)

    def test_extrapolation_accuracy(self):
        params = ScatteringParams(s=0.95, k=1.0)
        ref = phi_s_pv(3.0, params).value
        ex = phi_s_eps_extrapolated(3.0, params)
        assert abs(ex - ref) / abs(ref) < 1e-2

    def test_rejects_bad_eps(self):
        with pytest.raises(ValueError):
            phi_s_eps_oracle(1.0, ScatteringParams(s=0.9, k=1.0), 0.0)


class TestFarfieldForm:
    def test_s1_identity(self):
        params = ScatteringParams(s=1.0, k=2.0)
        assert phi_s_farfield(3.0, params) == pytest.approx(phi1(3.0, params))

    def test_modulus(self):
        params = ScatteringParams(s=0.9, k=2.0)
        r = 7.0
        expect = params.k ** (2 * (1 - params.s)) / params.s / (4.0 * np.pi * r)
        assert abs(phi_s_farfield(r, params)) == pytest.approx(expect, rel=1e-14)

    def test_matches_pv_at_large_r(self):
        params = ScatteringParams(s=0.9, k=2.0)
        exact = phi_s_pv(50.0, params).value
        asym = phi_s_farfield(50.0, params)
        assert abs(exact - asym) / abs(asym) < 0.05


def test_kernel_eval_dispatch():
    params = ScatteringParams(s=0.9, k=1.0)
    assert kernel_eval(1.0, params).method == "subordination"
    assert kernel_eval(1.0, ScatteringParams(s=1.2, k=1.0)).method == "principal-value"
    assert kernel_eval(1.0, params, method="pv").method == "principal-value"
    for method in ("auto", "pv", "eps", "asymptotic"):
        ev = kernel_eval(1.0, params, method=method)
        assert ev.est_error >= 0.0 and np.isfinite(ev.est_error)


def test_kernel_eval_asymptotic_error_is_correction():
    # the asymptotic form's error estimate must bound its actual deviation
    params = ScatteringParams(s=0.85, k=2.0)
    for r in (3.0, 10.0):
        asym = kernel_eval(r, params, method="asymptotic")
        exact = phi_s_pv(r, params).value
        assert abs(asym.value - exact) <= 1.5 * asym.est_error


def test_params_validation():
    with pytest.raises(ValueError):
        ScatteringParams(s=0.5, k=1.0)
    with pytest.raises(ValueError):
        ScatteringParams(s=1.6, k=1.0)
    with pytest.raises(ValueError):
        ScatteringParams(s=0.9, k=-1.0)
    with pytest.raises(ValueError):
        ScatteringParams(s=0.9, k=1.0, branch=2)
    ScatteringParams(s=0.85, k=2.0, k0=1.0).require_inversion()
    with pytest.raises(ValueError):
        ScatteringParams(s=0.78, k=2.0).require_inversion()


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(pv_window=1.5)
    with pytest.raises(ValueError):
        QuadratureConfig(tail_cut=1.2)
    with pytest.raises(ValueError):
        QuadratureConfig(eps=-1.0)


def test_cell_self_weight_against_monte_carlo():
    # seeded 1.2M-sample Monte Carlo with the principal-value evaluator gave
    # 0.0033469(26) + 8.83e-5 i at s=0.9, k=1, h=0.1
    w = cell_self_weight(ScatteringParams(s=0.9, k=1.0), 0.1)
    assert w.real == pytest.approx(0.0033469, abs=1.2e-5)
    # Im converges to k^{3-2s} h^3/(4 pi s) as kh -> 0
    assert w.imag == pytest.approx(1e-3 / (4.0 * np.pi * 0.9), rel=2e-3)
