import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from nctail import (ConvergenceError, DomainError, NctParams, RangeError, Tail,
                    ToleranceConfig, cdf, integrand_g, integrand_g_upper, log_integrand_h,
                    mode_zmod, pdf, quantile, solve_delta, solve_nu, window)
from nctail import specfun as sf
from nctail.gold import FIGURE1, TABLE1
from oracles import central_t_lower, rel

# (x, nu, delta) -> (lower, upper), mpmath quadrature of Phi(x sqrt(q/nu) - delta)
# against the chi-square density at 40 digits, frozen.
MPMATH_CDF = {
    (2.0, 10.0, 1.0): (0.80761156253037526203, 0.19238843746962475123),
    (0.5, 3.5, -1.0): (0.92547202067682393581, 0.074527979323176063442),
    (7.0, 4.0, 3.0): (0.92544961619228582483, 0.074550383807714171169),
    (20.0, 50.0, 12.0): (0.99989452512467255225, 0.0001054748753274477454),
    (3.0, 7.0, 2.0): (0.75725940263121571558, 0.24274059736878428328),
    (1.5, 0.8, 0.3): (0.71688748129709783312, 0.28311251870290216059),
    (0.3, 1.7, 2.5): (0.013429093918682121843, 0.98657090608131792209),
    (40.0, 150.0, 25.0): (0.99999999979078971016, 2.0921028984047237039e-10),
    (1e-3, 2.0, 0.5): (0.30884963645587327533, 0.69115036354412673347),
    (1.0, 10.0, 8.0): (3.9146860614872910787e-12, 0.99999999999608535362),
    (0.5, 20.0, 6.0): (2.0219953823568242008e-8, 0.9999999797800461776),
    (60.0, 30.0, 20.0): (0.99999999923613789523, 7.6386210477077921102e-10),
    (2.5, 1.2, -3.0): (0.9999123818182405528, 0.000087618181759447201582),
}

# central t lower tails from mpmath betainc
MPMATH_CENTRAL = {(1.0, 1.0): 0.75, (2.5, 1.3): 0.84975660536464588204,
                  (10.0, -2.0): 0.036694017385370182809, (100.0, 3.0): 0.99829604232833527523}


class TestTypes:
    @pytest.mark.parametrize("args", [(1.0, 0.0, 0.0), (1.0, -2.0, 0.0), (math.nan, 1.0, 0.0),
                                      (1.0, math.inf, 0.0), (1.0, 1.0, math.inf)])
    def test_params_reject(self, args):
        with pytest.raises(DomainError):
            NctParams(*args)

    def test_config_defaults(self):
        cfg = ToleranceConfig()
        assert cfg.eps_r == 1e-16 and cfg.n_subs == 16
        assert cfg.r_eps0 == pytest.approx(2.2251e-308, rel=1e-4)
        assert cfg.z_floor == pytest.approx(-37.5194, abs=1e-3)

    @pytest.mark.parametrize("kw", [dict(eps_r=0.0), dict(eps_r=1.0), dict(n_subs=0)])
    def test_config_reject(self, kw):
        with pytest.raises(DomainError):
            ToleranceConfig(**kw)


class TestIntegrand:
    def test_at_minus_delta(self):
        assert integrand_g(-15.0, 5.0, 100.0, 15.0) == pytest.approx(sf.norm_pdf(-15.0), rel=1e-15)
        assert integrand_g_upper(-15.0, 5.0, 100.0, 15.0) == 0.0

    def test_vanishes_far_out(self):
        assert integrand_g(30.0, 5.0, 100.0, 15.0) == 0.0

    def test_lower_plus_upper_is_phi(self):
        z = np.linspace(-10, 10, 41)
        total = integrand_g(z, 2.0, 7.5, 1.0) + integrand_g_upper(z, 2.0, 7.5, 1.0)
        np.testing.assert_allclose(total, sf.norm_pdf(z), rtol=1e-15, atol=1e-300)

    def test_accepts_params_object(self):
        p = NctParams(5.0, 100.0, 15.0)
        assert integrand_g(-1.0, p) == integrand_g(-1.0, 5.0, 100.0, 15.0)

    def test_needs_positive_x(self):
        with pytest.raises(DomainError):
            integrand_g(0.0, -1.0, 3.0, 0.0)

    def test_figure1_integral(self):
        from nctail.quadrature import fixed_panels
        w = window(FIGURE1.x, FIGURE1.nu, FIGURE1.delta)
        r = fixed_panels(lambda z: integrand_g(z, 5.0, 100.0, 15.0), w.a, w.b, 6)
        assert rel(r.value, FIGURE1.cdf - w.analytic_head) < 1e-12


class TestLogIntegrand:
    def test_minus_infinity_at_minus_delta(self):
        assert log_integrand_h(-15.0, 5.0, 100.0, 15.0) == -math.inf

    def test_nu_at_most_two_substitution(self):
        # for nu <= 2 the (nu - 2) factor is 1; the nu = 2 and nu = 2.0001 forms
        # otherwise share every term
        z, x, d = 0.7, 1.3, 2.0
        q = lambda nu: nu * (z + d) ** 2 / x**2
        def manual(nu, nu2):
            return -math.log(2) - 0.5 * (q(nu) - nu - nu2 * math.log(q(nu) / nu) + math.log(nu)
                                         + math.log(2 * math.pi) + z * z)
        assert log_integrand_h(z, x, 2.0, d) == pytest.approx(manual(2.0, 1.0), rel=1e-14)
        assert log_integrand_h(z, x, 2.0001, d) == pytest.approx(manual(2.0001, 1e-4), rel=1e-14)
        assert log_integrand_h(z, x, 3.0, d) == pytest.approx(manual(3.0, 1.0), rel=1e-14)

    def test_peak_proxy_within_factor_ten(self):
        z = np.linspace(-15.0, 37.5, 200_001)
        gmax = integrand_g(z, 5.0, 100.0, 15.0).max()
        hz = math.exp(log_integrand_h(mode_zmod(5.0, 100.0, 15.0), 5.0, 100.0, 15.0))
        assert 0.1 < hz / gmax < 10.0


class TestMode:
    def test_near_dense_argmax_of_g(self):
        # the closed form maximizes the bound-based h, which peaks 0.07 away from g
        z = np.linspace(-15.0, 0.0, 1_000_001)
        zstar = z[np.argmax(integrand_g(z, 5.0, 100.0, 15.0))]
        assert abs(mode_zmod(5.0, 100.0, 15.0) - zstar) < 0.1

    def test_h_argmax_exact(self):
        z = np.linspace(-15.0, 0.0, 1_000_001)
        zstar = z[np.argmax(log_integrand_h(z, 5.0, 100.0, 15.0))]
        assert abs(mode_zmod(5.0, 100.0, 15.0) - zstar) < 1e-3

    @pytest.mark.parametrize("x, nu, d", [(1.0, 1e6, 0.0), (1000.0, 1000.0, 1000.0),
                                          (1e-8, 3.0, -50.0), (1e200, 0.5, 3.0)])
    def test_within_bounds(self, x, nu, d):
        zm = mode_zmod(x, nu, d)
        lo = max(-d, -37.5194)
        assert math.isfinite(zm)
        # when -delta is beyond 37.52 the clamp interval is empty; z_mod sits at -delta
        assert lo - 1e-4 <= zm <= max(lo, 37.5194) + 1e-4


class TestWindow:
    @settings(max_examples=150, deadline=None)
    @given(st.floats(1e-3, 200), st.floats(0.05, 1e3), st.floats(-200, 200))
    def test_bounds_and_endpoint_levels(self, x, nu, d):
        w = window(x, nu, d)
        lo = max(-d, -37.5194)
        assert w.a <= w.b
        assert lo - 1e-4 <= w.a
        assert w.b <= max(lo, 37.5194) + 1e-4
        if lo > 37.5194:
            assert w.degenerate
        assert 0.0 <= w.analytic_head <= 1.0
        if w.degenerate:
            return
        g = integrand_g if w.tail is Tail.LOWER else integrand_g_upper
        if not w.clamped_a:
            assert g(w.a, x, nu, d) <= w.eps_a * (1 + 1e-6)
        if not w.clamped_b:
            assert g(w.b, x, nu, d) <= w.eps_a * (1 + 1e-6)

    def test_tail_selection(self):
        assert window(1.0, 5.0, 2.0).tail is Tail.LOWER
        assert window(2.0, 5.0, 2.0).tail is Tail.LOWER
        assert window(2.5, 5.0, 2.0).tail is Tail.UPPER
        assert window(0.1, 5.0, -3.0).tail is Tail.UPPER

    def test_figure1_geometry(self):
        w = window(5.0, 100.0, 15.0)
        assert w.tail is Tail.LOWER
        assert -15.0 <= w.a < w.z_mod < w.b < 37.5194
        assert integrand_g(w.a, 5.0, 100.0, 15.0) <= w.eps_a * (1 + 1e-6)
        assert integrand_g(w.b, 5.0, 100.0, 15.0) <= w.eps_a * (1 + 1e-6)


class TestCdf:
    @pytest.mark.parametrize("row", TABLE1, ids=lambda r: f"{r.x:g},{r.nu:g},{r.delta:g}")
    def test_table1(self, row):
        t = cdf(row.x, row.nu, row.delta)
        assert rel(t.lower, row.cdf) <= 1e-12

    @pytest.mark.parametrize("n_subs", [6, 16])
    def test_figure1(self, n_subs):
        t = cdf(5.0, 100.0, 15.0, ToleranceConfig(n_subs=n_subs))
        assert rel(t.lower, 2.640405806735035e-21) <= 1e-12

    @pytest.mark.parametrize("key", sorted(MPMATH_CDF))
    def test_against_mpmath(self, key):
        lo, up = MPMATH_CDF[key]
        t = cdf(*key)
        native, ref = (t.lower, lo) if t.native_tail is Tail.LOWER else (t.upper, up)
        assert rel(native, ref) <= 1e-13
        assert abs(t.lower - lo) <= 1e-15 and abs(t.upper - up) <= 1e-15

    def test_zero_is_exact(self):
        t = cdf(0.0, 4.0, 2.5)
        assert t.native_tail is Tail.EXACT
        assert t.lower == sf.norm_cdf(-2.5) and t.upper == sf.norm_cdf(2.5)

    def test_negative_x_reflects(self):
        t = cdf(-35.0, 1.0, 35.0)
        assert t.reflected and t.native_tail is Tail.LOWER
        assert rel(t.lower, 7.31501102529248499e-272) <= 1e-12
        u = cdf(35.0, 1.0, -35.0)
        assert (t.lower, t.upper) == (u.upper, u.lower)

    def test_tails_sum_to_one(self):
        for key in MPMATH_CDF:
            t = cdf(*key)
            assert abs(t.lower + t.upper - 1.0) <= 4 * sf.EPS
            assert t.quad_error >= 0.0

    @pytest.mark.parametrize("key, ref", sorted(MPMATH_CENTRAL.items()))
    def test_central_frozen(self, key, ref):
        nu, x = key
        assert rel(cdf(x, nu, 0.0).lower, ref) <= 1e-13

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-50, 50), st.sampled_from([1.0, 2.5, 10.0, 100.0]))
    def test_central_incomplete_beta(self, x, nu):
        assume(x != 0.0)
        t = cdf(x, nu, 0.0)
        assert rel(t.lower, central_t_lower(x, nu)) <= 1e-13

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-100, 100), st.floats(0.01, 1e3), st.floats(-1e3, 1e3))
    def test_reflection(self, x, nu, d):
        a = cdf(x, nu, d)
        b = cdf(-x, nu, -d)
        if min(a.lower, a.upper) >= 1e-15:
            assert abs(a.lower + b.lower - 1.0) <= 4 * sf.EPS
        if x != 0.0:
            assert a.native_value == (b.upper if a.native_tail is Tail.LOWER else b.lower)

    @pytest.mark.parametrize("nu, d", [(3.0, 2.0), (0.7, 5.0), (40.0, -1.0), (10.0, 30.0)])
    def test_monotone_in_x_across_switch(self, nu, d):
        xs = np.concatenate([np.linspace(-5, d + 5, 400), [d]])
        xs.sort()
        ts = [cdf(float(v), nu, d) for v in xs]
        for t0, t1 in zip(ts, ts[1:]):
            slack = t0.quad_error + t1.quad_error + 4 * math.ulp(max(t0.lower, t1.lower))
            assert t1.lower >= t0.lower - slack

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.1, 50), st.floats(0.5, 200), st.floats(-30, 30), st.floats(0.01, 3))
    def test_monotone_in_delta(self, x, nu, d, step):
        a, b = cdf(x, nu, d), cdf(x, nu, d + step)
        assert b.lower <= a.lower * (1 + 1e-13) + 1e-300
        assert b.upper >= a.upper * (1 - 1e-13)

    def test_huge_x(self):
        t = cdf(1e250, 0.5, 3.0)
        assert 0.0 < t.upper < 1.0 and math.isfinite(t.lower)


class TestPdf:
    def test_cauchy_at_zero(self):
        assert pdf(0.0, 1.0, 0.0) == pytest.approx(1 / math.pi, rel=1e-15)

    def test_closed_form_at_zero(self):
        ref = 0.0042170494031317116375  # Gamma(3)/(sqrt(5 pi) Gamma(2.5)) e^-4.5
        assert rel(pdf(0.0, 5.0, 3.0), ref) <= 1e-14

    def test_finite_difference(self):
        h = 1e-5
        fd = (cdf(2 + h, 10.0, 1.0).lower - cdf(2 - h, 10.0, 1.0).lower) / (2 * h)
        assert rel(pdf(2.0, 10.0, 1.0), fd) <= 1e-6

    def test_tail_density_stays_positive(self):
        v = pdf(-35.0, 1.0, 35.0)
        assert 0.0 < v < 1e-250

    def test_integrates_to_cdf_difference(self):
        from nctail.quadrature import adaptive
        f = np.vectorize(lambda t: pdf(t, 6.0, 2.0))
        r = adaptive(f, 0.5, 4.0, rel_tol=1e-11)
        ref = cdf(4.0, 6.0, 2.0).lower - cdf(0.5, 6.0, 2.0).lower
        assert rel(r.value, ref) <= 1e-10


class TestQuantile:
    def test_at_phi_minus_delta(self):
        assert abs(quantile(sf.norm_cdf(-1.5), 7.0, 1.5)) <= 1e-12

    def test_table_row_one(self):
        assert quantile(0.75, 1.0, 0.0) == pytest.approx(1.0, rel=1e-12)

    def test_figure1(self):
        assert quantile(2.640405806735035e-21, 100.0, 15.0) == pytest.approx(5.0, rel=1e-9)

    def test_upper_flag(self):
        x = quantile(2.0921028984047237039e-10, 150.0, 25.0, upper=True)
        assert x == pytest.approx(40.0, rel=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, -1.0, 1.5])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            quantile(p, 3.0, 0.0)

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError) as info:
            quantile(1e-200, 3.0, 1.0, ToleranceConfig(max_iter=2))
        assert info.value.best is not None

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-30, 30), st.floats(0.5, 200), st.floats(-20, 20))
    def test_round_trip_moderate(self, x, nu, d):
        t = cdf(x, nu, d)
        assume(1e-250 <= t.lower <= 0.5)
        assert quantile(t.lower, nu, d) == pytest.approx(x, rel=1e-9, abs=1e-12)


class TestSolvers:
    def test_delta_at_zero(self):
        assert solve_delta(0.0, 5.0, 0.3) == pytest.approx(-sf.norm_inv(0.3), rel=1e-12)

    def test_delta_figure1(self):
        assert solve_delta(5.0, 100.0, 2.640405806735035e-21) == pytest.approx(15.0, abs=1e-8)

    def test_delta_table_row_eight(self):
        assert solve_delta(1.0, 10.0, 7.95914542988750673e-19) == pytest.approx(10.0, abs=1e-8)

    def test_delta_residual(self):
        d = solve_delta(3.0, 4.0, 0.2)
        assert abs(cdf(3.0, 4.0, d).lower - 0.2) <= 1e-12

    def test_delta_out_of_range(self):
        with pytest.raises(RangeError):
            # subnormal target: below the window floor for every delta
            solve_delta(1.0, 3.0, 1e-320)

    def test_nu_table_row_seven(self):
        assert solve_nu(1.0, 5.0, 4.34725285650591657e-5) == pytest.approx(10.0, rel=1e-6)

    def test_nu_table_row_thirteen(self):
        assert solve_nu(50.0, 75.0, 4.99615060338271916e-11) == pytest.approx(100.0, rel=1e-6)

    def test_nu_unattainable(self):
        # at x = 1, delta = 0 the CDF lies in (0.75, Phi(1)) for every nu
        with pytest.raises(RangeError):
            solve_nu(1.0, 0.0, 0.5)
