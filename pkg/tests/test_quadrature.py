import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nctail import specfun as sf
from nctail.errors import ConvergenceError, NumericError
from nctail.quadrature import GK15, adaptive, fixed_panels, gk15_panel, panel_nodes

ULP1 = math.ulp(1.0)


def test_rule_symmetry_and_weights():
    x, wk, wg = GK15.kronrod_nodes, GK15.kronrod_weights, GK15.gauss_weights
    assert x.shape == (15,) and wk.shape == (15,) and wg.shape == (7,)
    np.testing.assert_array_equal(x, -x[::-1])
    np.testing.assert_array_equal(wk, wk[::-1])
    np.testing.assert_array_equal(wg, wg[::-1])
    assert np.all(np.diff(x) > 0) and np.all(np.abs(x) < 1)
    assert abs(math.fsum(wk) - 2.0) <= 1e-15
    assert abs(math.fsum(wg) - 2.0) <= 1e-15
    assert np.all(wk > 0) and np.all(wg > 0)


def test_constant_panel():
    r = gk15_panel(lambda z: np.ones_like(z), 0.0, 1.0)
    assert r.value == 1.0
    # the QUADPACK heuristic never reports less than 50 eps |integral|
    assert r.error_estimate <= 50 * ULP1
    assert r.evaluations == 15


@pytest.mark.parametrize("k", range(0, 23))
def test_monomials_exact_to_degree_22(k):
    r = gk15_panel(lambda z: z**k, 0.0, 1.0)
    tol = 4 if k <= 13 else 8
    assert abs(r.value - 1.0 / (k + 1)) <= tol * math.ulp(1.0 / (k + 1))


def test_degree_13_on_shifted_interval():
    r = gk15_panel(lambda z: z**13, -1.0, 2.0)
    exact = (2.0**14 - 1.0) / 14.0
    assert abs(r.value - exact) <= 4 * math.ulp(exact)


def test_sine():
    assert gk15_panel(np.sin, 0.0, math.pi).value == pytest.approx(2.0, abs=1e-10)


def test_nan_integrand_names_node():
    with pytest.raises(NumericError, match="z="):
        gk15_panel(lambda z: np.where(z > 0.5, np.nan, z), 0.0, 1.0)


def test_single_panel_matches_gk15():
    f = np.cos
    a = fixed_panels(f, -0.3, 2.2, n_subs=1)
    b = gk15_panel(f, -0.3, 2.2)
    assert a.value == b.value
    assert a.error_estimate == b.error_estimate


def test_exp_sixteen_panels():
    r = fixed_panels(np.exp, 0.0, 1.0, n_subs=16)
    assert r.value == pytest.approx(math.e - 1.0, rel=1e-14)
    assert r.evaluations == 16 * 15


def test_fixed_panels_bit_reproducible():
    f = lambda z: np.exp(-z * z) * np.cos(3 * z)
    vals = {fixed_panels(f, -4.0, 4.0, n_subs=16).value for _ in range(5)}
    assert len(vals) == 1


def test_panel_nodes_ascending():
    z = panel_nodes(-2.0, 5.0, 6)
    assert z.size == 90
    assert np.all(np.diff(z.ravel()) > 0)


def test_graded_nodes_cluster_at_left_end():
    z = panel_nodes(0.0, 1.0, 4, grade=5).ravel()
    assert np.all(np.diff(z) > 0)
    assert z[0] < 1e-3 * (z[-1] - z[0])


def test_grading_resolves_endpoint_power():
    # z**0.3 has an unbounded derivative at 0, the shape of the gamma factor near -delta
    exact = 1.0 / 1.3
    plain = fixed_panels(lambda z: z**0.3, 0.0, 1.0, n_subs=16).value
    graded = fixed_panels(lambda z: z**0.3, 0.0, 1.0, n_subs=16, grade=40).value
    assert abs(graded - exact) < 1e-15
    assert abs(graded - exact) < abs(plain - exact)


@settings(max_examples=60)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 2.0))
def test_linearity(alpha, beta, width):
    f, g = np.sin, lambda z: np.exp(-z * z)
    lhs = fixed_panels(lambda z: alpha * f(z) + beta * g(z), -width, 2 * width, 8).value
    rhs = (alpha * fixed_panels(f, -width, 2 * width, 8).value
           + beta * fixed_panels(g, -width, 2 * width, 8).value)
    scale = abs(alpha) + abs(beta) + 1.0
    assert abs(lhs - rhs) <= 8 * ULP1 * scale * 3 * width


@settings(max_examples=60)
@given(st.floats(-5, 5), st.floats(0.1, 10), st.integers(1, 12))
def test_interval_additivity(a, width, n):
    f = lambda z: np.exp(-0.1 * z * z) + 0.5 * np.sin(z)
    b = a + width
    m = 0.5 * (a + b)
    whole = fixed_panels(f, a, b, 2 * n).value
    halves = fixed_panels(f, a, m, n).value + fixed_panels(f, m, b, n).value
    assert abs(whole - halves) <= 4 * math.ulp(max(abs(whole), 1e-300)) + 4 * ULP1 * width


@pytest.mark.parametrize("f, a, b", [
    (np.exp, 0.0, 1.0), (np.cos, -1.0, 2.0), (lambda z: np.sqrt(z + 3.0), -1.0, 1.0)])
def test_kronrod_and_gauss_agree(f, a, b):
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    z = mid + half * GK15.kronrod_nodes
    gauss = half * np.dot(GK15.gauss_weights, f(z[GK15.gauss_index]))
    kronrod = gk15_panel(f, a, b).value
    assert abs(kronrod - gauss) <= 1e-10 * abs(kronrod)


def test_adaptive_gaussian_mass():
    sigma = 1.7
    f = lambda z: np.exp(-0.5 * (z / sigma) ** 2)
    r = adaptive(f, -10 * sigma, 10 * sigma, rel_tol=1e-13)
    assert r.value == pytest.approx(math.sqrt(2 * math.pi) * sigma, rel=1e-13)
    assert r.error_estimate <= 1e-13 * r.value


def test_adaptive_beats_single_panel_on_spike():
    f = lambda z: 1.0 / (1e-6 + (z - 0.3) ** 2)
    exact = (math.atan(0.7 / 1e-3) + math.atan(0.3 / 1e-3)) / 1e-3
    single = gk15_panel(f, 0.0, 1.0)
    assert abs(single.value - exact) > 1e-3 * exact
    r = adaptive(f, 0.0, 1.0, rel_tol=1e-12)
    assert r.value == pytest.approx(exact, rel=1e-11)


def test_adaptive_chi_square_mass():
    f = lambda q: np.exp(sf.chi2_logpdf(q, 10.0))
    r = adaptive(f, 0.0, 200.0, rel_tol=1e-13)
    assert r.value == pytest.approx(sf.reg_gamma_lower(5.0, 100.0), abs=1e-12)


def test_adaptive_budget_exhausted():
    with pytest.raises(ConvergenceError) as info:
        adaptive(lambda z: np.sin(1.0 / z), 1e-9, 1.0, rel_tol=1e-15, max_panels=20)
    assert info.value.best is not None
