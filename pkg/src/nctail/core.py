"""Noncentral t distribution by direct quadrature.

For x > 0 the CDF is written as an integral over the standard normal
variable z,

    P(T <= x) = Phi(-delta) + int_{-delta}^inf Q(nu/2, nu (z + delta)^2 / (2 x^2)) phi(z) dz
    P(T >  x) =               int_{-delta}^inf P(nu/2, nu (z + delta)^2 / (2 x^2)) phi(z) dz

with Q/P the regularized upper/lower incomplete gamma functions.  The
lower tail is integrated when ``x <= delta`` and the upper tail otherwise,
so the small tail is always the one computed directly.  Negative x is
handled by reflection, ``F(x; nu, delta) = 1 - F(-x; nu, -delta)``.

Each integral is cut down to a short window ``[A, B]`` outside which the
integrand is negligible; the part where the gamma factor is 1 to working
precision is added in closed form, and the rest is integrated with a
fixed number of (G7, K15) panels.
"""
import enum
import functools
import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from . import specfun as sf
from .errors import ConvergenceError, DomainError, RangeError
from .quadrature import fixed_panels
from .specfun import (LN2, LOG_SQRT_2PI, TINY_FLOAT, _gamma_p, _gamma_q, _log_gamma_p,
                      _log_gamma_q, _norm_cdf, _norm_inv, _norm_pdf)

_LOG_2PI = 2.0 * LOG_SQRT_2PI
_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


class Tail(enum.Enum):
    """Which tail probability was evaluated directly."""

    LOWER = "lower"
    UPPER = "upper"
    EXACT = "exact"


@dataclass(frozen=True)
class NctParams:
    """Evaluation point ``x``, degrees of freedom ``nu`` and noncentrality ``delta``."""

    x: float
    nu: float
    delta: float

    def __post_init__(self):
        for name in ("x", "nu", "delta"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.nu <= 0.0:
            raise DomainError(f"nu must be positive, got {self.nu!r}")


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerances for the CDF algorithm and the root finders.

    ``eps_r`` is the relative tolerance that decides where the integration
    window is cut; ``r_eps0`` is the smallest normal double, whose normal
    quantile ``z_floor`` (about -37.5194) bounds every window.
    """

    eps_r: float = 1e-16
    r_eps0: float = TINY_FLOAT
    n_subs: int = 16
    solver_xtol: float = 4e-16
    max_iter: int = 300
    z_floor: float = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.eps_r < 1.0:
            raise DomainError(f"eps_r must be in (0, 1), got {self.eps_r!r}")
        if not 0.0 < self.r_eps0 < 0.5:
            raise DomainError(f"r_eps0 must be in (0, 0.5), got {self.r_eps0!r}")
        if int(self.n_subs) != self.n_subs or self.n_subs < 1:
            raise DomainError(f"n_subs must be a positive integer, got {self.n_subs!r}")
        object.__setattr__(self, "n_subs", int(self.n_subs))
        object.__setattr__(self, "z_floor", _norm_inv(self.r_eps0))


DEFAULT_CONFIG = ToleranceConfig()


@dataclass(frozen=True)
class IntegrationWindow:
    """Integration limits for one CDF evaluation.

    ``head`` is the closed-form part: ``Phi(A1)`` for the lower tail, or
    ``1 - Phi(B1)`` for the upper tail, where ``A1``/``B1`` bound the range
    on which the gamma factor equals 1 to within ``eps_r``.  ``a``/``b`` are
    the quadrature limits.  ``log_eps_a`` is the log of the absolute
    integrand level at which the window was cut.
    """

    a: float
    b: float
    tail: Tail
    analytic_head: float
    log_eps_a: float
    z_mod: float
    degenerate: bool = False
    clamped_a: bool = False
    clamped_b: bool = False

    @property
    def eps_a(self):
        return math.exp(self.log_eps_a)


@dataclass(frozen=True)
class TailProbability:
    """Both tails of the CDF at one point.

    ``native_tail`` names the value that was computed directly (and so
    carries full relative precision); the other one is its complement.
    ``reflected`` is set when x < 0 was mapped to ``(-x, nu, -delta)``.
    """

    lower: float
    upper: float
    native_tail: Tail
    quad_error: float = 0.0
    reflected: bool = False
    window: IntegrationWindow = field(default=None, repr=False, compare=False)

    @property
    def native_value(self):
        return self.upper if self.native_tail is Tail.UPPER else self.lower


# ---------------------------------------------------------------------------
# integrands
# ---------------------------------------------------------------------------

# Below this the gamma argument s = nu (z + delta)^2 / (2 x^2) is replaced by
# the leading term P(a, s) = s^a / Gamma(a + 1), evaluated from log s, so
# that |x| up to ~1e300 does not underflow s.
_S_SMALL = 1e-280


@nb.njit(cache=True)
def _log_p_small(u, nu):
    a = 0.5 * nu
    return a * (math.log(0.5 * nu) + 2.0 * math.log(abs(u))) - math.lgamma(a + 1.0)


@nb.njit(cache=True)
def _gamma_arg(z, x, nu, delta):
    u = (z + delta) / x
    # clamp before squaring (the compiled branch may evaluate both arms, and
    # an overflowing product would raise the floating-point flag)
    cap = 1e154 / math.sqrt(0.5 * nu)
    uc = min(abs(u), cap)
    s = 0.5 * nu * uc * uc
    return u, math.inf if uc == cap else s


@nb.njit(cache=True)
def _log_gamma_factor(z, x, nu, delta, upper):
    u, s = _gamma_arg(z, x, nu, delta)
    if s < _S_SMALL and u != 0.0:
        lp = _log_p_small(u, nu)
        return lp if upper else math.log1p(-math.exp(lp))
    if upper:
        return _log_gamma_p(0.5 * nu, s)
    return _log_gamma_q(0.5 * nu, s)


@nb.njit(cache=True)
def _gamma_factor(z, x, nu, delta, upper):
    u, s = _gamma_arg(z, x, nu, delta)
    if s < _S_SMALL and u != 0.0:
        pv = math.exp(_log_p_small(u, nu))
        return pv if upper else 1.0 - pv
    if upper:
        return _gamma_p(0.5 * nu, s)
    return _gamma_q(0.5 * nu, s)


@nb.vectorize(["float64(float64, float64, float64, float64)"], cache=True)
def _g_lower(z, x, nu, delta):
    return _gamma_factor(z, x, nu, delta, False) * _norm_pdf(z)


@nb.vectorize(["float64(float64, float64, float64, float64)"], cache=True)
def _g_upper(z, x, nu, delta):
    return _gamma_factor(z, x, nu, delta, True) * _norm_pdf(z)


@nb.njit(cache=True)
def _log_g_lower(z, x, nu, delta):
    return _log_gamma_factor(z, x, nu, delta, False) - 0.5 * z * z - LOG_SQRT_2PI


@nb.njit(cache=True)
def _log_g_upper(z, x, nu, delta):
    return _log_gamma_factor(z, x, nu, delta, True) - 0.5 * z * z - LOG_SQRT_2PI


def _params(x, nu, delta):
    if isinstance(x, NctParams):
        return x
    return NctParams(x, nu, delta)


def integrand_g(z, x, nu=None, delta=None):
    """Lower-tail integrand ``Q(nu/2, nu (z+delta)^2 / (2x^2)) * phi(z)``.

    Vectorized over ``z``; requires x > 0.
    """
    p = _params(x, nu, delta)
    if p.x <= 0.0:
        raise DomainError("integrand_g needs x > 0")
    out = _g_lower(np.asarray(z, dtype=float), p.x, p.nu, p.delta)
    return float(out) if np.ndim(out) == 0 else out


def integrand_g_upper(z, x, nu=None, delta=None):
    """Upper-tail integrand, the lower-incomplete-gamma counterpart of :func:`integrand_g`."""
    p = _params(x, nu, delta)
    if p.x <= 0.0:
        raise DomainError("integrand_g_upper needs x > 0")
    out = _g_upper(np.asarray(z, dtype=float), p.x, p.nu, p.delta)
    return float(out) if np.ndim(out) == 0 else out


@nb.njit(cache=True)
def _h_scalar(z, x, nu, delta):
    nu2 = nu - 2.0 if nu > 2.0 else 1.0
    cap = 1e154 / math.sqrt(nu)
    w = min(abs(z + delta) / x, cap)
    if w == 0.0 or w == cap:
        return -math.inf
    q = nu * w * w
    return -LN2 - 0.5 * (q - nu - nu2 * math.log(q / nu) + math.log(nu) + _LOG_2PI + z * z)


@nb.vectorize(["float64(float64, float64, float64, float64)"], cache=True)
def _h(z, x, nu, delta):
    return _h_scalar(z, x, nu, delta)


def log_integrand_h(z, x, nu=None, delta=None):
    """Closed-form approximation of ``log(integrand_g(z))``.

    Built from the chi-square tail lower bound
    ``P(chi2_nu > q) >= exp(-(q - nu - (nu-2) log(q/nu) + log nu) / 2) / 2``
    with ``q = nu (z + delta)^2 / x^2``.  For nu <= 2 the factor ``nu - 2``
    is replaced by 1.  Returns ``-inf`` at ``z = -delta``.
    """
    p = _params(x, nu, delta)
    if p.x <= 0.0:
        raise DomainError("log_integrand_h needs x > 0")
    out = _h(np.asarray(z, dtype=float), p.x, p.nu, p.delta)
    return float(out) if np.ndim(out) == 0 else out


def _h_curvature(z, p):
    nu2 = p.nu - 2.0 if p.nu > 2.0 else 1.0
    w = z + p.delta
    if w == 0.0:
        return -math.inf
    return -(p.nu / p.x / p.x + nu2 / (w * w) + 1.0)


def _golden_max(fun, lo, hi, iters=60):
    """Maximize a unimodal function on [lo, hi] by golden-section search."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    return c if fc >= fd else d


def _outer_limits(p, cfg):
    return max(-p.delta, cfg.z_floor), -cfg.z_floor


def mode_zmod(x, nu=None, delta=None, config=None):
    """Closed-form estimate of the maximizer of the lower-tail integrand.

    The stationary point of :func:`log_integrand_h`, clamped into
    ``[max(-delta, z_floor), -z_floor]``.  ``h`` is strictly concave
    (``h'' = -(nu/x^2 + (nu-2)/(z+delta)^2 + 1)``), so clamping gives the
    constrained maximizer; a golden-section search on ``h`` is used only
    when the closed form is not finite.
    """
    p = _params(x, nu, delta)
    cfg = config or DEFAULT_CONFIG
    if p.x <= 0.0:
        raise DomainError("mode_zmod needs x > 0")
    x, nu, d = p.x, p.nu, p.delta
    nu2 = nu - 2.0 if nu > 2.0 else 1.0
    # the closed form divided through by x^2, so huge x cannot overflow
    r = nu / x / x
    z = (-d * (1.0 + 2.0 * r) + math.sqrt(4.0 * nu2 * r + d * d + 4.0 * nu2)) / (2.0 * (1.0 + r))
    lo, hi = _outer_limits(p, cfg)
    if lo >= hi:
        return lo
    if not math.isfinite(z):
        z = _golden_max(lambda t: _h_scalar(t, p.x, p.nu, p.delta), lo, hi)
    return min(max(z, lo), hi)


@nb.njit(cache=True)
def _log_g(upper, z, x, nu, delta):
    if upper:
        return _log_g_upper(z, x, nu, delta)
    return _log_g_lower(z, x, nu, delta)


@nb.njit(cache=True)
def _golden_log_g(upper, lo, hi, x, nu, delta):
    """Golden-section maximizer of the exact log integrand on [lo, hi]."""
    golden = 0.5 * (math.sqrt(5.0) - 1.0)
    a, b = lo, hi
    c = b - golden * (b - a)
    d = a + golden * (b - a)
    fc = _log_g(upper, c, x, nu, delta)
    fd = _log_g(upper, d, x, nu, delta)
    for _ in range(60):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - golden * (b - a)
            fc = _log_g(upper, c, x, nu, delta)
        else:
            a, c, fc = c, d, fd
            d = a + golden * (b - a)
            fd = _log_g(upper, d, x, nu, delta)
    return c if fc >= fd else d


@nb.njit(cache=True)
def _crossing(upper, target, start, inner, limit, tol, x, nu, delta):
    """Locate where the log-concave log integrand drops to ``target``,
    moving from ``inner`` (above target) towards ``limit``.

    Returns ``(z, clamped)`` with ``log g(z) <= target`` unless the search
    hit ``limit`` first, in which case ``clamped`` is true.
    """
    direction = 1.0 if limit > inner else -1.0
    if (start - limit) * direction >= 0.0:
        start = limit
    if (start - inner) * direction <= 0.0:
        start = inner + direction * tol
    if _log_g(upper, start, x, nu, delta) > target:
        step = abs(start - inner)
        inside = start
        while True:
            step *= 2.0
            cand = start + direction * step
            if (cand - limit) * direction >= 0.0:
                cand = limit
            if _log_g(upper, cand, x, nu, delta) <= target:
                outside = cand
                break
            if cand == limit:
                return limit, True
            inside = cand
    else:
        inside, outside = inner, start
    for _ in range(200):
        if abs(outside - inside) <= tol:
            break
        mid = 0.5 * (inside + outside)
        if _log_g(upper, mid, x, nu, delta) > target:
            inside = mid
        else:
            outside = mid
    return outside, False


@functools.lru_cache(maxsize=256)
def _chi2_upper_quantile(eps_r, nu):
    return sf.chi2_quantile_exact(eps_r, nu, upper=True)


@functools.lru_cache(maxsize=256)
def _chi2_lower_quantile(eps_r, nu):
    # The closed-form approximation is conservative (below the true
    # quantile) for nu >= 2 but overshoots badly for small nu, e.g. 4.9
    # instead of ~1e-50 at nu = 0.65; cap it with the exact quantile.
    return min(sf.chi2_quantile_approx_inglot(eps_r, nu),
               sf.chi2_quantile_exact(eps_r, nu))


def window(x, nu=None, delta=None, config=None):
    """Integration window for the tail that :func:`cdf` integrates at x > 0.

    Lower tail (``x <= delta``):

    1. ``[A0, B0] = [max(-delta, z_floor), -z_floor]``;
    2. ``A1 = x sqrt(q / nu) - delta`` with ``q`` the closed-form
       ``eps_r``-quantile of chi-square, capped by the exact quantile
       (below ``A1`` the gamma factor is 1);
    3. ``log eps_a = h(z_mod) + log eps_r`` (capped by the exact integrand
       at ``z_mod``);
    4. ``A2, B2`` from the quadratic expansion of ``h`` about ``z_mod``,
       then moved onto the points where the exact integrand equals
       ``eps_a``;
    5. ``[A, B] = [max(A1, A2), min(B0, B2)]`` and head ``Phi(A1)``.

    The upper tail mirrors this: ``B1`` comes from the exact upper
    ``eps_r``-quantile of chi-square, the mode is found by golden-section
    search on the exact log integrand, and the head is ``1 - Phi(B1)``.
    """
    p = _params(x, nu, delta)
    cfg = config or DEFAULT_CONFIG
    if p.x <= 0.0:
        raise DomainError("window needs x > 0")
    if p.x <= p.delta:
        return _window_lower(p, cfg)
    return _window_upper(p, cfg)


def _window_lower(p, cfg):
    x, nu, d = p.x, p.nu, p.delta
    a0, b0 = _outer_limits(p, cfg)
    q = _chi2_lower_quantile(cfg.eps_r, nu)
    a1 = max(a0, x * math.sqrt(q / nu) - d)
    head = _norm_cdf(a1)
    if a1 >= b0:
        return IntegrationWindow(a1, a1, Tail.LOWER, head, -math.inf, a1, degenerate=True)

    zm = mode_zmod(p, config=cfg)
    zm = min(max(zm, a1), b0)
    lg = _log_g_lower(zm, x, nu, d)
    hm = _h_scalar(zm, x, nu, d)
    # h is -inf at z = -delta, where the mode clamps for tiny x
    peak = min(hm, lg) if math.isfinite(hm) else lg
    if not math.isfinite(peak):
        return IntegrationWindow(a1, a1, Tail.LOWER, head, -math.inf, zm, degenerate=True)
    log_eps_a = peak + math.log(cfg.eps_r)
    curv = _h_curvature(zm, p)
    if math.isfinite(curv) and curv < 0.0 and math.isfinite(log_eps_a) and math.isfinite(hm):
        half = math.sqrt(2.0 * (log_eps_a - hm) / curv)
        a_est, b_est = zm - half, zm + half
    else:
        a_est, b_est = a1, b0
    tol = 1e-9 * max(1.0, b0 - a1)
    a, clamped_a = _crossing(False, log_eps_a, a_est, zm, a1, tol, x, nu, d)
    b, clamped_b = _crossing(False, log_eps_a, b_est, zm, b0, tol, x, nu, d)
    return IntegrationWindow(a, b, Tail.LOWER, head, log_eps_a, zm,
                             degenerate=not a < b, clamped_a=clamped_a, clamped_b=clamped_b)


def _window_upper(p, cfg):
    x, nu, d = p.x, p.nu, p.delta
    a0, b0 = _outer_limits(p, cfg)
    qu = _chi2_upper_quantile(cfg.eps_r, nu)
    b1 = min(b0, x * math.sqrt(qu / nu) - d)
    if b1 <= a0:
        top = max(a0, b1)
        return IntegrationWindow(top, top, Tail.UPPER, _norm_cdf(-top), -math.inf, top,
                                 degenerate=True)
    head = _norm_cdf(-b1)

    zm = _golden_log_g(True, a0, b1, x, nu, d)
    lg = _log_g_upper(zm, x, nu, d)
    log_eps_a = lg + math.log(cfg.eps_r)
    step = 1e-3 * max(1.0, abs(zm))
    curv = math.nan
    if a0 < zm - step and zm + step < b1:
        curv = (_log_g_upper(zm + step, x, nu, d) - 2.0 * lg + _log_g_upper(zm - step, x, nu, d)) / (step * step)
    if math.isfinite(curv) and curv < 0.0 and math.isfinite(lg):
        half = math.sqrt(2.0 * (log_eps_a - lg) / curv)
        a_est, b_est = zm - half, zm + half
    else:
        a_est, b_est = a0, b1
    if not math.isfinite(lg):
        return IntegrationWindow(zm, zm, Tail.UPPER, head, -math.inf, zm, degenerate=True)
    tol = 1e-9 * max(1.0, b1 - a0)
    a, clamped_a = _crossing(True, log_eps_a, a_est, zm, a0, tol, x, nu, d)
    b, clamped_b = _crossing(True, log_eps_a, b_est, zm, b1, tol, x, nu, d)
    return IntegrationWindow(a, b, Tail.UPPER, head, log_eps_a, zm,
                             degenerate=not a < b, clamped_a=clamped_a, clamped_b=clamped_b)


# ---------------------------------------------------------------------------
# CDF
# ---------------------------------------------------------------------------

def quadrature_plan(p, win, n_subs):
    """Return ``(a, b, grade)`` for the fixed-panel rule over a window.

    Near ``z = -delta`` both integrands are ``(z + delta)**nu`` times a
    smooth function.  For non-integer nu this point is singular, and when
    the window starts within one panel width of it the panels are unable
    to resolve the integrand.  In that case the integration starts at
    ``-delta`` itself (the added piece lies below ``eps_a``) and the first
    panel is split geometrically ``grade`` times, which leaves about
    ``2**(-grade (nu + 1))`` of the first panel's share in the innermost one.
    """
    a, b = win.a, win.b
    if win.degenerate or p.nu == math.floor(p.nu):
        return a, b, 0
    gap = a + p.delta
    if gap < 0.0 or gap > (b - a) / n_subs:
        return a, b, 0
    return -p.delta, b, math.ceil(56.5 / (p.nu + 1.0))


def _cdf_positive(p, cfg):
    win = window(p, config=cfg)
    integral = 0.0
    err = 0.0
    if not win.degenerate:
        g = _g_lower if win.tail is Tail.LOWER else _g_upper
        a, b, grade = quadrature_plan(p, win, cfg.n_subs)
        res = fixed_panels(lambda z: g(z, p.x, p.nu, p.delta), a, b, cfg.n_subs, grade=grade)
        integral, err = res.value, res.error_estimate
    tail = win.analytic_head + integral
    if win.tail is Tail.LOWER:
        return TailProbability(tail, 1.0 - tail, Tail.LOWER, err, window=win)
    return TailProbability(1.0 - tail, tail, Tail.UPPER, err, window=win)


def cdf(x, nu=None, delta=None, config=None):
    """CDF of the noncentral t distribution at ``x``, both tails.

    Accepts either ``cdf(x, nu, delta)`` or ``cdf(NctParams(...))``.

    >>> t = cdf(1.0, 1.0, 0.0)
    >>> t.lower, t.upper
    (0.75, 0.25)
    """
    p = _params(x, nu, delta)
    cfg = config or DEFAULT_CONFIG
    if p.x == 0.0:
        return TailProbability(_norm_cdf(-p.delta), _norm_cdf(p.delta), Tail.EXACT)
    if p.x > 0.0:
        return _cdf_positive(p, cfg)
    r = _cdf_positive(NctParams(-p.x, p.nu, -p.delta), cfg)
    native = {Tail.LOWER: Tail.UPPER, Tail.UPPER: Tail.LOWER}[r.native_tail]
    return TailProbability(r.upper, r.lower, native, r.quad_error, reflected=True,
                           window=r.window)


def cdf_lower(x, nu, delta, config=None):
    """``P(T <= x)`` as a float."""
    return cdf(x, nu, delta, config).lower


def cdf_upper(x, nu, delta, config=None):
    """``P(T > x)`` as a float."""
    return cdf(x, nu, delta, config).upper


# ---------------------------------------------------------------------------
# PDF
# ---------------------------------------------------------------------------

# Gamma(a + 1/2) / Gamma(a) ~ sqrt(a) * sum_k c_k a^-k
_HALF_RATIO_SERIES = (1.0, -1.0 / 8, 1.0 / 128, 5.0 / 1024, -21.0 / 32768,
                      -399.0 / 262144, 869.0 / 4194304)


def _half_gamma_ratio(a):
    # a difference of lgamma values loses ~3e-14 near a = 50; instead shift a
    # past 100 with Gamma(a + 3/2) / Gamma(a + 1) = (a + 1/2) / a * ratio(a)
    scale = 1.0
    while a < 100.0:
        scale *= a / (a + 0.5)
        a += 1.0
    s = 0.0
    for c in reversed(_HALF_RATIO_SERIES):
        s = s / a + c
    return scale * math.sqrt(a) * s


def pdf(x, nu=None, delta=None, config=None):
    """Density of the noncentral t distribution.

    Uses ``f(x) = (nu/x) [F_{nu+2,delta}(x sqrt(1 + 2/nu)) - F_{nu,delta}(x)]``
    away from zero, taking both CDF values on the same side (the lower
    tails when ``F <= 1/2``, the upper tails otherwise) so the difference
    is formed between full-precision numbers.  At ``x = 0`` the closed form
    ``Gamma((nu+1)/2) / (Gamma(nu/2) sqrt(pi nu)) exp(-delta^2/2)`` is used.
    """
    p = _params(x, nu, delta)
    cfg = config or DEFAULT_CONFIG
    if p.x == 0.0:
        return (_half_gamma_ratio(0.5 * p.nu) / math.sqrt(math.pi * p.nu)
                * math.exp(-0.5 * p.delta * p.delta))
    base = cdf(p, config=cfg)
    shifted = cdf(p.x * math.sqrt(1.0 + 2.0 / p.nu), p.nu + 2.0, p.delta, cfg)
    if base.lower <= 0.5:
        diff = shifted.lower - base.lower
    else:
        diff = base.upper - shifted.upper
    return max(0.0, p.nu / p.x * diff)


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------

def _check_prob(prob, name="prob"):
    prob = float(prob)
    if not 0.0 < prob < 1.0:
        raise DomainError(f"{name} must be in (0, 1), got {prob!r}")
    return prob


def _normal_approx_quantile(prob, nu, delta, upper):
    """Invert ``Phi((x c - delta) / sqrt(1 + x^2 / (2 nu)))`` for x, c = 1 - 1/(4 nu)."""
    z = sf.norm_inv(1.0 - prob if upper and prob > 0.5 else prob)
    if upper and prob <= 0.5:
        z = -sf.norm_inv(prob)
    c = 1.0 - 0.25 / nu
    qa = c * c - z * z / (2.0 * nu)
    qb = -2.0 * c * delta
    qc = delta * delta - z * z
    roots = []
    if qa != 0.0:
        disc = qb * qb - 4.0 * qa * qc
        if disc >= 0.0:
            s = math.sqrt(disc)
            roots = [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)]
    elif qb != 0.0:
        roots = [-qc / qb]
    # keep the root on the branch whose standardized value has the sign of z
    for r in roots:
        if math.isfinite(r) and (r * c - delta) * z >= 0.0:
            return r
    return delta + z


class _LogTail:
    """Residual ``log(tail(x)) - log(target)`` for a quantile search.

    Works on whichever tail holds the smaller probability and flips the
    sign so the residual always increases with x.
    """

    def __init__(self, prob, nu, delta, upper, cfg):
        self.nu, self.delta, self.cfg = nu, delta, cfg
        self.upper = upper if prob <= 0.5 else not upper
        self.target = math.log(prob) if prob <= 0.5 else math.log1p(-prob)
        self.sign = -1.0 if self.upper else 1.0

    def _tail(self, x, nu):
        t = cdf(x, nu, self.delta, self.cfg)
        return t.upper if self.upper else t.lower

    def __call__(self, x):
        v = self._tail(x, self.nu)
        r = (math.log(v) if v > 0.0 else -math.inf) - self.target
        return self.sign * r, v

    def slope(self, x, v):
        """d(residual)/dx at x, given the tail value ``v`` there.

        Uses ``pdf / tail = (nu/x) (T' / T - 1)`` with ``T'`` the same
        tail at ``(x sqrt(1 + 2/nu), nu + 2)``, which stays finite when
        the density itself underflows.
        """
        if v <= 0.0:
            return math.nan
        if x == 0.0:
            return pdf(0.0, self.nu, self.delta, self.cfg) / v
        t2 = self._tail(x * math.sqrt(1.0 + 2.0 / self.nu), self.nu + 2.0)
        return self.sign * (self.nu / x) * (t2 / v - 1.0)


def quantile(prob, nu, delta, config=None, upper=False):
    """Solve ``P(T <= x) = prob`` for x (or ``P(T > x) = prob`` with ``upper=True``).

    Newton's method on the log of the smaller tail in the variable
    ``u = asinh(x)``, which is linear near zero and logarithmic in the
    heavy tails (where x can pass 1e150 for small nu).  Steps that leave
    a known bracket fall back to bisection in u.  Starts from the
    inverted normal approximation.

    Raises
    ------
    ConvergenceError
        After ``config.max_iter`` iterations; carries the last iterate and
        the bracket in x.
    """
    prob = _check_prob(prob)
    p = NctParams(0.0, nu, delta)
    cfg = config or DEFAULT_CONFIG
    fun = _LogTail(prob, p.nu, p.delta, upper, cfg)

    x = _normal_approx_quantile(prob, p.nu, p.delta, upper)
    if not math.isfinite(x):
        x = p.delta
    u = math.asinh(x)
    lo = hi = None  # u values with residual < 0 and > 0
    r_lo = r_hi = math.inf
    step = 1.0
    for _ in range(cfg.max_iter):
        r, v = fun(x)
        if r == 0.0:
            return x
        if r < 0.0 and (lo is None or u > lo):
            lo, r_lo = u, r
        elif r > 0.0 and (hi is None or u < hi):
            hi, r_hi = u, r
        if lo is not None and hi is not None:
            x_lo, x_hi = math.sinh(lo), math.sinh(hi)
            if (x_hi - x_lo <= cfg.solver_xtol * max(abs(x_lo), abs(x_hi))
                    or not lo < 0.5 * (lo + hi) < hi):
                return x_lo if abs(r_lo) <= abs(r_hi) else x_hi
        d = fun.slope(x, v) * math.cosh(u)
        ok = math.isfinite(r) and math.isfinite(d) and d > 0.0
        un = u - r / d if ok else math.nan
        if lo is not None and hi is not None:
            if not lo < un < hi:
                un = 0.5 * (lo + hi)
        elif lo is None:
            # only points above the root so far
            if not (math.isfinite(un) and un < u):
                un = u - step
                step *= 2.0
        elif not (math.isfinite(un) and un > u):
            un = u + step
            step *= 2.0
        xn = math.sinh(un)
        if abs(xn - x) <= 0.5 * cfg.solver_xtol * abs(x) or xn == x:
            return xn
        x, u = xn, un
    raise ConvergenceError(
        f"quantile(prob={prob!r}, nu={p.nu!r}, delta={p.delta!r}) did not converge "
        f"in {cfg.max_iter} iterations", best=x,
        bracket=(None if lo is None else math.sinh(lo), None if hi is None else math.sinh(hi)))


def _brent_rtol(cfg):
    return max(cfg.solver_xtol, 4.0 * np.finfo(float).eps)


def _clipped(v):
    # brentq needs finite values; the sign is all that matters far from the root
    return min(max(v, -1e4), 1e4)


def _tail_residual(prob):
    """Return ``(use_upper, log_target)`` for matching the smaller tail."""
    if prob <= 0.5:
        return False, math.log(prob)
    return True, math.log1p(-prob)


def _log_or_ninf(v):
    return math.log(v) if v > 0.0 else -math.inf


def solve_delta(x, nu, prob, config=None):
    """Noncentrality ``delta`` with ``P(T <= x; nu, delta) = prob``.

    The CDF is strictly decreasing in delta, so a bracket is grown around
    the normal-approximation estimate and the root refined by Brent's
    method on the log of the smaller tail.

    Raises
    ------
    RangeError
        If no bracket exists with ``|delta| <= 1e4``.
    """
    from scipy.optimize import brentq

    prob = _check_prob(prob)
    p = NctParams(x, nu, 0.0)
    cfg = config or DEFAULT_CONFIG
    if p.x == 0.0:
        return -sf.norm_inv(prob)
    use_upper, target = _tail_residual(prob)

    def resid(d):
        t = cdf(p.x, p.nu, d, cfg)
        # increasing in delta: the upper tail grows, the lower tail shrinks
        if use_upper:
            return _clipped(_log_or_ninf(t.upper) - target)
        return _clipped(target - _log_or_ninf(t.lower))

    limit = 1e4
    c = 1.0 - 0.25 / p.nu
    d0 = p.x * c - math.hypot(1.0, p.x / math.sqrt(2.0 * p.nu)) * sf.norm_inv(prob)
    d0 = min(max(d0, -limit), limit)
    # resid increases with delta; find r(lo) < 0 < r(hi)
    r0 = resid(d0)
    if r0 == 0.0:
        return d0
    step = 1.0
    a = d0
    while True:
        b = a + step if r0 < 0.0 else a - step
        b = min(max(b, -limit), limit)
        rb = resid(b)
        if (rb > 0.0) == (r0 < 0.0) or rb == 0.0:
            break
        if abs(b) >= limit:
            raise RangeError(
                f"no delta in [-{limit:g}, {limit:g}] gives P(T <= {p.x!r}) = {prob!r} "
                f"for nu={p.nu!r}")
        a = b
        step *= 2.0
    if rb == 0.0:
        return b
    lo, hi = (a, b) if a < b else (b, a)
    return brentq(resid, lo, hi, xtol=1e-300, rtol=_brent_rtol(cfg), maxiter=cfg.max_iter)


def solve_nu(x, delta, prob, config=None):
    """Degrees of freedom ``nu`` with ``P(T <= x; nu, delta) = prob``.

    The CDF is not monotone in nu in general, so ``[1e-2, 1e7]`` is
    scanned on a logarithmic grid for the first sign change, which is then
    refined by Brent's method in ``log nu``.

    Raises
    ------
    RangeError
        If no sign change is found on the scan range.
    """
    from scipy.optimize import brentq

    prob = _check_prob(prob)
    p = NctParams(x, 1.0, delta)
    cfg = config or DEFAULT_CONFIG
    use_upper, target = _tail_residual(prob)

    def resid(log_nu):
        t = cdf(p.x, math.exp(log_nu), p.delta, cfg)
        v = t.upper if use_upper else t.lower
        return _clipped(_log_or_ninf(v) - target)

    grid = np.linspace(math.log(1e-2), math.log(1e7), 121)
    prev_t, prev_r = grid[0], resid(grid[0])
    if prev_r == 0.0:
        return math.exp(prev_t)
    for t in grid[1:]:
        r = resid(t)
        if r == 0.0:
            return math.exp(t)
        if (r > 0.0) != (prev_r > 0.0):
            root = brentq(resid, prev_t, t, xtol=1e-15, rtol=_brent_rtol(cfg),
                          maxiter=cfg.max_iter)
            return math.exp(root)
        prev_t, prev_r = t, r
    raise RangeError(
        f"P(T <= {p.x!r}; nu, delta={p.delta!r}) = {prob!r} is not attained "
        f"for nu in [1e-2, 1e7]")
