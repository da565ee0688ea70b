"""Independent CDF algorithms for cross-checking the direct method.

* :func:`cdf_guenther_series` sums the classical Poisson-mixture series of
  incomplete beta functions.  Its cost grows with ``delta**2`` and it
  loses accuracy for large noncentrality, which is the point of keeping it.
* :func:`cdf_normal_approx` is the cheap closed-form approximation.
* :func:`cdf_oracle_quadrature` integrates the normal CDF against the
  chi-square density with adaptive quadrature in the log domain.  It
  shares no window logic with :mod:`nctail.core`.
"""
import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import specfun as sf
from .core import NctParams, Tail
from .errors import DomainError
from .quadrature import adaptive
from .specfun import _gamma_p, _inc_beta, _norm_cdf

MAX_TERMS = 1_000_000
# Poisson weights switch to a running logarithm above this value of delta^2/2
_LOG_DOMAIN_LAMBDA = 700.0
_RESYNC_EVERY = 64
_RESYNC_DROP = 16.0


@dataclass(frozen=True)
class SeriesDiagnostics:
    """How the series ended: terms summed, whether the bound met ``tol``, and that bound."""

    terms_used: int
    converged: bool
    truncation_bound: float


@nb.njit(cache=True)
def _log_beta_term(y, a, b):
    # log of y^a (1-y)^b Gamma(a+b) / (Gamma(a+1) Gamma(b))
    return (math.lgamma(a + b) - math.lgamma(a + 1.0) - math.lgamma(b)
            + a * math.log(y) + b * math.log1p(-y))


@nb.njit(cache=True)
def _guenther(y, nu, delta, tol, max_terms):
    """Returns (series sum, terms, converged, bound).  Requires 0 < y < 1."""
    lam = 0.5 * delta * delta
    b = 0.5 * nu
    coef = delta / math.sqrt(2.0)
    log_domain = lam > _LOG_DOMAIN_LAMBDA
    log_lam = math.log(lam) if lam > 0.0 else -math.inf

    # Poisson weights P_i = e^-lam lam^i / i!, Q_i = e^-lam lam^i / Gamma(i + 3/2)
    log_p = -lam
    log_q = -lam - math.lgamma(1.5)
    p_w = math.exp(log_p)
    q_w = math.exp(log_q)

    # incomplete beta values and forward-recurrence terms for a = i + 1/2 and a = i + 1
    a1 = 0.5
    a2 = 1.0
    i1 = _inc_beta(y, a1, b)
    i2 = _inc_beta(y, a2, b)
    t1 = math.exp(_log_beta_term(y, a1, b))
    t2 = math.exp(_log_beta_term(y, a2, b))
    sync1 = i1
    sync2 = i2

    head = _norm_cdf(-delta)
    total = 0.0
    bound = math.inf
    for i in range(max_terms):
        total += p_w * i1 + coef * q_w * i2

        # advance the beta chains: I(a+1) = I(a) - T(a), T(a+1) = T(a) y (a+b)/(a+1)
        n1 = i1 - t1
        n2 = i2 - t2
        t1 *= y * (a1 + b) / (a1 + 1.0)
        t2 *= y * (a2 + b) / (a2 + 1.0)
        a1 += 1.0
        a2 += 1.0
        if ((i + 1) % _RESYNC_EVERY == 0 or n1 * _RESYNC_DROP < sync1
                or n2 * _RESYNC_DROP < sync2 or n1 <= 0.0 or n2 <= 0.0):
            n1 = _inc_beta(y, a1, b)
            n2 = _inc_beta(y, a2, b)
            t1 = math.exp(_log_beta_term(y, a1, b))
            t2 = math.exp(_log_beta_term(y, a2, b))
            sync1 = n1
            sync2 = n2
        i1 = n1
        i2 = n2

        # remaining Poisson mass times the largest remaining beta value
        rem_p = _gamma_p(i + 1.0, lam) if lam > 0.0 else 0.0
        rem_q = _gamma_p(i + 1.5, lam) if lam > 0.0 else 0.0
        bound = 0.5 * (rem_p * i1 + rem_q * i2)
        partial = head + 0.5 * total
        if bound <= tol * abs(partial) or (bound == 0.0 and i > lam):
            return partial, i + 1, True, bound

        if log_domain:
            log_p += log_lam - math.log(i + 1.0)
            log_q += log_lam - math.log(i + 1.5)
            p_w = math.exp(log_p)
            q_w = math.exp(log_q)
        else:
            p_w *= lam / (i + 1.0)
            q_w *= lam / (i + 1.5)
    return head + 0.5 * total, max_terms, False, bound


def _reflect(p):
    return NctParams(-p.x, p.nu, -p.delta)


def cdf_guenther_series(x, nu=None, delta=None, tol=1e-15, max_terms=MAX_TERMS):
    """Lower-tail CDF from the incomplete-beta series.

    ``F = Phi(-delta) + 1/2 sum_i [P_i I_y(i+1/2, nu/2) + delta/sqrt(2) Q_i I_y(i+1, nu/2)]``
    with ``y = x^2 / (nu + x^2)``.  Negative x is reflected and x = 0 is
    ``Phi(-delta)``.

    The stopping bound replaces every remaining beta value by the first
    omitted one (the values decrease in ``a``) and sums the Poisson
    weights exactly:

        bound_i = (P(i+1, lam) I_y(i+3/2, nu/2) + P(i+3/2, lam) I_y(i+2, nu/2)) / 2

    where ``P`` is the regularized lower incomplete gamma function and
    ``lam = delta^2/2``.  The series stops once ``bound_i <= tol * F_i``.

    Returns ``(value, SeriesDiagnostics)``; a series that hits
    ``max_terms`` is reported with ``converged=False``.

    >>> value, diag = cdf_guenther_series(1.0, 1.0, 0.0)
    >>> value, diag.converged
    (0.75, True)
    """
    p = x if isinstance(x, NctParams) else NctParams(x, nu, delta)
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if p.x == 0.0:
        return sf.norm_cdf(-p.delta), SeriesDiagnostics(0, True, 0.0)
    if p.x < 0.0:
        value, diag = cdf_guenther_series(_reflect(p), tol=tol, max_terms=max_terms)
        return 1.0 - value, diag
    # y as a ratio that stays accurate when x^2 dwarfs nu
    y = 1.0 / (1.0 + p.nu / (p.x * p.x))
    if y >= 1.0:
        return sf.norm_cdf(-p.delta) + 0.0, SeriesDiagnostics(0, False, math.inf)
    value, terms, converged, bound = _guenther(y, p.nu, p.delta, float(tol), int(max_terms))
    return value, SeriesDiagnostics(int(terms), bool(converged), float(bound))


def cdf_normal_approx(x, nu=None, delta=None):
    """``Phi((x (1 - 1/(4 nu)) - delta) / sqrt(1 + x^2 / (2 nu)))``."""
    p = x if isinstance(x, NctParams) else NctParams(x, nu, delta)
    z = (p.x * (1.0 - 0.25 / p.nu) - p.delta) / math.sqrt(1.0 + p.x * p.x / (2.0 * p.nu))
    return sf.norm_cdf(z)


def _log_chi2_quantile(prob, nu, upper):
    q = sf.chi2_quantile_exact(prob, nu, upper=upper)
    if q > 0.0:
        return math.log(q)
    # lower quantile below the smallest double: leading term of the series
    half = 0.5 * nu
    return (math.log(prob) + math.lgamma(half + 1.0) + half * LN2) / half


LN2 = math.log(2.0)


def cdf_oracle_quadrature(x, nu=None, delta=None, rel_tol=1e-12, upper=False,
                          full_output=False):
    """CDF as ``int_0^inf Phi(x sqrt(q/nu) - delta) f_chi2(q; nu) dq``.

    The integral runs over ``t = log q`` with the integrand handled as a
    logarithm, so tails far below the smallest double keep their
    relative precision until the final exponentiation.  The range starts
    at the chi-square ``1e-18`` and ``1 - 1e-18`` quantiles and is widened
    until the log integrand is 80 below its peak at both ends.

    With ``upper=True`` the complementary factor ``Phi(delta - x sqrt(q/nu))``
    gives ``P(T > x)`` directly.  ``full_output=True`` also returns the
    quadrature result of the scaled integrand and the log scale factor.

    Raises
    ------
    ConvergenceError
        If adaptive quadrature cannot meet ``rel_tol``.
    """
    p = x if isinstance(x, NctParams) else NctParams(x, nu, delta)
    if not rel_tol > 0.0:
        raise DomainError(f"rel_tol must be positive, got {rel_tol!r}")
    sign = -1.0 if upper else 1.0
    half = 0.5 * p.nu
    const = -half * LN2 - math.lgamma(half)
    scale = p.x / math.sqrt(p.nu)

    def log_f(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            arg = sign * (scale * np.exp(0.5 * t) - p.delta)
            out = sf._u_log_norm_cdf(arg) + half * t - 0.5 * np.exp(t) + const
        return np.where(np.isnan(out), -np.inf, out)

    t_lo = _log_chi2_quantile(1e-18, p.nu, False)
    t_hi = _log_chi2_quantile(1e-18, p.nu, True)
    for _ in range(200):
        grid = np.linspace(t_lo, t_hi, 2001)
        vals = log_f(grid)
        peak = float(vals.max())
        span = t_hi - t_lo
        grew = False
        if vals[0] > peak - 80.0:
            t_lo -= 0.5 * span
            grew = True
        if vals[-1] > peak - 80.0:
            t_hi += 0.5 * span
            grew = True
        if not grew:
            break

    if not math.isfinite(peak):
        value = 0.0
        return (value, None, peak) if full_output else value

    def scaled(t):
        return np.exp(log_f(t) - peak)

    res = adaptive(scaled, t_lo, t_hi, rel_tol=rel_tol, n_start=64, max_panels=20_000)
    value = math.exp(math.log(res.value) + peak) if res.value > 0.0 else 0.0
    if full_output:
        return value, res, peak
    return value
