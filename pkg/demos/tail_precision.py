"""How far into the tails can a noncentral t CDF be trusted?

Run:  python demos/tail_precision.py

Three ways to compute P(T <= x) are set side by side on a few hard points:
the direct quadrature in ``nctail``, the classical Poisson-weighted beta
series, and a normal approximation.  The quadrature keeps full relative
precision even when the probability is 1e-272; the series and the
approximation drift or break down.
"""
from nctail import cdf
from nctail.gold import TABLE1
from nctail.reference import cdf_guenther_series, cdf_normal_approx


def rel(a, b):
    return abs(a - b) / b


print(f"{'x':>6} {'nu':>6} {'delta':>6} {'reference':>12}  {'direct':>8} {'series':>8} {'normal':>8}")
for row in TABLE1:
    direct = cdf(row.x, row.nu, row.delta).lower
    series, diag = cdf_guenther_series(row.x, row.nu, row.delta)
    approx = cdf_normal_approx(row.x, row.nu, row.delta)
    s_err = f"{rel(series, row.cdf):8.1e}" if diag.converged else "  no conv"
    print(f"{row.x:6g} {row.nu:6g} {row.delta:6g} {row.cdf:12.4e}  "
          f"{rel(direct, row.cdf):8.1e} {s_err} {rel(approx, row.cdf):8.1e}")

# The upper tail is computed natively too: 1 - lower would round to zero here.
t = cdf(40.0, 150.0, 25.0)
print(f"\nP(T > 40 | nu=150, delta=25) = {t.upper:.6e}  (native tail: {t.native_tail.value})")
