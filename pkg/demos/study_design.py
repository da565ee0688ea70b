"""Planning a one-sample t test with the noncentral t distribution.

Run:  python demos/study_design.py

Under an effect size d, the one-sample t statistic with n observations is
noncentral t with nu = n - 1 and delta = d sqrt(n).  Power is an upper tail
probability, so sizing a study means solving for nu (or delta) with the
other parameters fixed.
"""
import math

from nctail import cdf, quantile, solve_delta, solve_nu
from nctail import specfun as sf

alpha, effect = 0.05, 0.5

print(f"one-sided alpha = {alpha}, effect size d = {effect}")
print(f"{'n':>5} {'critical t':>11} {'power':>8}")
for n in (10, 20, 30, 40, 60):
    nu = n - 1.0
    crit = quantile(1.0 - alpha, nu, 0.0)
    power = cdf(crit, nu, effect * math.sqrt(n)).upper
    print(f"{n:5d} {crit:11.5f} {power:8.4f}")

# How large must the noncentrality be for 80% power with n = 25?
nu = 24.0
crit = quantile(1.0 - alpha, nu, 0.0)
delta = solve_delta(crit, nu, 0.2)
print(f"\nn = 25: 80% power needs delta = {delta:.6f}, i.e. d = {delta / 5:.4f}")

# Extreme tails behave: a replication p-value of 1e-40 under the null,
# and the noncentrality that makes it the median outcome.
crit = quantile(1e-40, 50.0, 0.0, upper=True)
print(f"t with upper tail 1e-40 at nu = 50: {crit:.6f}")
print(f"delta putting it at the median: {solve_delta(crit, 50.0, 0.5):.6f}")
print(f"(normal-theory critical value: {-sf.norm_inv(1e-40):.6f})")

# Degrees of freedom at which P(T <= 1 | delta = 5) reaches 1e-4.  As nu grows
# this probability falls toward Phi(-4) = 3.2e-5, so smaller targets have no solution.
print(f"nu with P(T <= 1 | delta = 5) = 1e-4: {solve_nu(1.0, 5.0, 1e-4):.6f}")
