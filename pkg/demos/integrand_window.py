"""A look inside one CDF evaluation.

Run:  python demos/integrand_window.py [x nu delta]

The CDF is an integral of g(z) = Q(nu/2, nu (z + delta)^2 / (2 x^2)) phi(z).
For x = 5, nu = 100, delta = 15 the integrand peaks near z = -10 and is
negligible almost everywhere else.  The window routine finds that region,
the part left of it is added in closed form, and a handful of fixed
Gauss-Kronrod panels do the rest.  This script prints the window and a
coarse text plot of g on it.
"""
import sys

import numpy as np

from nctail import ToleranceConfig, cdf, integrand_g, mode_zmod, window

x, nu, delta = (float(v) for v in sys.argv[1:4]) if len(sys.argv) == 4 else (5.0, 100.0, 15.0)

win = window(x, nu, delta)
print(f"x={x:g} nu={nu:g} delta={delta:g}")
print(f"  mode estimate z_mod      {mode_zmod(x, nu, delta):.6f}")
print(f"  window [A, B]            [{win.a:.6f}, {win.b:.6f}]")
print(f"  closed-form head         {win.analytic_head:.3e}")

z = np.linspace(win.a, win.b, 25)
g = integrand_g(z, x, nu, delta)
peak = g.max()
for zi, gi in zip(z, g):
    bar = "#" * int(round(50 * gi / peak)) if peak > 0 else ""
    print(f"  {zi:9.4f} {gi:10.3e} {bar}")

for n in (1, 2, 6, 16):
    t = cdf(x, nu, delta, ToleranceConfig(n_subs=n))
    print(f"  {n:2d} panels: P(T <= x) = {t.lower:.16e}")
