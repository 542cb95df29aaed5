"""Resolvent kernel K(t, x; lambda), its bounds, and the moment bounds they give.

Run with ``python3 demos/kernel_and_moments.py`` (about 20 s).
"""

from fracspde import kernel as kn, moments as mo
from fracspde.kernel import GreenHandle

# For the heat equation the kernel has a closed form. The Fourier series of the
# iterated convolutions reproduces it.
hd = GreenHandle.heat(2.0)
for t in (0.25, 1.0):
    sums, _ = kn.kernel_series_numeric(hd, 1.0, t, 0.0, 8)
    print(f"heat t={t}: series {sums[-1]:.6f}  closed form {kn.kernel_heat_exact(2.0, 1.0, t, 0.0):.6f}")

# For beta = 1/2 no closed form exists. The Mittag-Leffler bounds sandwich the series.
hd = GreenHandle.fractional(0.5)
print("\n t     x    lower      series     upper")
for t, x in ((0.5, 0.0), (1.0, 0.5)):
    sums, _ = kn.kernel_series_numeric(hd, 1.0, t, x, 6)
    lo = kn.kernel_lower(0.5, 1.0, t, x).value_bound
    up = kn.kernel_upper(0.5, 1.0, t, x).value_bound
    print(f"{t:4.1f} {x:4.1f}  {lo:.4e}  {sums[-1]:.4e}  {up:.4e}")

# Constant initial data and rho(u) = u. The second moment grows like
# exp(c t) with c between the two Lyapunov bounds, and higher moments grow faster.
rho = mo.RhoSpec(1.0, 0.0, 1.0, 0.0)
one = mo.InitialMeasure.constant(1.0)
print("\n t     lower E u^2   upper E u^2")
for t in (0.5, 2.0, 8.0):
    lo = mo.second_moment_lower(0.5, rho, one, t, 0.0)
    up = mo.moment_upper(0.5, 2, rho, one, None, t, 0.0)
    print(f"{t:4.1f}  {lo:11.4e}  {up:11.4e}")

for p in (2, 4, 8):
    up, lo = mo.lyapunov_bounds(0.5, p, rho)
    print(f"p={p}: Lyapunov exponent in [{lo:.3g}, {up:.3g}]")
