"""Monte Carlo for the stochastic equation driven by space-time white noise.

Run with ``python3 demos/monte_carlo.py`` (about 15 s).
"""

from fracspde import moments as mo, simulator as sm

# beta = 1/2, rho(u) = u, u0 = 1. Each replicate uses its own counter-based
# stream, so results do not depend on batch size.
cfg = sm.SimConfig(0.5, 1.0, 64, 10.0, 128, probes=(0.0, 2.0), replicates=400, seed=7)
res = sm.simulate(cfg)
est = sm.estimate_moments(res, 2)

# The discrete scheme has its own deterministic second moment; the sample mean
# should agree with it within sampling error.
exact = sm.scheme_second_moment(cfg)
rho = mo.RhoSpec(1.0, 0.0, 1.0, 0.0)
one = mo.InitialMeasure.constant(1.0)
print(" t     MC E u^2 (x=0)   scheme     lower     upper")
for n in (15, 31, 63):
    t = (n + 1) * cfg.dt
    lo = mo.second_moment_lower(0.5, rho, one, t, 0.0)
    up = mo.moment_upper(0.5, 2, rho, one, None, t, 0.0)
    m, se = est.mean_power[n][0], est.std_err[n][0]
    print(f"{t:5.3f}  {m:.4f} +/- {se:.4f}  {exact[n]:.4f}  {lo:.4f}  {up:.4f}")

# A crude growth-rate fit on this short window.
slope, ci = sm.estimate_lyapunov(est, (0.25, 1.0))
print(f"\nfitted growth rate of log E u^2 on [0.25, 1]: {slope:.3f} +/- {ci:.3f}")
