"""Monte Carlo simulation of the mild equation driven by space-time white noise.

The field lives on a uniform grid of ``n_space`` points over [-X, X).  At each
step the stochastic convolution is advanced in Fourier space:

    u(t_{n+1}) = J0(t_{n+1}) + IFFT( sum_{k<=n} g_{n+1-k}(xi) FFT(rho(u^k) dW_k) ) / dx

with left-point values u^k, zero padding to 2 n_space (so the spatial
convolution is linear, not circular) and transfer factors g_j(xi) built from
the Fourier symbol of the Green function.
"""

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import interpolate

from .errors import DivergenceError, DomainError
from .green import GreenKind, _table, as_index
from .moments import InitialMeasure, _green_cdf, j0
from .specfun import mittag_leffler_array, rgamma

DIVERGENCE_LIMIT = 1e12


class Scheme(enum.Enum):
    LEFT_POINT = "left_point"


class LagRule(enum.Enum):
    """How the Green factor of one time cell is collapsed to a single transfer value.

    VARIANCE_MATCHED: g_j(xi)^2 is the cell average of G^(s, xi)^2, so a
        constant coupling reproduces the exact variance of every cell.
    MIDPOINT: g_j = G^(j dt, xi) for j >= 2 and G^(dt/2, xi) for the newest cell.
    """

    VARIANCE_MATCHED = "variance_matched"
    MIDPOINT = "midpoint"


class Direction(enum.Enum):
    TIME = "time"
    SPACE = "space"


@dataclass(frozen=True)
class AffineRho:
    """rho(u) = slope u + intercept."""

    slope: float
    intercept: float = 0.0

    def __call__(self, u):
        return self.slope * u + self.intercept


@dataclass(frozen=True)
class TabulatedRho:
    """Piecewise-linear rho through (knots, values), extended linearly outside the table."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        if len(self.knots) < 2 or len(self.knots) != len(self.values):
            raise DomainError("need at least two (knot, value) pairs")
        if np.any(np.diff(self.knots) <= 0):
            raise DomainError("knots must be strictly increasing")

    def __call__(self, u):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        out = np.interp(u, k, v)
        lo_slope = (v[1] - v[0]) / (k[1] - k[0])
        hi_slope = (v[-1] - v[-2]) / (k[-1] - k[-2])
        out = np.where(u < k[0], v[0] + lo_slope * (u - k[0]), out)
        return np.where(u > k[-1], v[-1] + hi_slope * (u - k[-1]), out)


@dataclass(frozen=True)
class SimConfig:
    beta: float
    t_max: float
    n_time: int
    x_half_width: float
    n_space: int
    rho: Callable = AffineRho(1.0)
    initial: InitialMeasure = InitialMeasure.constant(1.0)
    nu: InitialMeasure = None
    replicates: int = 100
    seed: int = 0
    scheme: Scheme = Scheme.LEFT_POINT
    lag_rule: LagRule = LagRule.VARIANCE_MATCHED
    probes: tuple = (0.0,)
    snapshot_steps: tuple = ()
    batch: int = 64
    leakage_tol: float = 1e-4

    def __post_init__(self):
        fi = as_index(self.beta)
        object.__setattr__(self, "beta", fi.beta)
        if not self.t_max > 0 or not self.x_half_width > 0:
            raise DomainError("t_max and x_half_width must be positive")
        if self.n_time < 1 or self.n_space < 4 or self.replicates < 1 or self.batch < 1:
            raise DomainError("n_time >= 1, n_space >= 4, replicates >= 1 and batch >= 1 are required")
        if fi.beta == 2.0:
            raise DomainError("the wave case beta = 2 has a distributional Green function and is not simulated")
        if fi.slow and self.nu is not None:
            raise DomainError("the slow equation takes one initial condition; leave nu unset")
        if not fi.slow and self.nu is None:
            object.__setattr__(self, "nu", InitialMeasure.zero())
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if Scheme(self.scheme) is not Scheme.LEFT_POINT:
            raise DomainError("only the left-point scheme is available")
        object.__setattr__(self, "lag_rule", LagRule(self.lag_rule))
        for p in self.probes:
            if not -self.x_half_width <= p < self.x_half_width:
                raise DomainError(f"probe {p} lies outside the window")
        for s in self.snapshot_steps:
            if not 1 <= s <= self.n_time:
                raise DomainError(f"snapshot step {s} outside 1..{self.n_time}")
        leak = window_leakage(fi, self.t_max, self.x_half_width)
        if leak > self.leakage_tol:
            raise DomainError(
                f"Green-function mass outside the window at t_max is {leak:.2e} > {self.leakage_tol:.0e}; "
                "widen x_half_width"
            )

    @property
    def dt(self):
        return self.t_max / self.n_time

    @property
    def dx(self):
        return 2.0 * self.x_half_width / self.n_space

    @property
    def x_grid(self):
        return -self.x_half_width + self.dx * np.arange(self.n_space)

    @property
    def t_grid(self):
        return self.dt * np.arange(1, self.n_time + 1)

    @property
    def probe_indices(self):
        return np.array([int(round((p + self.x_half_width) / self.dx)) for p in self.probes], dtype=int)


def window_leakage(beta, t, half_width):
    """Fraction of the mass of G(t, .) (and G*(t, .) for fast beta) outside [-X, X]."""
    fi = as_index(beta)
    kinds = [GreenKind.PRIMARY] if fi.slow else [GreenKind.PRIMARY, GreenKind.STAR]
    worst = 0.0
    for kind in kinds:
        m = fi.ceil_beta if kind is GreenKind.PRIMARY else 1
        mass = t ** (m - 1.0)
        inside = 2.0 * float(_green_cdf(fi, kind, t, half_width))
        worst = max(worst, abs(mass - inside) / mass)
    return worst


@dataclass
class SimResult:
    """Probe time series and full-field snapshots for every replicate.

    probe_paths[r, n, p] = u(t_grid[n], probe p) for replicate r;
    snapshots[r, s, j] = u(t_grid[snapshot_steps[s] - 1], x_grid[j]).
    """

    config: SimConfig
    t_grid: np.ndarray
    x_grid: np.ndarray
    probe_x: np.ndarray
    probe_paths: np.ndarray
    snapshot_steps: tuple
    snapshots: np.ndarray
    j0_probes: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class MomentEstimate:
    t_grid: np.ndarray
    x_probe: np.ndarray
    p: int
    mean_power: np.ndarray
    std_err: np.ndarray
    replicates: int


# ---------------------------------------------------------------------------
# Fourier symbol and transfer factors
# ---------------------------------------------------------------------------


@lru_cache(maxsize=16)
def _fast_symbol_spline(beta):
    ly = np.linspace(math.log(1e-6), math.log(1e6), 4000)
    vals = mittag_leffler_array((beta, 2.0), -np.exp(ly))
    return interpolate.CubicSpline(ly, vals)


def fourier_symbol(beta, y):
    """E_{beta,m}(-y) for y >= 0, m = ceil(beta); the Green transform is s^(m-1) E(-s^beta xi^2)."""
    fi = as_index(beta)
    y = np.asarray(y, dtype=float)
    if fi.beta == 1.0:
        return np.exp(-y)
    if fi.slow:
        return _table(fi.beta, 1.0)(y)
    b = fi.beta
    out = np.empty_like(y)
    lo = y < 1e-6
    hi = y > 1e6
    mid = ~(lo | hi)
    out[lo] = rgamma(2.0) - y[lo] * rgamma(2.0 + b)
    out[mid] = _fast_symbol_spline(b)(np.log(y[mid]))
    yh = y[hi]
    out[hi] = sum(-((-yh) ** -(k + 1)) * rgamma(2.0 - b * (k + 1)) for k in range(4))
    return out


def green_symbol(beta, s, xi):
    """Fourier transform of G_beta(s, .) at xi (broadcast)."""
    fi = as_index(beta)
    s = np.asarray(s, dtype=float)
    m = fi.ceil_beta
    return s ** (m - 1.0) * fourier_symbol(fi, s**fi.beta * np.square(xi))


_GL8 = np.polynomial.legendre.leggauss(8)


def transfer_factors(beta, dt, n_time, xi, lag_rule=LagRule.VARIANCE_MATCHED):
    """g[j-1, :] = transfer for a noise cell j steps back (j = 1..n_time)."""
    fi = as_index(beta)
    xi = np.asarray(xi, dtype=float)
    j = np.arange(1, n_time + 1, dtype=float)
    if LagRule(lag_rule) is LagRule.MIDPOINT:
        lags = j * dt
        lags[0] = 0.5 * dt
        return green_symbol(fi, lags[:, None], xi[None, :])
    if fi.beta == 1.0:
        # exact cell averages of exp(-2 s xi^2)
        q = 2.0 * dt * np.square(xi)
        with np.errstate(invalid="ignore", divide="ignore"):
            g1 = np.where(q > 0, np.sqrt(-np.expm1(-q) / np.where(q > 0, q, 1.0)), 1.0)
        return np.exp(-(j - 1.0)[:, None] * dt * np.square(xi)[None, :]) * g1[None, :]
    out = np.empty((n_time, xi.size))
    # newest cell: geometric panels in s towards the s^beta cusp at 0
    edges = dt * np.geomspace(1e-12, 1.0, 41)
    edges[0] = 0.0
    a, b = edges[:-1, None], edges[1:, None]
    s = (0.5 * (b - a) * (_GL8[0] + 1.0) + a).ravel()
    w = (0.5 * (b - a) * _GL8[1]).ravel()
    sym = green_symbol(fi, s[:, None], xi[None, :])
    first_sq = (w @ np.square(sym)) / dt
    first_sign = np.sign(w @ sym)
    out[0] = first_sign * np.sqrt(first_sq)
    if n_time > 1:
        lo = (j[1:] - 1.0) * dt
        s = (lo[:, None] + 0.5 * dt * (_GL8[0] + 1.0)[None, :])  # (n_time-1, 8)
        sym = green_symbol(fi, s[:, :, None], xi[None, None, :])
        w8 = 0.5 * _GL8[1]
        mean_sq = np.einsum("q,jqx->jx", w8, np.square(sym))
        sign = np.sign(np.einsum("q,jqx->jx", w8, sym))
        out[1:] = sign * np.sqrt(mean_sq)
    return out


def _heat_geometric(beta, lag_rule):
    return as_index(beta).beta == 1.0 and LagRule(lag_rule) is LagRule.VARIANCE_MATCHED


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def _density_at(measure, x):
    out = np.full_like(x, measure.lebesgue_scale, dtype=float)
    bp = measure.breakpoints
    for lo, hi, v in zip(bp, bp[1:], measure.density_values):
        out = out + v * ((x >= lo) & (x < hi))
    return out


def _initial_left_values(cfg):
    """Left-point values for the first noise cell.

    Function-valued data are used as is (u(0) = mu); data with atoms use
    J0(dt/2), since the Dirac mass itself has no pointwise value.
    """
    x = cfg.x_grid
    measures = [cfg.initial] + ([cfg.nu] if cfg.nu is not None else [])
    if any(m.has_atoms for m in measures):
        return np.asarray(j0(cfg.beta, cfg.initial, cfg.nu, 0.5 * cfg.dt, x), dtype=float)
    return _density_at(cfg.initial, x)


def _j0_field(cfg):
    out = np.empty((cfg.n_time, cfg.n_space))
    for n, t in enumerate(cfg.t_grid):
        out[n] = j0(cfg.beta, cfg.initial, cfg.nu, t, cfg.x_grid)
    return out


def noise_generator(seed, replicate):
    """Counter-based stream for one replicate; the key is (seed, replicate)."""
    return np.random.Generator(np.random.Philox(key=[seed, replicate]))


def _run_batch(cfg, reps, j0_field, u0, g, probe_idx, snap_idx):
    n_x, n_t = cfg.n_space, cfg.n_time
    m = 2 * n_x
    r = len(reps)
    gens = [noise_generator(cfg.seed, rep) for rep in reps]
    scale = math.sqrt(cfg.dt * cfg.dx)
    probes = np.empty((r, n_t, probe_idx.size))
    snaps = np.empty((r, len(snap_idx), n_x))
    snap_pos = {s - 1: i for i, s in enumerate(snap_idx)}
    u = np.broadcast_to(u0, (r, n_x)).copy()
    geometric = _heat_geometric(cfg.beta, cfg.lag_rule)
    if geometric:
        decay = np.exp(-cfg.dt * np.square(2.0 * math.pi * np.fft.rfftfreq(m, d=cfg.dx)))
        state = np.zeros((r, g.shape[1]), dtype=complex)
    else:
        # history[f, :r, k] = Re FFT(forcing_k)[f], history[f, r:, k] = Im
        history = np.zeros((g.shape[1], 2 * r, n_t))
        grev = np.ascontiguousarray(g[::-1].T)  # grev[f, n_t - j] = g_j[f]
    for n in range(n_t):
        dw = np.stack([gen.standard_normal(n_x) for gen in gens]) * scale
        forcing = np.fft.rfft(cfg.rho(u) * dw, n=m, axis=1)
        if geometric:
            if n > 0:
                state *= decay
            state += g[0] * forcing
            spec = state
        else:
            history[:, :r, n] = forcing.real.T
            history[:, r:, n] = forcing.imag.T
            acc = np.matmul(history[:, :, : n + 1], grev[:, n_t - 1 - n :, None])[:, :, 0]
            spec = (acc[:, :r] + 1j * acc[:, r:]).T
        u = j0_field[n] + np.fft.irfft(spec, n=m, axis=1)[:, :n_x] / cfg.dx
        big = np.abs(u) > DIVERGENCE_LIMIT
        if np.any(big) or not np.all(np.isfinite(u)):
            raise DivergenceError(f"field exceeded {DIVERGENCE_LIMIT:.0e} at step {n + 1}", step=n + 1)
        probes[:, n, :] = u[:, probe_idx]
        if n in snap_pos:
            snaps[:, snap_pos[n], :] = u
    return probes, snaps


def simulate(config):
    """Run all replicates; returns a :class:`SimResult` with probe paths and snapshots."""
    cfg = config
    xi = 2.0 * math.pi * np.fft.rfftfreq(2 * cfg.n_space, d=cfg.dx)
    g = transfer_factors(cfg.beta, cfg.dt, cfg.n_time, xi, cfg.lag_rule)
    j0_field = _j0_field(cfg)
    u0 = _initial_left_values(cfg)
    probe_idx = cfg.probe_indices
    snap_idx = tuple(cfg.snapshot_steps)
    probes, snaps = [], []
    for start in range(0, cfg.replicates, cfg.batch):
        reps = range(start, min(start + cfg.batch, cfg.replicates))
        p, s = _run_batch(cfg, reps, j0_field, u0, g, probe_idx, snap_idx)
        probes.append(p)
        snaps.append(s)
    return SimResult(
        config=cfg,
        t_grid=cfg.t_grid,
        x_grid=cfg.x_grid,
        probe_x=cfg.x_grid[probe_idx],
        probe_paths=np.concatenate(probes),
        snapshot_steps=snap_idx,
        snapshots=np.concatenate(snaps),
        j0_probes=j0_field[:, probe_idx],
    )


def scheme_second_moment(config):
    """E u^2 of the discrete scheme itself, for affine rho and constant data.

    The field is then stationary in x away from the window edges and the
    second moment obeys the renewal recursion

        m_{n+1} = J0^2 + sum_{k=0..n} S_{n+1-k} E rho(u_k)^2,
        S_j = (dt / dx) (1/M) sum_f |g_j(f)|^2,

    (Parseval on the padded grid of length M).  Comparing it with the exact
    moment isolates the discretization error from Monte Carlo noise.
    """
    cfg = config
    if not isinstance(cfg.rho, AffineRho):
        raise DomainError("the scheme moment needs an affine rho")
    measures = [cfg.initial] + ([cfg.nu] if cfg.nu is not None else [])
    if not all(m.is_constant for m in measures):
        raise DomainError("the scheme moment needs constant initial data")
    m_len = 2 * cfg.n_space
    xi = 2.0 * math.pi * np.fft.rfftfreq(m_len, d=cfg.dx)
    g = transfer_factors(cfg.beta, cfg.dt, cfg.n_time, xi, cfg.lag_rule)
    mult = np.full(xi.size, 2.0)
    mult[0] = 1.0
    mult[-1] = 1.0
    s_j = cfg.dt / cfg.dx / m_len * (np.square(g) @ mult)
    mean = np.array([float(j0(cfg.beta, cfg.initial, cfg.nu, t, 0.0)) for t in cfg.t_grid])
    lam, b = cfg.rho.slope, cfg.rho.intercept
    # E u = J0 for every step, u_0 = mu
    means = np.concatenate([[cfg.initial.lebesgue_scale], mean])
    second = np.empty(cfg.n_time + 1)
    second[0] = cfg.initial.lebesgue_scale**2
    forcing = np.empty(cfg.n_time + 1)
    for n in range(cfg.n_time):
        forcing[n] = lam * lam * second[n] + 2.0 * lam * b * means[n] + b * b
        second[n + 1] = mean[n] ** 2 + s_j[: n + 1][::-1] @ forcing[: n + 1]
    return second[1:]


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def jackknife_mean(samples, axis=0):
    """Mean and leave-one-out jackknife standard error along ``axis``."""
    x = np.moveaxis(np.asarray(samples, dtype=float), axis, 0)
    n = x.shape[0]
    if n < 2:
        raise DomainError("a variance estimate needs at least two replicates")
    total = x.sum(axis=0)
    loo = (total[None] - x) / (n - 1)
    mean = total / n
    se = np.sqrt((n - 1) / n * np.sum(np.square(loo - loo.mean(axis=0)), axis=0))
    return mean, se


def estimate_moments(result, p):
    """E|u(t, x_probe)|^p with jackknife standard errors, from probe paths.

    ``result`` may be a :class:`SimResult` or a raw array shaped (replicates, times, probes),
    in which case times and probes are indexed 0, 1, ...
    """
    if p < 1:
        raise DomainError("p must be >= 1")
    if isinstance(result, SimResult):
        paths, t_grid, x_probe = result.probe_paths, result.t_grid, result.probe_x
    else:
        paths = np.asarray(result, dtype=float)
        t_grid, x_probe = np.arange(paths.shape[1], dtype=float), np.arange(paths.shape[2], dtype=float)
    mean, se = jackknife_mean(np.abs(paths) ** p, axis=0)
    return MomentEstimate(t_grid, x_probe, int(p), mean, se, paths.shape[0])


def estimate_lyapunov(estimate, window, probe=None):
    """Weighted least-squares slope of log E|u|^p against t over ``window``.

    Returns (slope, ci) with ci the 95% half-width from the standard errors.
    With ``probe=None`` the probe-averaged moment is fitted.
    """
    t_lo, t_hi = window
    if not t_hi > t_lo:
        raise DomainError("window needs t_hi > t_lo")
    t = np.asarray(estimate.t_grid, dtype=float)
    sel = (t >= t_lo) & (t <= t_hi)
    if sel.sum() < 2:
        raise DomainError("window holds fewer than two time points")
    if probe is None:
        mp = np.mean(estimate.mean_power, axis=1)
        se = np.mean(estimate.std_err, axis=1)
    else:
        mp = estimate.mean_power[:, probe]
        se = estimate.std_err[:, probe]
    mp, se, t = mp[sel], se[sel], t[sel]
    if np.any(mp <= 0):
        raise DomainError("nonpositive moment estimate inside the window")
    sig = np.where(se > 0, se / mp, 0.0)
    if np.all(sig == 0):
        w = np.ones_like(t)
    else:
        floor = np.min(sig[sig > 0])
        w = 1.0 / np.square(np.maximum(sig, floor))
    tb = np.sum(w * t) / np.sum(w)
    sxx = np.sum(w * np.square(t - tb))
    slope = np.sum(w * (t - tb) * np.log(mp)) / sxx
    ci = 0.0 if np.all(sig == 0) else 1.96 / math.sqrt(sxx)
    return float(slope), float(ci)


@dataclass(frozen=True)
class IncrementScaling:
    slope: float
    stderr: float
    lags: np.ndarray
    mean_sq: np.ndarray


def empirical_increment_scaling(result, direction, lags=None, reference=None):
    """Log-log slope of E|u(a) - u(a + h)|^2 against the lag h.

    TIME uses the probe paths with reference times ``reference`` (step indices,
    default: the second half of the run); SPACE uses every snapshot and the
    central half of the window.  ``lags`` are in grid steps.
    """
    direction = Direction(direction)
    cfg = result.config
    if direction is Direction.TIME:
        paths = result.probe_paths
        n_t = paths.shape[1]
        lags = np.asarray(lags if lags is not None else [1, 2, 4, 8, 16], dtype=int)
        ref = np.asarray(reference if reference is not None else np.arange(n_t // 2, n_t), dtype=int)
        ref = ref[ref + lags.max() < n_t]
        step = cfg.dt
        mean_sq = np.array([np.mean(np.square(paths[:, ref + h, :] - paths[:, ref, :])) for h in lags])
    else:
        if result.snapshots.shape[1] == 0:
            raise DomainError("space scaling needs snapshots; set snapshot_steps")
        snaps = result.snapshots
        n_x = snaps.shape[2]
        lags = np.asarray(lags if lags is not None else [1, 2, 4, 8, 16], dtype=int)
        ref = np.asarray(reference if reference is not None else np.arange(n_x // 4, 3 * n_x // 4), dtype=int)
        ref = ref[ref + lags.max() < n_x]
        step = cfg.dx
        mean_sq = np.array([np.mean(np.square(snaps[:, :, ref + h] - snaps[:, :, ref])) for h in lags])
    if lags.size < 3 or ref.size == 0:
        raise DomainError("need at least three lags and one reference point")
    if np.any(mean_sq <= 0):
        raise DomainError("zero increments: the field does not vary at these lags")
    lx = np.log(lags * step)
    ly = np.log(mean_sq)
    coef, cov = np.polyfit(lx, ly, 1, cov=True) if lags.size > 3 else (np.polyfit(lx, ly, 1), np.zeros((2, 2)))
    return IncrementScaling(float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0))), lags * step, mean_sq)
