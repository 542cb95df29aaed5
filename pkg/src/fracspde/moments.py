"""Homogeneous solutions, moment bounds, Hoelder exponents and Lyapunov-exponent bounds."""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import DomainError, UnsupportedDistributionError
from .green import GreenKind, as_index, green
from .kernel import (
    hat_c,
    lower_constants,
    lower_reference_for_green,
    psi,
    reference_for_green,
    upper_constants,
)
from .specfun import mainardi, mittag_leffler, rgamma


@dataclass(frozen=True)
class InitialMeasure:
    """Signed measure: point masses + piecewise-constant density + c dx.

    ``density_values[i]`` is the density on [breakpoints[i], breakpoints[i+1]).
    """

    atoms: tuple = ()
    breakpoints: tuple = ()
    density_values: tuple = ()
    lebesgue_scale: float = 0.0

    def __post_init__(self):
        atoms = tuple((float(a), float(m)) for a, m in self.atoms)
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.density_values)
        if bp and len(vals) != len(bp) - 1:
            raise DomainError("need one density value per interval between breakpoints")
        if not bp and vals:
            raise DomainError("density values given without breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if not all(math.isfinite(v) for a in atoms for v in a) or not all(map(math.isfinite, bp + vals)):
            raise DomainError("measure parameters must be finite")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "density_values", vals)
        object.__setattr__(self, "lebesgue_scale", float(self.lebesgue_scale))

    @classmethod
    def dirac(cls, location=0.0, mass=1.0):
        return cls(atoms=((location, mass),))

    @classmethod
    def constant(cls, c):
        return cls(lebesgue_scale=c)

    @classmethod
    def zero(cls):
        return cls()

    @property
    def is_constant(self):
        """True when the measure is c dx (no atoms, no density)."""
        return not self.atoms and not any(self.density_values)

    @property
    def has_atoms(self):
        return any(m != 0.0 for _, m in self.atoms)


@dataclass(frozen=True)
class RhoSpec:
    """Growth constants: |rho(u)|^2 <= lip_upper^2 (vip_upper^2 + u^2) and >= lip_lower^2 (vip_lower^2 + u^2)."""

    lip_upper: float
    vip_upper: float = 0.0
    lip_lower: float = 0.0
    vip_lower: float = 0.0

    def __post_init__(self):
        if not self.lip_upper > 0:
            raise DomainError("lip_upper must be positive")
        if min(self.vip_upper, self.lip_lower, self.vip_lower) < 0:
            raise DomainError("growth constants must be nonnegative")
        if self.lip_lower > self.lip_upper:
            raise DomainError("lip_lower cannot exceed lip_upper")


class HolderRegime(enum.Enum):
    INTERIOR = "interior"
    GLOBAL_WITH_HOLDER_DATA = "global_with_holder_data"


@dataclass(frozen=True)
class HolderExponents:
    """Exponents (time, space); the field is Hoelder of every order strictly below them."""

    time_exp: float
    space_exp: float
    regime: HolderRegime


def f_eta(beta, eta, x):
    """exp(-(eta/2) |x|^(2/(2-beta))), the weight defining admissible initial data."""
    if not 0 < beta < 2:
        raise DomainError(f"f_eta needs 0 < beta < 2, got {beta}")
    if not eta > 0:
        raise DomainError("eta must be positive")
    return np.exp(-(eta / 2.0) * np.abs(np.asarray(x, dtype=float)) ** (2.0 / (2.0 - beta)))


# ---------------------------------------------------------------------------
# J0
# ---------------------------------------------------------------------------


def _green_cdf(beta, kind, t, x):
    """int_0^x G(t, z) dz (odd in x), from d/dz M_{l,m+l}(z) = -M_{l,m}(z)."""
    fi = as_index(beta)
    b = fi.beta
    x = np.asarray(x, dtype=float)
    if b == 2.0:
        if GreenKind(kind) is GreenKind.STAR:
            raise UnsupportedDistributionError("G*_2 has no distribution function")
        return np.sign(x) * 0.5 * np.minimum(np.abs(x), t)
    m = fi.ceil_beta if GreenKind(kind) is GreenKind.PRIMARY else 1
    scale = t ** (b / 2.0)
    tail = mainardi((b / 2.0, m + b / 2.0), np.abs(x) / scale)
    return np.sign(x) * 0.5 * t ** (m - 1.0) * (rgamma(m) - tail)


def _convolve(beta, kind, measure, t, x):
    """(measure * G(t, .))(x) for the chosen Green function."""
    fi = as_index(beta)
    kind = GreenKind(kind)
    x = np.asarray(x, dtype=float)
    m = fi.ceil_beta if kind is GreenKind.PRIMARY else 1
    out = np.zeros_like(x) + measure.lebesgue_scale * t ** (m - 1)
    if fi.beta == 2.0 and kind is GreenKind.STAR:
        # G*_2 = (delta(x - t) + delta(x + t)) / 2
        if measure.has_atoms:
            raise UnsupportedDistributionError("atoms moved by the wave kernel G*_2 are not functions")
        for (lo, hi), v in zip(zip(measure.breakpoints, measure.breakpoints[1:]), measure.density_values):
            out = out + 0.5 * v * (((x - t >= lo) & (x - t < hi)).astype(float) + ((x + t >= lo) & (x + t < hi)))
        return out
    for loc, mass in measure.atoms:
        if mass != 0.0:
            out = out + mass * np.asarray(green(fi, kind, t, x - loc))
    for (lo, hi), v in zip(zip(measure.breakpoints, measure.breakpoints[1:]), measure.density_values):
        if v != 0.0:
            out = out + v * (_green_cdf(fi, kind, t, x - lo) - _green_cdf(fi, kind, t, x - hi))
    return out


def j0(beta, mu, nu, t, x):
    """Solution of the deterministic equation with data (mu, nu).

    slow (beta <= 1):  (mu * G_beta(t, .))(x); ``nu`` must be None
    fast (1 < beta <= 2): (nu * G_beta(t, .))(x) + (mu * G*_beta(t, .))(x)
    """
    fi = as_index(beta)
    if not t > 0:
        raise DomainError("t must be positive")
    if fi.slow:
        if nu is not None:
            raise DomainError("the slow equation takes one initial condition; pass nu=None")
        out = _convolve(fi, GreenKind.PRIMARY, mu, t, x)
    else:
        if nu is None:
            raise DomainError("the fast equation needs both mu and nu (either may be InitialMeasure.zero())")
        out = _convolve(fi, GreenKind.PRIMARY, nu, t, x) + _convolve(fi, GreenKind.STAR, mu, t, x)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# moment bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvolutionGrid:
    """Quadrature sizes for the space-time convolution with the kernel bound.

    Time uses Gauss-Jacobi rules on [0, t/2] and [t/2, t] that absorb the
    endpoint singularities; space uses Gauss-Legendre panels graded
    geometrically towards the kernel peak and the data's breakpoints.
    """

    time_nodes: int = 40
    space_nodes: int = 12
    levels: int = 12
    width: float = 40.0  # reference kernels are below e^-width of their mass beyond width scale lengths


def _data_is_flat(mu, nu):
    return mu.is_constant and (nu is None or nu.is_constant)


def _jacobi_half(n, a, b, lo, hi):
    """Nodes/weights for int_lo^hi f(s) (hi - s)^a (s - lo)^b ds with f smooth."""
    x, w = special.roots_jacobi(n, a, b)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), w * half ** (1.0 + a + b)


def _time_rule(t, sigma, start_exp, n):
    """Nodes s_k and weights so that sum w_k f(s_k) ~ int_0^t f(s) s^start_exp (t - s)^-sigma ds."""
    mid = 0.5 * t
    s1, w1 = _jacobi_half(n, 0.0, start_exp, 0.0, mid)
    w1 = w1 * (t - s1) ** -sigma
    s2, w2 = _jacobi_half(n, -sigma, 0.0, mid, t)
    w2 = w2 * s2**start_exp
    return np.concatenate([s1, s2]), np.concatenate([w1, w2])


def _graded_rule(marks, width, n, levels):
    """Gauss-Legendre panels on [-width, width], refined geometrically towards each mark."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = {-width, width}
    k = 1.0
    while k < width:
        edges.update((-k, k))
        k *= 2.0
    for m in marks:
        edges.add(m)
        for k in range(levels):
            d = 2.0**-k
            edges.update((m - d, m + d))
    edges = np.array(sorted(e for e in edges if -width <= e <= width))
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)[:, None]
    nodes = (0.5 * (hi + lo))[:, None] + half * x
    return nodes.ravel(), (half * w).ravel()


def _kernel_convolution(beta, kc, ref, forcing, j0_sq, mu, nu, t, x, grid):
    """([forcing + j0_sq] * K_bound)(t, x) for K_bound(tau, z) = ref(tau, z) gamma tau^-sigma E(gamma tau^(1-sigma))."""
    a = 1.0 - kc.sigma
    g = kc.gamma
    if _data_is_flat(mu, nu):
        if nu is None or nu.lebesgue_scale == 0.0:
            # J0 is a constant: int_0^t gamma tau^-sigma E_{a,a}(gamma tau^a) d tau = E_{a,1}(gamma t^a) - 1
            c2 = j0_sq(t, np.array([x]))[0]
            return (forcing + c2) * (mittag_leffler((a, 1.0), g * t**a) - 1.0)

        # J0 depends on time only
        s_k, w_k = _time_rule(t, kc.sigma, 0.0, grid.time_nodes)
        vals = [(forcing + j0_sq(s, np.array([x]))[0]) * mittag_leffler((a, a), g * (t - s) ** a) for s in s_k]
        return float(g * np.dot(w_k, vals))

    fi = as_index(beta)
    h = fi.beta / 2.0
    measures = [mu] + ([nu] if nu is not None else [])
    marks = sorted({a_ for m in measures for a_, _ in m.atoms} | {b for m in measures for b in m.breakpoints})

    def inner(s):
        # int J0(s, x - z)^2 ref(t - s, z) dz with z = (t - s)^h w
        tau = t - s
        sc = tau**h
        local = [0.0] + [(x - p) / sc for p in marks if abs(x - p) < grid.width * sc]
        w_nodes, w_wts = _graded_rule(local, grid.width, grid.space_nodes, grid.levels)
        vals = j0_sq(s, x - sc * w_nodes) * ref(tau, sc * w_nodes) * sc
        return float(np.dot(w_wts, vals))

    start = -h if any(m.has_atoms for m in measures) else 0.0
    s_k, w_k = _time_rule(t, kc.sigma, start, grid.time_nodes)
    # with atoms the inner integral grows like s^-h; the rule carries that weight
    vals = [(forcing + inner(s)) * s**-start * mittag_leffler((a, a), g * (t - s) ** a) for s in s_k]
    return float(g * np.dot(w_k, vals))


def _j0_sq_fn(beta, mu, nu, scale):
    def fn(s, y):
        return scale * np.square(np.asarray(j0(beta, mu, nu, s, y), dtype=float))

    return fn


def moment_upper(beta, p, rho, mu, nu, t, x, grid=ConvolutionGrid()):
    """Upper bound for ||u(t, x)||_p^2 (p even).

    p = 2:  J0^2 + ([vip^2 + J0^2] * K(.; L)) (t, x)
    p > 2:  2 J0^2 + ([vip^2 + 2 J0^2] * K(.; 4 sqrt(p) L)) (t, x)

    K is replaced by its Mittag-Leffler majorant, so the result is a
    certified upper bound rather than the exact moment.
    """
    fi = as_index(beta)
    if int(p) != p or p < 2 or p % 2:
        raise DomainError(f"p must be an even integer >= 2, got {p}")
    if not fi.beta < 2.0:
        raise DomainError("moment bounds need 0 < beta < 2")
    if not t > 0:
        raise DomainError("t must be positive")
    lam = rho.lip_upper if p == 2 else 4.0 * math.sqrt(p) * rho.lip_upper
    factor = 1.0 if p == 2 else 2.0
    kc = upper_constants(fi, lam)
    ref = reference_for_green(fi)
    j0_sq = _j0_sq_fn(fi, mu, nu, factor)
    conv = _kernel_convolution(fi, kc, ref, rho.vip_upper**2, j0_sq, mu, nu, t, x, grid)
    return float(j0_sq(t, np.array([x]))[0]) + conv


def second_moment_lower(beta, rho, mu, t, x, grid=ConvolutionGrid()):
    """Lower bound J0^2 + ((vip_lower^2 + J0^2) * K_lower)(t, x) for ||u(t, x)||_2^2, 0 < beta < 1."""
    fi = as_index(beta)
    if not fi.beta < 1.0:
        raise DomainError(f"the lower moment bound is available for 0 < beta < 1, got {fi.beta}")
    if not t > 0:
        raise DomainError("t must be positive")
    j0_sq = _j0_sq_fn(fi, mu, None, 1.0)
    base = float(j0_sq(t, np.array([x]))[0])
    if rho.lip_lower**2 == 0.0:
        return base
    kc = lower_constants(fi, rho.lip_lower)
    ref = lower_reference_for_green(fi)
    return base + _kernel_convolution(fi, kc, ref, rho.vip_lower**2, j0_sq, mu, None, t, x, grid)


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------


def lyapunov_p_exponent(beta):
    """Power of p in the upper Lyapunov bound: (4-beta)/(2-beta) slow, (8-beta)/(6-beta) fast.

    Exact for :class:`fractions.Fraction` input.  The endpoints return the
    heat (p^3) and wave (p^(3/2)) reference exponents, which are the limits
    of the two formulas.
    """
    b = beta if isinstance(beta, Fraction) else Fraction(beta)
    if not 0 < b <= 2:
        raise DomainError(f"beta must lie in (0, 2], got {beta}")
    if b <= 1:
        return (4 - b) / (2 - b)
    return (8 - b) / (6 - b)


def lyapunov_bounds(beta, p, rho):
    """(upper, lower) bounds on the p-th moment Lyapunov exponents for constant initial data.

    slow 0 < beta < 1:
        upper = 1/2 [2^4 L^2 C^_beta Psi_beta Gamma(1 - beta/2)]^(2/(2-beta)) p^((4-beta)/(2-beta))
        lower = p/2 [2^(-1/2) l^2 Psi_lower Gamma(1 - beta/2)]^(2/(2-beta))   (None if l = 0)
    fast 1 < beta < 2:
        upper = 1/2 [2^(9/2) L^2 Psi_beta Gamma(3 - beta/2)]^(2/(6-beta)) p^((8-beta)/(6-beta)),  lower None
    """
    fi = as_index(beta)
    b = fi.beta
    if b in (1.0, 2.0):
        raise DomainError("beta = 1 and beta = 2 are not covered; see lyapunov_p_exponent for the reference powers")
    if int(p) != p or p < 2:
        raise DomainError(f"p must be an integer >= 2, got {p}")
    L2 = rho.lip_upper**2
    if b < 1.0:
        upper = 0.5 * (16.0 * L2 * hat_c(b) * psi(b) * math.gamma(1.0 - b / 2.0)) ** (2.0 / (2.0 - b))
        upper *= p ** ((4.0 - b) / (2.0 - b))
        lower = None
        if rho.lip_lower > 0:
            base = 2.0**-0.5 * rho.lip_lower**2 * psi(b, lower=True) * math.gamma(1.0 - b / 2.0)
            lower = p / 2.0 * base ** (2.0 / (2.0 - b))
        return upper, lower
    upper = 0.5 * (2.0**4.5 * L2 * psi(b) * math.gamma(3.0 - b / 2.0)) ** (2.0 / (6.0 - b))
    return upper * p ** ((8.0 - b) / (6.0 - b)), None


def holder_exponents(beta, data_alpha=None):
    """Hoelder exponents (time, space) of the solution for 0 < beta <= 1.

    Bounded data: ((2-beta)/4, 1/2) away from t = 0.  With alpha-Hoelder data
    the exponents (min(alpha beta/2, (2-beta)/4), min(alpha beta, 1/2)) hold up to t = 0.
    """
    fi = as_index(beta)
    b = fi.beta
    if b > 1.0:
        raise DomainError(f"Hoelder exponents are available for 0 < beta <= 1, got {b}")
    t_exp = (2.0 - b) / 4.0
    if data_alpha is None:
        return HolderExponents(t_exp, 0.5, HolderRegime.INTERIOR)
    if not 0 < data_alpha <= 1:
        raise DomainError(f"data Hoelder exponent must lie in (0, 1], got {data_alpha}")
    return HolderExponents(
        min(data_alpha * b / 2.0, t_exp), min(data_alpha * b, 0.5), HolderRegime.GLOBAL_WITH_HOLDER_DATA
    )
