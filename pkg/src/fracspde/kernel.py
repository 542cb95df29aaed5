"""Reference kernels, the constants of the kernel bounds, and the kernel K(t, x; lambda).

K is the sum over n >= 0 of the (n+1)-fold space-time self-convolutions
L_n of L_0 = lambda^2 G^2.  Whenever

    G(t, x)^2 <= C0 t^-sigma Gref(t, x)   and   Gref(t) * Gref(s) <= C1 Gref(t + s),

every L_n is dominated by B_{n+1}(t) Gref(t, x), which sums to a
Mittag-Leffler bound.  This module provides those bounds, the exact kernels
of the heat and biharmonic cases, and a numerical evaluation of the series
itself that serves as an independent oracle.
"""

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, interpolate, optimize, special

from .errors import AccuracyError, DomainError
from .green import GreenKind, as_index, asymptotic_params, green, log_green
from .specfun import log_mittag_leffler, mittag_leffler


# ---------------------------------------------------------------------------
# reference kernels
# ---------------------------------------------------------------------------


class ReferenceKind(enum.Enum):
    GAUSSIAN = "gaussian"
    POISSON = "poisson"
    EXPONENTIAL = "exponential"
    LOWER_GAUSS = "lower_gauss"


@dataclass(frozen=True)
class ReferenceKernel:
    """A nonnegative unit-mass kernel Gref(t, x) with the time change t -> t^(beta/2).

    GAUSSIAN     (4 pi tau)^(-d/2) exp(-|x|^2 / (4 tau)),  tau = t^beta
    POISSON      c_d tau / (tau^2 + |x|^2)^((d+1)/2),      tau = t^(beta/2)
    EXPONENTIAL  exp(-|x| / tau) / (2 tau),                tau = t^(beta/2)
    LOWER_GAUSS  the GAUSSIAN formula, used as a minorant when beta < 1

    ``beta = 1`` turns GAUSSIAN into the plain heat kernel.  For d > 1 the
    argument ``x`` is the Euclidean norm |x|.
    """

    kind: ReferenceKind
    beta: float = 1.0
    dimension: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ReferenceKind(self.kind))
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dimension}")
        if self.kind in (ReferenceKind.EXPONENTIAL, ReferenceKind.LOWER_GAUSS) and self.dimension != 1:
            raise DomainError(f"{self.kind.value} kernel is defined on the real line only")

    @property
    def scale_exponent(self):
        """gamma_2 in the scaling G(t, x) = t^gamma_1 G(1, x / t^gamma_2)."""
        return self.beta / 2.0

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        if np.any(~(t > 0)):
            raise DomainError(f"time must be positive, got {t}")
        x = np.abs(np.asarray(x, dtype=float))
        d = self.dimension
        b = self.beta
        if self.kind in (ReferenceKind.GAUSSIAN, ReferenceKind.LOWER_GAUSS):
            tau = t**b
            out = (4.0 * math.pi * tau) ** (-d / 2.0) * np.exp(-x * x / (4.0 * tau))
        elif self.kind is ReferenceKind.POISSON:
            tau = t ** (b / 2.0)
            c_d = math.pi ** (-(d + 1) / 2.0) * math.gamma((d + 1) / 2.0)
            out = c_d * tau / (tau * tau + x * x) ** ((d + 1) / 2.0)
        else:
            tau = t ** (b / 2.0)
            out = np.exp(-x / tau) / (2.0 * tau)
        return float(out) if np.ndim(out) == 0 else out

    def semigroup_constant(self):
        """C1 in Gref(t) * Gref(s) <= C1 Gref(t+s); for LOWER_GAUSS the reverse inequality."""
        g2 = self.scale_exponent
        if self.kind is ReferenceKind.GAUSSIAN:
            if g2 < 0.5:
                raise DomainError("the Gaussian sub-semigroup bound needs beta >= 1")
            return 2.0 ** (self.dimension * (g2 - 0.5))
        if self.kind is ReferenceKind.POISSON:
            if g2 > 1.0:
                raise DomainError("the Poisson sub-semigroup bound needs beta <= 2")
            return 2.0 ** (1.0 - g2)
        if self.kind is ReferenceKind.EXPONENTIAL:
            return hat_c(self.beta)
        if self.beta >= 1.0:
            raise DomainError("the Gaussian sup-semigroup bound is used for beta < 1")
        return 2.0**-0.5


def reference_kernel(rk, t, x):
    """Evaluate the reference kernel ``rk`` at (t, x)."""
    return rk(t, x)


def reference_for_green(beta):
    """The kernel dominating G_beta^2: exponential for beta < 1, Gaussian in t^beta for 1 <= beta < 2."""
    fi = as_index(beta)
    if fi.beta >= 2.0:
        raise DomainError("no reference kernel for beta = 2")
    kind = ReferenceKind.EXPONENTIAL if fi.beta < 1.0 else ReferenceKind.GAUSSIAN
    return ReferenceKernel(kind, fi.beta)


def lower_reference_for_green(beta):
    fi = as_index(beta)
    if not fi.beta < 1.0:
        raise DomainError(f"lower reference kernel is defined for beta < 1, got {fi.beta}")
    return ReferenceKernel(ReferenceKind.LOWER_GAUSS, fi.beta)


def exponential_convolution(beta, t, s, x):
    """Closed form of (Gref_e(t) * Gref_e(s))(x) for the exponential kernel."""
    th = beta / 2.0
    a, b = t**th, s**th
    x = abs(x)
    if math.isclose(a, b, rel_tol=1e-12):
        # limit a -> b of the formula below
        return (a + x) * math.exp(-x / a) / (4.0 * a * a)
    return (a * math.exp(-x / a) - b * math.exp(-x / b)) / (2.0 * (a + b) * (a - b))


def subsemigroup_check(rk, t, s, x):
    """(lhs, rhs) = (int Gref(t, x-y) Gref(s, y) dy, C1 Gref(t+s, x)).

    For sub-semigroup kernels lhs <= rhs; for LOWER_GAUSS the constant is a
    sup-semigroup constant and lhs >= rhs.
    """
    if not (t > 0 and s > 0):
        raise DomainError("t and s must be positive")
    if rk.dimension != 1:
        raise DomainError("quadrature check is implemented for d = 1")
    scale = max(t, s) ** (rk.beta / 2.0) + max(t, s) ** rk.beta
    lo, hi = sorted((0.0, float(x)))
    opts = dict(epsabs=1e-15, epsrel=1e-11, limit=400)

    def f(y):
        return rk(t, x - y) * rk(s, y)

    parts = [
        integrate.quad(f, -np.inf, lo - scale, **opts)[0],
        integrate.quad(f, lo - scale, lo, **opts)[0],
        integrate.quad(f, lo, hi, **opts)[0] if hi > lo else 0.0,
        integrate.quad(f, hi, hi + scale, **opts)[0],
        integrate.quad(f, hi + scale, np.inf, **opts)[0],
    ]
    lhs = math.fsum(parts)
    return lhs, rk.semigroup_constant() * rk(t + s, x)


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def hat_c(beta):
    """C^_beta = 2^(beta/2) / (2^(beta/2) - 1) exp(-2^(-beta/2)), sub-semigroup constant of the exponential kernel."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    q = 2.0 ** (beta / 2.0)
    return q / (q - 1.0) * math.exp(-1.0 / q)


def tilde_c(beta):
    """C1 used with G_beta: C^_beta for beta < 1 and 2^((beta-1)/2) for 1 <= beta < 2."""
    if not 0 < beta < 2:
        raise DomainError(f"beta must lie in (0, 2), got {beta}")
    return hat_c(beta) if beta < 1.0 else 2.0 ** ((beta - 1.0) / 2.0)


def _log_ratio(beta, lower, y):
    """log of G_beta(1, y)^2 / Gref(1, y) for the upper or lower reference kernel."""
    lg = 2.0 * np.asarray(log_green(beta, GreenKind.PRIMARY, 1.0, y))
    if lower or beta >= 1.0:
        return lg + y * y / 4.0 + 0.5 * math.log(4.0 * math.pi)
    return lg + y + math.log(2.0)


def _envelope_log_ratio(beta, lower, y):
    p = asymptotic_params(beta)
    base = 2.0 * (math.log(p.A) + p.a * math.log(y) - p.b * y**p.c)
    if lower or beta >= 1.0:
        return base + y * y / 4.0 + 0.5 * math.log(4.0 * math.pi)
    return base + y + math.log(2.0)


@lru_cache(maxsize=None)
def _psi(beta, lower):
    if beta == 1.0 and not lower:
        return (4.0 * math.pi) ** -0.5
    at_zero = float(_log_ratio(beta, lower, np.array([0.0]))[0])
    # the search interval ends where the certified tail is 40 e-folds past the value at 0
    y_end = 2.0
    sign = 1.0 if lower else -1.0
    while sign * (_envelope_log_ratio(beta, lower, y_end) - at_zero) < 40.0:
        y_end *= 1.3
        if y_end > 1e4:
            raise AccuracyError("could not bracket the extremum of G^2 / Gref")
    y = np.linspace(0.0, y_end, 2001)
    vals = _log_ratio(beta, lower, y)
    # minimize sign * log ratio: the infimum for lower, the supremum for upper
    obj = sign * vals
    i = int(np.argmin(obj))
    best = float(obj[i])
    if 0 < i < len(y) - 1:
        res = optimize.minimize_scalar(
            lambda s: sign * float(_log_ratio(beta, lower, np.array([s]))[0]),
            bounds=(y[i - 1], y[i + 1]),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = min(best, float(res.fun))
    best = sign * best
    return math.exp(best)


def psi(beta, lower=False):
    """Psi_beta = sup_x G_beta(1,x)^2 / Gref_beta(1,x), or the lower analogue inf_x G^2 / Gref_lower.

    A dense grid locates the extremum and a bounded scalar search refines it.
    The grid ends where the asymptotic tail of G certifies that the ratio has
    left the neighbourhood of its extremum for good.
    """
    fi = as_index(beta)
    if not fi.beta < 2.0:
        raise DomainError("Psi is defined for 0 < beta < 2")
    if lower and not fi.beta < 1.0:
        raise DomainError(f"the lower constant needs 0 < beta < 1, got {fi.beta}")
    return _psi(fi.beta, bool(lower))


@dataclass(frozen=True)
class KernelConstants:
    """C0, C1 and sigma of the domination G^2 <= C0 t^-sigma Gref and the semigroup bound."""

    c0: float
    c1: float
    sigma: float

    def __post_init__(self):
        if not (self.c0 > 0 and self.c1 > 0):
            raise DomainError("c0 and c1 must be positive")
        if not self.sigma < 1:
            raise DomainError(f"sigma must be < 1, got {self.sigma}")

    @property
    def gamma(self):
        return self.c0 * self.c1 * math.gamma(1.0 - self.sigma)

    @property
    def upsilon(self):
        return self.gamma ** (1.0 / (1.0 - self.sigma))


def upper_constants(beta, lam):
    """Constants for lambda G_beta with the reference kernel of :func:`reference_for_green`."""
    fi = as_index(beta)
    if not fi.beta < 2.0:
        raise DomainError("kernel bounds need 0 < beta < 2")
    return KernelConstants(lam * lam * psi(fi.beta), tilde_c(fi.beta), fi.sigma)


def lower_constants(beta, lam):
    """Constants for the minorant lambda^2 G_beta^2 >= C0 t^-sigma Gref_lower, beta < 1.

    The scaling of G_beta gives sigma = beta/2 (G^2 ~ t^-beta, Gref_lower ~ t^(-beta/2)).
    The sup-semigroup constant of the Gaussian in t^beta is taken as 2^(-1/2).
    """
    fi = as_index(beta)
    if not fi.beta < 1.0:
        raise DomainError(f"lower kernel bound needs 0 < beta < 1, got {fi.beta}")
    return KernelConstants(lam * lam * psi(fi.beta, lower=True), 2.0**-0.5, fi.beta / 2.0)


def bn(n, t, kc):
    """B_n(t) = C0^n C1^(n-1) Gamma(1-sigma)^n / Gamma(n(1-sigma)) t^(n(1-sigma)-1)."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not t > 0:
        raise DomainError("t must be positive")
    a = 1.0 - kc.sigma
    log_b = (
        n * math.log(kc.c0)
        + (n - 1) * math.log(kc.c1)
        + n * special.gammaln(a)
        - special.gammaln(n * a)
        + (n * a - 1.0) * math.log(t)
    )
    return math.exp(log_b)


def _log_mittag_form(kc, t):
    """log of gamma t^-sigma E_{1-sigma,1-sigma}(gamma t^(1-sigma))."""
    a = 1.0 - kc.sigma
    z = kc.gamma * t**a
    return math.log(kc.gamma) - kc.sigma * math.log(t) + log_mittag_leffler((a, a), z)


@lru_cache(maxsize=None)
def _c_upper(sigma, gamma):
    a = 1.0 - sigma
    ups = gamma ** (1.0 / a)

    def log_f(log_t):
        t = math.exp(log_t)
        num = log_mittag_leffler((a, a), gamma * t**a)
        den = np.logaddexp(0.0, sigma * log_t + ups * t)
        return num - den

    grid = np.linspace(math.log(1e-6), math.log(1e3), 2000)
    vals = np.array([log_f(s) for s in grid])
    i = int(np.argmax(vals))
    best = float(vals[i])
    if 0 < i < len(grid) - 1:
        res = optimize.minimize_scalar(lambda s: -log_f(s), bounds=(grid[i - 1], grid[i + 1]), method="bounded")
        best = max(best, -float(res.fun))
    # t -> inf: gamma^(sigma/(1-sigma)) / (1-sigma); t -> 0: 1/Gamma(1-sigma) if sigma > 0
    limits = [(sigma / a) * math.log(gamma) - math.log(a)]
    if sigma > 0:
        limits.append(-special.gammaln(a))
    elif sigma == 0:
        limits.append(-special.gammaln(a) - math.log(2.0))
    return gamma * math.exp(max([best] + limits))


@lru_cache(maxsize=None)
def _c_lower(sigma, gamma, t_min):
    a = 1.0 - sigma
    ups = gamma ** (1.0 / a)

    def log_g(log_t):
        t = math.exp(log_t)
        return log_mittag_leffler((a, a), gamma * t**a) - sigma * log_t - ups * t

    grid = np.linspace(math.log(t_min), math.log(1e3), 2000)
    vals = np.array([log_g(s) for s in grid])
    i = int(np.argmin(vals))
    best = float(vals[i])
    if 0 < i < len(grid) - 1:
        res = optimize.minimize_scalar(log_g, bounds=(grid[i - 1], grid[i + 1]), method="bounded")
        best = min(best, float(res.fun))
    # t -> inf limit of E / (t^sigma e^(ups t)) is gamma^(sigma/(1-sigma)) / (1-sigma)
    best = min(best, (sigma / a) * math.log(gamma) - math.log(a))
    return gamma * math.exp(best)


def constant_upper(kc):
    """C(sigma, gamma) = gamma sup_t E_{1-sigma,1-sigma}(gamma t^(1-sigma)) / (1 + t^sigma exp(Upsilon t)).

    The supremum is taken over a log grid on [1e-6, 1e3], refined locally,
    together with the exact limits at t -> 0 and t -> infinity.
    """
    return _c_upper(kc.sigma, kc.gamma)


def constant_lower(kc, t_min=1e-6):
    """C_ = gamma inf_{t >= t_min} E_{1-sigma,1-sigma}(gamma t^(1-sigma)) / (t^sigma exp(Upsilon t)).

    For sigma > 0 the ratio diverges as t -> 0, so the infimum over all t > 0
    is attained on the grid.  For sigma <= 0 it tends to 0 at the origin and
    the bound only holds for t >= t_min.
    """
    return _c_lower(kc.sigma, kc.gamma, float(t_min))


class Regime(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class BoundReport:
    """Kernel bound at one point; ``value_bound`` is the sharper of the two forms."""

    value_bound: float
    mittag_form: float
    exp_form: float
    regime: Regime


def kernel_upper(beta, lam, t, x):
    """Upper bounds for K(t, x; lambda), 0 < beta < 2.

    mittag_form = Gref(t,x) gamma t^-sigma E_{1-sigma,1-sigma}(gamma t^(1-sigma))
    exp_form    = C t^-sigma Gref(t,x) (1 + t^sigma exp(Upsilon t))
    """
    if not t > 0:
        raise DomainError("t must be positive")
    kc = upper_constants(beta, lam)
    ref = reference_for_green(beta)(t, x)
    with np.errstate(over="ignore"):
        mittag = ref * math.exp(min(_log_mittag_form(kc, t), 709.0)) if ref > 0 else 0.0
        log_tail = kc.sigma * math.log(t) + kc.upsilon * t
        exp_form = constant_upper(kc) * t ** (-kc.sigma) * ref * (1.0 + math.exp(min(log_tail, 709.0)))
    return BoundReport(mittag, mittag, exp_form, Regime.UPPER)


def kernel_lower(beta, lam, t, x, t_min=1e-6):
    """Lower bounds for K(t, x; lambda), 0 < beta < 1.

    mittag_form = Gref_lower(t,x) gamma t^-sigma E_{1-sigma,1-sigma}(gamma t^(1-sigma))
    exp_form    = C_ Gref_lower(t,x) exp(Upsilon t)
    """
    if not t > 0:
        raise DomainError("t must be positive")
    kc = lower_constants(beta, lam)
    ref = lower_reference_for_green(beta)(t, x)
    mittag = ref * math.exp(_log_mittag_form(kc, t)) if ref > 0 else 0.0
    exp_form = constant_lower(kc, t_min) * ref * math.exp(kc.upsilon * t)
    return BoundReport(mittag, mittag, exp_form, Regime.LOWER)


def heat_kernel(nu, t, x):
    """p_nu(t, x) = (2 pi nu t)^(-1/2) exp(-x^2 / (2 nu t))."""
    return np.exp(-np.square(x) / (2.0 * nu * t)) / np.sqrt(2.0 * math.pi * nu * t)


def kernel_heat_exact(nu, lam, t, x):
    """K for G = p_nu, where the bounds are equalities.

    With g = lambda^2 / sqrt(4 nu):
    K = p_{nu/2}(t, x) [g / sqrt(pi t) + g^2 exp(g^2 t) erfc(-g sqrt(t))].
    """
    if not (nu > 0 and t > 0):
        raise DomainError("nu and t must be positive")
    g = lam * lam / math.sqrt(4.0 * nu)
    bracket = g / math.sqrt(math.pi * t) + g * g * math.exp(g * g * t) * special.erfc(-g * math.sqrt(t))
    return heat_kernel(nu / 2.0, t, x) * bracket


BIHARMONIC_GAMMA = 3.0 * math.sqrt(2.0) / 16.0


def kernel_biharmonic_exact(t, x, lam=1.0):
    """K for the squared heat operator, G(t,x) = sqrt(t / (4 pi)) exp(-x^2 / (4t)).

    K = gamma t^(3/2) p_1(t, x) E_{5/2,5/2}(gamma t^(5/2)) with gamma = lambda^2 (8 pi)^(-1/2) Gamma(5/2)
    (= 3 sqrt(2) / 16 at lambda = 1) and p_1(t, x) = (2 pi t)^(-1/2) exp(-x^2 / (2t)).
    """
    if not t > 0:
        raise DomainError("t must be positive")
    g = lam * lam * BIHARMONIC_GAMMA
    return g * t**1.5 * heat_kernel(1.0, t, x) * mittag_leffler((2.5, 2.5), g * t**2.5)


# ---------------------------------------------------------------------------
# numerical evaluation of the series sum_n L_n
# ---------------------------------------------------------------------------


def filon_cos(values, grid, omega):
    """int over ``grid`` of f(x) cos(omega x) dx for the piecewise-linear interpolant of ``values``.

    Exact for piecewise-linear f at any omega, so it is safe for large
    oscillation counts.  ``omega`` may be an array; the result has its shape.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    a = grid[:-1]
    h = np.diff(grid)
    fa = values[:-1]
    df = values[1:] - values[:-1]
    theta = omega[:, None] * h[None, :]
    small = np.abs(theta) < 1e-2
    th = np.where(small, 1.0, theta)
    e = np.exp(1j * th)
    i0 = np.where(small, 1 + 1j * theta / 2 - theta**2 / 6 - 1j * theta**3 / 24 + theta**4 / 120, (e - 1) / (1j * th))
    i1 = np.where(
        small,
        0.5 + 1j * theta / 3 - theta**2 / 8 - 1j * theta**3 / 30 + theta**4 / 144,
        e / (1j * th) + (e - 1) / th**2,
    )
    seg = h[None, :] * np.real(np.exp(1j * omega[:, None] * a[None, :]) * (fa[None, :] * i0 + df[None, :] * i1))
    return seg.sum(axis=1)


@dataclass(frozen=True)
class GreenHandle:
    """Self-similar Green function G(t, x) = t^time_exp profile(x / t^space_exp).

    ``c0``, ``c1`` and ``reference`` describe G^2 <= c0 t^-sigma reference
    (lambda = 1), with sigma = -(2 time_exp + space_exp).  ``profile_sq_ft``
    optionally gives the closed-form transform eta -> int profile(y)^2 cos(eta y) dy.
    """

    name: str
    profile: Callable
    time_exp: float
    space_exp: float
    c0: float
    c1: float
    reference: Callable
    profile_sq_ft: Optional[Callable] = None
    decay_scale: float = 30.0

    @property
    def sigma(self):
        return -(2.0 * self.time_exp + self.space_exp)

    def constants(self, lam=1.0):
        return KernelConstants(lam * lam * self.c0, self.c1, self.sigma)

    @classmethod
    def heat(cls, nu=2.0):
        """G = p_nu, for which both domination inequalities are equalities."""
        return _heat_handle(float(nu))

    @classmethod
    def biharmonic(cls):
        """G = sqrt(t / (4 pi)) exp(-x^2 / (4t)), Green function of the squared heat operator."""
        return _biharmonic_handle()

    @classmethod
    def fractional(cls, beta, kind=GreenKind.PRIMARY):
        """G_beta with the reference kernel of :func:`reference_for_green`."""
        if GreenKind(kind) is not GreenKind.PRIMARY:
            raise DomainError("the kernel machinery is set up for the primary Green function")
        return _fractional_handle(as_index(beta).beta)


# handles are cached so that equal requests share one (hashable) object and
# hence one cached series
@lru_cache(maxsize=None)
def _heat_handle(nu):
    if not nu > 0:
        raise DomainError(f"nu must be positive, got {nu}")
    return GreenHandle(
            name=f"heat(nu={nu})",
            profile=lambda y: heat_kernel(nu, 1.0, y),
            time_exp=-0.5,
            space_exp=0.5,
            c0=(4.0 * math.pi * nu) ** -0.5,
            c1=1.0,
            reference=lambda t, x: heat_kernel(nu / 2.0, t, x),
            profile_sq_ft=lambda eta: (4.0 * math.pi * nu) ** -0.5 * np.exp(-nu * np.square(eta) / 4.0),
            decay_scale=8.0 * math.sqrt(nu),
        )


@lru_cache(maxsize=None)
def _biharmonic_handle():
    return GreenHandle(
            name="biharmonic",
            profile=lambda y: np.exp(-np.square(y) / 4.0) / math.sqrt(4.0 * math.pi),
            time_exp=0.5,
            space_exp=0.5,
            c0=(8.0 * math.pi) ** -0.5,
            c1=1.0,
            reference=lambda t, x: heat_kernel(1.0, t, x),
            profile_sq_ft=lambda eta: (8.0 * math.pi) ** -0.5 * np.exp(-np.square(eta) / 2.0),
            decay_scale=16.0,
        )


@lru_cache(maxsize=None)
def _fractional_handle(b):
    fi = as_index(b)
    if not fi.beta < 2.0:
        raise DomainError("the kernel series needs 0 < beta < 2")
    m = fi.ceil_beta
    p = asymptotic_params(b)
    # G(1, y)^2 < 1e-40 beyond this point
    y_end = 2.0
    while 2.0 * (math.log(p.A) + p.a * math.log(y_end) - p.b * y_end**p.c) > math.log(1e-40):
        y_end *= 1.2
    return GreenHandle(
        name=f"G_{b}",
        profile=lambda y: green(b, GreenKind.PRIMARY, 1.0, y),
        time_exp=m - 1.0 - b / 2.0,
        space_exp=b / 2.0,
        c0=psi(b),
        c1=tilde_c(b),
        reference=reference_for_green(b),
        decay_scale=y_end,
    )


@dataclass(frozen=True)
class SeriesGrid:
    """Discretization of the Fourier-space recursion for L_n.

    n_eta points tabulate each transform on [0, eta_max]; each half of the
    time integral uses Gauss-Jacobi on the innermost panel and Gauss-Legendre
    with ``nodes`` points on geometrically shrinking panels; the squared
    profile is transformed from ``n_space`` points.
    """

    eta_max: float = 2000.0
    n_eta: int = 500
    nodes: int = 16
    n_space: int = 16001
    tol: float = 1e-3


def _two_scale_grid(top, n_lin, n_geom, knee=10.0):
    """Uniform points on [0, min(knee, top)] followed by geometric points up to ``top``."""
    if top <= knee:
        return np.linspace(0.0, top, n_lin + n_geom)
    return np.concatenate([np.linspace(0.0, knee, n_lin), np.geomspace(knee, top, n_geom)[1:]])


def _panel_rule(w_end, power, eta_max, nodes):
    """Nodes and weights for int_0^w_end w^power F(w) dw resolving F on scales down to 1/eta_max."""
    n_panels = max(1, int(math.ceil(math.log2(max(w_end * eta_max, 1.0) * 100.0))))
    edges = w_end * 2.0 ** -np.arange(n_panels + 1, dtype=float)
    xj, wj = special.roots_jacobi(nodes, 0.0, power)
    w0 = edges[-1]
    pts = [w0 * (xj + 1.0) / 2.0]
    wts = [(w0 / 2.0) ** (power + 1.0) * wj]
    xl, wl = np.polynomial.legendre.leggauss(nodes)
    for k in range(n_panels):
        lo, hi = edges[k + 1], edges[k]
        y = lo + (hi - lo) * (xl + 1.0) / 2.0
        pts.append(y)
        wts.append((hi - lo) / 2.0 * wl * y**power)
    return np.concatenate(pts), np.concatenate(wts)


class KernelSeries:
    """Transforms of the unit-time profiles of L_0, ..., L_{n_max} for lambda = 1.

    With L_n(t, x) = t^(e_n) l_n(x / t^h) the transforms obey

        l^_n(eta) = int_0^1 (1-s)^(f_{n-1}) s^(f_0) l^_{n-1}((1-s)^h eta) l^_0(s^h eta) ds,

    f_n = (n+1)(1 - sigma) - 1, which is evaluated with the substitutions
    s = w^(1/h) near 0 and 1 - s = v^(1/h) near 1 so that only analytic
    factors remain next to the Jacobi weights.
    """

    def __init__(self, handle, n_max, grid=SeriesGrid()):
        if int(n_max) != n_max or n_max < 0:
            raise DomainError(f"n_max must be a nonnegative integer, got {n_max}")
        self.handle = handle
        self.n_max = int(n_max)
        self.grid = grid
        h = handle.space_exp
        self.h = h
        self.f0 = -handle.sigma
        ft0 = self._profile_sq_transform()
        eta_max = grid.eta_max
        if handle.profile_sq_ft is not None:
            # Gaussian transforms: stop where they are negligible
            e = np.linspace(0.0, eta_max, 4001)
            v = np.abs(ft0(e))
            keep = np.nonzero(v > 1e-18 * v[0])[0]
            eta_max = float(e[min(keep[-1] + 1, len(e) - 1)])
        self.eta_max = eta_max
        knots = _two_scale_grid(eta_max, grid.n_eta // 2, grid.n_eta // 2)
        self.knots = knots
        self._u = np.log1p(knots)
        self.transforms = [ft0(knots)]
        self._splines = [interpolate.CubicSpline(self._u, self.transforms[0])]
        self._ft0 = ft0
        for n in range(1, self.n_max + 1):
            vals = self._step(n, knots, grid.nodes)
            self.transforms.append(vals)
            self._splines.append(interpolate.CubicSpline(self._u, vals))
        if self.n_max >= 1:
            probe = knots[:: max(1, len(knots) // 12)]
            coarse = self._step(self.n_max, probe, max(4, grid.nodes // 2))
            fine = self._spline_eval(self.n_max, probe)
            err = float(np.max(np.abs(coarse - fine)) / max(np.max(np.abs(fine)), 1e-300))
            self.recursion_error = err
            if err > grid.tol:
                raise AccuracyError(f"kernel-series recursion unresolved (relative change {err:.2e})", magnitude=err)
        else:
            self.recursion_error = 0.0

    def _profile_sq_transform(self):
        hd = self.handle
        if hd.profile_sq_ft is not None:
            return hd.profile_sq_ft
        y = np.linspace(0.0, hd.decay_scale, self.grid.n_space)
        sq = np.square(np.asarray(hd.profile(y), dtype=float))
        table_eta = np.concatenate([np.linspace(0.0, 10.0, 401), np.geomspace(10.0, self.grid.eta_max, 800)[1:]])
        table = 2.0 * filon_cos(sq, y, table_eta)
        spline = interpolate.CubicSpline(np.log1p(table_eta), table)
        eta_top = table_eta[-1]
        # beyond the table the transform decays like c / eta^2 (jump of the derivative at 0)
        c_tail = table[-1] * eta_top**2

        def ft(eta):
            eta = np.abs(np.asarray(eta, dtype=float))
            inside = eta <= eta_top
            out = np.empty_like(eta)
            out[inside] = spline(np.log1p(eta[inside]))
            out[~inside] = c_tail / np.square(eta[~inside])
            return out

        return ft

    def _spline_eval(self, n, eta):
        eta = np.abs(np.asarray(eta, dtype=float))
        inside = eta <= self.knots[-1]
        out = np.empty_like(eta)
        out[inside] = self._splines[n](np.log1p(eta[inside]))
        top = self.transforms[n][-1]
        out[~inside] = top * (self.knots[-1] / eta[~inside]) ** 2
        return out

    def _step(self, n, eta, nodes):
        h = self.h
        f0 = self.f0
        a = 1.0 - self.handle.sigma
        f_prev = n * a - 1.0
        eta = np.asarray(eta, dtype=float)
        e_max = max(float(np.max(eta)), 1.0)
        w_end = 0.5**h
        # left half: s = w^(1/h)
        wl, ql = _panel_rule(w_end, a / h - 1.0, e_max, nodes)
        s = wl ** (1.0 / h)
        left_factor = (1.0 - s) ** f_prev / h
        args_prev = ((1.0 - s) ** h)[None, :] * eta[:, None]
        args_0 = wl[None, :] * eta[:, None]
        left = (self._spline_eval(n - 1, args_prev) * self._ft0(args_0)) @ (ql * left_factor)
        # right half: 1 - s = v^(1/h)
        vr, qr = _panel_rule(w_end, n * a / h - 1.0, e_max, nodes)
        s = 1.0 - vr ** (1.0 / h)
        right_factor = s**f0 / h
        args_prev = vr[None, :] * eta[:, None]
        args_0 = (s**h)[None, :] * eta[:, None]
        right = (self._spline_eval(n - 1, args_prev) * self._ft0(args_0)) @ (qr * right_factor)
        return left + right

    def unit_profile(self, n, y):
        """l_n(y) = (1/pi) int_0^inf l^_n(eta) cos(eta y) d eta."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        top = self.eta_max
        dense = _two_scale_grid(top, 4001, 6000)
        vals = self._spline_eval(n, dense)
        body = filon_cos(vals, dense, y)
        # tail c / eta^2 past the table, integrated in closed form
        c = vals[-1] * top**2
        with np.errstate(invalid="ignore"):
            si, _ = special.sici(top * y)
            tail = np.where(y == 0.0, c / top, c * (np.cos(top * y) / top - y * (math.pi / 2.0 - si)))
        return (body + tail) / math.pi

    def terms(self, lam, t, x):
        """[L_0(t, x), ..., L_{n_max}(t, x)] for the given lambda."""
        if not t > 0:
            raise DomainError("t must be positive")
        h = self.h
        a = 1.0 - self.handle.sigma
        y = float(x) / t**h
        out = []
        for n in range(self.n_max + 1):
            e_n = (n + 1) * a - 1.0 - h
            out.append(lam ** (2 * (n + 1)) * t**e_n * float(self.unit_profile(n, y)[0]))
        return out


@lru_cache(maxsize=16)
def _cached_series(handle, n_max, grid):
    return KernelSeries(handle, n_max, grid)


def kernel_series_terms(handle, lam, t, x, n_max, grid=SeriesGrid()):
    """The individual terms L_0, ..., L_{n_max} at (t, x)."""
    return _cached_series(handle, int(n_max), grid).terms(lam, t, x)


def kernel_series_numeric(handle, lam, t, x, n_max, grid=SeriesGrid()):
    """(partial_sums, tail_estimate) of K(t, x; lambda) = sum_n L_n.

    ``partial_sums[k]`` is L_0 + ... + L_k.  The tail estimate
    B_{n_max+2}(t) Gref(t, x) bounds the first omitted term L_{n_max+1}.
    """
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be a positive integer, got {n_max}")
    terms = kernel_series_terms(handle, lam, t, x, n_max, grid)
    tail = bn(int(n_max) + 2, t, handle.constants(lam)) * float(handle.reference(t, x))
    return list(np.cumsum(terms)), tail
