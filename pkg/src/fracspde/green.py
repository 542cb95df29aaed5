"""Green functions of the time-fractional diffusion equation on the real line.

For beta in (0, 2] with m = ceil(beta)::

    G_beta(t, x)  = t^(m - 1 - beta/2) / 2 * M_{beta/2, m}(|x| / t^(beta/2))
    G*_beta(t, x) = t^(-beta/2) / 2 * M_{beta/2, 1}(|x| / t^(beta/2))

G is the response to a Dirac mass placed in u(0, .) when beta <= 1 and in
the initial velocity when beta > 1; G* answers a Dirac mass in u(0, .) for
beta > 1.  beta = 1 is the heat kernel and beta = 2 the wave kernel.
"""

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, special

from .errors import AccuracyError, DomainError, UnsupportedDistributionError
from .specfun import (
    DEFAULT_POLICY,
    log_abs_mainardi,
    mainardi,
    mittag_leffler,
    mittag_leffler_array,
    neg_bound_constant,
    rgamma,
)


@dataclass(frozen=True)
class FractionalIndex:
    """Validated fractional order beta in (0, 2]."""

    beta: float

    def __post_init__(self):
        b = float(self.beta)
        if not (0.0 < b <= 2.0):
            raise DomainError(f"beta must lie in (0, 2], got {self.beta}")
        object.__setattr__(self, "beta", b)

    @property
    def ceil_beta(self):
        return 1 if self.beta <= 1.0 else 2

    @property
    def slow(self):
        return self.beta <= 1.0

    @property
    def sigma(self):
        """Time exponent with G_beta(t,x)^2 <= Psi t^-sigma * reference kernel."""
        return self.beta / 2.0 + 2.0 * (1 - self.ceil_beta)


class GreenKind(enum.Enum):
    PRIMARY = "primary"
    STAR = "star"


@dataclass(frozen=True)
class AsymptoticParams:
    """G(1, x) ~ A |x|^a exp(-b |x|^c) as |x| -> infinity."""

    A: float
    a: float
    b: float
    c: float


def as_index(beta):
    return beta if isinstance(beta, FractionalIndex) else FractionalIndex(beta)


def _kind(kind):
    if isinstance(kind, GreenKind):
        return kind
    return GreenKind(str(kind).lower())


def _order(fi, kind):
    """The integer that replaces ceil(beta) in every formula (1 for G*)."""
    return fi.ceil_beta if _kind(kind) is GreenKind.PRIMARY else 1


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError(f"time must be positive, got {t}")
    return t


def _scalarize(out):
    return float(out) if np.ndim(out) == 0 else out


def green(beta, kind, t, x, policy=DEFAULT_POLICY):
    """G_beta(t, x) (``kind`` PRIMARY) or G*_beta(t, x) (``kind`` STAR); broadcasts t and x."""
    fi = as_index(beta)
    kind = _kind(kind)
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    b = fi.beta
    if b == 2.0:
        if kind is GreenKind.STAR:
            raise UnsupportedDistributionError(
                "G*_2 is the Dirac pair (delta(x-t) + delta(x+t))/2; it has no pointwise values"
            )
        return _scalarize(np.where(np.abs(x) <= t, 0.5, 0.0) + 0.0 * t)
    if b == 1.0:
        return _scalarize(np.exp(-x * x / (4.0 * t)) / np.sqrt(4.0 * math.pi * t))
    m = _order(fi, kind)
    t, x = np.broadcast_arrays(t, x)
    scale = t ** (b / 2.0)
    prefactor = t ** (m - 1.0 - b / 2.0) / 2.0
    out = prefactor * mainardi((b / 2.0, m), np.abs(x) / scale, policy)
    return _scalarize(out)


def log_green(beta, kind, t, x, policy=DEFAULT_POLICY):
    """log G_beta(t, x), finite far into the tail where G underflows."""
    fi = as_index(beta)
    kind = _kind(kind)
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    b = fi.beta
    if b == 2.0:
        if kind is GreenKind.STAR:
            raise UnsupportedDistributionError("G*_2 has no pointwise values")
        with np.errstate(divide="ignore"):
            return _scalarize(np.log(np.asarray(green(fi, kind, t, x))))
    if b == 1.0:
        return _scalarize(-x * x / (4.0 * t) - 0.5 * np.log(4.0 * math.pi * t))
    m = _order(fi, kind)
    t, x = np.broadcast_arrays(t, x)
    log_m, _ = log_abs_mainardi((b / 2.0, m), np.abs(x) / t ** (b / 2.0), policy)
    return _scalarize((m - 1.0 - b / 2.0) * np.log(t) - math.log(2.0) + log_m)


def green_total_mass(beta, kind, t):
    """int G(t, x) dx = t^(ceil(beta) - 1) for G, and 1 for G*."""
    fi = as_index(beta)
    _check_t(t)
    return float(t) ** (_order(fi, kind) - 1)


def green_moment(beta, kind, a, t):
    """int |x|^a G(t, x) dx = Gamma(a+1) / Gamma(a beta/2 + m) * t^(a beta/2 + m - 1)."""
    fi = as_index(beta)
    _check_t(t)
    if not a > -1:
        raise DomainError(f"moment order must exceed -1, got {a}")
    m = _order(fi, kind)
    b = fi.beta
    return float(special.gamma(a + 1.0)) * rgamma(a * b / 2.0 + m) * float(t) ** (a * b / 2.0 + m - 1.0)


def green_fourier(beta, kind, t, xi, policy=DEFAULT_POLICY):
    """int exp(-i xi x) G(t, x) dx = t^(m-1) E_{beta, m}(-t^beta xi^2)."""
    fi = as_index(beta)
    _check_t(t)
    m = _order(fi, kind)
    if fi.beta == 2.0 and _kind(kind) is GreenKind.STAR:
        return math.cos(t * xi)
    return float(t) ** (m - 1) * mittag_leffler((fi.beta, m), -(float(t) ** fi.beta) * xi * xi, policy)


def green_laplace(beta, kind, z, policy=DEFAULT_POLICY):
    """int_0^inf exp(-z x) G(1, x) dx = E_{beta/2, m}(-z) / 2."""
    fi = as_index(beta)
    m = _order(fi, kind)
    return 0.5 * mittag_leffler((fi.beta / 2.0, m), -float(z), policy)


def green_peak(beta, kind, t):
    """G(t, 0) = t^(m - 1 - beta/2) / (2 Gamma(m - beta/2)).

    This is the maximum of G_beta.  For G*_beta with 1 < beta < 2 the point
    x = 0 is a local minimum between two symmetric maxima.
    """
    fi = as_index(beta)
    _check_t(t)
    m = _order(fi, kind)
    b = fi.beta
    return float(t) ** (m - 1.0 - b / 2.0) * rgamma(m - b / 2.0) / 2.0


def green_derivative(beta, kind, t, x, n, policy=DEFAULT_POLICY):
    """n-th space derivative of G(t, .) at x != 0.

    For x > 0 the value is (-1)^n t^(m - 1 - (n+1) beta/2) / 2 * M_{beta/2, m - n beta/2}(x / t^(beta/2));
    for x < 0 the sign factor is dropped and |x| is used.  The one-sided
    limits at the origin are requested with a signed zero: ``+0.0`` gives the
    right limit and ``-0.0`` the left limit.  An integer ``0`` is rejected
    because the derivative does not exist there.
    """
    fi = as_index(beta)
    _check_t(t)
    if int(n) != n or n < 0:
        raise DomainError(f"derivative order must be a nonnegative integer, got {n}")
    n = int(n)
    if isinstance(x, (int, np.integer)) and x == 0:
        raise DomainError(
            "G is not differentiable at x = 0; pass +0.0 or -0.0 for the one-sided limits"
        )
    x = float(x)
    b = fi.beta
    if b == 2.0:
        raise DomainError("the wave kernel is piecewise constant; derivatives are distributions")
    m = _order(fi, kind)
    right = math.copysign(1.0, x) > 0
    scale = float(t) ** (b / 2.0)
    value = float(t) ** (m - 1.0 - (n + 1) * b / 2.0) / 2.0 * mainardi(
        (b / 2.0, m - n * b / 2.0), abs(x) / scale, policy
    )
    return (-1) ** n * value if right else value


def asymptotic_params(beta, kind=GreenKind.PRIMARY):
    """Constants (A, a, b, c) of the tail G(1, x) ~ A |x|^a exp(-b |x|^c)."""
    fi = as_index(beta)
    b = fi.beta
    if b == 2.0:
        raise DomainError("beta = 2 has compact support; there is no tail regime")
    m = _order(fi, kind)
    a = (1.0 + b - 2.0 * m) / (2.0 - b)
    c = 2.0 / (2.0 - b)
    bb = (2.0 - b) * 2.0 ** (-2.0 / (2.0 - b)) * b ** (b / (2.0 - b))
    A = (
        2.0 * math.pi * (2.0 - b)
        * 2.0 ** ((b + 4.0 * (1.0 - m)) / (2.0 - b))
        * b ** (2.0 * (1.0 + b - 2.0 * m) / (b - 2.0))
    ) ** -0.5
    return AsymptoticParams(A=A, a=a, b=bb, c=c)


def tail_cutoff(beta, kind, t, abs_tol=1e-14, safety=10.0):
    """Smallest X with safety * envelope(t, x) < abs_tol for all |x| >= X.

    The envelope is the tail form A |y|^a exp(-b |y|^c) of G(1, y) carried to
    time t through the scaling relation.
    """
    fi = as_index(beta)
    b = fi.beta
    if b == 2.0:
        return float(t)
    p = asymptotic_params(fi, kind)
    m = _order(fi, kind)
    pref = float(t) ** (m - 1.0 - b / 2.0)

    def log_env(y):
        return math.log(safety * pref * p.A) + p.a * math.log(y) - p.b * y ** p.c

    y = 1.0
    while log_env(y) > math.log(abs_tol) or y < 2.0:
        y *= 1.25
    return y * float(t) ** (b / 2.0)


def quad_green_even(beta, kind, t, f, abs_tol=1e-14):
    """int_R f(x) G(t, x) dx for even f, by adaptive quadrature on [0, tail_cutoff]."""
    x_end = tail_cutoff(beta, kind, t, abs_tol)
    val, err = integrate.quad(
        lambda x: f(x) * green(beta, kind, t, x), 0.0, x_end, epsabs=abs_tol, epsrel=1e-12, limit=400
    )
    return 2.0 * val, 2.0 * err


# ---------------------------------------------------------------------------
# L^2 increments (slow regime)
# ---------------------------------------------------------------------------


class NegativeAxisTable:
    """Fast y -> E_{alpha,beta}(-y), y >= 0, for 0 < alpha < 1 (completely monotone case).

    Tabulates log E against log y on [y_min, y_max] and uses a cubic spline;
    the short series covers y < y_min and the algebraic expansion y > y_max.
    """

    def __init__(self, alpha, beta, y_min=1e-6, y_max=1e9, n=1600):
        if not (0 < alpha < 1 and beta >= alpha):
            raise DomainError("table needs 0 < alpha < 1 <= ... with beta >= alpha")
        self.alpha = alpha
        self.beta = beta
        self.y_min = y_min
        self.y_max = y_max
        ly = np.linspace(math.log(y_min), math.log(y_max), n)
        vals = mittag_leffler_array((alpha, beta), -np.exp(ly))
        self._spline = interpolate.CubicSpline(ly, np.log(vals))
        self._c = [rgamma(beta + alpha * k) for k in range(4)]
        self._d = [rgamma(beta - alpha * k) for k in range(1, 6)]

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        lo = y < self.y_min
        hi = y > self.y_max
        mid = ~(lo | hi)
        if np.any(lo):
            yl = y[lo]
            out[lo] = self._c[0] - yl * self._c[1] + yl * yl * self._c[2] - yl ** 3 * self._c[3]
        if np.any(mid):
            out[mid] = np.exp(self._spline(np.log(y[mid])))
        if np.any(hi):
            yh = y[hi]
            out[hi] = sum(-((-yh) ** -(k + 1)) * d for k, d in enumerate(self._d))
        return out


@lru_cache(maxsize=None)
def _table(alpha, beta):
    return NegativeAxisTable(alpha, beta)


def l2_constant(beta):
    """C_{beta,2} = sup_{y>=0} (1 + y) E_{beta,2}(-y) used by the increment bounds."""
    return neg_bound_constant((beta, 2.0))


_GL16 = np.polynomial.legendre.leggauss(16)


def _geometric_panels(lo, hi, n_panels):
    edges = np.geomspace(lo, hi, n_panels + 1)
    a, b = edges[:-1], edges[1:]
    x = 0.5 * (b - a)[:, None] * (_GL16[0][None, :] + 1.0) + a[:, None]
    w = 0.5 * (b - a)[:, None] * _GL16[1][None, :]
    return x.ravel(), w.ravel()


def _squared_profile_integral(beta):
    """I = int_0^inf E_{beta,1}(-eta^2)^2 d eta."""
    tab = _table(beta, 1.0)
    eta, w = _geometric_panels(1e-8, 1e6, 200)
    head = 1e-8  # integrand is 1 on [0, 1e-8]
    body = float(np.sum(w * tab(eta * eta) ** 2))
    # tail beyond 1e6: E ~ eta^-2 / Gamma(1-beta)
    tail = rgamma(1.0 - beta) ** 2 / (3.0 * 1e18)
    return head + body + tail


def _check_slow(beta):
    fi = as_index(beta)
    if not fi.beta < 1.0:
        raise DomainError(f"L2 increment integrals are provided for 0 < beta < 1, got {fi.beta}")
    return fi.beta


def _space_profile(beta, eta):
    """H(eta) = int_0^1 E_{beta,1}(-u^beta eta^2)^2 du, vectorized over eta."""
    tab = _table(beta, 1.0)
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    # substitute u = w^(1/beta): du = w^(1/beta - 1) dw / beta, argument w eta^2
    w_nodes, w_weights = _geometric_panels(1e-14, 1.0, 120)
    jac = w_nodes ** (1.0 / beta - 1.0) / beta
    vals = tab(w_nodes[None, :] * (eta * eta)[:, None]) ** 2
    head = (1e-14) ** (1.0 / beta)  # integrand ~ 1 on the first sliver
    return head + vals @ (w_weights * jac)


def l2_space_increment(beta, t, dx, policy=DEFAULT_POLICY):
    """(value, bound) for int_0^t dr int dz (G(t-r, x-z) - G(t-r, y-z))^2 with |x - y| = dx.

    The value uses Plancherel's identity::

        value = (2/pi) int_0^inf (1 - cos(xi dx)) int_0^t E_{beta,1}(-r^beta xi^2)^2 dr dxi

    and ``bound = 4 C_{beta,2} t^(1-beta) dx / pi``.
    """
    b = _check_slow(beta)
    _check_t(t)
    if dx < 0:
        raise DomainError("dx must be nonnegative")
    bound = 4.0 * l2_constant(b) / math.pi * float(t) ** (1.0 - b) * dx
    if dx == 0:
        return 0.0, bound
    scale = float(t) ** (b / 2.0)

    def h(xi):
        return float(t) * float(_space_profile(b, scale * xi)[0])

    opts = dict(limit=800, epsabs=1e-13, epsrel=1e-10)
    # (1 - cos) integrand: split the smooth part from the Fourier part
    xi_cut = 50.0 / dx
    # convergence is judged below from the returned error estimates
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        smooth, e1 = integrate.quad(lambda xi: h(xi) * (1.0 - math.cos(xi * dx)), 0.0, xi_cut, **opts)
        far_plain, e2 = integrate.quad(h, xi_cut, np.inf, limit=800, epsabs=1e-13)
        far_cos, e3 = integrate.quad(h, xi_cut, np.inf, weight="cos", wvar=dx, limlst=200)
    value = 2.0 / math.pi * (smooth + far_plain - far_cos)
    err = 2.0 / math.pi * (e1 + e2 + abs(e3))
    if not policy.accepts(value, err) and err > 1e-5 * abs(value):
        raise AccuracyError("space-increment quadrature did not converge", magnitude=err)
    return value, bound


def _overlap_profile(beta, rho):
    """D(rho) = int_0^inf (E(-rho eta^2) - E(-eta^2))^2 d eta for 0 < rho <= 1 (E = E_{beta,1})."""
    tab = _table(beta, 1.0)
    hi = 1e6 / math.sqrt(rho)
    eta, w = _geometric_panels(1e-8, hi, 240)
    diff = tab(rho * eta * eta) - tab(eta * eta)
    return float(np.sum(w * diff * diff))


def l2_time_increment(beta, s, t, policy=DEFAULT_POLICY):
    """(value_overlap, value_tail, bound_overlap, bound_tail) for 0 < s <= t.

    value_overlap = int_0^s dr int dz (G(t-r, z) - G(s-r, z))^2
    value_tail    = int_s^t dr int dz G(t-r, z)^2
    bounds        = 2 C (t-s)^(1-beta/2) and C/2 (t-s)^(1-beta/2), C = C_{beta,2}.
    """
    b = _check_slow(beta)
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    c2 = l2_constant(b)
    delta = float(t) - float(s)
    env = delta ** (1.0 - b / 2.0)
    if delta == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    sq = _squared_profile_integral(b)
    value_tail = sq / math.pi * env / (1.0 - b / 2.0)

    def integrand(tau):
        rho = (tau / (tau + delta)) ** b
        if rho < 1e-24:
            # D(rho) ~ rho^(-1/2) sq as rho -> 0
            return sq
        return (tau + delta) ** (-b / 2.0) * _overlap_profile(b, rho) * tau ** (b / 2.0)

    # integrand behaves like tau^(-beta/2) at 0; the 'alg' weight absorbs it
    val, err = integrate.quad(
        integrand, 0.0, float(s), weight="alg", wvar=(-b / 2.0, 0.0), epsabs=1e-13, epsrel=1e-10, limit=200
    )
    value_overlap = val / math.pi
    return value_overlap, value_tail, 2.0 * c2 * env, 0.5 * c2 * env
