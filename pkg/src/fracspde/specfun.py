"""Mittag-Leffler, Wright and Mainardi functions for real arguments.

Two-parameter Mittag-Leffler function::

    E_{a,b}(z) = sum_k z^k / Gamma(a k + b)

Two-parameter Mainardi function (a Wright function in disguise)::

    M_{l,m}(z) = W_{-l, m-l}(-z) = sum_n (-z)^n / (n! Gamma(m - (n+1) l)),   0 <= l < 1

Every evaluator chooses between several routes and only returns a value
whose estimated error is within the requested policy:

* power series in double precision, with a cancellation estimate;
* large-argument expansions (algebraic terms plus the exponential terms
  contributed by poles of the Hankel integrand);
* a non-oscillatory real integral for E_{a,b}(-x) with 0 < a < 1;
* the Wright integral along its exact steepest-descent contour for M;
* a multiprecision series as a last resort for moderate arguments.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .errors import AccuracyError, DomainError

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class MLParams:
    """Parameters (alpha, beta) of E_{alpha,beta}."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"Mittag-Leffler alpha must be positive, got {self.alpha}")
        if not math.isfinite(self.beta):
            raise DomainError(f"Mittag-Leffler beta must be finite, got {self.beta}")


@dataclass(frozen=True)
class MainardiParams:
    """Parameters (lam, mu) of M_{lam,mu}; ``lam`` must lie in [0, 1)."""

    lam: float
    mu: float

    def __post_init__(self):
        if not (0.0 <= self.lam < 1.0):
            raise DomainError(f"Mainardi order must satisfy 0 <= lambda < 1, got {self.lam}")
        if not math.isfinite(self.mu):
            raise DomainError(f"Mainardi mu must be finite, got {self.mu}")


@dataclass(frozen=True)
class EvalPolicy:
    """Accuracy targets and switch points for the special-function evaluators.

    A value is accepted when its estimated error is at most
    ``max(rel_tol * |value|, abs_tol)``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    series_max_terms: int = 20000
    asymptotic_switch: float = 5.0
    asymptotic_order_p: int = 3

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("rel_tol and abs_tol must be positive")
        if self.series_max_terms < 1 or self.asymptotic_order_p < 1:
            raise DomainError("series_max_terms and asymptotic_order_p must be >= 1")
        if not self.asymptotic_switch > 0:
            raise DomainError("asymptotic_switch must be positive")

    def accepts(self, value, err):
        return err <= max(self.rel_tol * abs(value), self.abs_tol)


DEFAULT_POLICY = EvalPolicy()


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def rgamma(x):
    """Reciprocal Gamma function; exactly 0 at the poles 0, -1, -2, ..."""
    if _is_nonpositive_integer(x):
        return 0.0
    return float(special.rgamma(x))


def _log_abs_rgamma(x):
    """Return (log|1/Gamma(x)|, sign); sign is 0 at poles."""
    x = np.asarray(x, dtype=float)
    pole = (x <= 0) & (x == np.floor(x))
    with np.errstate(all="ignore"):
        log_mag = -special.gammaln(x)
        sign = special.gammasgn(x)
    log_mag = np.where(pole, -np.inf, log_mag)
    sign = np.where(pole, 0.0, sign)
    return log_mag, sign


# ---------------------------------------------------------------------------
# Mittag-Leffler function
# ---------------------------------------------------------------------------


def _ml_series(alpha, beta, z, max_terms, n_terms=None):
    """Power series in double precision.

    Returns (value, error_estimate). Terms are produced by direct powers
    while they stay representable and in log form afterwards.
    """
    if z == 0.0:
        return rgamma(beta), 0.0
    log_abs_z = math.log(abs(z))
    # terms grow until roughly k = |z|^(1/alpha) / alpha
    k_peak = abs(z) ** (1.0 / alpha) / alpha
    if n_terms is None:
        n_terms = max(64, 2.0 * k_peak + 64)
    chunk = int(min(max_terms, n_terms))
    k = np.arange(chunk, dtype=float)
    log_rg, sg = _log_abs_rgamma(alpha * k + beta)
    log_t = k * log_abs_z + log_rg
    zsign = np.where((z < 0) & (k % 2 == 1), -1.0, 1.0)
    with np.errstate(over="ignore", under="ignore"):
        terms = zsign * sg * np.exp(log_t)
    # direct evaluation is more accurate for small k (no exp/log round trip)
    small = (k * abs(log_abs_z) < 600) & (alpha * k + beta < 170)
    if np.any(small):
        ks = k[small]
        terms[small] = np.power(z, ks) * special.rgamma(alpha * ks + beta)
        terms[small & (sg == 0)] = 0.0
    if not np.all(np.isfinite(terms)):
        raise AccuracyError("Mittag-Leffler series overflowed", magnitude=math.inf)
    mags = np.abs(terms)
    abs_sum = float(np.sum(mags))
    tail = float(np.max(mags[-3:]))
    past_peak = k[-1] > k_peak
    if not past_peak or tail > 1e-3 * _EPS * abs_sum:
        if chunk >= max_terms:
            raise AccuracyError(
                f"Mittag-Leffler series did not converge within {max_terms} terms",
                magnitude=tail,
            )
        return _ml_series(alpha, beta, z, max_terms, 4 * chunk)
    value = math.fsum(terms.tolist())
    err = 4.0 * _EPS * abs_sum + 2.0 * tail
    return value, err


def _ml_log_series_positive(alpha, beta, z, max_terms):
    """log E_{alpha,beta}(z) for z > 0 by log-domain summation (no cancellation for beta > 0)."""
    k_peak = z ** (1.0 / alpha) / alpha
    n = int(k_peak + 12.0 * math.sqrt(k_peak + 1.0) / min(alpha, 1.0) + 80)
    if n > max_terms:
        raise AccuracyError("positive Mittag-Leffler series needs too many terms", magnitude=n)
    k = np.arange(n, dtype=float)
    log_rg, sg = _log_abs_rgamma(alpha * k + beta)
    log_t = k * math.log(z) + log_rg
    val, sign = special.logsumexp(log_t, b=sg, return_sign=True)
    if sign <= 0:
        raise AccuracyError("positive-argument Mittag-Leffler series has nonpositive sum")
    return float(val)


def _exponential_terms(alpha, beta, z):
    """Pole contributions (1/alpha) * zeta^(1-beta) * exp(zeta) for real z != 0.

    The Hankel-contour integrand s^(alpha-beta) e^s / (s^alpha - z) has poles at
    zeta_m = |z|^(1/alpha) exp(i theta_m) with theta_m = (2m + [z<0]) pi / alpha,
    and only those with |theta_m| < pi lie on the principal sheet.
    Returns (list of (log_modulus, phase, amplitude_phase)) to allow log-domain use.
    """
    r = abs(z) ** (1.0 / alpha)
    offset = 1 if z < 0 else 0
    out = []
    m_max = int(alpha) + 2
    for m in range(-m_max, m_max + 1):
        theta = (2 * m + offset) * math.pi / alpha
        if abs(theta) < math.pi - 1e-15:
            out.append(theta)
    terms = []
    for theta in out:
        # zeta^(1-beta) exp(zeta) / alpha
        log_mod = (1.0 - beta) * math.log(r) + r * math.cos(theta) - math.log(alpha)
        phase = (1.0 - beta) * theta + r * math.sin(theta)
        terms.append((log_mod, phase))
    return terms


def _algebraic_terms(alpha, beta, z, p):
    """-sum_{k=1}^p z^-k / Gamma(beta - alpha k) and the first nonzero omitted term."""
    total = 0.0
    for k in range(1, p + 1):
        total -= z ** (-k) * rgamma(beta - alpha * k)
    omitted = 0.0
    for k in range(p + 1, p + 4):
        c = rgamma(beta - alpha * k)
        if c != 0.0:
            omitted = abs(z) ** (-k) * abs(c)
            break
    return total, omitted


def _ml_asymptotic(alpha, beta, z, p):
    """Large-|z| expansion; returns (value, remainder_estimate)."""
    alg, rem = _algebraic_terms(alpha, beta, z, p)
    exp_part = 0.0
    for log_mod, phase in _exponential_terms(alpha, beta, z):
        if log_mod > 709:
            return math.copysign(math.inf, math.cos(phase)), 0.0
        exp_part += math.exp(log_mod) * math.cos(phase)
    return exp_part + alg, rem


def _ml_asymptotic_adaptive(alpha, beta, z, policy, margin=10.0):
    """Expansion with order escalated from the policy order while terms keep shrinking.

    The first omitted term is an optimistic error estimate, so a value is
    accepted only when ``margin`` times that term passes the policy.
    """
    p = policy.asymptotic_order_p
    best = None
    prev_rem = math.inf
    while p <= 60:
        value, rem = _ml_asymptotic(alpha, beta, z, p)
        if best is None or rem < best[1]:
            best = (value, rem)
        if policy.accepts(value, margin * rem):
            return value, rem
        if rem > prev_rem and rem != 0.0:
            break
        prev_rem = rem if rem != 0.0 else prev_rem
        p += 1
    return best


def _ml_integral_negative(alpha, beta, x):
    """E_{alpha,beta}(-x) for 0 < alpha < 1, x > 0 by a non-oscillatory real integral.

    Collapsing the Hankel contour onto the negative axis (no poles on the
    principal sheet when alpha < 1) gives, for beta < 1 + alpha,

        E(-x) = (1/pi) int_0^inf u^(alpha-beta) e^-u
                 (r sin(pi(1-beta)) + x sin(pi(1-beta+alpha))) / (r^2 + 2 r x cos(pi alpha) + x^2) du,

    with r = u^alpha.  Larger beta is reduced with E_b = (E_{b-a} - 1/Gamma(b-a)) / z.
    Returns (value, error_estimate).
    """
    if beta >= 1.0 + alpha:
        inner, err = _ml_integral_negative(alpha, beta - alpha, x)
        return (inner - rgamma(beta - alpha)) / (-x), err / x
    s1 = math.sin(math.pi * (1.0 - beta))
    s2 = math.sin(math.pi * (1.0 - beta + alpha))
    c = math.cos(math.pi * alpha)

    def rational(u):
        r = u ** alpha
        return math.exp(-u) * (r * s1 + x * s2) / (r * r + 2.0 * r * x * c + x * x)

    u_split = max(1.0, x ** (1.0 / alpha))
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=400)
    i1, e1 = integrate.quad(rational, 0.0, u_split, weight="alg", wvar=(alpha - beta, 0.0), **opts)
    i2, e2 = integrate.quad(lambda u: u ** (alpha - beta) * rational(u), u_split, np.inf, **opts)
    return (i1 + i2) / math.pi, (e1 + e2) / math.pi


def _ml_series_multiprecision(alpha, beta, z, max_terms):
    """Power series in extended precision, sized from the largest term."""
    import mpmath

    k = np.arange(max_terms, dtype=float)
    log_rg, sg = _log_abs_rgamma(alpha * k + beta)
    log_t = k * math.log(abs(z)) + log_rg
    log_max = float(np.max(log_t[sg != 0]))
    # tail must fall well below the smallest plausible result (~|z|^-2 scale)
    target = -2.0 * math.log(abs(z) + 1.0) - 40.0
    below = np.nonzero((log_t < min(target, log_max - 40.0)) & (k > abs(z) ** (1.0 / alpha) / alpha))[0]
    if below.size == 0:
        raise AccuracyError("multiprecision Mittag-Leffler series exceeds max terms", magnitude=log_max)
    n_terms = int(below[0]) + 1
    dps = int(max(log_max, 0.0) / math.log(10.0)) + 30
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        for j in range(n_terms):
            total += power * mpmath.rgamma(a * j + b)
            power *= zz
        return float(total)


def _ml_alpha_one_integer_beta(beta, z):
    """E_{1,m}(z) = z^(1-m) e^z - sum_{k=1}^{m-1} z^-k / Gamma(m-k) for integer m >= 1."""
    m = int(beta)
    value = z ** (1 - m) * math.exp(z)
    for k in range(1, m):
        value -= z ** (-k) / math.factorial(m - k - 1)
    return value


def mittag_leffler(params, z, policy=DEFAULT_POLICY):
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.

    ``params`` is an :class:`MLParams` or an ``(alpha, beta)`` pair.
    Returns ``inf`` when the value overflows a double (large positive z);
    use :func:`log_mittag_leffler` there.
    """
    alpha, beta = _ml_pair(params)
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"Mittag-Leffler argument must be finite, got {z}")
    if z == 0.0:
        return rgamma(beta)
    if z > 0:
        return _ml_positive(alpha, beta, z, policy)
    return _ml_negative(alpha, beta, z, policy)


def _ml_pair(params):
    if isinstance(params, MLParams):
        return params.alpha, params.beta
    alpha, beta = params
    p = MLParams(float(alpha), float(beta))
    return p.alpha, p.beta


def _ml_positive(alpha, beta, z, policy):
    if z ** (1.0 / alpha) < 600.0:
        if beta > 0:
            return math.exp(_ml_log_series_positive(alpha, beta, z, max(policy.series_max_terms, 10 ** 5)))
        value, err = _ml_series(alpha, beta, z, policy.series_max_terms)
        if policy.accepts(value, err):
            return value
    value, rem = _ml_asymptotic_adaptive(alpha, beta, z, policy)
    return value


def _ml_negative(alpha, beta, z, policy):
    x = -z
    attempts = []

    def series():
        if x ** (1.0 / alpha) > 45.0:
            return None
        return _ml_series(alpha, beta, z, policy.series_max_terms)

    def asymptotic():
        if alpha == 1.0 and float(beta).is_integer() and beta >= 1:
            return _ml_alpha_one_integer_beta(beta, z), 4.0 * _EPS * abs(math.exp(z)) * x ** abs(1 - beta)
        # below alpha = 1 the integral route is a reliable fallback, so be strict here
        margin = 1e4 if alpha < 1.0 else 10.0
        value, rem = _ml_asymptotic_adaptive(alpha, beta, z, policy, margin)
        return value, margin * rem

    order = [series, asymptotic] if x <= policy.asymptotic_switch else [asymptotic, series]
    if alpha < 1.0:
        order.append(lambda: _ml_integral_negative(alpha, beta, x))
    for route in order:
        try:
            res = route()
        except AccuracyError as exc:
            attempts.append(exc.magnitude)
            continue
        if res is None:
            continue
        value, err = res
        attempts.append(err)
        if math.isfinite(value) and policy.accepts(value, err):
            return value
    # last resort: extended-precision series for moderate arguments
    if x ** (1.0 / alpha) / alpha < policy.series_max_terms / 4:
        return _ml_series_multiprecision(alpha, beta, z, policy.series_max_terms)
    raise AccuracyError(
        f"E_{{{alpha},{beta}}}({z}) not evaluable to rel_tol={policy.rel_tol}",
        magnitude=min((a for a in attempts if a is not None), default=None),
    )


def log_mittag_leffler(params, z, policy=DEFAULT_POLICY):
    """log E_{alpha,beta}(z) for z >= 0 without overflow (requires beta > 0)."""
    alpha, beta = _ml_pair(params)
    z = float(z)
    if z < 0:
        raise DomainError("log_mittag_leffler is defined here for z >= 0 only")
    if beta <= 0:
        raise DomainError("log_mittag_leffler requires beta > 0")
    if z == 0.0:
        return -math.log(special.gamma(beta))
    if z ** (1.0 / alpha) < 600.0:
        return _ml_log_series_positive(alpha, beta, z, max(policy.series_max_terms, 10 ** 5))
    # dominant pole term; the others are smaller by exp(-r (1 - cos(2 pi / alpha)))
    terms = _exponential_terms(alpha, beta, z)
    log_mod0, _ = max(terms)
    rest = sum(math.exp(lm - log_mod0) * math.cos(ph) for lm, ph in terms)
    alg, _ = _algebraic_terms(alpha, beta, z, policy.asymptotic_order_p)
    return log_mod0 + math.log(rest + alg * math.exp(-log_mod0))


def mittag_leffler_array(params, z, policy=DEFAULT_POLICY):
    """Elementwise :func:`mittag_leffler` over an array of real arguments."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape)
    flat = out.reshape(-1)
    for i, zi in enumerate(z.reshape(-1)):
        flat[i] = mittag_leffler(params, zi, policy)
    return out


@lru_cache(maxsize=None)
def _neg_bound_constant(alpha, beta):
    """C = sup_{y >= 0} (1 + y) E_{alpha,beta}(-y); grid search plus local refinement."""
    y = np.concatenate(([0.0], np.logspace(-8, 12, 2000)))
    vals = np.array([(1.0 + yi) * mittag_leffler((alpha, beta), -yi) for yi in y])
    i = int(np.argmax(vals))
    best = float(vals[i])
    if 0 < i < len(y) - 1:
        lo, hi = math.log(y[i - 1]) if y[i - 1] > 0 else -30.0, math.log(y[i + 1])
        res = optimize.minimize_scalar(
            lambda s: -(1.0 + math.exp(s)) * mittag_leffler((alpha, beta), -math.exp(s)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        best = max(best, -float(res.fun))
    # large-y limit of (1+y) E(-y) is 1/Gamma(beta - alpha)
    return max(best, rgamma(beta - alpha))


def neg_bound_constant(params):
    """The constant C_{alpha,beta} with 0 <= E_{alpha,beta}(-y) <= C / (1 + y) for y >= 0."""
    alpha, beta = _ml_pair(params)
    if not (0 < alpha < 1 and beta >= alpha):
        raise DomainError(f"bound requires 0 < alpha < 1 and beta >= alpha, got ({alpha}, {beta})")
    return _neg_bound_constant(alpha, beta)


def mittag_leffler_neg_bound(params, x):
    """Bracket (0, C/(1 + x^alpha)) for E_{alpha,beta}(-x^alpha), x >= 0."""
    alpha, beta = _ml_pair(params)
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    c = neg_bound_constant((alpha, beta))
    return 0.0, c / (1.0 + x ** alpha)


# ---------------------------------------------------------------------------
# Wright / Mainardi functions
# ---------------------------------------------------------------------------


def _mainardi_series(lam, mu, z, max_terms):
    """Alternating series in double precision; returns (value, error_estimate)."""
    if z == 0.0:
        return rgamma(mu - lam), 0.0
    # terms shrink once n exceeds about z^(1/(1-lam))
    n_peak = z ** (1.0 / (1.0 - lam))
    n = int(min(max_terms, n_peak * 1.5 + 8.0 * math.sqrt(n_peak) + 60))
    k = np.arange(n, dtype=float)
    log_rg, sg = _log_abs_rgamma(mu - (k + 1.0) * lam)
    log_t = k * math.log(z) - special.gammaln(k + 1.0) + log_rg
    if np.max(log_t) > 36.0:
        # terms above 1e15 cancel away every significant digit of an O(1) result
        raise AccuracyError("Mainardi series cancels catastrophically", magnitude=float(np.exp(min(np.max(log_t), 700.0))))
    with np.errstate(under="ignore", over="ignore"):
        terms = np.where(k % 2 == 1, -1.0, 1.0) * sg * np.exp(log_t)
    if not np.all(np.isfinite(terms)):
        raise AccuracyError("Mainardi series overflowed", magnitude=math.inf)
    mags = np.abs(terms)
    abs_sum = float(np.sum(mags))
    tail = float(np.max(mags[-5:]))
    if tail > 1e-3 * _EPS * abs_sum and n >= max_terms:
        raise AccuracyError(f"Mainardi series did not converge within {max_terms} terms", magnitude=tail)
    value = math.fsum(terms.tolist())
    return value, 4.0 * _EPS * abs_sum + 2.0 * tail


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)


def _wright_contour_scaled(x, lam, nu):
    """W_{-lam,nu}(-x) = exp(-Y) * S for x > 0; returns (S, Y) arrays.

    The Hankel integral (1/2 pi i) int exp(s - x s^lam) s^-nu ds is taken along
    the path where Im(s - x s^lam) = 0:

        s = r(theta) e^{i theta},  r(theta) = (x sin(lam theta) / sin theta)^(1/(1-lam)),

    on which the exponent -r sin((1-lam) theta) / sin(lam theta) is real and
    decreases from -Y at theta = 0 to -inf at theta = pi.  The integrand is
    therefore free of oscillation and cancellation.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    q = 1.0 / (1.0 - lam)
    s0 = (lam * x) ** q
    y_exp = s0 * (1.0 - lam) / lam

    def radius(theta):
        return (x[:, None] * np.sin(lam * theta) / np.sin(theta)) ** q

    def exponent(theta, r):
        return -r * np.sin((1.0 - lam) * theta) / np.sin(lam * theta)

    # cut the path where the integrand is below exp(-Y - 60)
    lo = np.zeros_like(x)
    hi = np.full_like(x, math.pi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        th = mid[:, None]
        r = radius(th)
        phi = exponent(th, r)[:, 0] + y_exp
        too_far = phi < -60.0
        hi = np.where(too_far, mid, hi)
        lo = np.where(too_far, lo, mid)
    theta_max = hi
    theta = 0.5 * theta_max[:, None] * (_GL_NODES[None, :] + 1.0)
    w = 0.5 * theta_max[:, None] * _GL_WEIGHTS[None, :]
    r = radius(theta)
    phi = exponent(theta, r) + y_exp[:, None]
    dlogr = q * (lam / np.tan(lam * theta) - 1.0 / np.tan(theta))
    ang = (1.0 - nu) * theta
    with np.errstate(over="ignore", invalid="ignore"):
        im_f = np.exp(phi) * r ** (1.0 - nu) * (dlogr * np.sin(ang) + np.cos(ang))
    im_f = np.where(np.isfinite(im_f), im_f, 0.0)
    scaled = np.sum(w * im_f, axis=1) / math.pi
    return scaled, y_exp


def _mainardi_dispatch(lam, mu, z, policy):
    """Vectorized M_{lam,mu}(z) for z >= 0; returns (value, log_abs, sign)."""
    z = np.asarray(z, dtype=float)
    flat = z.reshape(-1)
    value = np.empty(flat.shape)
    log_abs = np.empty(flat.shape)
    sign = np.empty(flat.shape)
    if lam == 0.0:
        rg = rgamma(mu)
        value[:] = np.exp(-flat) * rg
        log_abs[:] = -flat + (math.log(abs(rg)) if rg != 0 else -np.inf)
        sign[:] = np.sign(rg)
    else:
        need_contour = np.zeros(flat.shape, dtype=bool)
        for i, zi in enumerate(flat):
            if zi ** (1.0 / (1.0 - lam)) > 3000.0:
                need_contour[i] = True
                continue
            try:
                v, err = _mainardi_series(lam, mu, float(zi), policy.series_max_terms)
            except AccuracyError:
                need_contour[i] = True
                continue
            if policy.accepts(v, err) or zi == 0.0:
                value[i] = v
                sign[i] = np.sign(v)
                log_abs[i] = math.log(abs(v)) if v != 0 else -np.inf
            else:
                need_contour[i] = True
        if np.any(need_contour):
            zc = flat[need_contour]
            scaled, y_exp = _wright_contour_scaled(zc, lam, mu - lam)
            with np.errstate(divide="ignore", under="ignore"):
                value[need_contour] = scaled * np.exp(-y_exp)
                log_abs[need_contour] = np.log(np.abs(scaled)) - y_exp
            sign[need_contour] = np.sign(scaled)
    return value.reshape(z.shape), log_abs.reshape(z.shape), sign.reshape(z.shape)


def _mainardi_pair(params):
    if isinstance(params, MainardiParams):
        return params.lam, params.mu
    lam, mu = params
    p = MainardiParams(float(lam), float(mu))
    return p.lam, p.mu


def _check_nonneg(z):
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)) or np.any(z < 0):
        raise DomainError("Mainardi functions are evaluated at z >= 0 (callers pass |x|)")
    return z


def mainardi(params, z, policy=DEFAULT_POLICY):
    """Two-parameter Mainardi function M_{lam,mu}(z) for z >= 0 (scalar or array)."""
    lam, mu = _mainardi_pair(params)
    z = _check_nonneg(z)
    value, _, _ = _mainardi_dispatch(lam, mu, z, policy)
    return float(value) if value.ndim == 0 else value


def log_abs_mainardi(params, z, policy=DEFAULT_POLICY):
    """(log|M_{lam,mu}(z)|, sign) without underflow in the far tail."""
    lam, mu = _mainardi_pair(params)
    z = _check_nonneg(z)
    _, log_abs, sign = _mainardi_dispatch(lam, mu, z, policy)
    if log_abs.ndim == 0:
        return float(log_abs), float(sign)
    return log_abs, sign


def mainardi_derivative(params, z, n, policy=DEFAULT_POLICY):
    """n-th derivative d^n/dz^n M_{lam,mu}(z) = (-1)^n M_{lam, mu - n lam}(z)."""
    lam, mu = _mainardi_pair(params)
    if int(n) != n or n < 0:
        raise DomainError(f"derivative order must be a nonnegative integer, got {n}")
    value = mainardi((lam, mu - n * lam), z, policy)
    return (-1) ** int(n) * value


def mainardi_moment(params, a):
    """Exact moment int_0^inf x^a M_{lam,mu}(x) dx = Gamma(a+1) / Gamma(lam a + mu), a > -1."""
    lam, mu = _mainardi_pair(params)
    if not a > -1:
        raise DomainError(f"moment order must exceed -1, got {a}")
    return float(special.gamma(a + 1.0)) * rgamma(lam * a + mu)


def mainardi_cosine_transform(params, xi, policy=DEFAULT_POLICY):
    """int_0^inf cos(xi x) M_{lam,mu}(x) dx = E_{2 lam, mu}(-xi^2).

    The full-line transform of M_{lam,mu}(|x|) is twice this value.
    """
    lam, mu = _mainardi_pair(params)
    if lam == 0.0:
        # M_{0,mu}(x) = exp(-x) / Gamma(mu)
        return rgamma(mu) / (1.0 + xi * xi)
    return mittag_leffler((2.0 * lam, mu), -float(xi) ** 2, policy)


def mainardi_asymptotic(params, z):
    """Leading large-z behaviour of M_{lam,mu}(z) from the saddle point of the Wright integral.

    With nu = mu - lam, Y = (1-lam) lam^(lam/(1-lam)) z^(1/(1-lam)) and
    A0 = (2 pi (1-lam))^(-1/2)::

        M_{lam,mu}(z) ~ A0 (lam/(1-lam))^(1/2-nu) Y^(1/2-nu) exp(-Y).

    The factor (lam/(1-lam))^(1/2-nu) equals 1 at lam = 1/2.
    """
    lam, mu = _mainardi_pair(params)
    if lam == 0.0:
        raise DomainError("asymptotic form requires 0 < lambda < 1")
    z = _check_nonneg(z)
    nu = mu - lam
    y = (1.0 - lam) * lam ** (lam / (1.0 - lam)) * z ** (1.0 / (1.0 - lam))
    a0 = (2.0 * math.pi * (1.0 - lam)) ** -0.5
    with np.errstate(divide="ignore"):
        out = a0 * (lam / (1.0 - lam)) ** (0.5 - nu) * y ** (0.5 - nu) * np.exp(-y)
    return float(out) if np.ndim(out) == 0 else out
