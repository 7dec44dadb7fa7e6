"""Numerical kernels shared by the estimators.

Special functions (gamma, incomplete gamma), a Nelder-Mead minimizer and a
box-constrained maximizer built on it, Gauss-Legendre quadrature, and the
seeded random streams used by the Gibbs sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "NonFiniteObjectiveError",
    "OptimizerConfig",
    "OptimizeResult",
    "RngStream",
    "nelder_mead_minimize",
    "bounded_maximize",
    "gamma_fn",
    "log_gamma_fn",
    "lower_incomplete_gamma",
    "upper_incomplete_gamma",
    "log_regularized_lower_gamma",
    "log_regularized_upper_gamma",
    "regularized_lower_gamma",
    "regularized_upper_gamma",
    "gauss_legendre_nodes",
    "gauss_legendre_integrate",
    "logsumexp",
    "sample_gaussian",
    "sample_sigma_posterior",
    "sample_sigma_posterior_inverse_cdf",
    "sigma_posterior_cdf",
]

_EPS = np.finfo(float).eps
_TINY = 1e-300
_MAX_TERMS = 100_000


class NonFiniteObjectiveError(ArithmeticError):
    """Raised when an objective returns NaN or an infinity."""

    def __init__(self, point, value):
        self.point = np.array(point, dtype=float)
        self.value = value
        super().__init__(f"objective is not finite ({value!r}) at x={self.point.tolist()}")


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 4000
    x_tolerance: float = 1e-8
    f_tolerance: float = 1e-10
    initial_simplex_scale: float = 0.05
    max_restarts: int = 4

    def __post_init__(self):
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")
        for name in ("x_tolerance", "f_tolerance", "initial_simplex_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be >= 0")


@dataclass(frozen=True)
class OptimizeResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool


def _checked(f: Callable, x: np.ndarray) -> float:
    value = float(f(x))
    if not math.isfinite(value):
        raise NonFiniteObjectiveError(x, value)
    return value


def _nelder_mead_pass(f, x0, f0, steps, cfg, budget):
    k = x0.size
    simplex = np.empty((k + 1, k))
    fvals = np.empty(k + 1)
    simplex[0], fvals[0] = x0, f0
    for i in range(k):
        vertex = x0.copy()
        vertex[i] += steps[i]
        simplex[i + 1] = vertex
        fvals[i + 1] = _checked(f, vertex)
    evals = k
    iterations = 0
    converged = False
    while iterations < budget:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        if (
            np.max(np.abs(simplex[1:] - simplex[0])) <= cfg.x_tolerance
            and np.max(np.abs(fvals[1:] - fvals[0])) <= cfg.f_tolerance
        ):
            converged = True
            break
        iterations += 1
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + (centroid - worst)
        fr = _checked(f, xr)
        evals += 1
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = _checked(f, xe)
            evals += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = _checked(f, xc)
            evals += 1
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + 0.5 * (worst - centroid)
            fc = _checked(f, xc)
            evals += 1
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        # shrink toward the best vertex
        for i in range(1, k + 1):
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
            fvals[i] = _checked(f, simplex[i])
        evals += k
    best = int(np.argmin(fvals))
    return simplex[best].copy(), float(fvals[best]), iterations, evals, converged


def nelder_mead_minimize(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    cfg: OptimizerConfig | None = None,
    steps: Sequence[float] | None = None,
) -> OptimizeResult:
    """Minimize ``f`` with the Nelder-Mead simplex method.

    The initial simplex is ``x0`` plus one vertex per coordinate, offset by
    ``steps`` (default: ``initial_simplex_scale * max(|x0_i|, 1)``). After the
    simplex collapses the search is restarted from the best vertex, up to
    ``cfg.max_restarts`` times, while restarts keep improving the objective.
    Iterations are counted across restarts and capped by ``max_iterations``.
    """
    cfg = cfg or OptimizerConfig()
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x.ndim != 1 or x.size < 1:
        raise ValueError("x0 must be a non-empty vector")
    if steps is None:
        step = cfg.initial_simplex_scale * np.maximum(np.abs(x), 1.0)
    else:
        step = np.broadcast_to(np.asarray(steps, dtype=float), x.shape).copy()
        if np.any(step == 0):
            raise ValueError("simplex steps must be non-zero")
    fx = _checked(f, x)
    total_iter, total_evals = 0, 1
    converged = False
    for attempt in range(cfg.max_restarts + 1):
        budget = cfg.max_iterations - total_iter
        if budget <= 0:
            break
        xn, fn, it, ev, converged = _nelder_mead_pass(f, x, fx, step, cfg, budget)
        total_iter += it
        total_evals += ev
        improved = fx - fn
        if fn <= fx:
            x, fx = xn, fn
        if attempt > 0 and improved <= cfg.f_tolerance:
            break
        if not converged:
            break
    return OptimizeResult(x, fx, total_iter, total_evals, converged)


def bounded_maximize(
    f: Callable[[np.ndarray], float],
    lower: Sequence[float],
    upper: Sequence[float],
    x0: Sequence[float],
    cfg: OptimizerConfig | None = None,
) -> OptimizeResult:
    """Maximize ``f`` over the box ``lower <= x <= upper``.

    Each coordinate is mapped to an unconstrained angle through
    ``x = lo + (hi - lo) * (1 + sin u) / 2`` and the negated objective is
    minimized with :func:`nelder_mead_minimize`; boundary optima are reached
    at ``sin u = +-1``. The returned ``fun`` is the maximized value.
    """
    cfg = cfg or OptimizerConfig()
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    hi = np.atleast_1d(np.asarray(upper, dtype=float))
    start = np.atleast_1d(np.asarray(x0, dtype=float))
    if not (lo.shape == hi.shape == start.shape):
        raise ValueError("lower, upper and x0 must have the same shape")
    if np.any(~(lo < hi)):
        raise ValueError("lower must be strictly below upper in every coordinate")
    if np.any(start < lo) or np.any(start > hi):
        raise ValueError(f"x0={start.tolist()} lies outside the box")
    width = hi - lo

    def to_box(u):
        return np.clip(lo + width * (1.0 + np.sin(u)) / 2.0, lo, hi)

    def neg(u):
        value = float(f(to_box(u)))
        if not math.isfinite(value):
            raise NonFiniteObjectiveError(to_box(u), value)
        return -value

    u0 = np.arcsin(np.clip(2.0 * (start - lo) / width - 1.0, -1.0, 1.0))
    # keep the first vertex exactly at x0 so f(x*) >= f(x0) holds
    res = nelder_mead_minimize(neg, u0, cfg, steps=np.full(start.shape, cfg.initial_simplex_scale * np.pi))
    return OptimizeResult(to_box(res.x), -res.fun, res.iterations, res.evaluations, res.converged)


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------


def gamma_fn(s: float) -> float:
    """Gamma function for real ``s > 0``.

    Raises ``OverflowError`` above s ~ 171.6 where Gamma exceeds the double
    range; use :func:`log_gamma_fn` there.
    """
    if not s > 0:
        raise ValueError(f"gamma_fn requires s > 0, got {s!r}")
    return math.gamma(s)


def log_gamma_fn(s: float) -> float:
    if not s > 0:
        raise ValueError(f"log_gamma_fn requires s > 0, got {s!r}")
    return math.lgamma(s)


def _check_domain(x, s):
    if not s > 0:
        raise ValueError(f"shape s must be positive, got {s!r}")
    if not x >= 0:
        raise ValueError(f"x must be non-negative, got {x!r}")
    if math.isinf(x) and x > 0:
        return


def _log_p_series(x: float, s: float) -> float:
    # P(s, x) = x^s e^-x / Gamma(s+1) * sum_k x^k / ((s+1)...(s+k))
    term = 1.0
    total = 1.0
    a = s
    for _ in range(_MAX_TERMS):
        a += 1.0
        term *= x / a
        total += term
        if term < total * _EPS:
            return s * math.log(x) - x - math.lgamma(s + 1.0) + math.log(total)
    raise ArithmeticError(f"incomplete gamma series did not converge (x={x}, s={s})")


def _log_q_continued_fraction(x: float, s: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(s, x)
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return s * math.log(x) - x - math.lgamma(s) + math.log(h)
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (x={x}, s={s})")


def log_regularized_lower_gamma(x: float, s: float) -> float:
    """log P(s, x), the log of the regularized lower incomplete gamma."""
    _check_domain(x, s)
    if x == 0:
        return -math.inf
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return _log_p_series(x, s)
    return math.log1p(-math.exp(_log_q_continued_fraction(x, s)))


def log_regularized_upper_gamma(x: float, s: float) -> float:
    """log Q(s, x) = log(1 - P(s, x)), evaluated without cancellation."""
    _check_domain(x, s)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return -math.inf
    if x < s + 1.0:
        return math.log1p(-math.exp(_log_p_series(x, s)))
    return _log_q_continued_fraction(x, s)


def regularized_lower_gamma(x: float, s: float) -> float:
    return math.exp(log_regularized_lower_gamma(x, s))


def regularized_upper_gamma(x: float, s: float) -> float:
    return math.exp(log_regularized_upper_gamma(x, s))


def lower_incomplete_gamma(x: float, s: float) -> float:
    """Lower incomplete gamma ``integral_0^x t^(s-1) e^-t dt``."""
    return math.exp(log_regularized_lower_gamma(x, s) + math.lgamma(s))


def upper_incomplete_gamma(x: float, s: float) -> float:
    """Upper incomplete gamma ``integral_x^inf t^(s-1) e^-t dt``."""
    return math.exp(log_regularized_upper_gamma(x, s) + math.lgamma(s))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _leggauss(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_nodes(a: float, b: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``nodes``-point Gauss-Legendre rule on [a, b]."""
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if nodes < 2:
        raise ValueError("need at least 2 nodes")
    x, w = _leggauss(int(nodes))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def gauss_legendre_integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, nodes: int) -> float:
    """Integrate a vectorized ``f`` over [a, b]; exact for degree <= 2*nodes-1."""
    x, w = gauss_legendre_nodes(a, b, nodes)
    values = np.asarray(f(x), dtype=float)
    if values.shape != x.shape:
        values = np.broadcast_to(values, x.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        raise NonFiniteObjectiveError([x[bad][0]], float(values[bad][0]))
    return float(np.dot(w, values))


def logsumexp(values: np.ndarray, weights: np.ndarray | None = None) -> float:
    """log(sum(w * exp(v))), shifting by the maximum before exponentiating."""
    v = np.asarray(values, dtype=float)
    top = np.max(v)
    if not np.isfinite(top):
        return float(top)
    terms = np.exp(v - top)
    if weights is not None:
        terms = terms * weights
    return float(top + np.log(np.sum(terms)))


# ---------------------------------------------------------------------------
# random streams and samplers
# ---------------------------------------------------------------------------


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Equal identifiers always produce the same sequence of draws. Each
    concurrent consumer (chain, worker) should get its own ``stream_id``.
    """

    def __init__(self, seed: int = 0, stream_id: int = 0):
        if not (0 <= seed < 2**64 and 0 <= stream_id < 2**64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def fresh(self) -> "RngStream":
        """A new stream with the same identifiers, rewound to the start."""
        return RngStream(self.seed, self.stream_id)

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)


def sample_gaussian(rng: RngStream, mean: float, sd: float) -> float:
    if not sd > 0:
        raise ValueError(f"sd must be positive, got {sd!r}")
    return mean + sd * float(rng.standard_normal())


def _check_sigma_args(beta, nr, theta1, theta2):
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    if nr < 2:
        raise ValueError(f"nr must be at least 2, got {nr!r}")
    if not theta1 > 0:
        raise ValueError(f"theta1 must be positive, got {theta1!r}")
    if not theta2 > theta1:
        raise ValueError(f"theta2 must exceed theta1, got ({theta1!r}, {theta2!r})")


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    top = max(a, b)
    return top + math.log(math.exp(a - top) + math.exp(b - top))


def sigma_posterior_cdf(sigma: float, beta: float, nr: int, theta1: float, theta2: float) -> float:
    """CDF of the density proportional to ``sigma^-nr exp(-beta/sigma^2)`` on (theta1, theta2)."""
    _check_sigma_args(beta, nr, theta1, theta2)
    if sigma <= theta1:
        return 0.0
    if sigma >= theta2:
        return 1.0
    s = 0.5 * (nr - 1)
    z_lo, z, z_hi = beta / theta2**2, beta / sigma**2, beta / theta1**2
    # sigma <= t  <=>  z >= beta/t^2
    if z_lo > s:
        q_lo = log_regularized_upper_gamma(z_lo, s)
        q = log_regularized_upper_gamma(z, s)
        q_hi = log_regularized_upper_gamma(z_hi, s)
        num = q + math.log1p(-math.exp(q_hi - q)) if q > q_hi else -math.inf
        den = q_lo + math.log1p(-math.exp(q_hi - q_lo))
    else:
        p_lo = log_regularized_lower_gamma(z_lo, s)
        p = log_regularized_lower_gamma(z, s)
        p_hi = log_regularized_lower_gamma(z_hi, s)
        num = p_hi + math.log1p(-math.exp(p - p_hi)) if p_hi > p else -math.inf
        den = p_hi + math.log1p(-math.exp(p_lo - p_hi))
    return min(1.0, max(0.0, math.exp(num - den)))


def _sigma_from_z(z: float, beta: float, theta1: float, theta2: float) -> float:
    sigma = math.sqrt(beta / z)
    # the window is open; nudge draws that rounded onto an endpoint
    if sigma <= theta1:
        sigma = math.nextafter(theta1, theta2)
    elif sigma >= theta2:
        sigma = math.nextafter(theta2, theta1)
    return sigma


def sample_sigma_posterior_inverse_cdf(rng: RngStream, beta: float, nr: int, theta1: float, theta2: float) -> float:
    """Inverse-CDF draw from the density proportional to ``sigma^-nr exp(-beta/sigma^2)`` on (theta1, theta2).

    With ``z = beta / sigma^2`` the target becomes a Gamma((nr-1)/2) density
    truncated to ``[beta/theta2^2, beta/theta1^2]``. One uniform draw is
    pushed through the inverse of the truncated CDF, found by bracketed
    Newton iteration that falls back to bisection whenever a step leaves the
    bracket. All CDF arithmetic happens in log space, using the lower tail P
    or the upper tail Q, whichever stays away from one over the window.
    """
    _check_sigma_args(beta, nr, theta1, theta2)
    s = 0.5 * (nr - 1)
    z_lo, z_hi = beta / theta2**2, beta / theta1**2
    u = float(rng.uniform())
    u = min(max(u, 1e-300), 1.0 - 1e-16)
    lg = math.lgamma(s)
    if z_lo > s:
        tail, sign = log_regularized_upper_gamma, -1.0
    else:
        tail, sign = log_regularized_lower_gamma, 1.0
    t_lo, t_hi = tail(z_lo, s), tail(z_hi, s)
    target = _logaddexp(math.log1p(-u) + t_lo, math.log(u) + t_hi)

    lo, hi = z_lo, z_hi
    z = min(max(s, lo), hi)
    if not lo < z < hi:
        z = 0.5 * (lo + hi)
    for _ in range(400):
        t = tail(z, s)
        g = t - target
        # P increases and Q decreases in z
        if sign * g > 0:
            hi = z
        else:
            lo = z
        if hi - lo <= max(1e-12, 4.0 * _EPS * hi):
            break
        slope = sign * math.exp((s - 1.0) * math.log(z) - z - lg - t)
        candidate = z - g / slope if slope > 0 or slope < 0 else math.nan
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        elif abs(candidate - z) <= max(1e-12, 4.0 * _EPS * z):
            z = candidate
            break
        z = candidate
    return _sigma_from_z(min(max(z, z_lo), z_hi), beta, theta1, theta2)


def sample_sigma_posterior(
    rng: RngStream, beta: float, nr: int, theta1: float, theta2: float, max_tries: int = 16
) -> float:
    """Draw sigma from the density proportional to ``sigma^-nr exp(-beta/sigma^2)`` on (theta1, theta2).

    ``z = beta / sigma^2`` follows a Gamma((nr-1)/2) law truncated to
    ``[beta/theta2^2, beta/theta1^2]``. Up to ``max_tries`` untruncated gamma
    draws are tried first and the first one inside the window is kept; when
    the window holds little mass this falls through to
    :func:`sample_sigma_posterior_inverse_cdf`. Either path yields an exact
    draw from the truncated law. ``max_tries=0`` forces the inverse CDF.
    """
    _check_sigma_args(beta, nr, theta1, theta2)
    s = 0.5 * (nr - 1)
    z_lo, z_hi = beta / theta2**2, beta / theta1**2
    gen = rng.generator
    for _ in range(max_tries):
        z = float(gen.standard_gamma(s))
        if z_lo < z < z_hi:
            return _sigma_from_z(z, beta, theta1, theta2)
    return sample_sigma_posterior_inverse_cdf(rng, beta, nr, theta1, theta2)
