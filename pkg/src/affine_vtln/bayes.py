"""Conditional posteriors and the Gibbs sampler for the hierarchical warp model.

Model, for references ``i = 1..n`` sharing one subject ``X`` of length r:

    Y_i = alpha_i X + kappa (alpha_i - 1) 1 + e_i,   e_i ~ N(0, sigma^2 I)
    kappa ~ N(a, b^2),  alpha_i ~ N(c, d^2),  sigma ~ U(theta1, theta2)

The alpha_i and kappa conditionals are Gaussian; sigma's conditional is an
inverse-gamma-like law on the window (theta1, theta2). Estimates are
post-burn-in sample means (posterior means under squared-error loss).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import FormantVector, PairedDataset, check_layout
from .numerics import RngStream, sample_sigma_posterior


@dataclass(frozen=True)
class Hyperparams:
    a: float
    b: float
    c: float
    d: float
    theta1: float
    theta2: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "theta1", "theta2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"hyperparameter {name} must be finite")
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b!r}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d!r}")
        if not 0 < self.theta1 < self.theta2:
            raise ValueError(f"need 0 < theta1 < theta2, got ({self.theta1!r}, {self.theta2!r})")

    NAMES = ("a", "b", "c", "d", "theta1", "theta2")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.a, self.b, self.c, self.d, self.theta1, self.theta2)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.NAMES, self.as_tuple()))

    def replace(self, **changes) -> "Hyperparams":
        values = self.as_dict()
        values.update(changes)
        return Hyperparams(**values)


@dataclass(frozen=True)
class GibbsConfig:
    iterations: int = 2000
    burn_in: int = 1500
    kappa0: float | None = None  # default: prior mean a
    sigma0: float | None = None  # default: window midpoint
    rng: RngStream = field(default_factory=RngStream, compare=False)
    keep_trace: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError(f"need 0 <= burn_in < iterations, got {self.burn_in}, {self.iterations}")


@dataclass(frozen=True)
class GibbsTrace:
    alpha: np.ndarray  # (M, n)
    kappa: np.ndarray  # (M,)
    sigma: np.ndarray  # (M,)
    burn_in: int

    @property
    def iterations(self) -> int:
        return self.kappa.size

    def __len__(self):
        return self.iterations

    def kept(self) -> "GibbsTrace":
        m = self.burn_in
        return GibbsTrace(self.alpha[m:], self.kappa[m:], self.sigma[m:], 0)


@dataclass(frozen=True)
class BayesEstimate:
    alpha_mean: np.ndarray
    kappa_mean: float
    sigma_mean: float
    trace: GibbsTrace | None = None
    hyperparams: Hyperparams | None = None

    @property
    def alpha_subject(self) -> float:
        """Average scale across references (one number per subject)."""
        return float(np.mean(self.alpha_mean))


class DegeneratePosteriorError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# conditional posteriors
# ---------------------------------------------------------------------------


def kappa_posterior_params(
    data: PairedDataset, alphas: Sequence[float], sigma: float, hp: Hyperparams
) -> tuple[float, float]:
    """Mean and sd of kappa given the alphas, sigma and the data.

    Precision is ``1/b^2 + (r/sigma^2) sum (alpha_i - 1)^2``; written here in
    the factored form ``b^-2 (1 + q)`` so that all-ones alphas return exactly
    ``(a, b)``.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    st = data.stats
    al = np.asarray(alphas, dtype=float)
    if al.shape != (st.n,):
        raise ValueError(f"expected {st.n} alphas, got shape {al.shape}")
    dm = al - 1.0
    b2 = hp.b * hp.b
    s2 = sigma * sigma
    q = b2 * st.r * float(dm @ dm) / s2
    lin = b2 * float(dm @ (st.y1 - al * st.x1)) / s2
    mu = (hp.a + lin) / (1.0 + q)
    sd = hp.b / math.sqrt(1.0 + q)
    return mu, sd


def _alpha_terms(xx, x1, r, xy, y1, kappa, sigma, hp):
    two_s2 = 2.0 * sigma * sigma
    two_d2 = 2.0 * hp.d * hp.d
    A = 1.0 / two_d2 + (xx + 2.0 * kappa * x1 + r * kappa * kappa) / two_s2
    B = (xy + kappa * (x1 + y1) + r * kappa * kappa) / two_s2 + hp.c / two_d2
    return A, B


def alpha_posterior_params(y_i, x, kappa: float, sigma: float, hp: Hyperparams) -> tuple[float, float]:
    """Mean ``B/A`` and sd ``sqrt(1/(2A))`` of one alpha_i given kappa and sigma.

    ``y_i`` and ``x`` may be :class:`FormantVector` objects or plain arrays.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if isinstance(y_i, FormantVector) and isinstance(x, FormantVector):
        check_layout(y_i, x)
    yv = y_i.values if isinstance(y_i, FormantVector) else np.asarray(y_i, dtype=float)
    xv = x.values if isinstance(x, FormantVector) else np.asarray(x, dtype=float)
    if yv.shape != xv.shape:
        raise ValueError("y_i and x differ in length")
    A, B = _alpha_terms(float(xv @ xv), float(xv.sum()), xv.size, float(xv @ yv), float(yv.sum()),
                        kappa, sigma, hp)
    return B / A, math.sqrt(0.5 / A)


def alpha_posterior_params_all(
    data: PairedDataset, kappa: float, sigma: float, hp: Hyperparams
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`alpha_posterior_params` over every reference."""
    st = data.stats
    A, B = _alpha_terms(st.xx, st.x1, st.r, st.xy, st.y1, kappa, sigma, hp)
    return B / A, np.full(st.n, math.sqrt(0.5 / A))


def sigma_posterior_beta(data: PairedDataset, alphas: Sequence[float], kappa: float) -> float:
    """Half the total squared residual ``0.5 * sum_i |Y_i - mu_i|^2``."""
    al = np.asarray(alphas, dtype=float)
    if al.shape != (data.n,):
        raise ValueError(f"expected {data.n} alphas, got shape {al.shape}")
    resid = data.ys - np.outer(al, data.x) - (kappa * (al - 1.0))[:, None]
    return 0.5 * float(np.einsum("ij,ij->", resid, resid))


def posterior_variance_reduction_check(
    data: PairedDataset, alphas: Sequence[float], sigma: float, hp: Hyperparams
) -> bool:
    """True when the kappa posterior sd does not exceed the prior sd ``b``."""
    _, sd = kappa_posterior_params(data, alphas, sigma, hp)
    return sd <= hp.b


# ---------------------------------------------------------------------------
# sampler
# ---------------------------------------------------------------------------


def run_gibbs(data: PairedDataset, hp: Hyperparams, cfg: GibbsConfig | None = None) -> BayesEstimate:
    """Gibbs sampler: each sweep draws every alpha_i, then kappa, then sigma.

    The alpha_i are drawn given the previous kappa and sigma, kappa given the
    new alphas and previous sigma, and sigma given the new alphas and kappa.
    The stream in ``cfg.rng`` is rewound first, so equal inputs give equal
    traces.
    """
    cfg = cfg or GibbsConfig()
    kappa = hp.a if cfg.kappa0 is None else float(cfg.kappa0)
    sigma = 0.5 * (hp.theta1 + hp.theta2) if cfg.sigma0 is None else float(cfg.sigma0)
    if not hp.theta1 < sigma < hp.theta2:
        raise ValueError(f"sigma0={sigma} outside ({hp.theta1}, {hp.theta2})")
    rng = cfg.rng.fresh()
    gen = rng.generator
    st = data.stats
    n, r = st.n, st.r
    nr = n * r
    M = cfg.iterations
    x, ys = data.x, data.ys

    alpha_tr = np.empty((M, n))
    kappa_tr = np.empty(M)
    sigma_tr = np.empty(M)
    two_d2 = 2.0 * hp.d * hp.d
    b2 = hp.b * hp.b
    if not (two_d2 > 0 and b2 > 0 and math.isfinite(1.0 / two_d2)):
        raise DegeneratePosteriorError("prior variance underflows at iteration 1")
    for j in range(M):
        two_s2 = 2.0 * sigma * sigma
        A = 1.0 / two_d2 + (st.xx + 2.0 * kappa * st.x1 + r * kappa * kappa) / two_s2
        B = (st.xy + kappa * (st.x1 + st.y1) + r * kappa * kappa) / two_s2 + hp.c / two_d2
        alphas = B / A + math.sqrt(0.5 / A) * gen.standard_normal(n)

        dm = alphas - 1.0
        s2 = sigma * sigma
        q = b2 * r * float(dm @ dm) / s2
        mu_k = (hp.a + b2 * float(dm @ (st.y1 - alphas * st.x1)) / s2) / (1.0 + q)
        kappa = mu_k + hp.b / math.sqrt(1.0 + q) * float(gen.standard_normal())

        resid = ys - np.outer(alphas, x) - (kappa * dm)[:, None]
        beta = 0.5 * float(np.einsum("ij,ij->", resid, resid))
        if not (math.isfinite(kappa) and math.isfinite(beta) and np.all(np.isfinite(alphas))):
            raise DegeneratePosteriorError(f"non-finite posterior state at iteration {j + 1}")
        if not beta > 0:
            raise DegeneratePosteriorError(f"zero residual (beta={beta}) at iteration {j + 1}")
        sigma = sample_sigma_posterior(rng, beta, nr, hp.theta1, hp.theta2)

        alpha_tr[j] = alphas
        kappa_tr[j] = kappa
        sigma_tr[j] = sigma

    m = cfg.burn_in
    trace = GibbsTrace(alpha_tr, kappa_tr, sigma_tr, m)
    return BayesEstimate(
        alpha_mean=alpha_tr[m:].mean(axis=0),
        kappa_mean=float(kappa_tr[m:].mean()),
        sigma_mean=float(sigma_tr[m:].mean()),
        trace=trace if cfg.keep_trace else None,
        hyperparams=hp,
    )


# ---------------------------------------------------------------------------
# diagnostics and export
# ---------------------------------------------------------------------------


def batch_means_se(samples, n_batches: int = 40) -> float:
    """Monte Carlo standard error of a chain mean by non-overlapping batch means."""
    x = np.asarray(samples, dtype=float)
    size = x.size // n_batches
    if size < 2:
        raise ValueError("chain too short for batch means")
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def write_trace_csv(trace: GibbsTrace, path, stamp: str | None = None) -> None:
    """One row per iteration: iter, alpha_1..alpha_n, kappa, sigma."""
    n = trace.alpha.shape[1]
    header = ["iter"] + [f"alpha_{i + 1}" for i in range(n)] + ["kappa", "sigma"]
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        if stamp:
            fh.write(f"# {stamp}\n")
        fh.write(",".join(header) + "\n")
        for j in range(trace.iterations):
            row = [str(j + 1)] + [repr(float(v)) for v in trace.alpha[j]]
            row += [repr(float(trace.kappa[j])), repr(float(trace.sigma[j]))]
            fh.write(",".join(row) + "\n")


def read_trace_csv(path, burn_in: int = 0) -> GibbsTrace:
    rows = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln and not ln.startswith("#")]
    header = rows[0].split(",")
    table = np.array([[float(v) for v in ln.split(",")] for ln in rows[1:]]).reshape(-1, len(header))
    return GibbsTrace(table[:, 1:-2].copy(), table[:, -2].copy(), table[:, -1].copy(), burn_in)
