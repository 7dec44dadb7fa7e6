"""Maximum-likelihood hyperparameters from the integrated likelihood.

With every alpha_i integrated out in closed form, the likelihood of
``(a, b, c, d, theta1, theta2)`` is a double integral over ``(kappa, sigma)``:

    IL = int int  f(kappa, sigma | c, d)  N(kappa; a, b^2)  / (theta2 - theta1)  dkappa dsigma

over ``sigma in (theta1, theta2)`` and ``kappa`` in ``a +- 8 b``. The
integral is evaluated by Gauss-Legendre quadrature on a box that is fitted
around the integrand's peak, accumulated in log space.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bayes import Hyperparams
from .model import PairedDataset
from .numerics import OptimizerConfig, bounded_maximize, gauss_legendre_nodes

log = logging.getLogger(__name__)

LOG2 = math.log(2.0)
LOGPI = math.log(math.pi)
KAPPA_PRIOR_SDS = 8.0


class LikelihoodUnderflowError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ILGrid:
    """Quadrature settings for the (kappa, sigma) integral.

    ``kappa_range=None`` integrates over ``a +- 8 b``. With ``adaptive`` the
    nodes are placed on a box around the integrand's peak (where the log
    integrand is within ``window_drop`` of its maximum, widened by
    ``window_margin``) instead of the whole domain. With ``refine`` the node
    counts are doubled until two successive results differ by less than
    ``tolerance`` or the caps are reached.
    """

    kappa_range: tuple[float, float] | None = None
    kappa_nodes: int = 64
    sigma_nodes: int = 32
    adaptive: bool = True
    refine: bool = False
    tolerance: float = 1e-6
    max_kappa_nodes: int = 512
    max_sigma_nodes: int = 256
    window_drop: float = 30.0
    window_margin: float = 1.25

    def __post_init__(self):
        if self.kappa_range is not None:
            lo, hi = self.kappa_range
            if not lo < hi:
                raise ValueError(f"kappa_range must satisfy low < high, got {self.kappa_range}")
        if self.kappa_nodes < 8 or self.sigma_nodes < 8:
            raise ValueError("need at least 8 nodes per axis")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class HyperparamBounds:
    a: tuple[float, float] = (-500.0, 1000.0)
    b: tuple[float, float] = (1.0, 500.0)
    c: tuple[float, float] = (0.5, 2.0)
    d: tuple[float, float] = (0.01, 0.5)
    theta1: tuple[float, float] = (0.1, 50.0)
    theta2_max: float = 500.0
    min_gap: float = 1.0  # theta2 >= theta1 + min_gap

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "theta1"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"bounds for {name} need lower < upper, got ({lo}, {hi})")
        for name in ("b", "d", "theta1"):
            if not getattr(self, name)[0] > 0:
                raise ValueError(f"lower bound of {name} must be positive")
        if not self.min_gap > 0:
            raise ValueError("min_gap must be positive")
        if not self.theta2_max > self.theta1[1] + self.min_gap:
            raise ValueError("theta2_max must exceed theta1 upper bound + min_gap")

    def range_of(self, name: str, hp: Hyperparams | None = None) -> tuple[float, float]:
        """Feasible interval of one coordinate with the others held at ``hp``."""
        if name == "theta2":
            base = hp.theta1 if hp is not None else self.theta1[0]
            return base + self.min_gap, self.theta2_max
        lo, hi = getattr(self, name)
        if name == "theta1" and hp is not None:
            hi = min(hi, hp.theta2 - self.min_gap)
        return lo, hi

    def contains(self, hp: Hyperparams, slack: float = 1e-9) -> bool:
        for name in ("a", "b", "c", "d", "theta1"):
            lo, hi = getattr(self, name)
            v = getattr(hp, name)
            if v < lo - slack * max(1.0, abs(lo)) or v > hi + slack * max(1.0, abs(hi)):
                return False
        gap = hp.theta2 - hp.theta1
        return gap >= self.min_gap * (1 - slack) and hp.theta2 <= self.theta2_max * (1 + slack)


# ---------------------------------------------------------------------------
# integrand
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Moments:
    """Centered reference statistics, so the n-sum over references is O(1)."""

    n: int
    r: int
    xx: float
    x1: float
    u_bar: float
    y1_bar: float
    suu: float
    suv: float
    svv: float
    yy_sum: float
    y1_sum: float

    @classmethod
    def of(cls, data: PairedDataset) -> "_Moments":
        st = data.stats
        du = st.xy - st.xy.mean()
        dv = st.y1 - st.y1.mean()
        return cls(
            n=st.n, r=st.r, xx=st.xx, x1=st.x1,
            u_bar=float(st.xy.mean()), y1_bar=float(st.y1.mean()),
            suu=float(du @ du), suv=float(du @ dv), svv=float(dv @ dv),
            yy_sum=float(st.yy.sum()), y1_sum=float(st.y1.sum()),
        )


def _alpha_marginal(mom: _Moments, kappa, sigma, c: float, d: float):
    """log f(kappa, sigma | c, d) without its additive constant; broadcasts."""
    n, r = mom.n, mom.r
    kappa = np.asarray(kappa, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    s2 = sigma * sigma
    two_s2 = 2.0 * s2
    p = 1.0 / (2.0 * d * d)
    A = p + (mom.xx + 2.0 * kappa * mom.x1 + r * kappa * kappa) / two_s2
    B_bar = (mom.u_bar + kappa * (mom.x1 + mom.y1_bar) + r * kappa * kappa) / two_s2 + c * p
    spread = (mom.suu + 2.0 * kappa * mom.suv + kappa * kappa * mom.svv) / (4.0 * s2 * s2)
    sum_b2_over_a = (n * B_bar * B_bar + spread) / A
    sum_c = (mom.yy_sum + 2.0 * kappa * mom.y1_sum + n * r * kappa * kappa) / two_s2 + n * c * c * p
    return -0.5 * n * np.log(A) - n * math.log(d) - n * r * np.log(sigma) + sum_b2_over_a - sum_c


def alpha_marginal_constant(n: int, r: int) -> float:
    """Additive constant of the log alpha-marginal: ``-log(2^(n(r+1)/2) pi^(nr/2))``."""
    return -0.5 * n * (r + 1) * LOG2 - 0.5 * n * r * LOGPI


def integrated_likelihood_constant(n: int, r: int) -> float:
    """Constant dropped from the log integrated likelihood (includes the kappa prior's sqrt(2 pi))."""
    return alpha_marginal_constant(n, r) - 0.5 * (LOG2 + LOGPI)


def log_integrand_alpha_marginal(kappa: float, sigma: float, hp_cd: tuple[float, float], data: PairedDataset) -> float:
    """log of the density of the data given ``(kappa, sigma)``, with each alpha_i integrated against N(c, d^2).

    Equals ``-(n/2) log A - n log d - nr log sigma + sum_i (B_i^2/A - C_i)``
    minus ``log(2^(n(r+1)/2) pi^(nr/2))``; the constant is kept so the value
    is a proper log density.
    """
    c, d = hp_cd
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if not d > 0:
        raise ValueError(f"d must be positive, got {d!r}")
    mom = _Moments.of(data)
    value = float(_alpha_marginal(mom, kappa, sigma, c, d)) + alpha_marginal_constant(mom.n, mom.r)
    if not math.isfinite(value):
        raise ArithmeticError(f"non-finite alpha-marginal at kappa={kappa}, sigma={sigma}")
    return value


class _Integrand:
    """log of the (kappa, sigma) integrand for fixed hyperparameters."""

    def __init__(self, mom: _Moments, hp: Hyperparams):
        self.mom = mom
        self.hp = hp
        self.offset = -math.log(hp.theta2 - hp.theta1) - math.log(hp.b)

    def __call__(self, kappa, sigma):
        hp = self.hp
        z = (np.asarray(kappa, dtype=float) - hp.a) / hp.b
        return _alpha_marginal(self.mom, kappa, sigma, hp.c, hp.d) - 0.5 * z * z + self.offset


# ---------------------------------------------------------------------------
# integration window
# ---------------------------------------------------------------------------


def _grid_argmax(f, k_lo, k_hi, s_lo, s_hi, nk, ns):
    ks = np.linspace(k_lo, k_hi, nk)
    ls = np.linspace(math.log(s_lo), math.log(s_hi), ns)
    vals = f(ks[:, None], np.exp(ls)[None, :])
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    return ks, ls, i, j, float(vals[i, j])


def _find_peak(f, k_dom, s_dom):
    """Maximize ``f`` on the domain with a coarse grid and repeated zooms (log sigma axis)."""
    k_lo, k_hi = k_dom
    s_lo, s_hi = s_dom
    ks, ls, i, j, best = _grid_argmax(f, k_lo, k_hi, s_lo, s_hi, 65, 33)
    for _ in range(8):
        dk = ks[1] - ks[0]
        dl = ls[1] - ls[0]
        k_lo, k_hi = max(k_dom[0], ks[i] - dk), min(k_dom[1], ks[i] + dk)
        l_lo = max(math.log(s_dom[0]), ls[j] - dl)
        l_hi = min(math.log(s_dom[1]), ls[j] + dl)
        ks, ls, i, j, best = _grid_argmax(f, k_lo, k_hi, math.exp(l_lo), math.exp(l_hi), 17, 17)
    return float(ks[i]), float(math.exp(ls[j])), best


def _reach(g, start, limit, drop_to, step):
    """Distance from ``start`` toward ``limit`` until ``g`` falls below ``drop_to`` (or the limit)."""
    direction = 1.0 if limit > start else -1.0
    span = abs(limit - start)
    if span == 0:
        return start
    step = min(max(step, span * 1e-9), span)
    inside = 0.0
    d = step
    while True:
        if d >= span:
            if g(limit) >= drop_to:
                return limit
            outside = span
            break
        if g(start + direction * d) < drop_to:
            outside = d
            break
        inside = d
        d *= 2.0
    for _ in range(30):
        mid = 0.5 * (inside + outside)
        if g(start + direction * mid) >= drop_to:
            inside = mid
        else:
            outside = mid
        if outside - inside <= 1e-3 * outside:
            break
    return start + direction * outside


def _integration_box(f, k_dom, s_dom, grid: ILGrid):
    k0, s0, peak = _find_peak(f, k_dom, s_dom)
    if not math.isfinite(peak):
        raise LikelihoodUnderflowError("likelihood numerically zero over the whole integration domain")
    drop = peak - grid.window_drop

    def gk(k):
        return float(f(k, s0))

    def gs(s):
        return float(f(k0, s))

    k_step = 1e-3 * (k_dom[1] - k_dom[0])
    s_step = 1e-3 * s0
    lo_k = _reach(gk, k0, k_dom[0], drop, k_step)
    hi_k = _reach(gk, k0, k_dom[1], drop, k_step)
    lo_s = _reach(gs, s0, s_dom[0], drop, s_step)
    hi_s = _reach(gs, s0, s_dom[1], drop, s_step)

    m = grid.window_margin
    box = [
        max(k_dom[0], k0 - m * (k0 - lo_k)), min(k_dom[1], k0 + m * (hi_k - k0)),
        max(s_dom[0], s0 - m * (s0 - lo_s)), min(s_dom[1], s0 + m * (hi_s - s0)),
    ]
    # widen any side whose edge still carries non-negligible integrand
    edge_level = peak - grid.window_drop + 10.0
    for _ in range(12):
        ks = np.linspace(box[0], box[1], 33)
        ss = np.linspace(box[2], box[3], 33)
        edges = {
            0: f(box[0], ss), 1: f(box[1], ss),
            2: f(ks, box[2]), 3: f(ks, box[3]),
        }
        grown = False
        for side, vals in edges.items():
            at_domain = box[side] == (k_dom + s_dom)[side]
            if at_domain or np.max(vals) < edge_level:
                continue
            grown = True
            if side in (0, 1):
                width = box[1] - box[0]
                box[side] = max(k_dom[0], box[0] - 0.5 * width) if side == 0 else min(k_dom[1], box[1] + 0.5 * width)
            else:
                width = box[3] - box[2]
                box[side] = max(s_dom[0], box[2] - 0.5 * width) if side == 2 else min(s_dom[1], box[3] + 0.5 * width)
        if not grown:
            break
    return tuple(box)


def _gl_log_integral(f, box, nk: int, ns: int) -> float:
    kx, kw = gauss_legendre_nodes(box[0], box[1], nk)
    sx, sw = gauss_legendre_nodes(box[2], box[3], ns)
    vals = f(kx[:, None], sx[None, :]) + np.log(kw)[:, None] + np.log(sw)[None, :]
    if np.any(np.isnan(vals)):
        raise ArithmeticError("integrand evaluated to NaN")
    top = float(np.max(vals))
    if not math.isfinite(top):
        raise LikelihoodUnderflowError("likelihood numerically zero on every quadrature node")
    return top + math.log(float(np.sum(np.exp(vals - top))))


def log_integrated_likelihood(
    hp: Hyperparams,
    data: PairedDataset,
    grid: ILGrid | None = None,
    include_constant: bool = False,
) -> float:
    """log of the integrated likelihood of ``hp``.

    The additive constant ``-log(2^((n(r+1)+1)/2) pi^((nr+1)/2))`` does not
    depend on ``hp`` and is left out unless ``include_constant``.
    """
    return _log_il(hp, _Moments.of(data), grid or ILGrid(), include_constant)


def _log_il(hp: Hyperparams, mom: _Moments, grid: ILGrid, include_constant: bool = False) -> float:
    f = _Integrand(mom, hp)
    if grid.kappa_range is None:
        k_dom = (hp.a - KAPPA_PRIOR_SDS * hp.b, hp.a + KAPPA_PRIOR_SDS * hp.b)
    else:
        k_dom = tuple(grid.kappa_range)
    s_dom = (hp.theta1, hp.theta2)
    box = _integration_box(f, k_dom, s_dom, grid) if grid.adaptive else k_dom + s_dom
    nk, ns = grid.kappa_nodes, grid.sigma_nodes
    value = _gl_log_integral(f, box, nk, ns)
    if grid.refine:
        while True:
            if nk * 2 > grid.max_kappa_nodes or ns * 2 > grid.max_sigma_nodes:
                log.warning("integrated likelihood: node cap reached before tolerance %.1g", grid.tolerance)
                break
            nk, ns = nk * 2, ns * 2
            finer = _gl_log_integral(f, box, nk, ns)
            done = abs(finer - value) < grid.tolerance
            value = finer
            if done:
                break
    if include_constant:
        value += integrated_likelihood_constant(mom.n, mom.r)
    return value


def refinement_sequence(hp: Hyperparams, data: PairedDataset, grid: ILGrid | None = None, steps: int = 3) -> list[float]:
    """log IL at successive node doublings on a fixed integration box."""
    grid = grid or ILGrid()
    mom = _Moments.of(data)
    f = _Integrand(mom, hp)
    k_dom = (hp.a - KAPPA_PRIOR_SDS * hp.b, hp.a + KAPPA_PRIOR_SDS * hp.b) if grid.kappa_range is None else grid.kappa_range
    s_dom = (hp.theta1, hp.theta2)
    box = _integration_box(f, k_dom, s_dom, grid) if grid.adaptive else tuple(k_dom) + s_dom
    out = []
    nk, ns = grid.kappa_nodes, grid.sigma_nodes
    for _ in range(steps):
        out.append(_gl_log_integral(f, box, nk, ns))
        nk, ns = 2 * nk, 2 * ns
    return out


# ---------------------------------------------------------------------------
# maximization
# ---------------------------------------------------------------------------


def _to_unit(hp: Hyperparams, bounds: HyperparamBounds) -> np.ndarray:
    """Hyperparams -> optimizer coordinates (a, log b, c, log d, log theta1, v)."""
    max_gap = bounds.theta2_max - hp.theta1
    gap = min(max(hp.theta2 - hp.theta1, bounds.min_gap), max_gap)
    v = math.log(gap / bounds.min_gap) / math.log(max_gap / bounds.min_gap)
    return np.array([hp.a, math.log(hp.b), hp.c, math.log(hp.d), math.log(hp.theta1), v])


def _from_unit(z, bounds: HyperparamBounds) -> Hyperparams:
    a, lb, c, ld, lt1, v = (float(t) for t in z)
    theta1 = math.exp(lt1)
    max_gap = bounds.theta2_max - theta1
    gap = bounds.min_gap * (max_gap / bounds.min_gap) ** min(max(v, 0.0), 1.0)
    return Hyperparams(a, math.exp(lb), c, math.exp(ld), theta1, theta1 + gap)


def _unit_box(bounds: HyperparamBounds):
    lo = np.array([bounds.a[0], math.log(bounds.b[0]), bounds.c[0], math.log(bounds.d[0]),
                   math.log(bounds.theta1[0]), 0.0])
    hi = np.array([bounds.a[1], math.log(bounds.b[1]), bounds.c[1], math.log(bounds.d[1]),
                   math.log(bounds.theta1[1]), 1.0])
    return lo, hi


def initial_hyperparams(data: PairedDataset, bounds: HyperparamBounds) -> Hyperparams:
    """Moment-style starting point from per-reference straight-line fits."""
    x, ys = data.x, data.ys
    xc = x - x.mean()
    sxx = float(xc @ xc) or 1.0
    slopes = (ys - ys.mean(axis=1, keepdims=True)) @ xc / sxx
    intercepts = ys.mean(axis=1) - slopes * x.mean()
    resid = ys - slopes[:, None] * x - intercepts[:, None]
    sigma = math.sqrt(float(np.mean(resid * resid)) * data.r / max(data.r - 2, 1)) or 1.0
    dm = slopes - 1.0
    den = float(dm @ dm)
    kappa = float(intercepts @ dm) / den if den > 0 else 0.0

    def clip(v, lo, hi):
        return min(max(v, lo + 1e-6 * (hi - lo)), hi - 1e-6 * (hi - lo))

    a = clip(kappa, *bounds.a)
    b = clip(50.0, *bounds.b)
    c = clip(float(slopes.mean()), *bounds.c)
    d = clip(float(slopes.std()) if data.n > 1 else 0.05, *bounds.d)
    t1 = clip(0.5 * sigma, *bounds.theta1)
    t2 = min(max(2.0 * sigma, t1 + 2.0 * bounds.min_gap), bounds.theta2_max - 1e-6)
    return Hyperparams(a, b, c, d, t1, t2)


@dataclass
class HyperoptResult:
    hyperparams: Hyperparams
    log_il: float
    evaluations: int
    converged: bool
    start: Hyperparams


def fit_hyperparams(
    data: PairedDataset,
    bounds: HyperparamBounds | None = None,
    grid: ILGrid | None = None,
    cfg: OptimizerConfig | None = None,
    x0: Hyperparams | None = None,
) -> HyperoptResult:
    """Maximize log IL over the bounds box, returning diagnostics too.

    The search runs in ``(a, log b, c, log d, log theta1, v)`` where ``v`` in
    [0, 1] places ``theta2 - theta1`` log-uniformly between the minimum gap
    and ``theta2_max - theta1``; the window constraint is therefore built into
    the coordinates.
    """
    bounds = bounds or HyperparamBounds()
    grid = grid or ILGrid()
    cfg = cfg or OptimizerConfig(max_iterations=3000, x_tolerance=1e-7, f_tolerance=1e-9, max_restarts=3)
    if data.n == 1:
        log.warning("only one reference: b and d are weakly identified")
    mom = _Moments.of(data)
    start = x0 or initial_hyperparams(data, bounds)
    if not bounds.contains(start):
        raise ValueError(f"starting point {start} outside the bounds")
    search_grid = ILGrid(grid.kappa_range, grid.kappa_nodes, grid.sigma_nodes, grid.adaptive, False,
                         grid.tolerance, grid.max_kappa_nodes, grid.max_sigma_nodes,
                         grid.window_drop, grid.window_margin)
    lo, hi = _unit_box(bounds)
    z0 = np.clip(_to_unit(start, bounds), lo, hi)

    def objective(z):
        return _log_il(_from_unit(z, bounds), mom, search_grid)

    res = bounded_maximize(objective, lo, hi, z0, cfg)
    hp = _from_unit(res.x, bounds)
    if not bounds.contains(hp, slack=1e-6):
        raise ValueError(f"optimizer returned infeasible hyperparameters {hp}")
    value = _log_il(hp, mom, grid)
    return HyperoptResult(hp, value, res.evaluations, res.converged, start)


def estimate_hyperparams(
    data: PairedDataset,
    bounds: HyperparamBounds | None = None,
    grid: ILGrid | None = None,
    cfg: OptimizerConfig | None = None,
) -> Hyperparams:
    """The hyperparameters maximizing the integrated likelihood within ``bounds``."""
    return fit_hyperparams(data, bounds, grid, cfg).hyperparams


# ---------------------------------------------------------------------------
# axis scans
# ---------------------------------------------------------------------------


def scan_values(hp: Hyperparams, name: str, bounds: HyperparamBounds, points: int = 21,
                half_width: float | None = None) -> np.ndarray:
    """``points`` values of one coordinate around its value in ``hp`` (the optimum is one of them)."""
    if name not in Hyperparams.NAMES:
        raise ValueError(f"unknown hyperparameter {name!r}")
    lo, hi = bounds.range_of(name, hp)
    center = getattr(hp, name)
    w = half_width if half_width is not None else 0.25 * (hi - lo)
    left, right = max(lo, center - w), min(hi, center + w)
    if name in ("b", "d", "theta1"):
        left = max(left, 1e-9)
    values = np.linspace(left, right, points)
    values[int(np.argmin(np.abs(values - center)))] = center
    return values


def axis_scan(
    data: PairedDataset,
    hp: Hyperparams,
    name: str,
    values: Sequence[float] | None = None,
    bounds: HyperparamBounds | None = None,
    grid: ILGrid | None = None,
) -> list[tuple[float, float]]:
    """log IL along one hyperparameter axis through ``hp``."""
    bounds = bounds or HyperparamBounds()
    grid = grid or ILGrid()
    mom = _Moments.of(data)
    vals = scan_values(hp, name, bounds) if values is None else np.asarray(values, dtype=float)
    out = []
    for v in vals:
        out.append((float(v), _log_il(hp.replace(**{name: float(v)}), mom, grid)))
    return out


def is_unimodal(scan: Sequence[tuple[float, float]], center: float, slack: float = 1e-9) -> bool:
    """Values never increase when moving away from ``center`` in either direction."""
    xs = np.array([p[0] for p in scan])
    ys = np.array([p[1] for p in scan])
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    c = int(np.argmin(np.abs(xs - center)))
    right = np.diff(ys[c:])
    left = np.diff(ys[: c + 1][::-1])
    return bool(np.all(right <= slack) and np.all(left <= slack))


def write_scan_csv(rows: Sequence[tuple[str, float, float]], path, stamp: str | None = None) -> None:
    """CSV of (hyperparameter, value, logIL)."""
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        if stamp:
            fh.write(f"# {stamp}\n")
        fh.write("hyperparameter,value,logIL\n")
        for name, v, val in rows:
            fh.write(f"{name},{v!r},{val!r}\n")


def write_hyperparams(hp: Hyperparams, path) -> None:
    Path(path).write_text("".join(f"{k}={v!r}\n" for k, v in hp.as_dict().items()), encoding="utf-8")


def read_hyperparams(path) -> Hyperparams:
    values: dict[str, float] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        k, v = (t.strip() for t in line.split("=", 1))
        values[k] = float(v)
    missing = [k for k in Hyperparams.NAMES if k not in values]
    if missing:
        raise ValueError(f"{path}: missing hyperparameters {missing}")
    return Hyperparams(**{k: values[k] for k in Hyperparams.NAMES})


__all__ = [
    "ILGrid", "HyperparamBounds", "HyperoptResult", "LikelihoodUnderflowError",
    "log_integrand_alpha_marginal", "log_integrated_likelihood", "alpha_marginal_constant",
    "integrated_likelihood_constant", "refinement_sequence", "initial_hyperparams",
    "fit_hyperparams", "estimate_hyperparams", "scan_values", "axis_scan", "is_unimodal",
    "write_scan_csv", "write_hyperparams", "read_hyperparams",
]
