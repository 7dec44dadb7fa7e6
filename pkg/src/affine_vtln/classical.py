"""Classical (alpha, kappa) estimation by minimizing squared or absolute error.

Every subject/reference pair gets its own joint fit; per-subject scales and
the database-level shift are then averaged from the pair estimates.
"""

from __future__ import annotations

import enum
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import FormantVector, check_layout, warp_values
from .numerics import OptimizerConfig, nelder_mead_minimize

log = logging.getLogger(__name__)

UNRELIABLE_ALPHA_BAND = 1e-3
DEFAULT_CLAMP_L = 500.0
DENOMINATOR_EPS = 1e-8


class Criterion(enum.Enum):
    MSE = "mse"
    MAE = "mae"

    @classmethod
    def parse(cls, token) -> "Criterion":
        if isinstance(token, Criterion):
            return token
        try:
            return cls(str(token).lower())
        except ValueError:
            raise ValueError(f"unknown criterion {token!r}; use 'mse' or 'mae'") from None


@dataclass(frozen=True)
class Clamped:
    """Clamp each pair shift to ``[0, L]`` before averaging."""

    L: float = DEFAULT_CLAMP_L

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"clamp bound L must be positive, got {self.L!r}")


@dataclass(frozen=True)
class PairEstimate:
    subject_id: str
    reference_id: str
    alpha_ij: float
    kappa_ij: float
    objective_value: float
    criterion: Criterion
    kappa_unreliable: bool = False

    def __post_init__(self):
        if not self.objective_value >= 0:
            raise ValueError("objective_value must be non-negative")


@dataclass
class ClassicalEstimate:
    alpha_by_subject: dict[str, float]
    kappa: float
    pair_estimates: list[PairEstimate]
    adjustment: Clamped | None = None
    kappa_by_subject: dict[str, float] = field(default_factory=dict)
    excluded_subjects: list[str] = field(default_factory=list)


def _residual_values(y: FormantVector, x: FormantVector, alpha: float, kappa: float) -> np.ndarray:
    check_layout(y, x)
    return y.values - warp_values(x.values, alpha, kappa)


def mse_objective(y: FormantVector, x: FormantVector, alpha: float, kappa: float) -> float:
    """Squared Euclidean norm of ``y - (alpha x + kappa (alpha - 1))``."""
    e = _residual_values(y, x, alpha, kappa)
    return float(e @ e)


def mae_objective(y: FormantVector, x: FormantVector, alpha: float, kappa: float) -> float:
    """Sum of absolute residual components."""
    return float(np.abs(_residual_values(y, x, alpha, kappa)).sum())


def default_pair_config() -> OptimizerConfig:
    return OptimizerConfig(max_iterations=4000, x_tolerance=1e-10, f_tolerance=1e-14, max_restarts=6)


def estimate_pair(
    y: FormantVector,
    x: FormantVector,
    criterion=Criterion.MSE,
    cfg: OptimizerConfig | None = None,
) -> PairEstimate:
    """Jointly fit ``(alpha, kappa)`` mapping subject ``x`` onto reference ``y``.

    The simplex runs on ``(alpha, t)`` with ``t = kappa * (alpha - 1)`` the
    intercept, which makes the squared-error surface a quadratic. It starts
    at the identity warp ``alpha = 1, t = 0`` (i.e. kappa = 0) and ``kappa``
    is recovered as ``t / (alpha - 1)``. When ``|alpha - 1| < 1e-3`` the
    shift is poorly determined and the estimate is flagged unreliable.
    """
    criterion = Criterion.parse(criterion)
    check_layout(y, x)
    if x.r < 2:
        raise ValueError("need at least two formant components for a joint fit")
    cfg = cfg or default_pair_config()
    xv, yv = x.values, y.values

    if criterion is Criterion.MSE:
        def raw(p):
            e = yv - p[0] * xv - p[1]
            return float(e @ e)
    else:
        def raw(p):
            return float(np.abs(yv - p[0] * xv - p[1]).sum())

    start = np.array([1.0, 0.0])
    scale = max(raw(start), 1.0)
    spread = float(np.std(yv)) or 1.0
    res = nelder_mead_minimize(lambda p: raw(p) / scale, start, cfg, steps=[0.05, 0.05 * spread])
    alpha, t = float(res.x[0]), float(res.x[1])
    if not alpha > 0:
        raise ValueError(f"pair ({y.speaker_id}, {x.speaker_id}): fitted alpha={alpha} is not positive")
    unreliable = abs(alpha - 1.0) < UNRELIABLE_ALPHA_BAND
    kappa = t / (alpha - 1.0) if alpha != 1.0 else 0.0
    return PairEstimate(
        subject_id=x.speaker_id,
        reference_id=y.speaker_id,
        alpha_ij=alpha,
        kappa_ij=kappa,
        objective_value=raw(res.x),
        criterion=criterion,
        kappa_unreliable=unreliable,
    )


def clamp_kappa(kappa_ij: float, L: float) -> float:
    if not L > 0:
        raise ValueError(f"clamp bound L must be positive, got {L!r}")
    return max(0.0, min(kappa_ij, L))


def aggregate(
    pair_estimates: Sequence[PairEstimate],
    adjustment: Clamped | float | None = None,
    strict: bool = True,
) -> ClassicalEstimate:
    """Average pair estimates into per-subject scales and one database shift.

    Per subject ``j``: ``alpha_j`` is the mean of its ``alpha_ij`` and
    ``kappa_j = sum kappa_ij (alpha_ij - 1) / sum (alpha_ij - 1)``; the
    database ``kappa`` is the mean of the ``kappa_j``. With ``adjustment``
    each ``kappa_ij`` is clamped to ``[0, L]`` first. A vanishing
    denominator raises when ``strict``; otherwise that subject's shift is
    left out of the database mean with a warning.
    """
    if isinstance(adjustment, (int, float)) and not isinstance(adjustment, bool):
        adjustment = Clamped(float(adjustment))
    if not pair_estimates:
        raise ValueError("no pair estimates to aggregate")
    groups: "OrderedDict[str, list[PairEstimate]]" = OrderedDict()
    for pe in pair_estimates:
        groups.setdefault(pe.subject_id, []).append(pe)

    alpha_by_subject: dict[str, float] = {}
    kappa_by_subject: dict[str, float] = {}
    excluded: list[str] = []
    for subject, pes in groups.items():
        alphas = np.array([pe.alpha_ij for pe in pes])
        kappas = np.array([pe.kappa_ij for pe in pes])
        if adjustment is not None:
            kappas = np.clip(kappas, 0.0, adjustment.L)
        alpha_by_subject[subject] = float(alphas.mean())
        den = float(np.sum(alphas - 1.0))
        if abs(den) < DENOMINATOR_EPS:
            if strict:
                raise ZeroDivisionError(
                    f"subject {subject!r}: sum of (alpha_ij - 1) is {den:.3g}; its kappa is undefined"
                )
            log.warning("subject %s: sum of (alpha_ij - 1) = %.3g, kappa excluded", subject, den)
            excluded.append(subject)
            continue
        kappa_by_subject[subject] = float(np.sum(kappas * (alphas - 1.0)) / den)
    if not kappa_by_subject:
        raise ZeroDivisionError("every subject has a vanishing kappa denominator")
    kappa = float(np.mean(list(kappa_by_subject.values())))
    return ClassicalEstimate(
        alpha_by_subject=alpha_by_subject,
        kappa=kappa,
        pair_estimates=list(pair_estimates),
        adjustment=adjustment,
        kappa_by_subject=kappa_by_subject,
        excluded_subjects=excluded,
    )


def estimate_all_pairs(
    subjects: Iterable[FormantVector],
    references: Iterable[FormantVector],
    criterion=Criterion.MSE,
    cfg: OptimizerConfig | None = None,
) -> list[PairEstimate]:
    """Pair fits for every subject against every reference with a different id."""
    refs = list(references)
    out = []
    for x in subjects:
        for y in refs:
            if y.speaker_id != x.speaker_id:
                out.append(estimate_pair(y, x, criterion, cfg))
    return out


def estimate_classical(
    subjects: Iterable[FormantVector],
    references: Iterable[FormantVector],
    criterion=Criterion.MSE,
    adjustment: Clamped | float | None = None,
    cfg: OptimizerConfig | None = None,
    strict: bool = False,
) -> ClassicalEstimate:
    """Pair fits followed by :func:`aggregate`."""
    pairs = estimate_all_pairs(subjects, references, criterion, cfg)
    return aggregate(pairs, adjustment, strict=strict)

