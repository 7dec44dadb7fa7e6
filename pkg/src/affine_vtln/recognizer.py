"""Mahalanobis-distance vowel recognition and the normalization experiments.

Protocol (leave one speaker out). A plan names a subject category S, a
reference category R and a normalization method. Every speaker k of S and
R gets warp parameters estimated against the pool R without k. For each
subject s in S, vowel classes are fitted on the normalized tokens of R
without s, and every token of s, normalized with s's own parameters, is
classified. The baseline uses the identity warp.
"""

from __future__ import annotations

import enum
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bayes import GibbsConfig
from .classical import Clamped, Criterion, PairEstimate, aggregate, default_pair_config, estimate_pair
from .data_io import RepetitionPolicy, VowelDatabase, speaker_formant_vector
from .model import Category, FormantVector, PairedDataset, warp_values
from .numerics import OptimizerConfig, RngStream
from .pipeline import BayesSettings, estimate_bayes

log = logging.getLogger(__name__)

MIN_CLASS_SAMPLES = 4
DEFAULT_RELATIVE_RIDGE = 1e-6


# ---------------------------------------------------------------------------
# classifier
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VowelClass:
    label: str
    mean: np.ndarray
    covariance: np.ndarray
    sample_count: int


@dataclass(frozen=True)
class VowelClassModel:
    classes: tuple[VowelClass, ...]

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.classes]

    def get(self, label: str) -> VowelClass:
        for c in self.classes:
            if c.label == label:
                return c
        raise KeyError(label)


def fit_classes(
    training: Iterable[tuple[str, Sequence[float]]],
    relative_ridge: float = DEFAULT_RELATIVE_RIDGE,
    ridge: float | None = None,
) -> VowelClassModel:
    """Per-vowel sample mean and covariance (divisor n-1) of F1-F3 triples.

    A ridge ``relative_ridge * trace(S) / 3`` is added to each diagonal, or the
    absolute ``ridge`` when given.
    """
    groups: dict[str, list] = {}
    for label, triple in training:
        groups.setdefault(str(label), []).append(np.asarray(triple, dtype=float))
    if not groups:
        raise ValueError("no training samples")
    classes = []
    for label in sorted(groups):
        pts = np.vstack(groups[label])
        if pts.shape[1] != 3:
            raise ValueError(f"vowel {label!r}: expected formant triples")
        if pts.shape[0] < MIN_CLASS_SAMPLES:
            raise ValueError(f"vowel {label!r} has {pts.shape[0]} samples; need at least {MIN_CLASS_SAMPLES}")
        mean = pts.mean(axis=0)
        cov = np.cov(pts, rowvar=False, ddof=1)
        eps = ridge if ridge is not None else relative_ridge * float(np.trace(cov)) / 3.0
        cov = cov + eps * np.eye(3)
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        classes.append(VowelClass(label, mean, cov, pts.shape[0]))
    return VowelClassModel(tuple(classes))


def mahalanobis_distances(points, model: VowelClassModel) -> np.ndarray:
    """Squared Mahalanobis distance of each point (rows) to each class (columns)."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty((x.shape[0], len(model.classes)))
    for j, cls in enumerate(model.classes):
        try:
            chol = np.linalg.cholesky(cls.covariance)
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError(f"covariance of vowel {cls.label!r} is not positive definite") from None
        z = np.linalg.solve(chol, (x - cls.mean).T)
        out[:, j] = np.einsum("ij,ij->j", z, z)
    return out


def classify(formants: Sequence[float], model: VowelClassModel) -> tuple[str, dict[str, float]]:
    """Nearest class by squared Mahalanobis distance; ties go to the lexicographically first label."""
    d = mahalanobis_distances(formants, model)[0]
    # classes are stored in label order, so argmin picks the first of tied labels
    best = int(np.argmin(d))
    return model.classes[best].label, {c.label: float(v) for c, v in zip(model.classes, d)}


def classify_many(points, model: VowelClassModel) -> list[str]:
    d = mahalanobis_distances(points, model)
    labels = model.labels
    return [labels[i] for i in np.argmin(d, axis=1)]


# ---------------------------------------------------------------------------
# experiment plans
# ---------------------------------------------------------------------------


class Method(enum.Enum):
    BASELINE = "baseline"
    BAYES = "bayes"
    MSE = "mse"
    MSE_CLAMPED = "mse-clamped"
    MAE = "mae"
    MAE_CLAMPED = "mae-clamped"

    @classmethod
    def parse(cls, token) -> "Method":
        if isinstance(token, Method):
            return token
        key = str(token).strip().lower().replace("_", "-")
        for m in cls:
            if m.value == key:
                return m
        raise ValueError(f"unknown method {token!r}; choose from {[m.value for m in cls]}")

    @property
    def criterion(self) -> Criterion | None:
        if self in (Method.MSE, Method.MSE_CLAMPED):
            return Criterion.MSE
        if self in (Method.MAE, Method.MAE_CLAMPED):
            return Criterion.MAE
        return None

    @property
    def clamped(self) -> bool:
        return self in (Method.MSE_CLAMPED, Method.MAE_CLAMPED)

    @property
    def display(self) -> str:
        return {
            Method.BASELINE: "Baseline",
            Method.BAYES: "Bayesian estimation",
            Method.MSE: "MSE without adjustment",
            Method.MSE_CLAMPED: "MSE with adjusted outliers",
            Method.MAE: "MAE without adjustment",
            Method.MAE_CLAMPED: "MAE with adjusted outliers",
        }[self]


ALL_METHODS = tuple(Method)


def parse_group(token) -> Category | None:
    """A category, or None for all speakers."""
    if token is None:
        return None
    if isinstance(token, Category):
        return token
    if str(token).strip().lower() in ("all", "a", "*", ""):
        return None
    return Category.parse(token)


def group_name(group: Category | None) -> str:
    return "All" if group is None else group.name.capitalize()


@dataclass(frozen=True)
class ExperimentPlan:
    subject_category: Category | None
    reference_category: Category | None
    estimator: Method
    database: str = "PnB"

    def __post_init__(self):
        object.__setattr__(self, "subject_category", parse_group(self.subject_category))
        object.__setattr__(self, "reference_category", parse_group(self.reference_category))
        object.__setattr__(self, "estimator", Method.parse(self.estimator))

    @property
    def label(self) -> str:
        s = "A" if self.subject_category is None else self.subject_category.value
        r = "A" if self.reference_category is None else self.reference_category.value
        return s + r


def gender_dependent_plans(method, database: str = "PnB") -> list[ExperimentPlan]:
    cats = [Category.MALE, Category.FEMALE, Category.CHILD]
    return [ExperimentPlan(s, r, method, database) for s in cats for r in cats]


@dataclass(frozen=True)
class ExperimentConfig:
    clamp_L: float = 500.0
    pair_optimizer: OptimizerConfig = field(default_factory=default_pair_config)
    bayes: BayesSettings = field(default_factory=BayesSettings)
    seed: int = 0
    repetition_policy: RepetitionPolicy = RepetitionPolicy.MEAN_OF_REPETITIONS
    fit_classes_on: str = "raw"  # or "normalized": classes on warped references too
    relative_ridge: float = DEFAULT_RELATIVE_RIDGE
    ridge: float | None = None

    def __post_init__(self):
        if self.fit_classes_on not in ("normalized", "raw"):
            raise ValueError("fit_classes_on must be 'normalized' or 'raw'")
        if not self.clamp_L > 0:
            raise ValueError("clamp_L must be positive")


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    accuracy: float
    n_trials: int
    n_correct: int
    confusion: "OrderedDict[str, OrderedDict[str, int]]"
    failures: dict[str, str] = field(default_factory=dict)
    per_subject: dict[str, tuple[int, int]] = field(default_factory=dict)
    params: dict[str, tuple[float, float]] = field(default_factory=dict)


class ExperimentRunner:
    """Runs plans on one database, caching every speaker's warp parameters.

    Parameters depend only on (method, reference pool, speaker), so plans
    that share a reference category reuse them.
    """

    def __init__(self, db: VowelDatabase, config: ExperimentConfig | None = None):
        self.db = db.complete_speakers()
        self.config = config or ExperimentConfig()
        self.categories = self.db.speakers()
        self.order = {s: i for i, s in enumerate(self.categories)}
        self.vectors = {
            s: speaker_formant_vector(self.db, s, self.config.repetition_policy, self.db.vowels())
            for s in self.categories
        }
        self.tokens: dict[str, tuple[list[str], np.ndarray]] = {}
        for s in self.categories:
            recs = self.db.records_of(s)
            self.tokens[s] = ([r.vowel for r in recs], np.array([r.formants for r in recs], dtype=float))
        self._pairs: dict = {}
        self._bayes: dict = {}

    # -- speaker groups -------------------------------------------------
    def group(self, category: Category | None) -> list[str]:
        return [s for s, c in self.categories.items() if category is None or c is category]

    # -- parameter estimation -------------------------------------------
    def _pair_estimates(self, criterion: Criterion, pool: tuple[str, ...], k: str) -> list[PairEstimate]:
        x = self.vectors[k]
        out = []
        for ref in pool:
            if ref == k:
                continue
            key = (criterion, k, ref)
            if key not in self._pairs:
                self._pairs[key] = estimate_pair(self.vectors[ref], x, criterion, self.config.pair_optimizer)
            out.append(self._pairs[key])
        return out

    def _bayes_params(self, pool: tuple[str, ...], k: str) -> tuple[float, float]:
        key = (pool, k)
        if key not in self._bayes:
            refs = [self.vectors[s] for s in pool if s != k]
            data = PairedDataset.from_vectors(self.vectors[k], refs)
            base = self.config.bayes
            gibbs = GibbsConfig(base.gibbs.iterations, base.gibbs.burn_in, base.gibbs.kappa0, base.gibbs.sigma0,
                                RngStream(self.config.seed, self.order[k]), keep_trace=False)
            settings = BayesSettings(base.bounds, base.grid, base.optimizer, gibbs)
            run = estimate_bayes(data, settings)
            self._bayes[key] = (run.alpha, run.kappa)
        return self._bayes[key]

    def parameters(self, method: Method, reference: Category | None, speakers: Sequence[str]):
        """Warp (alpha, kappa) for each speaker against ``reference`` minus itself, plus failures."""
        pool = tuple(self.group(reference))
        params: dict[str, tuple[float, float]] = {}
        failures: dict[str, str] = {}
        if method is Method.BASELINE:
            return {s: (1.0, 0.0) for s in speakers}, failures
        if method is Method.BAYES:
            for s in speakers:
                try:
                    params[s] = self._bayes_params(pool, s)
                except (ArithmeticError, ValueError) as exc:
                    failures[s] = str(exc)
                    log.warning("bayes estimate failed for %s: %s", s, exc)
            return params, failures
        pairs = []
        for s in speakers:
            try:
                pairs.extend(self._pair_estimates(method.criterion, pool, s))
            except (ArithmeticError, ValueError) as exc:
                failures[s] = str(exc)
        adjustment = Clamped(self.config.clamp_L) if method.clamped else None
        est = aggregate(pairs, adjustment, strict=False)
        for s in speakers:
            if s in failures:
                continue
            params[s] = (est.alpha_by_subject[s], est.kappa)
        return params, failures

    # -- evaluation -----------------------------------------------------
    def _normalized_tokens(self, s: str, params: dict[str, tuple[float, float]]):
        labels, pts = self.tokens[s]
        a, k = params[s]
        return labels, warp_values(pts, a, k)

    def run(self, plan: ExperimentPlan) -> ExperimentResult:
        method = plan.estimator
        subjects = self.group(plan.subject_category)
        refs = self.group(plan.reference_category)
        if not subjects:
            raise ValueError(f"no speakers in subject group {group_name(plan.subject_category)}")
        everyone = list(OrderedDict.fromkeys(subjects + refs))
        params, failures = self.parameters(method, plan.reference_category, everyone)
        raw = self.config.fit_classes_on == "raw"

        vowels = self.db.vowels()
        confusion: "OrderedDict[str, OrderedDict[str, int]]" = OrderedDict(
            (v, OrderedDict((w, 0) for w in vowels)) for v in vowels
        )
        total = correct = 0
        per_subject: dict[str, tuple[int, int]] = {}
        for s in subjects:
            if s not in params:
                continue
            train = []
            for ref in refs:
                if ref == s or ref not in params:
                    continue
                labels, pts = self.tokens[ref] if raw else self._normalized_tokens(ref, params)
                train.extend(zip(labels, pts))
            model = fit_classes(train, self.config.relative_ridge, self.config.ridge)
            labels, pts = self._normalized_tokens(s, params)
            predicted = classify_many(pts, model)
            hits = 0
            for truth, guess in zip(labels, predicted):
                confusion[truth][guess] += 1
                hits += truth == guess
            per_subject[s] = (hits, len(labels))
            total += len(labels)
            correct += hits
        if total == 0:
            raise RuntimeError(f"plan {plan.label}/{method.value}: every subject failed")
        for s, msg in failures.items():
            log.warning("plan %s/%s: speaker %s excluded (%s)", plan.label, method.value, s, msg)
        return ExperimentResult(plan, correct / total, total, correct, confusion, failures, per_subject,
                                {s: params[s] for s in subjects if s in params})


def run_experiment(plan: ExperimentPlan, db: VowelDatabase, config: ExperimentConfig | None = None) -> ExperimentResult:
    return ExperimentRunner(db, config).run(plan)


def improvement_percent(accuracy: float, baseline: float) -> float:
    """Relative change against the baseline, in percent."""
    return (accuracy - baseline) / baseline * 100.0


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


RESULT_HEADER = ("database", "plan", "subject_category", "reference_category", "estimator", "accuracy", "n_trials")


def write_results_csv(results: Sequence[ExperimentResult], path, stamp: str | None = None) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        if stamp:
            fh.write(f"# {stamp}\n")
        fh.write(",".join(RESULT_HEADER) + "\n")
        for res in results:
            p = res.plan
            fh.write(",".join([p.database, p.label, group_name(p.subject_category), group_name(p.reference_category),
                               p.estimator.value, f"{res.accuracy:.6f}", str(res.n_trials)]) + "\n")


def write_confusion_csv(result: ExperimentResult, path, stamp: str | None = None) -> None:
    labels = list(result.confusion)
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        if stamp:
            fh.write(f"# {stamp}\n")
        fh.write("true\\predicted," + ",".join(labels) + "\n")
        for v in labels:
            fh.write(v + "," + ",".join(str(result.confusion[v][w]) for w in labels) + "\n")


def write_table_csv(rows: Sequence[tuple[str, Method, float, int]], path, stamp: str | None = None) -> None:
    """Method x database table: accuracy in percent and improvement over that database's baseline."""
    baseline = {db: acc for db, m, acc, _ in rows if m is Method.BASELINE}
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        if stamp:
            fh.write(f"# {stamp}\n")
        fh.write("method,database,accuracy_percent,improvement_percent,n_trials\n")
        for db, m, acc, n in rows:
            imp = improvement_percent(acc, baseline[db]) if db in baseline else math.nan
            fh.write(f"{m.display},{db},{100 * acc:.2f},{imp:.2f},{n}\n")
