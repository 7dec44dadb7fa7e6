"""Bayesian estimation end to end: hyperparameters first, then the Gibbs sampler."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .bayes import BayesEstimate, GibbsConfig, Hyperparams, run_gibbs
from .hyperparams import HyperoptResult, HyperparamBounds, ILGrid, fit_hyperparams
from .model import FormantVector, PairedDataset
from .numerics import OptimizerConfig


@dataclass(frozen=True)
class BayesSettings:
    bounds: HyperparamBounds = field(default_factory=HyperparamBounds)
    grid: ILGrid = field(default_factory=ILGrid)
    optimizer: OptimizerConfig | None = None
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)


@dataclass(frozen=True)
class BayesRun:
    hyperparams: Hyperparams
    estimate: BayesEstimate
    hyperopt: HyperoptResult | None

    @property
    def alpha(self) -> float:
        return self.estimate.alpha_subject

    @property
    def kappa(self) -> float:
        return self.estimate.kappa_mean


def estimate_bayes(
    data: PairedDataset,
    settings: BayesSettings | None = None,
    hyperparams: Hyperparams | None = None,
) -> BayesRun:
    """Fit the hyperparameters by integrated likelihood (unless given), then sample the posterior."""
    settings = settings or BayesSettings()
    result = None
    if hyperparams is None:
        result = fit_hyperparams(data, settings.bounds, settings.grid, settings.optimizer)
        hyperparams = result.hyperparams
    estimate = run_gibbs(data, hyperparams, settings.gibbs)
    return BayesRun(hyperparams, estimate, result)


def estimate_bayes_for(
    subject: FormantVector,
    references: Sequence[FormantVector],
    settings: BayesSettings | None = None,
    hyperparams: Hyperparams | None = None,
) -> BayesRun:
    return estimate_bayes(PairedDataset.from_vectors(subject, references), settings, hyperparams)
