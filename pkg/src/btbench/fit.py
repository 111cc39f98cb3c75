"""Convenience layer tying a win table to a sampled posterior."""

from __future__ import annotations

from dataclasses import dataclass

from .model import BradleyTerryModel, DavidsonModel, PriorConfig
from .sampler import PosteriorDraws, SamplerConfig, sample
from .wintable import WinTable


@dataclass(frozen=True)
class FitResult:
    model: object
    draws: PosteriorDraws
    wintable: WinTable
    prior: PriorConfig
    config: SamplerConfig

    @property
    def algorithms(self) -> tuple[str, ...]:
        return self.wintable.algorithms


def fit_bt(
    wt: WinTable,
    prior: PriorConfig | None = None,
    config: SamplerConfig | None = None,
) -> FitResult:
    """Sample the paired-comparison posterior for a no-ties win table."""
    prior = prior if prior is not None else PriorConfig()
    config = config if config is not None else SamplerConfig()
    model = BradleyTerryModel(wt, prior)
    draws = sample(model, config)
    return FitResult(model, draws, wt, prior, config)


def fit_davidson(
    wt: WinTable,
    prior: PriorConfig | None = None,
    config: SamplerConfig | None = None,
) -> FitResult:
    """Sample the explicit-ties posterior for a win table keeping its ties."""
    prior = prior if prior is not None else PriorConfig()
    config = config if config is not None else SamplerConfig()
    model = DavidsonModel(wt, prior)
    draws = sample(model, config)
    return FitResult(model, draws, wt, prior, config)
