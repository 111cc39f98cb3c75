"""Posterior predictive checks and WAIC for fitted comparison models.

The predictive check regenerates win counts from each posterior draw and
asks how often the observed count for a pair lands inside the highest
density interval of its own replicate distribution.  WAIC treats one
unordered pair as the pointwise unit, with normalizing constants kept, so
values are comparable across models fitted to the same pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError
from .model import BradleyTerryModel, DavidsonModel
from .sampler import PosteriorDraws
from .summary import hdi
from .wintable import WinTable

PPC_MASSES = (0.50, 0.90, 0.95, 1.00)


def _rebuild_model(draws: PosteriorDraws, wt: WinTable):
    """Reconstruct the generative model matching the draws' parameters."""
    if "nu" in draws.param_names:
        model = DavidsonModel(wt)
    else:
        model = BradleyTerryModel(wt)
    expected = model.param_names
    if list(draws.param_names) != expected:
        raise ConfigError(
            "draws do not match this win table: expected parameters "
            f"{expected}, got {list(draws.param_names)}"
        )
    return model


@dataclass(frozen=True)
class PpcReplicates:
    """Regenerated win (and tie) counts: one row per draw, column per pair."""

    pair_indices: tuple[tuple[int, int], ...]
    wins: np.ndarray
    ties: np.ndarray | None = None


@dataclass(frozen=True)
class PpcCoverage:
    """Fraction of pairs whose observed count fell inside its replicate HDI."""

    masses: tuple[float, ...]
    wins_proportion: tuple[float, ...]
    ties_proportion: tuple[float, ...] | None = None

    def as_dict(self) -> dict:
        d = {
            "rows": [
                {"hdi": m, "proportion": p}
                for m, p in zip(self.masses, self.wins_proportion)
            ]
        }
        if self.ties_proportion is not None:
            for row, t in zip(d["rows"], self.ties_proportion):
                row["ties"] = t
        return d


@dataclass(frozen=True)
class WaicResult:
    waic: float
    lppd: float
    p_waic: float
    n_units: int

    def as_dict(self) -> dict:
        return {
            "waic": self.waic,
            "lppd": self.lppd,
            "p_waic": self.p_waic,
            "n_units": self.n_units,
            "pointwise_unit": "pair",
        }


def ppc_replicates(draws: PosteriorDraws, wt: WinTable, seed: int) -> PpcReplicates:
    """Sample replicated counts per pair from every pooled posterior draw.

    Binomial wins for the no-ties model; a full (win, tie, loss) split for
    the explicit-ties model.  Deterministic for a given seed.
    """
    model = _rebuild_model(draws, wt)
    thetas = draws.pooled()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n_ij = model.n_ij.astype(np.int64)
    pairs = tuple(zip(model.i_idx.tolist(), model.j_idx.tolist()))
    if isinstance(model, DavidsonModel):
        p_i, p_t, _ = model.outcome_probs(thetas)
        wins = rng.binomial(n_ij, p_i)
        remaining = n_ij - wins
        tie_share = p_t / np.maximum(1.0 - p_i, 1e-300)
        ties = rng.binomial(remaining, np.minimum(tie_share, 1.0))
        return PpcReplicates(pairs, wins, ties)
    p = model.pair_win_probs(thetas)
    wins = rng.binomial(n_ij, p)
    return PpcReplicates(pairs, wins, None)


def _coverage(replicates: np.ndarray, observed: np.ndarray, masses) -> tuple[float, ...]:
    out = []
    for mass in masses:
        inside = 0
        for col, obs in enumerate(observed):
            lo, hi = hdi(replicates[:, col], mass)
            inside += lo <= obs <= hi
        out.append(inside / len(observed))
    return tuple(out)


def ppc_coverage(
    replicates: PpcReplicates, wt: WinTable, masses=PPC_MASSES
) -> PpcCoverage:
    """Observed-count coverage per HDI mass; weakly increasing in mass."""
    i_idx = np.array([i for i, _ in replicates.pair_indices])
    j_idx = np.array([j for _, j in replicates.pair_indices])
    observed_wins = wt.wins[i_idx, j_idx]
    wins_prop = _coverage(replicates.wins, observed_wins, masses)
    ties_prop = None
    if replicates.ties is not None:
        observed_ties = wt.ties[i_idx, j_idx]
        ties_prop = _coverage(replicates.ties, observed_ties, masses)
    return PpcCoverage(tuple(masses), wins_prop, ties_prop)


def waic(draws: PosteriorDraws, wt: WinTable) -> WaicResult:
    """Widely applicable information criterion, -2(lppd - p_waic).

    lppd sums, over pairs, the log of the mean pointwise likelihood across
    draws; the penalty sums the per-pair variance of the pointwise log
    likelihood.  Lower is better.
    """
    model = _rebuild_model(draws, wt)
    ll = model.pointwise_loglik(draws.pooled())
    n_draws = ll.shape[0]
    if n_draws == 0:
        raise ConfigError("no draws to compute WAIC from")
    lppd = float(np.sum(logsumexp(ll, axis=0) - math.log(n_draws)))
    if n_draws == 1:
        p_waic = 0.0
    else:
        p_waic = float(np.sum(ll.var(axis=0, ddof=1)))
    return WaicResult(
        waic=-2.0 * (lppd - p_waic),
        lppd=lppd,
        p_waic=p_waic,
        n_units=ll.shape[1],
    )
