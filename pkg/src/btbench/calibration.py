"""Predictive calibration of fits against held-out data sets.

One repetition: subsample a train table, fit the comparison model, then
score its pair predictions on data sets the fit never saw.  Two scores:

* strong - read each pair's probability draws as a distribution over the
  long-run win frequency and check how often the held-out empirical win
  ratio lands inside the 50/70/90% HDIs;
* weak - read ``above_50`` as the probability that the first algorithm is
  genuinely better, bin the pairs by it, and compare the expected number of
  confirmed pairs per bin against the observed number.

Held-out wins are counted by plain mean comparison; the effect-size tie
rule never applies to test data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SizeError
from .fit import fit_bt
from .model import PriorConfig
from .results import ResultsTable, aggregate_folds, subsample
from .sampler import SamplerConfig
from .summary import hdi, pair_probability_draws, summarize
from .wintable import LocalRopeConfig, apply_ties_policy, build_wintable

USE_CASES = {"ss": (5, 20), "mm": (10, 50), "sl": (5, 100)}

STRONG_MASSES = (0.50, 0.70, 0.90)
WEAK_BINS = ((0.5, 0.7), (0.7, 0.9), (0.9, 1.0))


@dataclass(frozen=True)
class StrongCalibration:
    within_50: float | None
    within_70: float | None
    within_90: float | None
    above90: float | None
    below90: float | None
    err: float | None
    mad: float | None
    n_pairs: int
    n_skipped: int

    def as_dict(self) -> dict:
        return {
            "within_50": self.within_50,
            "within_70": self.within_70,
            "within_90": self.within_90,
            "above90": self.above90,
            "below90": self.below90,
            "err": self.err,
            "mad": self.mad,
            "n_pairs": self.n_pairs,
            "n_skipped": self.n_skipped,
        }


@dataclass(frozen=True)
class WeakCalibration:
    bins: tuple[tuple[float, float], ...]
    predicted: tuple[float, ...]
    real: tuple[int, ...]
    n_pairs: tuple[int, ...]

    def as_dict(self) -> dict:
        return {
            "bins": [list(b) for b in self.bins],
            "predicted": list(self.predicted),
            "real": list(self.real),
            "n_pairs": list(self.n_pairs),
        }


def empirical_win_ratio(
    test: ResultsTable, first: str, second: str
) -> float | None:
    """win1 / (win1 + win2) over shared data sets, exact ties excluded.

    Returns None when no shared data set separates the two algorithms, in
    which case the pair carries no empirical signal and should be skipped.
    """
    if first == second:
        raise ConfigError("a pair needs two distinct algorithms")
    flat = aggregate_folds(test) if test.has_folds else test
    wins_first = 0
    wins_second = 0
    for d in flat.datasets:
        a = flat.cell_mean(d, first)
        b = flat.cell_mean(d, second)
        if a is None or b is None or a == b:
            continue
        better_first = a > b if flat.higher_is_better else a < b
        if better_first:
            wins_first += 1
        else:
            wins_second += 1
    total = wins_first + wins_second
    if total == 0:
        return None
    return wins_first / total


class _StrongTally:
    def __init__(self):
        self.inside = {m: 0 for m in STRONG_MASSES}
        self.above90 = 0
        self.below90 = 0
        self.errors = []
        self.n_pairs = 0
        self.n_skipped = 0

    def result(self) -> StrongCalibration:
        if self.n_pairs == 0:
            return StrongCalibration(
                None, None, None, None, None, None, None, 0, self.n_skipped
            )
        errors = np.asarray(self.errors)
        return StrongCalibration(
            within_50=self.inside[0.50] / self.n_pairs,
            within_70=self.inside[0.70] / self.n_pairs,
            within_90=self.inside[0.90] / self.n_pairs,
            above90=self.above90 / self.n_pairs,
            below90=self.below90 / self.n_pairs,
            err=float(errors.mean()),
            mad=float(np.median(np.abs(errors))),
            n_pairs=self.n_pairs,
            n_skipped=self.n_skipped,
        )


class _WeakTally:
    def __init__(self):
        self.predicted = [0.0] * len(WEAK_BINS)
        self.real = [0] * len(WEAK_BINS)
        self.n_pairs = [0] * len(WEAK_BINS)

    def result(self) -> WeakCalibration:
        return WeakCalibration(
            bins=WEAK_BINS,
            predicted=tuple(self.predicted),
            real=tuple(self.real),
            n_pairs=tuple(self.n_pairs),
        )


def score_strong_pair(tally: _StrongTally, prob_draws: np.ndarray, ratio: float) -> None:
    """Fold one pair's probability draws and empirical ratio into the tally."""
    for mass in STRONG_MASSES:
        lo, hi = hdi(prob_draws, mass)
        if lo <= ratio <= hi:
            tally.inside[mass] += 1
    lo90, hi90 = hdi(prob_draws, 0.90)
    if ratio > hi90:
        tally.above90 += 1
    elif ratio < lo90:
        tally.below90 += 1
    tally.errors.append(float(prob_draws.mean()) - ratio)
    tally.n_pairs += 1


def weak_bin_index(above_50: float) -> int | None:
    """Bin by confidence: [0.5, 0.7), [0.7, 0.9), [0.9, 1.0]."""
    for idx, (lo, hi) in enumerate(WEAK_BINS):
        if lo <= above_50 < hi or (hi == 1.0 and above_50 == 1.0):
            return idx
    return None


def score_weak_pair(tally: _WeakTally, above_50: float, first_won: bool) -> None:
    idx = weak_bin_index(above_50)
    if idx is None:
        return
    tally.predicted[idx] += above_50
    tally.real[idx] += int(first_won)
    tally.n_pairs[idx] += 1


def run_calibration(
    full: ResultsTable,
    use_case: str = "ss",
    reps: int = 10,
    seed: int = 1,
    n_held_out: int = 10,
    prior: PriorConfig | None = None,
    sampler: SamplerConfig | None = None,
    local_rope: LocalRopeConfig | None = None,
    ties_policy: str = "spread",
) -> tuple[StrongCalibration, WeakCalibration]:
    """Repeated train/held-out calibration of the fit on subsampled tables.

    Each repetition draws a fresh use-case-shaped train table plus
    ``n_held_out`` disjoint data sets, all seed-derived, fits on the train
    wins, and scores every pair with a defined empirical ratio.
    """
    if use_case not in USE_CASES:
        raise ConfigError(f"unknown use case {use_case!r}; valid: {sorted(USE_CASES)}")
    n_algorithms, n_datasets = USE_CASES[use_case]
    if n_algorithms > full.n_algorithms or n_datasets + n_held_out > full.n_datasets:
        raise SizeError(
            f"use case {use_case} needs {n_algorithms} algorithms and "
            f"{n_datasets}+{n_held_out} data sets; table has "
            f"{full.n_algorithms} x {full.n_datasets}"
        )
    if sampler is None:
        sampler = SamplerConfig()

    strong = _StrongTally(inside=None)
    weak = _WeakTally()
    for rep in range(reps):
        rep_seed = int(
            np.random.SeedSequence(entropy=seed, spawn_key=(rep,)).generate_state(1)[0]
        )
        train, held = subsample(
            full, n_algorithms, n_datasets, seed=rep_seed, n_held_out=n_held_out
        )
        wt = build_wintable(train, local_rope)
        wt = apply_ties_policy(wt, ties_policy)
        fit = fit_bt(
            wt,
            prior=prior,
            config=SamplerConfig(
                chains=sampler.chains,
                warmup=sampler.warmup,
                draws=sampler.draws,
                seed=rep_seed,
                target_accept=sampler.target_accept,
                max_steps=sampler.max_steps,
                trajectory_length=sampler.trajectory_length,
                parallel=sampler.parallel,
            ),
        )
        summary = summarize(fit.draws)
        for row in summary.rows:
            ratio = empirical_win_ratio(held, row.first, row.second)
            if ratio is None:
                strong.n_skipped += 1
                continue
            p = pair_probability_draws(fit.draws, row.first, row.second)
            score_strong_pair(strong, p, ratio)
            score_weak_pair(weak, row.above_50, ratio > 0.5)
    return strong.result(), weak.result()
