"""Pairwise win/tie counting over a results table.

A win table holds, for every pair of algorithms, how many data sets both ran
on, how many each won, and how many were ties.  Ties arise from exact mean
equality, or, when fold data is available, from the effect-size tie rule:
two cells whose standardized mean difference is below a threshold are
declared practically indistinguishable on that data set.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .results import ResultsTable

TIES_POLICIES = ("add", "spread", "forget", "keep")


@dataclass(frozen=True)
class LocalRopeConfig:
    """Effect-size tie rule applied per data set.

    ``d_min`` is the standardized-mean-difference threshold below which two
    fold vectors count as a tie.  0.4 is safe for the 3- to 10-fold cross
    validations common in practice; 0.2 suits 10x10-fold data.  The paired
    variant uses the standard deviation of per-fold differences.
    """

    enabled: bool = False
    d_min: float = 0.4
    paired: bool = True

    def __post_init__(self):
        if self.d_min < 0:
            raise ConfigError("d_min must be >= 0")


@dataclass(frozen=True)
class WinTable:
    """Directed win counts ``wins[i, j]`` and symmetric tie counts.

    ``n(i, j) = wins[i, j] + wins[j, i] + ties[i, j]`` always holds; after a
    ties policy other than ``keep`` has run, ties are zero everywhere.
    """

    algorithms: tuple[str, ...]
    wins: np.ndarray
    ties: np.ndarray

    def __post_init__(self):
        k = len(self.algorithms)
        if self.wins.shape != (k, k) or self.ties.shape != (k, k):
            raise ValueError("count matrices must be K x K")
        self.wins.setflags(write=False)
        self.ties.setflags(write=False)

    @property
    def n(self) -> np.ndarray:
        """Match counts per pair (symmetric)."""
        return self.wins + self.wins.T + self.ties

    @property
    def has_ties(self) -> bool:
        return bool(self.ties.any())

    def index(self, algorithm: str) -> int:
        try:
            return self.algorithms.index(algorithm)
        except ValueError:
            raise KeyError(
                f"unknown algorithm {algorithm!r}; valid: {list(self.algorithms)}"
            ) from None

    def pairs(self):
        """Unordered index pairs (i < j) with at least one match."""
        n = self.n
        k = len(self.algorithms)
        return [(i, j) for i in range(k) for j in range(i + 1, k) if n[i, j] > 0]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("alg_i,alg_j,n,wins_i,wins_j,ties\n")
        n = self.n
        for i, j in self.pairs():
            out.write(
                f"{self.algorithms[i]},{self.algorithms[j]},{n[i, j]},"
                f"{self.wins[i, j]},{self.wins[j, i]},{self.ties[i, j]}\n"
            )
        return out.getvalue()

    def to_json(self) -> str:
        n = self.n
        rows = [
            {
                "alg_i": self.algorithms[i],
                "alg_j": self.algorithms[j],
                "n": int(n[i, j]),
                "wins_i": int(self.wins[i, j]),
                "wins_j": int(self.wins[j, i]),
                "ties": int(self.ties[i, j]),
            }
            for i, j in self.pairs()
        ]
        return json.dumps({"algorithms": list(self.algorithms), "pairs": rows}, indent=2)


def cohen_d(x, y, paired: bool = False) -> float:
    """Standardized mean difference between two equal-length fold vectors.

    Unpaired: (mean x - mean y) / sqrt((var x + var y) / 2), sample variance
    with the n-1 denominator.  Paired: mean(x - y) / sd(x - y).  The sign
    follows the mean difference.  A zero denominator yields +-inf when the
    means differ (a decisive separation) and 0.0 when they are equal.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise InsufficientDataError("fold vectors must have equal length")
    if x.size < 2:
        raise InsufficientDataError("effect size needs at least 2 folds per cell")
    if paired:
        diff = x - y
        num = float(np.mean(diff))
        denom = float(np.std(diff, ddof=1))
    else:
        num = float(np.mean(x) - np.mean(y))
        denom = math.sqrt((np.var(x, ddof=1) + np.var(y, ddof=1)) / 2.0)
    if denom == 0.0:
        if num == 0.0:
            return 0.0
        return math.inf if num > 0 else -math.inf
    return num / denom


def compare_cell(a, b, config: LocalRopeConfig, higher_is_better: bool = True) -> int:
    """Outcome of one data set for the pair (a, b): +1, -1, or 0 for a tie.

    With the effect-size rule disabled, or when either cell has a single
    value, the means are compared directly and only exact equality ties.
    Otherwise the pair ties whenever |d| <= d_min.
    """
    a = tuple(a)
    b = tuple(b)
    if config.enabled and len(a) >= 2 and len(b) >= 2:
        d = cohen_d(a, b, paired=config.paired)
        if abs(d) <= config.d_min:
            return 0
        better_a = d > 0
    else:
        mean_a = float(np.mean(a))
        mean_b = float(np.mean(b))
        if mean_a == mean_b:
            return 0
        better_a = mean_a > mean_b
    if not higher_is_better:
        better_a = not better_a
    return 1 if better_a else -1


def build_wintable(
    table: ResultsTable,
    config: LocalRopeConfig | None = None,
    ) -> WinTable:
    """Count pairwise outcomes over all data sets where both algorithms ran.

    Data sets missing either algorithm contribute nothing to that pair.
    Requesting the effect-size tie rule on a table without fold data is a
    configuration error, since there is no variability to standardize by.
    """
    if config is None:
        config = LocalRopeConfig()
    if config.enabled and not table.has_folds:
        raise ConfigError(
            "the effect-size tie rule needs fold-level data; "
            "this table holds a single value per cell"
        )
    k = table.n_algorithms
    wins = np.zeros((k, k), dtype=np.int64)
    ties = np.zeros((k, k), dtype=np.int64)
    for dataset in table.datasets:
        row = [table.cells.get((dataset, a)) for a in table.algorithms]
        for i in range(k):
            if row[i] is None:
                continue
            for j in range(i + 1, k):
                if row[j] is None:
                    continue
                outcome = compare_cell(
                    row[i], row[j], config, table.higher_is_better
                )
                if outcome > 0:
                    wins[i, j] += 1
                elif outcome < 0:
                    wins[j, i] += 1
                else:
                    ties[i, j] += 1
                    ties[j, i] += 1
    return WinTable(table.algorithms, wins, ties)


def apply_ties_policy(wt: WinTable, policy: str) -> WinTable:
    """Fold tie counts into win counts ahead of the no-ties likelihood.

    ``add`` credits every tie as a win to both sides; ``spread`` credits
    half the ties, rounded up, to both; ``forget`` drops them.  All three
    zero the tie counts, so matches per pair become wins_i + wins_j.
    ``keep`` leaves the table unchanged for the explicit-ties model.
    """
    if policy not in TIES_POLICIES:
        raise ConfigError(f"unknown ties policy {policy!r}; valid: {TIES_POLICIES}")
    if policy == "keep":
        return wt
    wins = wt.wins.copy()
    if policy == "add":
        wins += wt.ties
    elif policy == "spread":
        wins += -(-wt.ties // 2)  # ceil division on integers
    return WinTable(wt.algorithms, wins, np.zeros_like(wt.ties))
