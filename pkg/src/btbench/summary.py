"""Posterior summaries: pair probabilities, HDIs, ranking, ROPE masses.

Each merit draw maps a pair of algorithms to a win probability, so one
fitted model yields a distribution of P(first beats second) per pair.  The
summary reports, per pair: mean, median, highest-density interval, the
fraction of probability draws at or above one half, and the fraction inside
the practical-equivalence region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import pair_prob
from .sampler import PosteriorDraws


@dataclass(frozen=True)
class RopeConfig:
    """Probability-space region of practical equivalence, default [0.45, 0.55]."""

    low: float = 0.45
    high: float = 0.55

    def __post_init__(self):
        if not 0.0 <= self.low < self.high <= 1.0:
            raise ConfigError("ROPE bounds must satisfy 0 <= low < high <= 1")


@dataclass(frozen=True)
class ComparisonRow:
    first: str
    second: str
    mean: float
    median: float
    hdi_low: float
    hdi_high: float
    above_50: float
    in_rope: float
    range_low: float
    range_high: float
    flagged: bool = False  # mean fell below 0.5 despite merit ordering

    @property
    def delta(self) -> float:
        return self.hdi_high - self.hdi_low

    @property
    def pair(self) -> str:
        return f"{self.first} > {self.second}"


@dataclass(frozen=True)
class ComparisonSummary:
    rows: tuple[ComparisonRow, ...]
    ranking: tuple[str, ...]
    hdi_mass: float
    rope: RopeConfig
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "ranking": list(self.ranking),
            "hdi_mass": self.hdi_mass,
            "rope": {"low": self.rope.low, "high": self.rope.high},
            "notes": list(self.notes),
            "rows": [
                {
                    "first": r.first,
                    "second": r.second,
                    "mean": r.mean,
                    "median": r.median,
                    "hdi_low": r.hdi_low,
                    "hdi_high": r.hdi_high,
                    "delta": r.delta,
                    "above_50": r.above_50,
                    "in_rope": r.in_rope,
                    "range_low": r.range_low,
                    "range_high": r.range_high,
                    "flagged": r.flagged,
                }
                for r in self.rows
            ],
        }


def beta_draws(draws: PosteriorDraws) -> tuple[list[str], np.ndarray]:
    """Algorithm names and the pooled (draws, K) merit matrix."""
    names = []
    cols = []
    for idx, name in enumerate(draws.param_names):
        if name.startswith("beta[") and name.endswith("]"):
            names.append(name[5:-1])
            cols.append(idx)
    if not names:
        raise ConfigError("draws carry no merit parameters")
    return names, draws.pooled()[:, cols]


def pair_probability_draws(draws: PosteriorDraws, first: str, second: str) -> np.ndarray:
    """Per-draw P(first beats second) over all pooled post-warmup draws."""
    if first == second:
        raise ConfigError("a pair needs two distinct algorithms")
    names, beta = beta_draws(draws)
    try:
        i, j = names.index(first), names.index(second)
    except ValueError as exc:
        raise KeyError(f"unknown algorithm in pair: {exc}; valid: {names}") from None
    return pair_prob(beta[:, i], beta[:, j])


def hdi(values, mass: float = 0.89) -> tuple[float, float]:
    """Narrowest contiguous window holding ceil(mass * n) sorted values.

    Width ties resolve to the window starting lowest; mass 1 gives the full
    range.  Works for continuous and integer draws alike.
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("cannot take an HDI of no values")
    if not 0.0 < mass <= 1.0:
        raise ValueError("mass must be in (0, 1]")
    n = v.size
    m = int(math.ceil(mass * n))
    if m >= n:
        return float(v[0]), float(v[-1])
    widths = v[m - 1 :] - v[: n - m + 1]
    start = int(np.argmin(widths))  # argmin takes the first minimum
    return float(v[start]), float(v[start + m - 1])


def aggregated_ranking(draws: PosteriorDraws) -> list[str]:
    """Algorithms ordered by decreasing posterior mean merit.

    Exact mean ties keep input order (stable sort).
    """
    names, beta = beta_draws(draws)
    means = beta.mean(axis=0)
    order = np.argsort(-means, kind="stable")
    return [names[i] for i in order]


def summarize(
    draws: PosteriorDraws,
    rope: RopeConfig | None = None,
    hdi_mass: float = 0.89,
) -> ComparisonSummary:
    """One row per unordered pair, oriented best-ranked first.

    Row order follows the ranking: the best algorithm against every worse
    one, then the second best, and so on.  ``above_50`` counts draws >= 0.5
    (closed at the boundary) and ``in_rope`` counts draws inside the ROPE,
    both bounds inclusive.
    """
    if rope is None:
        rope = RopeConfig()
    names, beta = beta_draws(draws)
    ranking = aggregated_ranking(draws)
    means = beta.mean(axis=0)
    se = beta.std(axis=0, ddof=1) / math.sqrt(beta.shape[0])

    notes = []
    for a, b in zip(ranking, ranking[1:]):
        ia, ib = names.index(a), names.index(b)
        if means[ia] == means[ib]:
            notes.append(f"exact mean-merit tie between {a} and {b}; input order kept")
        elif abs(means[ia] - means[ib]) < 2.0 * math.hypot(se[ia], se[ib]):
            notes.append(f"near-tie between {a} and {b} (gap within MC error)")

    rows = []
    for pos, first in enumerate(ranking):
        for second in ranking[pos + 1 :]:
            p = pair_prob(beta[:, names.index(first)], beta[:, names.index(second)])
            lo, hi = hdi(p, hdi_mass)
            mean = float(p.mean())
            flagged = mean < 0.5
            if flagged:
                notes.append(
                    f"row {first} > {second}: mean probability {mean:.3f} fell "
                    "below 0.5 although the merit ordering favors the first"
                )
            rows.append(
                ComparisonRow(
                    first=first,
                    second=second,
                    mean=mean,
                    median=float(np.median(p)),
                    hdi_low=lo,
                    hdi_high=hi,
                    above_50=float(np.mean(p >= 0.5)),
                    in_rope=float(np.mean((p >= rope.low) & (p <= rope.high))),
                    range_low=float(p.min()),
                    range_high=float(p.max()),
                    flagged=flagged,
                )
            )
    return ComparisonSummary(
        rows=tuple(rows),
        ranking=tuple(ranking),
        hdi_mass=hdi_mass,
        rope=rope,
        notes=tuple(notes),
    )


def control_view(summary: ComparisonSummary, control: str) -> ComparisonSummary:
    """Keep only rows involving the control algorithm, orientation intact."""
    if control not in summary.ranking:
        raise KeyError(
            f"unknown control {control!r}; valid: {list(summary.ranking)}"
        )
    rows = tuple(
        r for r in summary.rows if control in (r.first, r.second)
    )
    return ComparisonSummary(
        rows=rows,
        ranking=summary.ranking,
        hdi_mass=summary.hdi_mass,
        rope=summary.rope,
        notes=summary.notes + (f"filtered to comparisons against {control}",),
    )
