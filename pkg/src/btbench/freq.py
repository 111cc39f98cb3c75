"""Frequentist baseline procedures for multi-algorithm comparisons.

Two classic pipelines: the mean-rank route (Friedman omnibus test followed
by the Nemenyi critical difference) and the pairwise route (Wilcoxon
signed-rank tests with a p-value adjustment).  Both need a complete table:
there is no agreed-upon way to rank or pair algorithms with missing cells,
so such tables are rejected outright.

Also here: the required-sample-size calculation for a two-sided t test at a
given effect size, from the noncentral t distribution, which motivates the
default effect-size tie threshold of 0.4 for few-fold cross validations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConfigError, InsufficientDataError
from .results import ResultsTable, aggregate_folds

P_ADJUST_METHODS = ("bonferroni", "holm", "hochberg", "bh", "by")

# Critical values q_alpha(K) for the Nemenyi test, K = 2..20: quantiles of
# the studentized range with infinite degrees of freedom, divided by sqrt 2.
NEMENYI_Q = {
    0.05: (
        1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320,
        3.030878, 3.101730, 3.163684, 3.218654, 3.268004, 3.312739,
        3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073,
        3.543799,
    ),
    0.10: (
        1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732,
        2.779884, 2.854606, 2.919889, 2.977768, 3.029694, 3.076733,
        3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224,
        3.319233,
    ),
}


@dataclass(frozen=True)
class PairDecision:
    first: str
    second: str
    statistic: float  # mean-rank gap, or the raw Wilcoxon p-value
    adjusted_p: float | None
    significant: bool


@dataclass(frozen=True)
class FreqReport:
    procedure: str
    statistic: float
    p_value: float
    ordering: tuple[str, ...]
    pairs: tuple[PairDecision, ...]
    alpha: float
    critical_difference: float | None = None
    mean_ranks: dict | None = None
    notes: tuple[str, ...] = ()

    @property
    def n_significant(self) -> int:
        return sum(p.significant for p in self.pairs)

    def as_dict(self) -> dict:
        return {
            "procedure": self.procedure,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "ordering": list(self.ordering),
            "alpha": self.alpha,
            "critical_difference": self.critical_difference,
            "mean_ranks": self.mean_ranks,
            "notes": list(self.notes),
            "pairs": [
                {
                    "first": p.first,
                    "second": p.second,
                    "statistic": p.statistic,
                    "adjusted_p": p.adjusted_p,
                    "significant": p.significant,
                }
                for p in self.pairs
            ],
        }


# --- ranking ---------------------------------------------------------------


def _require_complete(table: ResultsTable, procedure: str) -> None:
    if not table.is_complete():
        raise ConfigError(
            f"{procedure} needs every algorithm measured on every data set; "
            "there is no agreed-upon way of dealing with missing cells in "
            "rank-based procedures"
        )


def rank_matrix(table: ResultsTable) -> np.ndarray:
    """Within-dataset ranks, 1 = best, ties averaged. Shape (N, K)."""
    _require_complete(table, "ranking")
    table = aggregate_folds(table) if table.has_folds else table
    sign = -1.0 if table.higher_is_better else 1.0
    rows = []
    for d in table.datasets:
        values = np.array([table.cell_mean(d, a) for a in table.algorithms])
        rows.append(stats.rankdata(sign * values, method="average"))
    return np.asarray(rows)


def friedman_test(ranks: np.ndarray) -> tuple[float, float]:
    """Friedman chi-square with the tie correction, and its p-value."""
    n, k = ranks.shape
    if k < 2:
        raise ConfigError("need at least 2 algorithms")
    column_sums = ranks.sum(axis=0)
    statistic = 12.0 / (n * k * (k + 1)) * np.sum(column_sums**2) - 3.0 * n * (k + 1)
    ties = 0.0
    for row in ranks:
        _, counts = np.unique(row, return_counts=True)
        ties += float(np.sum(counts**3 - counts))
    correction = 1.0 - ties / (n * k * (k * k - 1))
    if correction <= 0.0:
        return 0.0, 1.0  # all measures tied within every data set
    statistic /= correction
    return float(statistic), float(stats.chi2.sf(statistic, k - 1))


def nemenyi_critical_difference(k: int, n: int, alpha: float = 0.05) -> float:
    """q_alpha(K) * sqrt(K (K+1) / (6 N))."""
    if alpha not in NEMENYI_Q:
        raise ConfigError(
            f"no critical values for alpha={alpha}; available: "
            f"{sorted(NEMENYI_Q)}"
        )
    qs = NEMENYI_Q[alpha]
    if not 2 <= k <= len(qs) + 1:
        raise ConfigError(f"critical values tabulated for K = 2..{len(qs) + 1}")
    return qs[k - 2] * math.sqrt(k * (k + 1) / (6.0 * n))


def demsar_procedure(table: ResultsTable, alpha: float = 0.05) -> FreqReport:
    """Mean-rank comparison: Friedman omnibus, then Nemenyi post hoc.

    Algorithms are ordered by increasing mean rank (lower is better).  Pairs
    whose mean-rank gap exceeds the critical difference are significant;
    when the omnibus test fails, no pair is.
    """
    _require_complete(table, "the mean-rank procedure")
    ranks = rank_matrix(table)
    n, k = ranks.shape
    statistic, p_value = friedman_test(ranks)
    mean_ranks = ranks.mean(axis=0)
    order = np.argsort(mean_ranks, kind="stable")
    ordering = tuple(table.algorithms[i] for i in order)

    notes = []
    cd = None
    pairs = []
    run_posthoc = p_value <= alpha
    if not run_posthoc:
        notes.append("omnibus test not significant; no post-hoc comparisons")
    else:
        cd = nemenyi_critical_difference(k, n, alpha)
    for a in range(k):
        for b in range(a + 1, k):
            i, j = order[a], order[b]
            gap = float(mean_ranks[j] - mean_ranks[i])
            pairs.append(
                PairDecision(
                    first=table.algorithms[i],
                    second=table.algorithms[j],
                    statistic=gap,
                    adjusted_p=None,
                    significant=bool(run_posthoc and cd is not None and gap > cd),
                )
            )
    return FreqReport(
        procedure="friedman_nemenyi",
        statistic=statistic,
        p_value=p_value,
        ordering=ordering,
        pairs=tuple(pairs),
        alpha=alpha,
        critical_difference=cd,
        mean_ranks={a: float(m) for a, m in zip(table.algorithms, mean_ranks)},
        notes=tuple(notes),
    )


# --- pairwise Wilcoxon -------------------------------------------------------


def _signed_rank_statistic(diff: np.ndarray) -> tuple[float, int, np.ndarray]:
    """(rank sum of positive differences, usable n, |d| ranks), zeros dropped."""
    diff = diff[diff != 0.0]
    n = diff.size
    if n == 0:
        return 0.0, 0, np.array([])
    ranks = stats.rankdata(np.abs(diff), method="average")
    w_plus = float(ranks[diff > 0].sum())
    return w_plus, n, ranks


def _exact_signed_rank_p(w_plus: float, n: int) -> float:
    """Two-sided exact p by enumerating the 2^n sign assignments.

    Valid when no ties among the absolute differences, so ranks are 1..n
    and the statistic is integral.  Counts via the standard subset-sum
    recurrence.
    """
    max_sum = n * (n + 1) // 2
    counts = np.zeros(max_sum + 1, dtype=float)
    counts[0] = 1.0
    for r in range(1, n + 1):
        counts[r:] += counts[:-r].copy()
    total = 2.0**n
    w = int(round(w_plus))
    cdf = counts[: w + 1].sum() / total
    sf = counts[w:].sum() / total
    return float(min(1.0, 2.0 * min(cdf, sf)))


def _normal_signed_rank_p(w_plus: float, n: int, ranks: np.ndarray) -> float:
    """Normal approximation with tie correction and continuity correction."""
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, counts = np.unique(ranks, return_counts=True)
    var -= float(np.sum(counts**3 - counts)) / 48.0
    if var <= 0.0:
        return 1.0
    shift = w_plus - mean
    z = (shift - 0.5 * np.sign(shift)) / math.sqrt(var)
    return float(min(1.0, 2.0 * stats.norm.sf(abs(z))))


def wilcoxon_signed_rank(x, y) -> float:
    """Two-sided signed-rank p-value for paired samples.

    Zero differences are dropped; tied absolute differences share average
    ranks.  Uses the exact null distribution for n <= 25 without ties, the
    corrected normal approximation otherwise.  All-zero differences give
    p = 1 with a warning, since the data carry no signal at all.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size == 0:
        raise InsufficientDataError("paired samples must have equal nonzero length")
    w_plus, n, ranks = _signed_rank_statistic(x - y)
    if n == 0:
        warnings.warn("all paired differences are zero; returning p = 1")
        return 1.0
    no_ties = np.unique(ranks).size == n
    if n <= 25 and no_ties:
        return _exact_signed_rank_p(w_plus, n)
    return _normal_signed_rank_p(w_plus, n, ranks)


def p_adjust(pvalues, method: str = "hochberg") -> np.ndarray:
    """Multiplicity adjustment; output order matches input order."""
    p = np.asarray(pvalues, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ConfigError("p-values must lie in [0, 1]")
    if method not in P_ADJUST_METHODS:
        raise ConfigError(f"unknown method {method!r}; valid: {P_ADJUST_METHODS}")
    m = p.size
    if m == 0:
        return p.copy()
    order = np.argsort(p, kind="stable")
    ranked = p[order]
    adjusted = np.empty(m)
    if method == "bonferroni":
        adjusted = np.minimum(1.0, ranked * m)
    elif method == "holm":
        stepped = np.minimum(1.0, ranked * (m - np.arange(m)))
        adjusted = np.maximum.accumulate(stepped)
    elif method == "hochberg":
        stepped = np.minimum(1.0, ranked * (m - np.arange(m)))
        adjusted = np.minimum.accumulate(stepped[::-1])[::-1]
    elif method == "bh":
        stepped = np.minimum(1.0, ranked * m / np.arange(1, m + 1))
        adjusted = np.minimum.accumulate(stepped[::-1])[::-1]
    elif method == "by":
        c = float(np.sum(1.0 / np.arange(1, m + 1)))
        stepped = np.minimum(1.0, ranked * c * m / np.arange(1, m + 1))
        adjusted = np.minimum.accumulate(stepped[::-1])[::-1]
    out = np.empty(m)
    out[order] = adjusted
    return out


def pairwise_wilcoxon_procedure(
    table: ResultsTable, method: str = "hochberg", alpha: float = 0.05
) -> FreqReport:
    """All-pairs signed-rank tests on per-dataset means, with adjustment.

    Algorithms are ordered by their median measure across data sets (best
    first), which requires a metric that is comparable across data sets.
    """
    _require_complete(table, "the pairwise signed-rank procedure")
    flat = aggregate_folds(table) if table.has_folds else table
    k = flat.n_algorithms
    if k < 2:
        raise ConfigError("need at least 2 algorithms")
    columns = {
        a: np.array([flat.cell_mean(d, a) for d in flat.datasets])
        for a in flat.algorithms
    }
    medians = {a: float(np.median(v)) for a, v in columns.items()}
    sign = -1.0 if flat.higher_is_better else 1.0
    ordering = tuple(sorted(flat.algorithms, key=lambda a: sign * medians[a]))

    raw = []
    index_pairs = []
    notes = []
    for a in range(k):
        for b in range(a + 1, k):
            first, second = ordering[a], ordering[b]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                diff = columns[first] - columns[second]
                if not np.any(diff):
                    notes.append(
                        f"{first} and {second} are identical on every data set"
                    )
                p = wilcoxon_signed_rank(columns[first], columns[second])
            raw.append(p)
            index_pairs.append((first, second))
    adjusted = p_adjust(np.array(raw), method)
    pairs = tuple(
        PairDecision(
            first=f,
            second=s,
            statistic=r,
            adjusted_p=float(adj),
            significant=bool(adj <= alpha),
        )
        for (f, s), r, adj in zip(index_pairs, raw, adjusted)
    )
    return FreqReport(
        procedure=f"pairwise_wilcoxon_{method}",
        statistic=math.nan,
        p_value=math.nan,
        ordering=ordering,
        pairs=pairs,
        alpha=alpha,
        notes=tuple(notes) + (f"ordering by median measure; zeros dropped",),
    )


# --- power analysis ----------------------------------------------------------


def _t_test_power(n: float, d: float, alpha: float, paired: bool) -> float:
    if paired:
        df = n - 1.0
        ncp = d * math.sqrt(n)
    else:
        df = 2.0 * (n - 1.0)
        ncp = d * math.sqrt(n / 2.0)
    if df <= 0:
        return 0.0
    crit = stats.t.ppf(1.0 - alpha / 2.0, df)
    return float(stats.nct.sf(crit, df, ncp) + stats.nct.cdf(-crit, df, ncp))


def t_test_power_n(
    d: float, alpha: float, power: float, paired: bool = False
) -> float:
    """Samples per group for a two-sided t test to reach the target power.

    Solved on the real line by bisection to 1e-5; the returned n is the
    value at which the noncentral-t power crosses the target, so a study
    needs ceil(n) measurements per group.
    """
    if d <= 0:
        raise ConfigError("effect size d must be positive")
    if not 0.0 < alpha < 1.0 or not 0.0 < power < 1.0:
        raise ConfigError("alpha and power must lie in (0, 1)")
    if power <= alpha:
        raise ConfigError(
            "target power must exceed alpha; the test rejects at rate alpha "
            "even with no effect"
        )
    lo = 1.0 + 1e-6 if paired else 1.0 + 1e-6
    hi = 4.0
    while _t_test_power(hi, d, alpha, paired) < power:
        hi *= 2.0
        if hi > 1e9:
            raise ConfigError("required sample size exceeds 1e9; check inputs")
    while hi - lo > 1e-5:
        mid = 0.5 * (lo + hi)
        if _t_test_power(mid, d, alpha, paired) < power:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
