import numpy as np
import pytest

from btbench.calibration import (
    empirical_win_ratio,
    run_calibration,
    weak_bin_index,
)
from btbench.errors import ConfigError, SizeError
from btbench.results import parse_results

from conftest import small_sampler


def synthetic_table(n_algorithms=5, n_datasets=35, seed=0):
    """Merit-driven random results, large enough for the ss use case."""
    rng = np.random.default_rng(seed)
    merit = rng.normal(0, 0.1, size=n_algorithms)
    rows = ["dataset,algorithm,measure"]
    for d in range(n_datasets):
        base = rng.uniform(0.4, 0.9)
        for a in range(n_algorithms):
            value = base + merit[a] + rng.normal(0, 0.05)
            rows.append(f"d{d:02d},alg{a},{value:.6f}")
    return parse_results("\n".join(rows) + "\n")


def test_empirical_win_ratio_basic():
    rows = ["dataset,algorithm,measure"]
    # A beats B on 7 of 10, loses 3
    for d in range(10):
        a, b = (0.8, 0.2) if d < 7 else (0.2, 0.8)
        rows.append(f"d{d},A,{a}")
        rows.append(f"d{d},B,{b}")
    table = parse_results("\n".join(rows) + "\n")
    assert empirical_win_ratio(table, "A", "B") == pytest.approx(0.7)
    assert empirical_win_ratio(table, "B", "A") == pytest.approx(0.3)


def test_empirical_win_ratio_excludes_ties():
    rows = ["dataset,algorithm,measure"]
    for d in range(10):
        if d < 2:
            a = b = 0.5  # exact ties, excluded entirely
        elif d < 6:
            a, b = 0.8, 0.2
        else:
            a, b = 0.2, 0.8
        rows.append(f"d{d},A,{a}")
        rows.append(f"d{d},B,{b}")
    table = parse_results("\n".join(rows) + "\n")
    assert empirical_win_ratio(table, "A", "B") == pytest.approx(0.5)


def test_empirical_win_ratio_same_algorithm_rejected():
    table = synthetic_table(3, 5)
    with pytest.raises(ConfigError):
        empirical_win_ratio(table, "alg0", "alg0")


def test_empirical_win_ratio_undefined_is_none():
    rows = ["dataset,algorithm,measure", "d0,A,0.5", "d0,B,0.5"]
    table = parse_results("\n".join(rows) + "\n")
    assert empirical_win_ratio(table, "A", "B") is None


def test_weak_bins():
    assert weak_bin_index(0.5) == 0
    assert weak_bin_index(0.69) == 0
    assert weak_bin_index(0.7) == 1
    assert weak_bin_index(0.89) == 1
    assert weak_bin_index(0.9) == 2
    assert weak_bin_index(1.0) == 2
    assert weak_bin_index(0.49) is None


def test_run_calibration_zero_reps():
    table = synthetic_table()
    strong, weak = run_calibration(table, "ss", reps=0, seed=1)
    assert strong.n_pairs == 0
    assert strong.within_90 is None
    assert sum(weak.n_pairs) == 0


def test_run_calibration_rejects_small_tables():
    table = synthetic_table(n_algorithms=3, n_datasets=12)
    with pytest.raises(SizeError):
        run_calibration(table, "ss", reps=1, seed=1)
    with pytest.raises(ConfigError):
        run_calibration(synthetic_table(), "huge", reps=1, seed=1)


def test_run_calibration_smoke_and_determinism():
    table = synthetic_table()
    kwargs = dict(
        use_case="ss",
        reps=2,
        seed=9,
        n_held_out=10,
        sampler=small_sampler(0, chains=2, warmup=200, draws=200),
    )
    strong1, weak1 = run_calibration(table, **kwargs)
    strong2, weak2 = run_calibration(table, **kwargs)
    assert strong1 == strong2
    assert weak1 == weak2
    assert strong1.n_pairs == 20  # 2 reps x 10 pairs, none skipped here
    # tallies are internally consistent
    assert strong1.within_50 <= strong1.within_70 <= strong1.within_90
    assert strong1.within_90 + strong1.above90 + strong1.below90 == pytest.approx(1.0)
    assert sum(weak1.n_pairs) == 20
    for pred, n in zip(weak1.predicted, weak1.n_pairs):
        assert 0.0 <= pred <= n
