import math

import numpy as np
import pytest

from btbench.errors import ConfigError, SamplingFailureError
from btbench.sampler import (
    PosteriorDraws,
    SamplerConfig,
    _adaptation_windows,
    _leapfrog,
    convergence_report,
    ess_bulk,
    sample,
    split_rhat,
)


def standard_normal(x):
    return float(-0.5 * np.dot(x, x)), -x


def test_standard_normal_moments():
    cfg = SamplerConfig(chains=4, warmup=500, draws=1000, seed=10)
    draws = sample(standard_normal, cfg, dim=1)
    pooled = draws.pooled()[:, 0]
    assert abs(pooled.mean()) < 0.05
    assert abs(pooled.std(ddof=1) - 1.0) < 0.05
    assert draws.divergences.sum() == 0


def test_correlated_gaussian_moments():
    rho = 0.9
    cov = np.array([[1.0, rho], [rho, 1.0]])
    prec = np.linalg.inv(cov)

    def density(x):
        g = -prec @ x
        return float(-0.5 * x @ prec @ x), g

    cfg = SamplerConfig(chains=4, warmup=500, draws=1000, seed=11)
    draws = sample(density, cfg, dim=2)
    pooled = draws.pooled()
    corr = np.corrcoef(pooled.T)[0, 1]
    assert abs(corr - rho) < 0.05
    assert abs(pooled.mean(axis=0)).max() < 0.08


def test_determinism_serial_vs_parallel():
    cfg_serial = SamplerConfig(chains=4, warmup=300, draws=300, seed=5, parallel=False)
    cfg_parallel = SamplerConfig(chains=4, warmup=300, draws=300, seed=5, parallel=True)
    d1 = sample(standard_normal, cfg_serial, dim=3)
    d2 = sample(standard_normal, cfg_parallel, dim=3)
    d3 = sample(standard_normal, cfg_serial, dim=3)
    np.testing.assert_array_equal(d1.draws, d2.draws)
    np.testing.assert_array_equal(d1.draws, d3.draws)
    np.testing.assert_array_equal(d1.divergences, d2.divergences)


def test_chains_differ_from_each_other():
    cfg = SamplerConfig(chains=2, warmup=200, draws=200, seed=5)
    d = sample(standard_normal, cfg, dim=1)
    assert not np.array_equal(d.draws[0], d.draws[1])


def test_bt_fixture_fit_diagnostics(base_fit):
    report = convergence_report(base_fit.draws)
    assert report.passed
    assert report.divergences == 0
    assert max(report.rhat.values()) < 1.01
    assert min(report.ess.values()) > 400


def test_leapfrog_reversibility():
    rng = np.random.default_rng(0)
    x0 = rng.normal(size=4)
    p0 = rng.normal(size=4)
    inv_mass = np.ones(4)
    _, grad0 = standard_normal(x0)
    x1, p1, _, grad1, ok = _leapfrog(standard_normal, x0, p0, grad0, 0.2, 25, inv_mass)
    assert ok
    x2, p2, _, _, ok = _leapfrog(standard_normal, x1, -p1, grad1, 0.2, 25, inv_mass)
    assert ok
    np.testing.assert_allclose(x2, x0, atol=1e-8)
    np.testing.assert_allclose(-p2, p0, atol=1e-8)


def test_divergent_initialization_raises():
    def broken(x):
        return float("nan"), x

    with pytest.raises(SamplingFailureError, match="initial"):
        sample(broken, SamplerConfig(chains=1, warmup=10, draws=10, seed=1), dim=1)


def test_adaptation_windows_partition():
    for warmup in (10, 75, 150, 500, 1000, 2537):
        head, slows, tail = _adaptation_windows(warmup)
        assert head + sum(slows) + tail == warmup
        assert all(w > 0 for w in slows)
    assert _adaptation_windows(0) == (0, [], 0)


def test_config_validation():
    with pytest.raises(ConfigError):
        SamplerConfig(chains=0)
    with pytest.raises(ConfigError):
        SamplerConfig(draws=0)
    with pytest.raises(ConfigError):
        SamplerConfig(target_accept=1.5)
    with pytest.raises(ConfigError):
        SamplerConfig(warmup=-1)


def test_draw_shapes_and_csv():
    cfg = SamplerConfig(chains=2, warmup=100, draws=50, seed=3)
    d = sample(standard_normal, cfg, dim=2)
    assert d.draws.shape == (2, 50, 2)
    assert d.param_names == ["p0", "p1"]
    csv = d.to_csv()
    lines = csv.strip().splitlines()
    assert lines[0] == "chain,iteration,p0,p1"
    assert len(lines) == 1 + 2 * 50
    # full-precision round trip of the first value
    first = float(lines[1].split(",")[2])
    assert first == d.draws[0, 0, 0]


# --- diagnostics -------------------------------------------------------------


def test_split_rhat_iid_chains():
    rng = np.random.default_rng(8)
    chains = rng.normal(size=(4, 1000))
    r = split_rhat(chains)
    assert 0.999 <= r < 1.01


def test_split_rhat_separated_chains():
    rng = np.random.default_rng(8)
    chains = rng.normal(size=(2, 1000))
    chains[1] += 5.0
    assert split_rhat(chains) > 1.1


def test_split_rhat_catches_trend_within_single_run():
    # both halves of one chain differ: split version must flag it
    drift = np.linspace(0, 3, 1000)
    rng = np.random.default_rng(8)
    chains = rng.normal(size=(2, 1000)) * 0.1 + drift
    assert split_rhat(chains) > 1.1


def test_ess_iid_close_to_sample_size():
    rng = np.random.default_rng(9)
    chains = rng.normal(size=(4, 1000))
    ess = ess_bulk(chains)
    assert 0.7 * 4000 <= ess <= 1.35 * 4000


def test_ess_autocorrelated_is_small():
    rng = np.random.default_rng(9)
    n = 2000
    x = np.zeros((2, n))
    for c in range(2):
        noise = rng.normal(size=n)
        for t in range(1, n):
            x[c, t] = 0.95 * x[c, t - 1] + noise[t]
    ess = ess_bulk(x)
    assert ess < 0.15 * 2 * n


def test_ess_constant_chain_degenerate():
    chains = np.full((4, 500), 3.14)
    assert ess_bulk(chains) == 0.0
    report_draws = PosteriorDraws(
        param_names=["c"],
        draws=chains[:, :, None],
        divergences=np.zeros(4, dtype=int),
        step_sizes=np.ones(4),
        accept_rates=np.ones(4),
        seed=0,
    )
    report = convergence_report(report_draws)
    assert not report.passed


def test_single_chain_rhat_unavailable():
    rng = np.random.default_rng(2)
    draws = PosteriorDraws(
        param_names=["x"],
        draws=rng.normal(size=(1, 2000, 1)),
        divergences=np.zeros(1, dtype=int),
        step_sizes=np.ones(1),
        accept_rates=np.ones(1),
        seed=0,
    )
    report = convergence_report(draws)
    assert report.rhat == {}
    assert any("R-hat unavailable" in issue for issue in report.issues)


def test_divergences_fail_verdict():
    rng = np.random.default_rng(2)
    draws = PosteriorDraws(
        param_names=["x"],
        draws=rng.normal(size=(4, 1000, 1)),
        divergences=np.array([1, 0, 0, 0]),
        step_sizes=np.ones(4),
        accept_rates=np.ones(4),
        seed=0,
    )
    report = convergence_report(draws)
    assert not report.passed
    assert report.divergences == 1
