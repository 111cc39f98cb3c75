import numpy as np
import pytest

from btbench.fit import fit_bt
from btbench.results import load_results
from btbench.sampler import SamplerConfig
from btbench.wintable import apply_ties_policy, build_wintable

from pathlib import Path

FIXTURE = Path(__file__).resolve().parent.parent / "src" / "btbench" / "data" / "base_results.csv"

# Table of the bundled base results, keyed by dataset; column order
# dt, lda, lgbm, xgb, svm.  Used by brute-force oracles.
BASE_VALUES = {
    "biomed": (0.837, 0.842, 0.876, 0.890, 0.886),
    "breast": (0.931, 0.951, 0.964, 0.961, 0.957),
    "breast_w": (0.940, 0.950, 0.961, 0.961, 0.961),
    "buggyCrx": (0.790, 0.861, 0.867, 0.867, 0.861),
    "clean1": (1.000, 1.000, 1.000, 1.000, 0.968),
    "cmc": (0.455, 0.513, 0.525, 0.524, 0.544),
    "colic": (0.761, 0.837, 0.815, 0.815, 0.641),
    "corral": (1.000, 0.900, 1.000, 1.000, 1.000),
    "credit_g": (0.668, 0.718, 0.766, 0.769, 0.724),
    "diabetes": (0.714, 0.772, 0.747, 0.742, 0.758),
    "ionosphere": (0.869, 0.866, 0.940, 0.932, 0.934),
    "irish": (1.000, 0.740, 1.000, 1.000, 0.988),
    "molecular_biology_promoters": (0.727, 0.689, 0.896, 0.887, 0.802),
    "monk3": (0.975, 0.792, 0.980, 0.986, 0.964),
    "prnn_crabs": (0.880, 1.000, 0.950, 0.935, 0.960),
    "prnn_synth": (0.800, 0.852, 0.824, 0.828, 0.856),
    "saheart": (0.626, 0.723, 0.660, 0.671, 0.712),
    "threeOf9": (0.996, 0.809, 1.000, 0.998, 0.992),
    "tokyo1": (0.902, 0.920, 0.928, 0.926, 0.931),
    "vote": (0.929, 0.956, 0.945, 0.959, 0.956),
}
BASE_ALGORITHMS = ("dt", "lda", "lgbm", "xgb", "svm")


@pytest.fixture(scope="session")
def fixture_path():
    return str(FIXTURE)


@pytest.fixture(scope="session")
def base_table(fixture_path):
    return load_results(fixture_path)


@pytest.fixture(scope="session")
def base_wintable(base_table):
    return build_wintable(base_table)


@pytest.fixture(scope="session")
def spread_wintable(base_wintable):
    return apply_ties_policy(base_wintable, "spread")


@pytest.fixture(scope="session")
def base_fit(spread_wintable):
    """One fit of the bundled results at default settings, shared by tests."""
    return fit_bt(spread_wintable, config=SamplerConfig(seed=1))


def small_sampler(seed, chains=4, warmup=300, draws=300, **kw):
    return SamplerConfig(chains=chains, warmup=warmup, draws=draws, seed=seed, **kw)
