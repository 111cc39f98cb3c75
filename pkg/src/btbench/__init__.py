"""Compare algorithms measured on multiple data sets.

Fits a Bayesian paired-comparison (Bradley-Terry) model to pairwise win
counts and reports per-pair superiority probabilities, practical
equivalence masses, an aggregated ranking, and model diagnostics, next to
classic frequentist baselines for cross-checking.
"""

__version__ = "0.1.0"

from .calibration import (
    StrongCalibration,
    WeakCalibration,
    empirical_win_ratio,
    run_calibration,
)
from .checks import PpcCoverage, WaicResult, ppc_coverage, ppc_replicates, waic
from .errors import (
    BtbenchError,
    ConfigError,
    ConflictError,
    DegenerateMleError,
    InputError,
    InsufficientDataError,
    ParseError,
    SamplingFailureError,
    SizeError,
)
from .fit import FitResult, fit_bt, fit_davidson
from .freq import (
    FreqReport,
    demsar_procedure,
    nemenyi_critical_difference,
    p_adjust,
    pairwise_wilcoxon_procedure,
    t_test_power_n,
    wilcoxon_signed_rank,
)
from .mle import MleResult, mle_mm
from .model import (
    BradleyTerryModel,
    DavidsonModel,
    PriorConfig,
    bt_log_posterior,
    davidson_log_posterior,
    davidson_probs,
    pair_prob,
)
from .results import (
    ResultsTable,
    aggregate_folds,
    load_results,
    parse_results,
    serialize_results,
    subsample,
    wide_to_long,
)
from .sampler import (
    ConvergenceReport,
    PosteriorDraws,
    SamplerConfig,
    convergence_report,
    ess_bulk,
    sample,
    split_rhat,
)
from .summary import (
    ComparisonRow,
    ComparisonSummary,
    RopeConfig,
    aggregated_ranking,
    control_view,
    hdi,
    pair_probability_draws,
    summarize,
)
from .wintable import (
    LocalRopeConfig,
    WinTable,
    apply_ties_policy,
    build_wintable,
    cohen_d,
    compare_cell,
)

__all__ = [name for name in dir() if not name.startswith("_")]
