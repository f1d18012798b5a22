"""claimcast: distributional forecasts of warranty-claim expenditure.

The package estimates, from historical sales and claims records, the
distribution of the total cost of warranty claims arriving in a fixed
future window, via normal and heavy-tail (stable) approximations, and
ships a simulator that validates those approximations end to end.
"""

from .core import (
    ClaimsMeasure,
    MeanClaimsMeasure,
    RebateFunction,
    TimeHorizon,
    WeightedMeasure,
    mean_window_claims,
    window_claim_total,
)
from .claims import (
    ClaimRecord,
    EmpiricalMeanMeasure,
    MomentGrids,
    SalesRecord,
    aggregate_daily_claims,
    build_claims_measures,
    empirical_mean_measure,
    fit_mean_measure,
    moment_grids,
)
from .engine import (
    CostApproximation,
    LimitParams,
    approx_cdf,
    approx_quantile,
    claims_count_approx,
    compute_rate_constants,
    cost_approx_normal,
    cost_approx_prorata,
    cost_approx_stable_finite_mean,
    cost_approx_stable_infinite_mean,
    extremeness,
    fluctuation_moments,
)
from .errors import (
    ClaimcastError,
    DomainError,
    FitError,
    LoadError,
    NumericalError,
    ValidationError,
)
from .pipeline import Report, RunConfig, run_pipeline, synthesize_dataset
from .sales import (
    BassParams,
    GaussianLimit,
    ResidualDecomposition,
    assemble_fluctuation,
    bass_share,
    compute_residuals,
    decompose_residuals,
    fit_bass,
    window_increment_moments,
)
from .stable import (
    StableParams,
    params_eq_one_case,
    params_mean_case,
    params_zero_one_case,
    stable_cdf,
    stable_quantile,
)
from .tails import (
    Regime,
    TailDiagnosis,
    diagnose,
    qq_plot_data,
    qq_tail_index,
    select_regime,
    summary_stats,
    tail_scalers,
)

__version__ = "0.1.0"
