"""Block-wise bounded-score robust mean estimators.

The family interpolates between Catoni-type M-estimators and
median-of-means, with a permutation-invariant U-statistic variant and a
multivariate estimator built from one-dimensional projections.
"""

from .blocking import BlockMeans, BlockScheme, block_means, enumerate_subsets, partition_disjoint, sample_subsets
from .contamination import ContaminationSpec, adaptive_worst_of, check_block_budget, contaminate
from .distributions import NamedDistribution, least_favorable, lognormal, normal, pareto, student_t, two_point
from .errors import (
    CapacityError,
    ConfigError,
    ConsistencyError,
    DomainError,
    NumericError,
    ParameterError,
    RobustMeanError,
)
from .harness import (
    DeviationReport,
    run_contamination_sweep,
    run_deviation_study,
    run_regime_sweep,
    run_study,
    run_ustat_agreement,
)
from .multivariate import (
    DirectionSet,
    DirectionalEstimates,
    SlabSolution,
    directional_estimates,
    estimate_multivariate,
    solve_slab_intersection,
)
from .score import HUBER, ScoreFunction, huber, smoothed_huber, validate_assumption1
from .theory import G_bound, MomentProfile, contamination_envelope, g_bound, g_exact_numeric
from .univariate import (
    EstimateResult,
    EstimatorConfig,
    default_delta,
    estimate_block_huber,
    estimate_catoni_limit,
    estimate_mom,
    estimate_ustat,
    sample_mean,
    trimmed_mean,
)

__version__ = "0.1.0"
