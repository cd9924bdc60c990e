"""Detection of sparse signals aligned in time across many sequences.

Penalized higher-criticism and Berk-Jones scans over a multiscale window
family, average-likelihood-ratio tests weighted along the detection
boundary, closed-form boundary calculators, post-scan signal
identification, and a reproducible Monte Carlo harness.
"""

from .core import (
    ONE_SIDED,
    TWO_SIDED,
    P_FLOOR,
    DataMatrix,
    Interval,
    PooledScores,
    PrefixSums,
    build_prefix_sums,
    p_values,
    pooled_scores,
)
from .scanset import (
    ScanLevel,
    ScanSet,
    best_inner_approximation,
    build_scan_set,
    grid_spacing,
    level_count,
)
from .boundary import (
    BoundaryQuery,
    b_aligned,
    b_aligned_branch,
    b_hetero,
    b_nonaligned,
    b_single_sequence,
    rho_star,
    zeta_of_penalty_base,
    zeta_of_scale,
)
from .gof import (
    ALR,
    PBJ,
    PHC,
    IntervalStatistic,
    ScanReport,
    bj_interval,
    bj_penalty,
    hc_interval,
    hc_penalty,
    kl_berk_jones,
    default_scan_threshold,
    penalized_scan,
    penalty_base,
    quadratic_q,
    scan_records,
)
from .alr import (
    AlrConfig,
    alr_single_sequence,
    alr_sparse_mixture,
    alr_statistic,
    default_alr_threshold,
    likelihood_profile_over_beta,
    likelihood_profile_over_j,
    likelihood_ratio_term,
    log_interval_likelihood,
)
from .identify import IdentificationConfig, IdentifiedSegments, identify
from .sim import (
    CalibrationTable,
    MonteCarloSummary,
    SegmentSpec,
    SignalModel,
    calibrate,
    estimate_errors,
    generate,
    model_from_dict,
    model_to_dict,
)

__version__ = "0.1.0"
