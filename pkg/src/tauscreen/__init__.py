"""Graph structure screening for latent-correlation graphical models.

The package estimates which pairs of variables are partially correlated by
thresholding a rank-based correlation matrix: Kendall's tau is computed for
every column pair, mapped through sin(pi/2 * tau) onto the latent correlation
scale, and compared against either a fixed cutoff, a sample-size-scaled
cutoff, or per-pair cutoffs calibrated to an expected false-positive budget
via a jackknife variance estimate. Synthetic scenario generators, assumption
diagnostics, and a replicated evaluation bench round out the workbench; the
``tauscreen`` console script exposes everything on the command line.
"""

from .errors import (
    DegenerateColumnError,
    InvalidInputError,
    MissingInputError,
    SingularMatrixError,
    TauscreenError,
)
from .linalg import cholesky_lower, eig_extremes, invert_pd, rescale_to_unit_diagonal
from .rankcorr import (
    CorrMatrix,
    DataMatrix,
    JackknifeVarMatrix,
    jackknife_matrix,
    jackknife_variance,
    kendall_matrix,
    kendall_tau_fast,
    kendall_tau_naive,
    pearson_matrix,
    sine_transform,
)
from .screening import (
    EdgeSet,
    Partition,
    ThresholdSpec,
    compare_partitions,
    connected_components,
    screen_edges,
    screen_neighborhood,
    threshold_matrix,
)
from .simgen import (
    GroundTruth,
    RngStream,
    SimConfig,
    gen_correlation_C,
    gen_precision_A,
    gen_precision_B,
    gen_precision_D,
    generate_ground_truth,
    sample,
)
from .diagnostics import (
    AssumptionReport,
    ConditioningReport,
    check_assumptions,
    check_proposition1,
    hoeffding_bound,
    neighborhood_size_bound,
    normality_check,
)
from .evalbench import (
    ConfusionMetrics,
    ExperimentResult,
    ExperimentSpec,
    SweepResult,
    auc,
    auc_points,
    confusion,
    default_grid,
    estimator_matrix,
    roc_sweep,
    run_experiment,
)
from . import io

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
