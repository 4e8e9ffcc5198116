"""Exact least-absolute-deviations line fitting.

Minimises sum_i |m*x_i + t - y_i| over slope m and intercept t by bracketing
the minimiser of the marginal objective J(m) = min_t f(m, t) and repeatedly
cutting at the minimum of the two-supporting-line lower bound.  Exact, with
linear-time steps, plus an enumeration oracle and an IRLS baseline, seeded
data generators, and a benchmarking harness; see the ``palb`` CLI.
"""

__version__ = "0.1.0"

from .baselines import (
    DegenerateDataError,
    IrlsResult,
    IrlsStatus,
    OracleResult,
    irls_fit,
    least_squares_line,
    oracle_fit,
)
from .core import (
    AffineNormalization,
    CompensatedAccumulator,
    DataPoint,
    Dataset,
    DatasetError,
    DatasetParseError,
    Line,
    denormalize_line,
    load_dataset_csv,
    normalize,
    objective_value,
    parse_dataset_csv,
)
from .marginal import (
    EvaluationContext,
    MarginalEvaluation,
    SubdifferentialInterval,
    evaluate,
    solve_knapsack,
)
from .solver import (
    BoundaryState,
    FitResult,
    FitStatus,
    IterationEvent,
    PalbIterator,
    Phase,
    SolverConfig,
    fit,
    initial_guess,
    intersect_supports,
    iterate,
)

__all__ = [
    "AffineNormalization",
    "BoundaryState",
    "CompensatedAccumulator",
    "DataPoint",
    "Dataset",
    "DatasetError",
    "DatasetParseError",
    "DegenerateDataError",
    "EvaluationContext",
    "FitResult",
    "FitStatus",
    "IrlsResult",
    "IrlsStatus",
    "IterationEvent",
    "Line",
    "MarginalEvaluation",
    "OracleResult",
    "PalbIterator",
    "Phase",
    "SolverConfig",
    "SubdifferentialInterval",
    "__version__",
    "denormalize_line",
    "evaluate",
    "fit",
    "initial_guess",
    "intersect_supports",
    "irls_fit",
    "iterate",
    "least_squares_line",
    "load_dataset_csv",
    "normalize",
    "objective_value",
    "oracle_fit",
    "parse_dataset_csv",
    "solve_knapsack",
]
