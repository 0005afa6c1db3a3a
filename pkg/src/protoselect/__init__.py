"""Streaming prototype selection with non-negative importance weights."""

from .datatypes import DataPoint, Solution, load_points_csv
from .errors import ConvergenceError, InputError, NumericalError
from .evaluation import (
    EvalReport,
    cluster_coverage,
    label_distribution,
    one_nn_accuracy,
    target_match_rate,
)
from .kernel import (
    KernelConfig,
    MeanEstimate,
    kernel_eval,
    kernel_matrix,
    mean_vector,
    median_heuristic,
    streaming_mean,
    target_mean,
    update_streaming_mean,
)
from .nnqp import QPSolution, RestrictedQP, gradient, solve, solve_warm
from .oracle import (
    RscRsmParams,
    SubmodularityRatio,
    batch_greedy,
    exhaustive_optimum,
    impossibility_gamma,
    rsc_rsm_constants,
    submodularity_ratio,
)
from .protobasic import ProtoBasic
from .protostream import CandidateSet, ProtoStream

__version__ = "0.1.0"

__all__ = [
    "CandidateSet",
    "ConvergenceError",
    "DataPoint",
    "EvalReport",
    "InputError",
    "KernelConfig",
    "MeanEstimate",
    "NumericalError",
    "ProtoBasic",
    "ProtoStream",
    "QPSolution",
    "RestrictedQP",
    "RscRsmParams",
    "Solution",
    "SubmodularityRatio",
    "batch_greedy",
    "cluster_coverage",
    "exhaustive_optimum",
    "gradient",
    "impossibility_gamma",
    "kernel_eval",
    "kernel_matrix",
    "label_distribution",
    "load_points_csv",
    "mean_vector",
    "median_heuristic",
    "one_nn_accuracy",
    "rsc_rsm_constants",
    "solve",
    "solve_warm",
    "streaming_mean",
    "submodularity_ratio",
    "target_mean",
    "target_match_rate",
    "update_streaming_mean",
]
