"""Entanglement dynamics of Grover's search algorithm.

States of the search are built in closed form and by operator application;
their multipartite entanglement is measured through Schmidt ranks over
bipartitions (separable degree, maximum Schmidt number, log2 of it), and a
finite-model checker compares the measurements with the known structural
results at small qubit counts.
"""

__version__ = "0.1.0"

from .dynamics import DynamicsTrace, StepRecord, classify_trace, run_dynamics
from .entanglement import (
    Bipartition,
    EntanglementReport,
    RankPolicy,
    analyze,
    classify_two_value,
    exact_sign_rank,
    finest_factorization,
    max_schmidt_number,
    reduced_rank,
    schmidt_measure,
    separable_degree,
)
from .errors import (
    GroverEntanglementError,
    InternalConsistencyError,
    InvalidArgumentError,
    OutOfRangeError,
    ResourceLimitError,
)
from .estimators import EntanglementProfiler, GroverStateGenerator
from .statecore import (
    GroverParams,
    MarkedSet,
    PureState,
    TwoValueSpec,
    apply_diffusion,
    apply_oracle,
    grover_params,
    iteration_state,
    make_uniform,
    oracle_state,
    success_probability,
    two_value_state,
)
from .verifier import CheckResult, CheckSpec, check, count_2separable, fraction_report

__all__ = [
    "Bipartition", "CheckResult", "CheckSpec", "DynamicsTrace", "EntanglementProfiler",
    "EntanglementReport", "GroverEntanglementError", "GroverParams", "GroverStateGenerator",
    "InternalConsistencyError", "InvalidArgumentError", "MarkedSet", "OutOfRangeError",
    "PureState", "RankPolicy", "ResourceLimitError", "StepRecord", "TwoValueSpec",
    "analyze", "apply_diffusion", "apply_oracle", "check", "classify_trace",
    "classify_two_value", "count_2separable", "exact_sign_rank", "finest_factorization",
    "fraction_report", "grover_params", "iteration_state", "make_uniform",
    "max_schmidt_number", "oracle_state", "reduced_rank", "run_dynamics",
    "schmidt_measure", "separable_degree", "success_probability", "two_value_state",
]
