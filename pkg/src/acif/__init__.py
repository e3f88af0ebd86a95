"""Univariate Lipschitz global optimization under ordered multiextremal
constraints, using an index scheme with continuous index functions."""

__version__ = "0.1.0"

from .expr import Expression, ParseError, parse_expression
from .index import IntervalRecord, WorkingInterval, ZEstimate
from .oracle import GridOracle, GridReport, estimate_lipschitz, grid_report, validate_characteristic
from .pijavskii import PenaltyProblem, penalty_value, pijavskii_minimize, run_pen
from .problem import ConstrainedProblem, TrialRecord, evaluate_trial
from .problems import ProblemSpec, builtin_registry, load_problem_file
from .solver import (AcifConfig, Outcome, OutcomeKind, QDeltaMode, SolverState,
                     local_feasibility_check, run_acif, support_lower_bound)

__all__ = [
    "AcifConfig", "ConstrainedProblem", "Expression", "GridOracle", "GridReport",
    "IntervalRecord", "Outcome", "OutcomeKind", "ParseError", "PenaltyProblem",
    "ProblemSpec", "QDeltaMode", "SolverState", "TrialRecord", "WorkingInterval",
    "ZEstimate", "builtin_registry", "estimate_lipschitz", "evaluate_trial", "grid_report",
    "load_problem_file", "local_feasibility_check", "parse_expression", "penalty_value",
    "pijavskii_minimize", "run_acif", "run_pen", "support_lower_bound",
    "validate_characteristic",
]
