"""Derivative-free solver for bound and inequality constrained problems with
several objectives. Constraint violation is kept as an extra objective and
infeasible poll centres get an approximate projection toward feasibility."""

from .archive import Archive, ArchiveEntry, ForcingFunction, ForcingMode, dominates, merge_candidates
from .catalog import available_problems, builtin_problem
from .directions import DirectionKind, StepRule
from .problem import ConfigError, Problem, apply_constraint_family, evaluate
from .restoration import RestorationConfig, restore
from .solver import RunConfig, RunResult, StopReason, run_dms_filter_ir, run_extreme_barrier

__version__ = "0.1.0"

__all__ = [
    "Archive", "ArchiveEntry", "ConfigError", "DirectionKind", "ForcingFunction", "ForcingMode",
    "Problem", "RestorationConfig", "RunConfig", "RunResult", "StepRule", "StopReason",
    "apply_constraint_family", "available_problems", "builtin_problem", "dominates", "evaluate",
    "merge_candidates", "restore", "run_dms_filter_ir", "run_extreme_barrier",
]
