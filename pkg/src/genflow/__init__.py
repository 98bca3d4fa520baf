"""Exact generalized maximum flow by repeated arc contraction."""

from .model import Arc, Instance, InstanceError, InvariantViolation, parse_instance, format_instance
from .stats import RunOptions, Stats
from .solver import SolveOutcome, solve, format_solution
from .oracle import oracle_solve, verify_certificates

__all__ = [
    "Arc", "Instance", "InstanceError", "InvariantViolation", "parse_instance", "format_instance",
    "RunOptions", "Stats", "SolveOutcome", "solve", "format_solution",
    "oracle_solve", "verify_certificates",
]
