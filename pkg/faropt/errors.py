"""
Exception types raised by the FAR solver.
Infeasible placements are reported in results, never raised.
"""
from typing import Dict, Optional


class FarError(Exception):
    """Base class for solver errors."""


class ScenarioError(FarError, ValueError):
    """Malformed scenario file or violated scenario invariant."""


class SolverError(FarError, RuntimeError):
    """
    Numerical failure inside a solver.

    Args:
        message: Human readable description
        diagnostics: Solver state at the point of failure
    """

    def __init__(self, message: str, diagnostics: Optional[Dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
