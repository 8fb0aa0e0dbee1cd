"""
Error Types - Exception hierarchy shared by services and the CLI
Each error carries the process exit code the CLI reports for it
"""

from typing import Any, Dict, List, Optional


class FlmError(Exception):
    """Base class for all solver errors"""
    exit_code = 1


class UnknownIdentifierError(FlmError, KeyError):
    """Facility, client or edge identifier not present in the instance"""
    exit_code = 2

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown identifier"


class PreconditionError(FlmError):
    """Operation called outside its documented precondition"""
    exit_code = 2


class InfeasibilityError(FlmError):
    """No feasible point exists (LP, fractional matching or perfect matching)"""
    exit_code = 2

    def __init__(self, message: str, constraint: Optional[str] = None):
        super().__init__(message)
        self.constraint = constraint


class UnboundedError(FlmError):
    """LP objective unbounded below"""
    exit_code = 2


class FeasibilityError(FlmError):
    """Integral or fractional solution violates the instance's constraints"""
    exit_code = 1

    def __init__(self, violations: List[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class CapabilityError(FlmError):
    """Input exceeds a size cap of an exhaustive routine"""
    exit_code = 3


class InvariantError(FlmError, AssertionError):
    """Internal invariant breached; carries a dump of the offending state"""
    exit_code = 1

    def __init__(self, message: str, state: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.state = state or {}
