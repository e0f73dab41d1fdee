# src/errors/exceptions.py
"""
Exception hierarchy shared by every module of the capacity toolkit
"""

from typing import Any, Optional


class CapacityError(Exception):
    """Base class for all toolkit errors

    Every error knows which module raised it so the CLI can report
    "[module] ErrorName: message" and pick an exit code.
    """

    module: str = "core"

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def describe(self) -> str:
        return f"[{self.module}] {type(self).__name__}: {self}"


# markov

class NonStochasticError(CapacityError, ValueError):
    module = "markov"


class NotErgodicError(CapacityError, ValueError):
    module = "markov"


class ZeroStationaryMassError(CapacityError, ValueError):
    module = "markov"


class DegenerateChainError(CapacityError, ValueError):
    module = "markov"


# channel

class NonNormalizedError(CapacityError, ValueError):
    module = "channel"


class ShapeMismatchError(CapacityError, ValueError):
    module = "channel"


class MissingStateError(CapacityError, ValueError):
    module = "channel"


class NonPositiveVarianceError(CapacityError, ValueError):
    module = "channel"


class IllConditionedError(CapacityError, ValueError):
    module = "channel"


# inforate

class NonNormalizedJointError(CapacityError, ValueError):
    module = "inforate"


class AuxCardinalityError(CapacityError, ValueError):
    module = "inforate"


# solvers

class NonConvergenceError(CapacityError, RuntimeError):
    """Raised when an optimizer misses its tolerance

    Carries the best iterate and its residual so callers can still
    inspect what was reached.
    """

    module = "solver"

    def __init__(
        self,
        message: str,
        module: Optional[str] = None,
        best: Any = None,
        residual: float = float("nan"),
    ):
        super().__init__(message, module)
        self.best = best
        self.residual = residual


class BudgetExceededError(CapacityError, RuntimeError):
    module = "solver"


# cli

class ModelParseError(CapacityError, ValueError):
    """Malformed JSON in a model file, with 1-based line/column"""

    module = "cli"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ModelSchemaError(CapacityError, ValueError):
    module = "cli"
