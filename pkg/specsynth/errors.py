"""
Exception hierarchy
"""
from typing import Optional


class SpecSynthError(Exception):
    """Base class for every error raised by specsynth"""


class LTLSyntaxError(SpecSynthError):
    """Formula text that does not parse"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ModelValidationError(SpecSynthError, ValueError):
    """Invalid PL-MDP document or environment spec"""


class AutomatonValidationError(SpecSynthError, ValueError):
    """Invalid LDBA document"""


class ActionNotEnabledError(SpecSynthError, ValueError):
    """Action not available at the given state"""

    def __init__(self, action, state):
        self.action = action
        self.state = state
        super().__init__(f"Action {action!r} is not enabled at state {state!r}")


class ProductSizeError(SpecSynthError):
    """Explicit product enumeration exceeded the configured cap"""


class PolicyGapError(SpecSynthError):
    """Strict policy evaluation reached a state the policy does not cover"""


class TimeInvarianceError(SpecSynthError, AssertionError):
    """An automaton state was revisited under a different accepting frontier"""


class UndeclaredAtomError(SpecSynthError, ValueError):
    """Formula mentions an atomic proposition outside the declared alphabet"""


class NotConvergedError(SpecSynthError):
    """Learning stopped at max_episodes while convergence was required"""


class InvalidParameterError(SpecSynthError, ValueError):
    """A numeric parameter lies outside its allowed range"""
