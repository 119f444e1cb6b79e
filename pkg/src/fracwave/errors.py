"""Exception types raised by fracwave."""

from __future__ import annotations


class FracwaveError(Exception):
    """Base class for all package errors."""


class InvalidParameter(FracwaveError, ValueError):
    def __init__(self, name: str, value, constraint: str):
        self.name = name
        self.value = value
        self.constraint = constraint
        super().__init__(f"{name}={value!r} violates {constraint}")


class ValidationError(FracwaveError, ValueError):
    """Carries every violated constraint of a configuration, not just the first."""

    def __init__(self, violations: list[InvalidParameter]):
        self.violations = list(violations)
        msg = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid configuration: {msg}")


class ConfigParseError(FracwaveError, ValueError):
    pass


class ShapeMismatch(FracwaveError, ValueError):
    pass


class InsufficientHistory(FracwaveError, ValueError):
    pass


class InsufficientData(FracwaveError, ValueError):
    pass


class PulseNotFound(FracwaveError, RuntimeError):
    pass


class SolveFailure(FracwaveError, RuntimeError):
    pass


class NonFiniteState(FracwaveError, FloatingPointError):
    def __init__(self, step: int, message: str = "non-finite state"):
        self.step = step
        super().__init__(f"{message} at step {step}")
