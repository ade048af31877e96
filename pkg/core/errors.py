"""
Exception hierarchy shared by the solver library, the runner and the CLI.
"""

from typing import Optional


class MalariaOCPError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MalariaOCPError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericalBlowupError(MalariaOCPError, FloatingPointError):
    """A trajectory produced a non-finite component."""

    def __init__(self, message: str, step: Optional[int] = None, time: Optional[float] = None):
        super().__init__(message)
        self.step = step
        self.time = time


class NegativeStateError(NumericalBlowupError):
    """A state that must stay nonnegative went below zero."""


class SeriesNotConvergedError(MalariaOCPError, ArithmeticError):
    """A power series did not stabilise within its term budget."""


class SweepNotConvergedError(MalariaOCPError, RuntimeError):
    """The forward-backward sweep hit max_iterations.

    The partial solution, including its convergence history, is kept on
    ``.solution`` so callers can still inspect or persist it.
    """

    def __init__(self, message: str, solution=None):
        super().__init__(message)
        self.solution = solution


class ConfigError(MalariaOCPError, ValueError):
    """Scenario file could not be parsed or failed validation."""


class ChannelError(MalariaOCPError, KeyError):
    """Requested plot channels are empty or missing from the input CSV."""

    def __str__(self):
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""
