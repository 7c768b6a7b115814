"""Semantic exception hierarchy for diffstop.

Public functions never raise bare ValueError/RuntimeError for domain or
numerical failures; they raise one of the classes below so callers (and the
CLI) can map failures to machine-readable reports.
"""

from __future__ import annotations


class DiffstopError(Exception):
    """Base class for all diffstop errors."""


class ParameterError(DiffstopError, ValueError):
    """Constructor parameters violate a family or operation contract."""


class DomainError(DiffstopError, ValueError):
    """An evaluation point lies outside the state space or a stated range."""


class NotExcessiveError(DiffstopError):
    """A candidate fails a structural excessivity requirement.

    Raised when representing-measure tails come out negative or non-monotone,
    which signals that the supplied function is not excessive for the given
    discount rate.
    """


class ConvergenceError(DiffstopError):
    """An iterative numerical procedure failed to reach its tolerance.

    Carries the best estimate and the achieved error bound so callers can
    decide whether the partial result is still usable.
    """

    def __init__(self, message: str, best: float | None = None,
                 achieved: float | None = None):
        super().__init__(message)
        self.best = best
        self.achieved = achieved
