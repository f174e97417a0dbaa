"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: verification-style failures
(an expected inequality could not be established) exit 1, resource caps
exit 2, configuration problems exit 3.
"""


class SweepoutError(Exception):
    """Base class for package errors."""


class PrecisionExhausted(SweepoutError, ArithmeticError):
    """A certified comparison stayed undecided at the precision cap.

    For bases containing decimal-literal generators this usually means the
    declared independence assertion is wrong, or the declared precision is
    too small to separate the values involved.
    """


class CapExceeded(SweepoutError):
    """An enumeration or piece-count cap was hit before completion."""


class LambdaNotFound(SweepoutError):
    """No scaling parameter satisfied the requested window inequalities."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class GrowthExhausted(SweepoutError):
    """The lattice level cap was reached before the witness-pair counts
    satisfied their target ratio."""

    def __init__(self, message, best_ratio=None):
        super().__init__(message)
        self.best_ratio = best_ratio


class SequenceExhausted(SweepoutError):
    """No remaining measure in the sequence has small enough support to
    continue the gap-separated selection."""

    def __init__(self, message, required_bound=None):
        super().__init__(message)
        self.required_bound = required_bound


class VerificationFailed(SweepoutError):
    """A certified inequality check failed; carries the failing report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(SweepoutError):
    """Invalid configuration file or parameter set."""
