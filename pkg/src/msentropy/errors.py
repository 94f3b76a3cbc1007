"""Exception taxonomy shared by every analysis module.

Each exception carries a stable ``tag`` string so callers (and the CLI)
can map failures to a machine-readable category without string-matching
messages.  ``stage`` is filled in by pipeline code when an error bubbles
up out of a named processing step.
"""
from __future__ import annotations


class AnalysisError(Exception):
    """Base class for all computation failures raised by this package."""

    tag: str = "analysis-error"

    def __init__(self, message: str, *, stage: str | None = None):
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:  # tag up front so CLI/stderr output is greppable
        base = super().__str__()
        if self.stage:
            return f"[{self.tag}] (stage={self.stage}) {base}"
        return f"[{self.tag}] {base}"


class InvalidArgument(AnalysisError):
    tag = "invalid-argument"


class SignalTooShort(AnalysisError):
    tag = "signal-too-short"


class DegenerateSignal(AnalysisError):
    tag = "degenerate-signal"


class MonotoneSignal(AnalysisError):
    tag = "monotone-signal"


class EmptyBand(AnalysisError):
    tag = "empty-band"


class IncompatibleProfiles(AnalysisError):
    tag = "incompatible-profiles"


class TooFewSamples(AnalysisError):
    tag = "too-few-samples"


class TooFewGroups(AnalysisError):
    tag = "too-few-groups"


class DegenerateVariance(AnalysisError):
    tag = "degenerate-variance"


class MethodFailure(AnalysisError):
    tag = "method-failure"


class InputFormatError(Exception):
    """Malformed or unreadable input file (a CLI-level problem, not math).

    Carries the offending path and, when known, a 1-based line number.
    """

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None):
        super().__init__(message)
        self.path = path
        self.line = line

    def __str__(self) -> str:
        base = super().__str__()
        loc = ""
        if self.path is not None:
            loc = f" ({self.path}" + (f":{self.line}" if self.line else "") + ")"
        return base + loc
