"""Exception hierarchy.

Model-validity errors derive from :class:`ModelValidityError`; fitting
failures derive from :class:`FitError`. Both are ``ValueError`` subclasses so
callers that only care about bad input can catch that.
"""


class ModelValidityError(ValueError):
    """The lumped SQUID expansion is not valid at the requested point."""


class FluxTooCloseToHalfQuantum(ModelValidityError):
    """|cos f| is at or below the half-flux-quantum cutoff."""


class CurrentExceedsCritical(ModelValidityError):
    """Bias current is at or above the SQUID effective critical current."""


class EpsilonOutOfRange(ModelValidityError):
    """Participation ratio L_J0/L left the open interval (0, 1)."""


class FitError(ValueError):
    pass


class NoPeakInWindow(FitError):
    """No resolvable resonance (both half-power crossings) in the trace."""


class AmbiguousPeaks(NoPeakInWindow):
    """Two peaks within 6 dB of each other share the window."""


class ConvergenceFailure(FitError):
    pass


class InsufficientFluxSpan(FitError):
    """Too few points, or too narrow a flux range, to constrain a tuning fit."""


class TraceFormatError(ValueError):
    """Malformed trace or dataset file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
