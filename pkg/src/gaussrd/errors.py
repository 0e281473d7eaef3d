"""Exception hierarchy for the region calculator.

All semantic failures raise a subclass of :class:`GaussRdError` so callers can
distinguish "your input is outside the theory's domain" from programming
errors.  Plain ``ValueError`` is reserved for malformed values (negative
variance, NaN rates) caught at type construction time.
"""


class GaussRdError(Exception):
    """Base class for domain errors raised by this package."""


class InfeasibleDistortion(GaussRdError):
    """A distortion target lies below an information-theoretic floor."""


class OutOfRegime(GaussRdError):
    """The requested operation needs a different degeneracy regime."""


class InvalidRegimeInput(GaussRdError):
    """Regime thresholds are inconsistent; indicates out-of-domain inputs."""


class NegativeDelta(GaussRdError):
    """The excess term came out materially negative, which cannot happen for
    individually feasible inputs; signals an upstream inconsistency."""


class SingularObservation(GaussRdError):
    """The observed sub-covariance is not invertible."""


class InvalidChannel(GaussRdError):
    """Test-channel parameters are outside their admissible ranges."""


class InvalidPmf(GaussRdError):
    """A joint pmf fails validation (shape, normalization, negativity)."""


class AlphabetMismatch(GaussRdError):
    """Two discrete objects disagree on an alphabet they must share."""


class DimensionMismatch(GaussRdError):
    """Array dimensions are inconsistent with the declared alphabets."""
