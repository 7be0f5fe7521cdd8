"""Exception types shared across the package."""


class BifractError(Exception):
    """Base class for all library errors."""


class InvalidProblem(BifractError):
    """Raised by validate() when one or more data invariants fail.

    ``violations`` is a list of human-readable strings, each prefixed with a
    stable machine name (NonIncreasingKnots, ScalingOutOfRange, TooFewKnots,
    LengthMismatch, NonFiniteData).
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IndexOutOfRange(BifractError):
    """Map index outside 1..N or anchor outside 0..N."""


class PointOutsideDomain(BifractError):
    """Evaluation point outside the interpolation interval."""


class EndpointMismatch(BifractError):
    """Input function does not interpolate the endpoint data values."""


class ScalingNotContractive(BifractError):
    """max |s_j| >= 1, so the refinement operator is not a contraction."""


class NotContractive(BifractError):
    """The plane maps admit no contraction certificate (lambda_l >= 1)."""


class StripTooSmall(BifractError):
    """Mapped points escape the raster strip; widen the y bounds."""


class NonUniformKnots(BifractError):
    """Operation requires uniformly spaced knots on [0, 1]."""


class DepthTooLarge(BifractError):
    """Requested resolution exceeds the column memory budget."""


class HypothesisViolated(BifractError):
    """Closed-form dimension requested outside its proven regime."""


class TooFewResolutions(BifractError):
    """At least three resolutions are needed for a slope fit."""
