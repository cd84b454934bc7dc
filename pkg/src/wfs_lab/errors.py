"""Exception hierarchy shared across the package."""


class WfsLabError(Exception):
    """Base class for all package-specific failures."""


class InvalidInputError(WfsLabError):
    """Input violates a precondition (non-finite entries, bad shapes, ...)."""


class RangeOverflowError(WfsLabError):
    """A computation would overflow; carries the offending norm."""

    def __init__(self, message, norm=None):
        super().__init__(message)
        self.norm = norm


class IllConditionedStructureError(WfsLabError):
    """A numerical rank decision was too close to call.

    ``gap`` is the ratio between the ambiguous singular value and the rank
    threshold, so callers can decide to widen their cluster tolerance.
    """

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class StiffnessError(WfsLabError):
    """Adaptive integrator was forced below the minimum step size."""


class AliasingError(WfsLabError):
    """Sampling is too coarse for the requested frequency/order content."""


class OnSingularityError(WfsLabError):
    """A parameter loop passed too close to a spectral degeneracy."""


class TrackingError(WfsLabError):
    """Eigenvector continuation became ambiguous; increase the step count."""


class SingularBaseError(WfsLabError):
    """Winding base point lies (numerically) on the spectral curve."""


class InconsistentModelError(WfsLabError):
    """Slice-wise inversions disagree on the model order."""


class ConditioningError(WfsLabError):
    """Normal equations of a fit were numerically degenerate."""


class ContaminationWarning(UserWarning):
    """Integration window overlaps a diagonal peak."""


class ChannelAmbiguityError(WfsLabError):
    """Decay channels too close to auto-assign; pass them explicitly."""


class ProtocolError(WfsLabError):
    """A protocol pipeline failed as a whole (e.g. too many bad pixels)."""


class ConfigError(WfsLabError):
    """Run configuration is missing fields or fails validation."""
