"""Exception types shared across the package."""


class LadderctlError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LadderctlError):
    """Invalid input data (bad config field, malformed profile, out-of-range argument)."""


class AssumptionViolationError(LadderctlError):
    """The fixed detunings admit two simultaneous level degeneracies.

    Raised when two distinct level pairs cross at frequencies closer than the
    solver can separate (1e-10), so the single-degeneracy bookkeeping that the
    whole synthesis relies on breaks down.
    """


class SweepWindowError(LadderctlError):
    """The chirp window does not contain every level-pair degeneracy."""


class SynthesisError(LadderctlError):
    """Control synthesis produced a zero set that does not realize the request."""


class TrackingAmbiguityError(LadderctlError):
    """Branch tracking found a near-degeneracy away from the designed crossings."""


class ConvergenceError(LadderctlError):
    """Step-halving check failed: the propagator is under-resolved."""


class ScaleSeparationError(LadderctlError):
    """Lab-frame validation requested without carrier/envelope scale separation."""
