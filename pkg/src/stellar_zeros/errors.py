"""Exception types shared across the package."""


class StellarZerosError(Exception):
    """Base class for all package-specific errors."""


class ZeroVector(StellarZerosError):
    """Normalization requested for a vector with (numerically) zero norm."""


class InvalidParameter(StellarZerosError):
    """A parameter violates a documented precondition."""


class CutoffTooSmall(StellarZerosError):
    """Fock-space truncation discards more norm than allowed."""


class PrecisionLoss(StellarZerosError):
    """An evaluation cannot meet its accuracy contract at this cutoff."""


class ZeroOnContour(StellarZerosError):
    """A zero lies on (or unresolvably near) an integration contour."""


class NoConvergence(StellarZerosError):
    """Iteration budget exhausted; carries the best iterate found."""

    def __init__(self, message, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


class DegenerateLeadingCoefficient(StellarZerosError):
    """Leading polynomial coefficient collapsed numerically."""


class ZeroCollision(StellarZerosError):
    """Two tracked zeros came closer than the collision threshold."""

    def __init__(self, message, t_estimate=None):
        super().__init__(message)
        self.t_estimate = t_estimate


class StepFailure(StellarZerosError):
    """Adaptive step size underflowed."""


class UnsupportedHamiltonian(StellarZerosError):
    """Closed-form zero propagation needs B != 0 and omega^2 != 0."""


class DegenerateInitialZeros(StellarZerosError):
    """Initial zeros are not pairwise distinct."""


class TrackingAmbiguity(StellarZerosError):
    """Nearest-eigenvalue matching hit an exact tie."""


class TruncationLeakage(StellarZerosError):
    """Evolved state leaked into the top of the truncated basis."""


class CountMismatch(StellarZerosError):
    """Zero count inside a box disagrees with the expected rank."""
