"""Exception types shared across the package."""


class ComLabError(Exception):
    """Base class for all package-specific failures."""


class NonPositiveDefinite(ComLabError):
    """Metric evaluation produced a non positive definite matrix.

    Usually signals bad family parameters, e.g. a dipole strong enough to
    drive the conformal factor through zero near the interior cutoff.
    """


class MassZero(ComLabError):
    """Center-of-mass functional requested for a metric with zero mass."""


class TailNotDecaying(ComLabError):
    """Sampled far-field bound of an integrand grows instead of decaying."""


class NoContraction(ComLabError):
    """Fixed-point iteration updates stopped shrinking (coupling too large)."""


class NewtonDiverged(ComLabError):
    """Newton solve failed; carries the last residual norm."""

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class DegenerateSurface(ComLabError):
    """Surface embedding lost rank at an evaluation point."""


class TooFewSamples(ComLabError):
    """Radius series too short or too narrow for a limit verdict."""
