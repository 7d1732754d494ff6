"""Exception hierarchy shared by all sweepsolve modules."""


class SweepsolveError(Exception):
    """Base class for all library errors."""


class ConfigError(SweepsolveError):
    """Problem file is malformed, inconsistent, or violates an admissibility rule."""


class UnsupportedKind(SweepsolveError):
    """The requested operation is not available for this set kind."""


class CertificateFailure(SweepsolveError):
    """No VALID projection certificate could be produced within the budget."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class BudgetExhausted(SweepsolveError):
    """Projected-gradient iteration cap reached before the stopping rule was met.

    Carries the best multiplier and duality gap seen so far.
    """

    def __init__(self, message, lam=None, gap=None, certificate=None):
        super().__init__(message)
        self.lam = lam
        self.gap = gap
        self.certificate = certificate


class SingularMetric(SweepsolveError):
    """Metric matrix P is numerically singular or not positive definite."""


class ZeroMatrix(SweepsolveError):
    """Matrix is identically zero where a nonzero matrix is required."""


class NonFiniteDrift(SweepsolveError):
    """Drift selection returned a non-finite value."""


class DriftBoundViolation(SweepsolveError):
    """A drift evaluation exceeded the declared bound h(x) + sqrt(gamma)."""


class OutOfRange(SweepsolveError):
    """Time argument outside the trajectory horizon [0, T]."""


class ProjectionFailure(SweepsolveError):
    """A catching-up step failed to produce a certified projection.

    Carries the failing step index, the best certificate, and the partial
    trajectory computed before the failure.
    """

    def __init__(self, message, step=None, certificate=None, trajectory=None):
        super().__init__(message)
        self.step = step
        self.certificate = certificate
        self.trajectory = trajectory


class InadmissibleExponents(SweepsolveError):
    """Schedule exponents violate eps/mu^2 -> 0 or eta/mu -> 0."""


class NoMetricExists(SweepsolveError):
    """No symmetric positive-definite P with P B = C^T within tolerance."""

    def __init__(self, message, residual=None, min_eigenvalue=None):
        super().__init__(message)
        self.residual = residual
        self.min_eigenvalue = min_eigenvalue


class NotPositiveDefinite(SweepsolveError):
    """Matrix expected to be symmetric positive definite is not."""


class InfeasibleInitial(SweepsolveError):
    """Initial state violates the constraint set at t = 0 beyond tolerance."""
