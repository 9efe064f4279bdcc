"""Exception types shared across the toolkit."""


class ThinTubeError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ThinTubeError):
    """Invalid study configuration (CLI exit code 2)."""


class SolverFailureError(ThinTubeError):
    """An eigen/linear solve did not reach the requested tolerance (CLI exit code 3)."""


class NoConvergenceError(SolverFailureError):
    """Iterative solver exhausted its budget without certifying residuals."""


class NotHermitianError(ThinTubeError):
    """Matrix fails the Hermitian symmetry check."""


class NearSingularError(ThinTubeError):
    """Shifted system is numerically singular."""


class NonQuadraticError(ThinTubeError):
    """Functional fails the quadratic-form property checks."""


class InfiniteValueError(ThinTubeError):
    """Functional returned an infinite value where a finite one is required."""


class SingularBlockError(ThinTubeError):
    """Restricted operator block is numerically singular."""


class NotBlockError(ThinTubeError):
    """Operator does not commute with the supplied projector."""


class NotPositiveError(ThinTubeError):
    """Matrix violates a required positivity bound."""


class TrivialKernelError(ThinTubeError):
    """Penalty matrix has no kernel to project onto."""


class VanishingCurvatureError(ThinTubeError):
    """Curvature drops below the frame threshold; Frenet frame undefined."""


class DegenerateSpeedError(ThinTubeError):
    """Raw curve parametrization has (numerically) vanishing speed."""


class ThinnessViolatedError(ThinTubeError):
    """Tube map is not a diffeomorphism at the requested half-width."""


class AlreadyGaugedError(ThinTubeError):
    """Gauge shift applied twice."""


class NotGaugedError(ThinTubeError):
    """Assembly requires axis-gauged potentials."""


class ShiftTooSmallError(ThinTubeError):
    """Spectral shift c does not dominate the curvature well."""
