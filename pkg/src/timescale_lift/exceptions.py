"""Exception and warning types raised by timescale_lift."""


class TimescaleError(Exception):
    """Base class for all errors raised by this package."""


class SpectrumOnBranchCut(TimescaleError):
    """The matrix has an eigenvalue on the closed negative real axis.

    No principal logarithm or principal q-th root exists.
    """


class SingularMatrixError(TimescaleError):
    pass


class UnstableError(TimescaleError):
    """A stability precondition (Hurwitz or Schur) is violated."""


class IllConditionedError(TimescaleError):
    pass


class NotPsdError(TimescaleError):
    pass


class NotSymmetricError(TimescaleError, ValueError):
    pass


class NoInvertiblePartition(TimescaleError):
    """No choice of m rows of H makes H0 @ G invertible (rank(HG) < m)."""


class DeltaSingular(TimescaleError):
    """The innovation covariance became singular during the Riccati iteration."""


class NoConvergence(TimescaleError):
    pass


class RankAmbiguous(UserWarning):
    """An eigenvalue sits within 10% of the rank threshold."""
