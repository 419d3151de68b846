"""Exception hierarchy shared by all modules.

Validation problems derive from ``ValueError`` and map to CLI exit code 2;
numerical failures derive from ``ArithmeticError`` and map to exit code 3.
"""


class DopoError(Exception):
    """Base class for every error raised by lgdopo."""


class ValidationError(DopoError, ValueError):
    pass


class GeometryError(ValidationError):
    """Cavity geometry outside the open stability interval 0 < g1*g2 < 1."""


class SeriesTooShortError(ValidationError):
    pass


class NumericalError(DopoError, ArithmeticError):
    pass


class NotSteadyStateError(NumericalError):
    pass


class SpectrumDivergenceError(NumericalError):
    """A selector overlaps a marginal (zero-eigenvalue) mode at the requested frequency."""

    def __init__(self, message, eigenvalue=None, overlap=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.overlap = overlap


class TrajectoryDivergence(NumericalError):
    pass


class ExcessiveDivergenceError(NumericalError):
    def __init__(self, message, n_diverged=0, n_traj=0):
        super().__init__(message)
        self.n_diverged = n_diverged
        self.n_traj = n_traj
