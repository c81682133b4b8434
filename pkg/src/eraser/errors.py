"""Exception types shared across the package."""


class EraserError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(EraserError, ValueError):
    """A numeric argument is outside its admissible range."""


class MalformedOperator(EraserError, ValueError):
    """Matrix is not Hermitian / not unit trace / wrong shape."""


class Illegitimate(EraserError, ValueError):
    """Hermitian, unit-trace matrix with a negative eigenvalue.

    Raised by :func:`eraser.qstate.validate`; the usual remedy is a
    maximum-likelihood reconstruction.
    """

    def __init__(self, min_eigenvalue, eigenvalues=None):
        self.min_eigenvalue = float(min_eigenvalue)
        self.eigenvalues = eigenvalues
        super().__init__(f"matrix is not positive semidefinite (min eigenvalue {self.min_eigenvalue:.6g})")


class AccuracyError(EraserError, ArithmeticError):
    """Quadrature did not converge on the supplied grid."""


class ConfigurationError(EraserError, ValueError):
    """Scenario cannot be resolved to model parameters."""


class DegenerateTomography(EraserError, ValueError):
    """Projector set does not span the two-qubit operator space."""


class UndefinedCorrelation(EraserError, ArithmeticError):
    """All four coincidence probabilities of a correlation vanish."""
