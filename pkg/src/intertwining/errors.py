"""Exception hierarchy.

Every numerical precondition that fails raises a subclass of
:class:`IntertwiningError`, so callers (and the CLI) can separate
"the hypothesis does not hold for this input" from ordinary bugs.
"""


class IntertwiningError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(IntertwiningError, ValueError):
    """Operands do not have compatible shapes."""


class MatrixFormatError(IntertwiningError, ValueError):
    """A matrix JSON document could not be parsed."""


class Singular(IntertwiningError):
    """Matrix is numerically singular under the rank tolerance."""


class SingularN2(Singular):
    """N2 = x^dagger x is not invertible, so the check is undefined."""


class NotHermitian(IntertwiningError):
    """Matrix is not Hermitian within the commutation tolerance."""


class NegativeEigenvalue(IntertwiningError):
    """Matrix has an eigenvalue below the clamping window."""


class ConvergenceError(IntertwiningError):
    """The LAPACK eigen-solver did not converge."""


class CommutatorTooLarge(IntertwiningError):
    """[x x^dagger, theta1] is not small, so the construction's hypothesis fails."""

    def __init__(self, msg, defect):
        super().__init__(msg)
        self.defect = defect


class ZeroVector(IntertwiningError):
    """x maps a transported eigenvector to zero."""


class DegenerateNu(IntertwiningError):
    """Two eigenvalues of N1 (or N2) coincide where distinct ones are required."""


class BiorthogonalityViolated(IntertwiningError):
    """Vector and dual families are not biorthogonal."""


class HypothesisViolated(IntertwiningError):
    """A stated hypothesis of a check does not hold for the input."""


class BadMetric(IntertwiningError):
    """Metric operator is not Hermitian positive definite."""


class NotPseudoHermitian(IntertwiningError):
    """Operator is not pseudo-hermitian with respect to the given metric."""


class SimilarFormNotHermitian(IntertwiningError):
    """T^{-1} theta T is not Hermitian."""


class QOutOfRange(IntertwiningError, ValueError):
    """Deformation parameter q outside its admissible range."""
