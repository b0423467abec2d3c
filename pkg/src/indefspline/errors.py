"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ``ValidationError`` is an input problem
(exit 1), ``NumericalFailure`` a breakdown of the dense kernels (exit 2).
``HypothesisError`` and ``NoSolution`` are ordinary computed outcomes.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Input data violates a structural requirement.

    ``path`` names the offending field (``"K.gram"``, ``"T"``) when known.
    """

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message if path is None else f"{path}: {message}")
        self.path = path


class DegenerateParameter(ValidationError):
    """Raised for rho = 0, where the product space inner product degenerates."""

    def __init__(self, path: str | None = "rho"):
        super().__init__("rho = 0 gives a degenerate inner product on K x E", path)


class NumericalFailure(ArithmeticError):
    """A decomposition did not converge or an iteration ran out of budget."""


class HypothesisError(ValueError):
    """A hypothesis of the underlying theory fails, so no statement applies."""


class NoSolution(ValueError):
    """The problem is well posed but has no minimizer.

    ``diagnosis`` carries the failed existence clause.
    """

    def __init__(self, diagnosis):
        super().__init__(str(diagnosis))
        self.diagnosis = diagnosis
