"""Indefinite abstract smoothing and constrained interpolation in Krein spaces.

Finite-dimensional, dense, complex arithmetic: Krein spaces given by
Hermitian invertible Gram matrices, the admissible-parameter analysis of
the pencil ``T#T + rho V#V``, the smoothing and interpolation solvers, the
bridge maps between them and a suite that checks the structure results on
concrete instances.
"""

from .errors import (DegenerateParameter, HypothesisError, NoSolution, NumericalFailure,
                     ValidationError)
from .instances import Instance, Regime, gen_instance, parse_instance, render_instance
from .interpolation import (InterpolationProblem, analyze_TNV, bridge_w0_to_z0,
                            bridge_z0_to_w0, solve_interpolation)
from .krein import KreinSpace, classify_subspace, krein_adjoint, orthogonal_companion
from .numkernel import DEFAULT_TOL, Subspace, Tolerances
from .pencil import ProblemData, admissible_interval, cone_positivity_test, quotient_oracle
from .smoothing import SmoothingProblem, smoothing_exists, solve_smoothing, verify_structure

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL", "DegenerateParameter", "HypothesisError", "Instance",
    "InterpolationProblem", "KreinSpace", "NoSolution", "NumericalFailure",
    "ProblemData", "Regime", "SmoothingProblem", "Subspace", "Tolerances",
    "ValidationError", "admissible_interval", "analyze_TNV", "bridge_w0_to_z0",
    "bridge_z0_to_w0", "classify_subspace", "cone_positivity_test", "gen_instance",
    "krein_adjoint", "orthogonal_companion", "parse_instance", "quotient_oracle",
    "render_instance", "smoothing_exists", "solve_interpolation", "solve_smoothing",
    "verify_structure",
]
