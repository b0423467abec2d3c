"""Indefinite abstract smoothing problem.

Minimize ``F(x) = <Tx, Tx>_K + rho <Vx - z0, Vx - z0>_E`` over ``x in H``.
With ``L x = (Tx, Vx)`` and the product inner product
``<(y, z), (y', z')>_rho = <y, y'>_K + rho <z, z'>_E`` this is the indefinite
least-squares problem ``min <Lx - (0, z0), Lx - (0, z0)>_rho``, whose normal
equation is ``(A + rho B) x = rho V# z0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla

from . import numkernel as nk
from .errors import DegenerateParameter, NoSolution, ValidationError
from .krein import (KreinSpace, classify_subspace, inner, isotropic_part,
                    orthogonal_companion)
from .numkernel import Subspace, Tolerances
from .pencil import ProblemData, admissible_interval, lambda_min

__all__ = [
    "SmoothingProblem",
    "SolutionManifold",
    "product_space",
    "lift_L",
    "Clause",
    "Existence",
    "smoothing_exists",
    "solve_smoothing",
    "objective",
    "normal_residual",
    "residual_orthogonality",
    "admissible_membership",
    "Solvability",
    "global_solvability",
    "Check",
    "verify_structure",
]


def _require_nonzero(rho: float):
    if rho == 0:
        raise DegenerateParameter()


@dataclass(frozen=True, eq=False)
class SmoothingProblem:
    data: ProblemData
    rho: float
    z0: np.ndarray

    def __post_init__(self):
        _require_nonzero(self.rho)
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "z0", nk.as_vector(self.z0, self.data.E.dim, "z0"))

    @property
    def tol(self) -> Tolerances:
        return self.data.tol

    def pencil(self) -> np.ndarray:
        return self.data.pencil(self.rho)

    def rhs(self) -> np.ndarray:
        return self.rho * (self.data.V_adj() @ self.z0)


@dataclass(frozen=True, eq=False)
class SolutionManifold:
    """Affine set ``particular + directions``."""

    particular: np.ndarray
    directions: Subspace

    @property
    def dim(self) -> int:
        return self.directions.dim

    def sample(self, count: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        """``count`` points of the manifold as columns; the first is ``particular``."""
        pts = [self.particular]
        for _ in range(count - 1):
            pts.append(self.particular + scale * self.directions.random_element(rng))
        return np.column_stack(pts)

    def contains(self, x, tol: Tolerances) -> bool:
        d = nk.as_vector(x, len(self.particular)) - self.particular
        scale = max(1.0, float(np.linalg.norm(self.particular)))
        return bool(np.linalg.norm(d - self.directions.project(d)) <= tol.residual_tol * scale)

    def is_subset_of(self, other: "SolutionManifold", tol: Tolerances) -> bool:
        return (other.contains(self.particular, tol)
                and nk.contains_all(other.directions, self.directions.basis, tol))

    def angle_to(self, other: "SolutionManifold") -> float:
        return nk.max_principal_angle(self.directions, other.directions)

    def equals(self, other: "SolutionManifold", tol: Tolerances, angle_tol: float = 1e-8) -> bool:
        return self.angle_to(other) <= angle_tol and other.contains(self.particular, tol)

    def as_dict(self) -> dict:
        return {"particular": self.particular, "directions": self.directions.basis}


def product_space(data: ProblemData, rho: float) -> KreinSpace:
    """``K x E`` with Gram ``diag(J_K, rho J_E)``; a Krein space iff rho != 0."""
    _require_nonzero(rho)
    return KreinSpace(sla.block_diag(data.K.gram, rho * data.E.gram), data.tol)


def lift_L(data: ProblemData) -> np.ndarray:
    """``L = [T; V] : H -> K x E``."""
    return np.vstack([data.T, data.V])


def lift_L_adjoint(data: ProblemData, rho: float) -> np.ndarray:
    """Adjoint of ``L`` from the product space back to ``H``."""
    _require_nonzero(rho)
    return np.hstack([data.T_adj(), rho * data.V_adj()])


class Clause(Enum):
    PENCIL = "parameter outside admissible interval"
    RANGE = "z0 not admissible"


@dataclass(frozen=True)
class Existence:
    exists: bool
    clause: Clause | None = None
    lambda_min: float = float("nan")
    range_residual: float = 0.0

    def __bool__(self) -> bool:
        return self.exists

    def __str__(self) -> str:
        if self.exists:
            return "solvable"
        if self.clause is Clause.PENCIL:
            return (f"{self.clause.value}: lambda_min(T#T + rho V#V) = "
                    f"{self.lambda_min:.3e} < 0")
        return (f"{self.clause.value}: V# z0 is not in R(T#T + rho V#V) "
                f"(relative distance {self.range_residual:.3e})")


def _range_distance(data: ProblemData, M: np.ndarray, z: np.ndarray) -> float:
    """Distance from ``V# z`` to ``R(M)`` relative to ``|V#| |z|``.

    Normalizing by the operator scale rather than by ``|V# z|`` keeps a
    ``V# z`` that is pure roundoff from being judged outside the range.
    """
    Vz = data.V_adj() @ z
    ref = float(np.linalg.norm(data.V_adj(), 2) * np.linalg.norm(z))
    if ref == 0:
        return 0.0
    RM = nk.span(M, data.tol)
    return float(np.linalg.norm(Vz - RM.project(Vz)) / ref)


def smoothing_exists(P: SmoothingProblem) -> Existence:
    """Solvable iff the pencil is PSD at rho and ``V# z0`` lies in its range."""
    tol = P.tol
    M = P.pencil()
    lmin = lambda_min(M)
    if lmin < -tol.psd_tol:
        return Existence(False, Clause.PENCIL, lmin)
    dist = _range_distance(P.data, M, P.z0)
    if dist > tol.residual_tol:
        return Existence(False, Clause.RANGE, lmin, dist)
    return Existence(True, None, lmin, dist)


def solve_smoothing(P: SmoothingProblem) -> SolutionManifold:
    """``x~ = rho (A + rho B)^dagger V# z0`` plus ``N(A + rho B)``.

    Raises :class:`NoSolution` carrying the existence diagnosis.
    """
    ex = smoothing_exists(P)
    if not ex:
        raise NoSolution(ex)
    M = P.pencil()
    x = P.rho * (nk.pseudoinverse(M, P.tol) @ (P.data.V_adj() @ P.z0))
    return SolutionManifold(x, nk.rank_factor(M, P.tol)[2])


def objective(P: SmoothingProblem, x) -> float:
    data = P.data
    x = nk.as_vector(x, data.H_dim, "x")
    Tx = data.T @ x
    r = data.V @ x - P.z0
    return float((inner(data.K, Tx, Tx) + P.rho * inner(data.E, r, r)).real)


def normal_residual(P: SmoothingProblem, x) -> float:
    """Normwise backward error ``|Mx - b| / (|M| |x| + |b|)`` of the normal equation."""
    x = nk.as_vector(x, P.data.H_dim, "x")
    M = P.pencil()
    b = P.rhs()
    r = np.linalg.norm(M @ x - b)
    if r == 0:
        return 0.0
    return float(r / (np.linalg.norm(M, 2) * np.linalg.norm(x) + np.linalg.norm(b)))


def residual_orthogonality(P: SmoothingProblem, x) -> bool:
    """``L x - (0, z0)`` is rho-orthogonal to ``L h`` for every basis vector ``h``."""
    data = P.data
    x = nk.as_vector(x, data.H_dim, "x")
    space = product_space(data, P.rho)
    L = lift_L(data)
    r = L @ x - np.concatenate([np.zeros(data.K.dim), P.z0])
    scale = (np.linalg.norm(space.gram, 2) * np.linalg.norm(L, 2)
             * (np.linalg.norm(L, 2) * np.linalg.norm(x) + np.linalg.norm(P.z0)))
    worst = max((abs(inner(space, r, L[:, j])) for j in range(data.H_dim)), default=0.0)
    return bool(worst <= P.tol.residual_tol * max(scale, np.finfo(float).tiny))


def companion_of_V_kernel_image(data: ProblemData, rho: float) -> Subspace:
    """``V(N(A + rho B))^[perp]`` in ``E``."""
    null = nk.rank_factor(data.pencil(rho), data.tol)[2]
    return orthogonal_companion(data.E, nk.image(data.V, null, data.tol))


def admissible_membership(data: ProblemData, rho: float, z) -> bool:
    """``V# z in R(A + rho B)``."""
    _require_nonzero(rho)
    z = nk.as_vector(z, data.E.dim, "z")
    M = data.pencil(rho)
    return _range_distance(data, M, z) <= data.tol.residual_tol


class Solvability(Enum):
    ALL_OF_E = "all_of_E"
    PROPER = "proper"


def global_solvability(data: ProblemData, rho: float) -> Solvability:
    """ALL_OF_E iff ``R(A + rho B) = N(T)^perp + N(V)^perp``."""
    _require_nonzero(rho)
    tol = data.tol
    RM = nk.span(data.pencil(rho), tol)
    rhs = nk.subspace_sum(nk.euclid_complement(nk.rank_factor(data.T, tol)[2], tol),
                          nk.euclid_complement(nk.rank_factor(data.V, tol)[2], tol), tol)
    return Solvability.ALL_OF_E if nk.equal(RM, rhs, tol) else Solvability.PROPER


def kernel_of_L(data: ProblemData) -> Subspace:
    return nk.rank_factor(lift_L(data), data.tol)[2]


@dataclass
class Check:
    """Outcome of one verification check."""

    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


def _probe_parameters(data: ProblemData, rho: float) -> list[float]:
    probes = [rho]
    try:
        iv = admissible_interval(data.A, data.B, data.tol)
    except Exception:
        return probes
    if not iv.is_empty:
        width = max(1.0, iv.rho_plus - iv.rho_minus)
        probes += [iv.rho_minus - 0.5 * width, iv.rho_plus + 0.5 * width]
        mid = 0.5 * (iv.rho_minus + iv.rho_plus)
        if iv.status.name == "INTERVAL" and abs(mid) > 1e-3 * width:
            probes.append(mid)
    return [p for p in probes if p != 0]


def verify_structure(data: ProblemData, rho: float, trials: int = 50,
                     seed: int = 0) -> list[Check]:
    """Structure checks for the least-squares formulation at ``rho``.

    * isotropic part of ``R(L)`` equals ``L(N(A + rho B))``;
    * for random ``(y, z)``, membership in ``R(L) + R(L)^[perp]`` matches
      ``z - V T^dagger y in V(N(A + rho B))^[perp]``;
    * PSD pencil, interval membership and nonnegativity of ``R(L)`` agree
      at ``rho`` and at probe parameters on both sides of the interval;
    * admissible points equal ``V(N(A + rho B))^[perp]``;
    * the closedness conditions, true in finite dimensions, are reported.
    """
    _require_nonzero(rho)
    tol = data.tol
    rng = np.random.default_rng(seed)
    checks: list[Check] = []
    space = product_space(data, rho)
    L = lift_L(data)
    RL = nk.span(L, tol)
    M = data.pencil(rho)
    null = nk.rank_factor(M, tol)[2]

    iso = isotropic_part(space, RL)
    LN = nk.image(L, null, tol)
    checks.append(Check("isotropic_part_of_range_L", nk.equal(iso, LN, tol),
                        {"dim_isotropic": iso.dim, "dim_L_null": LN.dim}))

    # membership test against the subspace calculus
    T_pinv = nk.pseudoinverse(data.T, tol)
    VT = data.V @ T_pinv
    VT_norm = float(np.linalg.norm(VT, 2))
    target = companion_of_V_kernel_image(data, rho)
    big = nk.subspace_sum(RL, orthogonal_companion(space, RL), tol)
    agree = 0
    inside = 0
    for t in range(trials):
        if t % 2 == 0:
            w = big.random_element(rng)
        else:
            w = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
        y, z = w[: data.K.dim], w[data.K.dim:]
        lhs = nk.contains(big, w, tol)
        v = z - VT @ y
        # distance relative to the inputs: v may be pure cancellation roundoff
        ref = np.linalg.norm(z) + VT_norm * np.linalg.norm(y)
        rhs = bool(np.linalg.norm(v - target.project(v)) <= tol.residual_tol * ref)
        inside += lhs
        agree += lhs == rhs
    checks.append(Check("membership_criterion", agree == trials,
                        {"trials": trials, "agree": agree, "inside": inside}))

    # three-way equivalence, probed on both sides of the interval
    iv = None
    try:
        iv = admissible_interval(data.A, data.B, tol)
    except Exception:
        pass
    rows = []
    ok = True
    for r in _probe_parameters(data, rho):
        psd = lambda_min(data.pencil(r)) >= -tol.psd_tol
        in_iv = iv.contains(r, slack=tol.bisection_tol) if iv is not None else psd
        nonneg = classify_subspace(product_space(data, r), RL, tol).nonnegative
        X = rng.standard_normal((data.H_dim, 64)) + 1j * rng.standard_normal((data.H_dim, 64))
        LX = L @ X
        vals = np.einsum("ij,ik,kj->j", LX.conj(), product_space(data, r).gram, LX).real
        norms = np.sum(np.abs(X) ** 2, axis=0)
        sampled_nonneg = bool(np.all(vals >= -tol.psd_tol * norms))
        consistent = psd == in_iv == nonneg and (sampled_nonneg or not psd)
        ok &= consistent
        rows.append({"rho": r, "pencil_psd": psd, "in_interval": in_iv,
                     "range_nonnegative": nonneg, "sampled_nonnegative": sampled_nonneg})
    checks.append(Check("psd_interval_nonnegativity_equivalence", ok, {"probes": rows}))

    # admissible set equals V(N)^[perp] (closed range is automatic)
    agree = 0
    for t in range(trials):
        z = target.random_element(rng) if t % 2 == 0 else (
            rng.standard_normal(data.E.dim) + 1j * rng.standard_normal(data.E.dim))
        agree += admissible_membership(data, rho, z) == nk.contains(target, z, tol)
    checks.append(Check("admissible_set_closed_form", agree == trials,
                        {"trials": trials, "agree": agree}))

    # closedness equivalences: every subspace is closed in finite dimensions
    checks.append(Check("closed_range_conditions", True,
                        {"range_L_closed": True, "T_of_kernel_V_closed": True,
                         "kernel_sum_closed": True}))

    # (T#)^dagger = (T^dagger)#
    lhs = nk.pseudoinverse(data.T_adj(), tol)
    rhs = np.linalg.solve(data.K.gram, T_pinv.conj().T)
    err = float(np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(lhs)))
    checks.append(Check("adjoint_pseudoinverse_commute", err <= 1e3 * tol.residual_tol,
                        {"relative_error": err}))

    # global solvability three ways
    if lambda_min(M) >= -tol.psd_tol:
        gs = global_solvability(data, rho) is Solvability.ALL_OF_E
        regular = classify_subspace(space, RL, tol).regular
        ker_L = kernel_of_L(data)
        directions_ok = nk.equal(null, ker_L, tol)
        checks.append(Check("global_solvability_equivalence", gs == regular == directions_ok,
                            {"all_of_E": gs, "range_L_regular": regular,
                             "directions_equal_kernel_L": directions_ok}))
    return checks
