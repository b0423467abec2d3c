"""Linearly constrained interpolation and its link to smoothing.

Minimize ``<Tx, Tx>_K`` subject to ``Vx = z0``.  With ``W = (A N(V))^perp``
the solutions are the ``x`` with ``Vx = z0`` and ``x in W``; they form an
affine manifold parallel to ``N0 = N(V) & W``.  The bridge maps carry a
smoothing datum ``z0`` to an interpolation datum ``w0`` and back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import numkernel as nk
from .errors import HypothesisError, NoSolution
from .krein import classify_subspace, isotropic_part, restricted_gram
from .numkernel import Subspace
from .pencil import ProblemData, lambda_min
from .smoothing import (SmoothingProblem, SolutionManifold, _require_nonzero,
                        kernel_of_L, normal_residual, solve_smoothing)

__all__ = [
    "InterpolationProblem",
    "ConstraintSubspaces",
    "constraint_subspaces",
    "image_of_kernel",
    "interp_exists",
    "solve_interpolation",
    "TNVReport",
    "analyze_TNV",
    "BridgeCertificate",
    "bridge_z0_to_w0",
    "bridge_w0_to_z0",
    "equality_case",
]


@dataclass(frozen=True, eq=False)
class InterpolationProblem:
    data: ProblemData
    z0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z0", nk.as_vector(self.z0, self.data.E.dim, "z0"))


class ConstraintSubspaces(NamedTuple):
    NV: Subspace
    W: Subspace
    N0: Subspace


def constraint_subspaces(data: ProblemData) -> ConstraintSubspaces:
    tol = data.tol
    NV = nk.rank_factor(data.V, tol)[2]
    W = nk.euclid_complement(nk.image(data.A, NV, tol), tol)
    return ConstraintSubspaces(NV, W, nk.intersect(NV, W, tol))


def image_of_kernel(data: ProblemData, NV: Subspace | None = None) -> Subspace:
    """``T(N(V))`` as a subspace of ``K``."""
    if NV is None:
        NV = nk.rank_factor(data.V, data.tol)[2]
    return nk.image(data.T, NV, data.tol)


def _require_nonnegative_tnv(data: ProblemData):
    TNV = image_of_kernel(data)
    if not classify_subspace(data.K, TNV, data.tol).nonnegative:
        lmin = float(np.linalg.eigvalsh(restricted_gram(data.K, TNV))[0])
        raise HypothesisError(
            f"T(N(V)) is not nonnegative in K (restricted Gram eigenvalue {lmin:.3e}); "
            "existence theory does not apply")


def interp_exists(P: InterpolationProblem) -> bool:
    """``z0 in V(W)``; requires ``T(N(V))`` nonnegative."""
    data = P.data
    _require_nonnegative_tnv(data)
    _, W, _ = constraint_subspaces(data)
    return nk.contains(nk.image(data.V, W, data.tol), P.z0, data.tol)


def solve_interpolation(P: InterpolationProblem) -> SolutionManifold:
    """Particular ``x0 = W c`` with ``c`` the min-norm solution of ``(V W) c = z0``."""
    data = P.data
    if not interp_exists(P):
        raise NoSolution("z0 is not in V((T#T N(V))^perp)")
    _, W, N0 = constraint_subspaces(data)
    c = nk.pseudoinverse(data.V @ W.basis, data.tol) @ P.z0
    return SolutionManifold(W.basis @ c, N0)


def interpolation_conditions(data: ProblemData, x, z0) -> bool:
    """``Vx = z0`` and ``x in (T#T N(V))^perp``."""
    _, W, _ = constraint_subspaces(data)
    scale = max(1.0, float(np.linalg.norm(data.V, 2) * np.linalg.norm(x)))
    ok_v = np.linalg.norm(data.V @ x - z0) <= data.tol.residual_tol * scale
    return bool(ok_v and nk.contains(W, x, data.tol))


@dataclass(frozen=True, eq=False)
class TNVReport:
    """Structure of ``T(N(V))`` with each characterization computed two ways."""

    TNV: Subspace
    N0: Subspace
    isotropic: Subspace
    nondegenerate: bool
    regular: bool
    uniformly_positive: bool
    decomposition_verified: bool
    isotropic_is_T_N0: bool
    nondegenerate_rhs: bool
    regular_rhs: bool

    @property
    def consistent(self) -> bool:
        return (self.isotropic_is_T_N0 and self.decomposition_verified
                and self.nondegenerate == self.nondegenerate_rhs
                and self.regular == self.regular_rhs)

    def as_dict(self) -> dict:
        return {
            "dim_TNV": self.TNV.dim,
            "dim_N0": self.N0.dim,
            "dim_isotropic": self.isotropic.dim,
            "nondegenerate": self.nondegenerate,
            "nondegenerate_rhs": self.nondegenerate_rhs,
            "regular": self.regular,
            "regular_rhs": self.regular_rhs,
            "uniformly_positive": self.uniformly_positive,
            "isotropic_is_T_N0": self.isotropic_is_T_N0,
            "decomposition_verified": self.decomposition_verified,
        }


def analyze_TNV(data: ProblemData) -> TNVReport:
    """Isotropic part, nondegeneracy and regularity of ``T(N(V))``.

    Left-hand sides come from the Krein classification of ``T(N(V))``;
    right-hand sides from subspace identities in ``H``: ``N0 = N(V) & N(T)``
    for nondegeneracy, ``N(V) + W = H`` for regularity.  The orthogonal
    decomposition ``T(N(V)) = T(N0) [+] T(N(V) - N0)`` is also checked.
    """
    tol = data.tol
    K = data.K
    NV, W, N0 = constraint_subspaces(data)
    TNV = image_of_kernel(data, NV)
    cls = classify_subspace(K, TNV, tol)
    iso = isotropic_part(K, TNV, tol)
    TN0 = nk.image(data.T, N0, tol)
    NT = nk.rank_factor(data.T, tol)[2]

    # N(V) minus N0, then the two summands in K
    rest = nk.intersect(NV, nk.euclid_complement(N0, tol), tol)
    TR = nk.image(data.T, rest, tol)
    direct = nk.intersect(TN0, TR, tol).is_zero and TN0.dim + TR.dim == TNV.dim
    cross = TN0.basis.conj().T @ K.gram @ TR.basis
    gscale = max(1.0, float(np.linalg.norm(K.gram, 2)))
    orthogonal = bool(cross.size == 0 or np.linalg.norm(cross, 2) <= tol.residual_tol * gscale)
    spans = nk.equal(nk.subspace_sum(TN0, TR, tol), TNV, tol)
    rest_regular = classify_subspace(K, TR, tol).regular

    return TNVReport(
        TNV=TNV,
        N0=N0,
        isotropic=iso,
        nondegenerate=cls.nondegenerate,
        regular=cls.regular,
        uniformly_positive=cls.uniformly_positive,
        decomposition_verified=bool(direct and orthogonal and spans and rest_regular),
        isotropic_is_T_N0=nk.equal(iso, TN0, tol),
        nondegenerate_rhs=nk.equal(N0, nk.intersect(NV, NT, tol), tol),
        regular_rhs=nk.subspace_sum(NV, W, tol).is_full,
    )


@dataclass(frozen=True, eq=False)
class BridgeCertificate:
    """Result of a bridge map.

    ``vector`` is ``w0`` (smoothing to interpolation) or ``z0`` (the reverse).
    ``max_residual`` is the worst normal-equation backward error over the
    sampled points of ``sp``; ``strict`` tells whether ``sp`` is a proper
    subset of ``sm``.
    """

    vector: np.ndarray
    sp: SolutionManifold
    sm: SolutionManifold
    max_residual: float
    points_checked: int
    inclusion: bool
    strict: bool

    @property
    def ok(self) -> bool:
        return self.inclusion

    def as_dict(self) -> dict:
        return {
            "vector": self.vector,
            "sp": self.sp.as_dict(),
            "sm": self.sm.as_dict(),
            "max_residual": self.max_residual,
            "points_checked": self.points_checked,
            "inclusion": self.inclusion,
            "strict": self.strict,
        }


def _require_nonnegative_range(data: ProblemData, rho: float):
    lmin = lambda_min(data.pencil(rho))
    if lmin < -data.tol.psd_tol:
        raise HypothesisError(
            f"R(L) is not nonnegative at rho = {rho!r} (lambda_min = {lmin:.3e})")


def _certify(P_s: SmoothingProblem, sp: SolutionManifold, sm: SolutionManifold,
             vector: np.ndarray, samples: int, seed: int,
             residual_bound: float) -> BridgeCertificate:
    rng = np.random.default_rng(seed)
    pts = sp.sample(samples, rng)
    worst = max(normal_residual(P_s, pts[:, j]) for j in range(pts.shape[1]))
    tol = P_s.tol
    inclusion = bool(worst <= residual_bound and sp.is_subset_of(sm, tol))
    return BridgeCertificate(vector, sp, sm, float(worst), pts.shape[1], inclusion,
                             strict=sp.dim < sm.dim)


def bridge_z0_to_w0(P_s: SmoothingProblem, samples: int = 20, seed: int = 0,
                    residual_bound: float = 1e-8) -> BridgeCertificate:
    """``w0 = V x~`` with ``x~`` the pseudoinverse smoothing spline.

    Then ``sp(w0)`` is nonempty and contained in ``sm(rho, z0)``.
    """
    data = P_s.data
    _require_nonnegative_range(data, P_s.rho)
    sm = solve_smoothing(P_s)
    w0 = data.V @ sm.particular
    sp = solve_interpolation(InterpolationProblem(data, w0))
    return _certify(P_s, sp, sm, w0, samples, seed, residual_bound)


def bridge_w0_to_z0(P_i: InterpolationProblem, rho: float, samples: int = 20,
                    seed: int = 0, residual_bound: float = 1e-8) -> BridgeCertificate:
    """``z0 = ((1/rho) (V#)^dagger T#T + V) x0`` for the particular ``x0`` of ``sp(w0)``.

    A different representative of ``sp(w0)`` gives a different ``z0`` with
    the same inclusion ``sp(w0) <= sm(rho, z0)``.
    """
    _require_nonzero(rho)
    data = P_i.data
    _require_nonnegative_range(data, rho)
    sp = solve_interpolation(P_i)
    x0 = sp.particular
    t_a = (nk.pseudoinverse(data.V_adj(), data.tol) @ (data.A @ x0)) / rho
    t_v = data.V @ x0
    z0 = t_a + t_v
    # complete cancellation leaves pure roundoff, which is z0 = 0
    if np.linalg.norm(z0) <= data.tol.residual_tol * (np.linalg.norm(t_a) + np.linalg.norm(t_v)):
        z0 = np.zeros_like(z0)
    P_s = SmoothingProblem(data, rho, z0)
    sm = solve_smoothing(P_s)
    return _certify(P_s, sp, sm, z0, samples, seed, residual_bound)


def equality_case(data: ProblemData, rho: float) -> bool:
    """Pencil PSD at rho and ``N(A + rho B) <= N(T) & N(V)``.

    Equivalently ``R(L)`` is positive and nondegenerate; then both bridges
    give ``sp = sm``.
    """
    _require_nonzero(rho)
    tol = data.tol
    M = data.pencil(rho)
    if lambda_min(M) < -tol.psd_tol:
        return False
    null = nk.rank_factor(M, tol)[2]
    return nk.contains_all(kernel_of_L(data), null.basis, tol)
