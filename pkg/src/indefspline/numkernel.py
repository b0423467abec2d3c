"""Dense complex linear algebra with a single rank policy.

Every rank, range and membership decision in the package goes through
:func:`rank_factor`, which counts singular values above
``rank_rtol * sigma_max`` (or ``rank_rtol * |op|`` for images of a basis
under ``op``, see :func:`image`).  Subspaces are stored as orthonormal column bases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure, ValidationError

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "Subspace",
    "as_matrix",
    "as_vector",
    "rank_factor",
    "pseudoinverse",
    "span",
    "image",
    "subspace_sum",
    "intersect",
    "euclid_complement",
    "contains",
    "equal",
    "max_principal_angle",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerance profile.

    Attributes
    ----------
    rank_rtol : float
        Relative singular value cutoff for rank decisions.
    psd_tol : float
        Absolute slack for eigenvalue sign decisions.
    residual_tol : float
        Residual bound for linear systems and memberships, per unit norm.
    bisection_tol : float
        Absolute resolution of the admissible interval endpoints.
    """

    rank_rtol: float = 1e-10
    psd_tol: float = 1e-9
    residual_tol: float = 1e-9
    bisection_tol: float = 1e-10

    def __post_init__(self):
        for name in ("rank_rtol", "psd_tol", "residual_tol", "bisection_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValidationError(f"must be a positive finite number, got {value!r}",
                                      f"tolerances.{name}")

    def as_dict(self) -> dict[str, float]:
        return {
            "rank_rtol": self.rank_rtol,
            "psd_tol": self.psd_tol,
            "residual_tol": self.residual_tol,
            "bisection_tol": self.bisection_tol,
        }


DEFAULT_TOL = Tolerances()


def as_matrix(M, path: str | None = None) -> np.ndarray:
    """Promote ``M`` to a finite 2-D complex array."""
    arr = np.array(M, dtype=complex)
    if arr.ndim != 2:
        raise ValidationError(f"expected a matrix, got an array of shape {arr.shape}", path)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries", path)
    return arr


def as_vector(x, dim: int | None = None, path: str | None = None) -> np.ndarray:
    arr = np.array(x, dtype=complex)
    if arr.ndim != 1:
        raise ValidationError(f"expected a vector, got an array of shape {arr.shape}", path)
    if dim is not None and arr.shape[0] != dim:
        raise ValidationError(f"expected length {dim}, got {arr.shape[0]}", path)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector has non-finite entries", path)
    return arr


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of C^n given by an orthonormal basis (columns of ``basis``)."""

    basis: np.ndarray
    ambient_dim: int = field(init=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2:
            raise ValidationError("subspace basis must be a matrix")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "ambient_dim", b.shape[0])

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_zero(self) -> bool:
        return self.dim == 0

    @property
    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n, dtype=complex))

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.conj().T @ x)

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return self.basis @ c

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _svd(M: np.ndarray):
    try:
        return np.linalg.svd(M, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK breakdown
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc


def _cutoff_rank(s: np.ndarray, tol: Tolerances, scale: float | None) -> int:
    ref = max(float(s[0]) if s.size else 0.0, scale or 0.0)
    if ref == 0:
        return 0
    return int(np.sum(s > tol.rank_rtol * ref))


def rank_factor(M, tol: Tolerances = DEFAULT_TOL,
                scale: float | None = None) -> tuple[int, Subspace, Subspace]:
    """Numerical rank, column space and null space of ``M``.

    The rank is the number of singular values above ``rank_rtol`` times the
    reference scale: the largest singular value, or ``scale`` when that is
    larger.  Pass ``scale`` when ``M`` is an operator applied to a basis so
    that roundoff in the product is not mistaken for range.
    ``rank + null_space.dim == M.shape[1]`` always holds.
    """
    M = as_matrix(M)
    m, n = M.shape
    if m == 0 or n == 0:
        return 0, Subspace.zero(m), Subspace.full(n)
    U, s, Vh = _svd(M)
    r = _cutoff_rank(s, tol, scale)
    return r, Subspace(U[:, :r]), Subspace(Vh[r:].conj().T)


def pseudoinverse(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse with singular values below the rank cutoff dropped."""
    M = as_matrix(M)
    m, n = M.shape
    if m == 0 or n == 0:
        return np.zeros((n, m), dtype=complex)
    U, s, Vh = _svd(M)
    r = _cutoff_rank(s, tol, None)
    return (Vh[:r].conj().T / s[:r]) @ U[:, :r].conj().T


def span(M, tol: Tolerances = DEFAULT_TOL, scale: float | None = None) -> Subspace:
    """Column space of ``M`` as an orthonormalized subspace."""
    return rank_factor(M, tol, scale)[1]


def image(op, S: Subspace, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """``op(S)``, with rank decided relative to the norm of ``op``."""
    op = as_matrix(op)
    if S.is_zero or op.size == 0:
        return Subspace.zero(op.shape[0])
    return span(op @ S.basis, tol, scale=float(np.linalg.norm(op, 2)))


def _check_ambient(S1: Subspace, S2: Subspace):
    if S1.ambient_dim != S2.ambient_dim:
        raise ValidationError(
            f"ambient dimension mismatch: {S1.ambient_dim} vs {S2.ambient_dim}")


def subspace_sum(S1: Subspace, S2: Subspace, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    _check_ambient(S1, S2)
    return span(np.hstack([S1.basis, S2.basis]), tol)


def intersect(S1: Subspace, S2: Subspace, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Intersection via the null space of ``[Q1, -Q2]``."""
    _check_ambient(S1, S2)
    n = S1.ambient_dim
    if S1.is_zero or S2.is_zero:
        return Subspace.zero(n)
    _, _, null = rank_factor(np.hstack([S1.basis, -S2.basis]), tol)
    if null.is_zero:
        return Subspace.zero(n)
    return span(S1.basis @ null.basis[: S1.dim], tol)


def euclid_complement(S: Subspace, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    if S.is_zero:
        return Subspace.full(S.ambient_dim)
    return rank_factor(S.basis.conj().T, tol)[2]


def contains(S: Subspace, x, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True when the distance from ``x`` to ``S`` is at most ``residual_tol * |x|``."""
    x = as_vector(x, S.ambient_dim)
    nx = np.linalg.norm(x)
    if nx == 0:
        return True
    return bool(np.linalg.norm(x - S.project(x)) <= tol.residual_tol * nx)


def contains_all(S: Subspace, X: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
    return all(contains(S, X[:, j], tol) for j in range(X.shape[1]))


def equal(S1: Subspace, S2: Subspace, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Mutual containment."""
    _check_ambient(S1, S2)
    if S1.dim != S2.dim:
        return False
    return contains_all(S1, S2.basis, tol) and contains_all(S2, S1.basis, tol)


def max_principal_angle(S1: Subspace, S2: Subspace) -> float:
    """Largest principal angle, or pi/2 when the dimensions differ.

    Uses the sine formulation, which keeps small angles accurate.
    """
    _check_ambient(S1, S2)
    if S1.dim != S2.dim:
        return float(np.pi / 2)
    if S1.is_zero:
        return 0.0
    resid = S2.basis - S1.basis @ (S1.basis.conj().T @ S2.basis)
    s = np.linalg.norm(resid, 2)
    return float(np.arcsin(min(1.0, s)))
