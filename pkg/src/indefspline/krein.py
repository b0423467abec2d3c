"""Finite-dimensional Krein spaces.

A Krein space is C^n with a Hermitian invertible Gram matrix ``J``; the
indefinite inner product is ``<x, y> = y^H J x`` (linear in the first slot).
Subspaces are :class:`~indefspline.numkernel.Subspace` objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import numkernel as nk
from .errors import ValidationError
from .numkernel import DEFAULT_TOL, Subspace, Tolerances

__all__ = [
    "KreinSpace",
    "VectorClass",
    "Definiteness",
    "SubspaceClass",
    "inner",
    "classify_vector",
    "krein_adjoint",
    "orthogonal_companion",
    "isotropic_part",
    "classify_subspace",
    "restricted_gram",
]


@dataclass(frozen=True, eq=False)
class KreinSpace:
    """C^n with the indefinite inner product given by ``gram``.

    The gram matrix is checked for Hermitian symmetry and invertibility and
    stored symmetrized.  ``gram = I`` is an ordinary Hilbert space.
    """

    gram: np.ndarray
    tol: Tolerances = DEFAULT_TOL
    signature: tuple[int, int] = field(init=False)

    def __post_init__(self):
        J = nk.as_matrix(self.gram, "gram")
        n, m = J.shape
        if n != m:
            raise ValidationError(f"gram must be square, got {J.shape}", "gram")
        scale = max(1.0, float(np.linalg.norm(J, 2))) if n else 1.0
        if n and np.linalg.norm(J - J.conj().T, 2) > self.tol.residual_tol * scale:
            raise ValidationError("gram is not Hermitian", "gram")
        J = (J + J.conj().T) / 2
        evals = np.linalg.eigvalsh(J) if n else np.zeros(0)
        if n and np.min(np.abs(evals)) <= self.tol.psd_tol:
            raise ValidationError("gram is singular", "gram")
        J.setflags(write=False)
        object.__setattr__(self, "gram", J)
        object.__setattr__(self, "signature",
                           (int(np.sum(evals > 0)), int(np.sum(evals < 0))))

    @classmethod
    def hilbert(cls, n: int, tol: Tolerances = DEFAULT_TOL) -> "KreinSpace":
        return cls(np.eye(n), tol)

    @classmethod
    def diagonal(cls, entries, tol: Tolerances = DEFAULT_TOL) -> "KreinSpace":
        return cls(np.diag(np.asarray(entries, dtype=complex)), tol)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @property
    def is_hilbert(self) -> bool:
        return self.signature[1] == 0

    @property
    def pseudo_regular_always(self) -> bool:
        # every subspace of a finite-dimensional Krein space is pseudo-regular
        return True

    def inverse_gram(self) -> np.ndarray:
        return np.linalg.inv(self.gram)

    def __repr__(self) -> str:
        return f"KreinSpace(dim={self.dim}, signature={self.signature})"


class VectorClass(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


class Definiteness(Enum):
    POSITIVE = "positive"
    NONNEGATIVE = "nonnegative"
    NEGATIVE = "negative"
    NONPOSITIVE = "nonpositive"
    NEUTRAL = "neutral"
    INDEFINITE = "indefinite"


@dataclass(frozen=True)
class SubspaceClass:
    definiteness: Definiteness
    nondegenerate: bool
    regular: bool
    uniformly_positive: bool
    uniformly_negative: bool
    pseudo_regular: bool = True

    @property
    def nonnegative(self) -> bool:
        return self.definiteness in (Definiteness.POSITIVE, Definiteness.NONNEGATIVE,
                                     Definiteness.NEUTRAL)

    @property
    def nonpositive(self) -> bool:
        return self.definiteness in (Definiteness.NEGATIVE, Definiteness.NONPOSITIVE,
                                     Definiteness.NEUTRAL)


def inner(space: KreinSpace, x, y) -> complex:
    """``<x, y> = y^H J x``."""
    x = nk.as_vector(x, space.dim, "x")
    y = nk.as_vector(y, space.dim, "y")
    return complex(np.vdot(y, space.gram @ x))


def classify_vector(space: KreinSpace, x, tol: Tolerances | None = None) -> VectorClass:
    tol = tol or space.tol
    x = nk.as_vector(x, space.dim, "x")
    nx2 = float(np.vdot(x, x).real)
    if nx2 == 0:
        raise ValidationError("cannot classify the zero vector", "x")
    q = inner(space, x, x).real
    if abs(q) <= tol.psd_tol * nx2:
        return VectorClass.NEUTRAL
    return VectorClass.POSITIVE if q > 0 else VectorClass.NEGATIVE


def krein_adjoint(T, dom: KreinSpace, cod: KreinSpace) -> np.ndarray:
    """``T# = J_dom^{-1} T^H J_cod``, characterized by ``<Tx, y> = <x, T# y>``."""
    T = nk.as_matrix(T, "T")
    if T.shape != (cod.dim, dom.dim):
        raise ValidationError(
            f"operator of shape {T.shape} does not map C^{dom.dim} -> C^{cod.dim}", "T")
    return np.linalg.solve(dom.gram, T.conj().T @ cod.gram)


def orthogonal_companion(space: KreinSpace, M: Subspace,
                         tol: Tolerances | None = None) -> Subspace:
    """``{x : <x, s> = 0 for all s in M}``; equals ``(J M)^perp``."""
    tol = tol or space.tol
    if M.is_zero:
        return Subspace.full(space.dim)
    return nk.euclid_complement(nk.image(space.gram, M, tol), tol)


def isotropic_part(space: KreinSpace, M: Subspace,
                   tol: Tolerances | None = None) -> Subspace:
    tol = tol or space.tol
    return nk.intersect(M, orthogonal_companion(space, M, tol), tol)


def restricted_gram(space: KreinSpace, M: Subspace) -> np.ndarray:
    Q = M.basis
    G = Q.conj().T @ space.gram @ Q
    return (G + G.conj().T) / 2


def classify_subspace(space: KreinSpace, M: Subspace,
                      tol: Tolerances | None = None) -> SubspaceClass:
    """Definiteness and regularity of ``M``.

    Definiteness and uniform definiteness come from the eigenvalues of the
    restricted Gram matrix with ``psd_tol`` as the zero band.  Nondegeneracy
    and regularity are decided by subspace calculus independently of those
    eigenvalues: ``M`` is nondegenerate when its isotropic part vanishes and
    regular when ``M + M^[perp]`` is the whole space.  The zero subspace is
    reported as NEUTRAL and (vacuously) uniformly definite.
    """
    tol = tol or space.tol
    if M.ambient_dim != space.dim:
        raise ValidationError("subspace does not live in this space")
    if M.is_zero:
        return SubspaceClass(Definiteness.NEUTRAL, True, True, True, True)
    ev = np.linalg.eigvalsh(restricted_gram(space, M))
    band = tol.psd_tol
    pos = ev > band
    neg = ev < -band
    if np.all(pos):
        d = Definiteness.POSITIVE
    elif np.all(neg):
        d = Definiteness.NEGATIVE
    elif not np.any(pos) and not np.any(neg):
        d = Definiteness.NEUTRAL
    elif not np.any(neg):
        d = Definiteness.NONNEGATIVE
    elif not np.any(pos):
        d = Definiteness.NONPOSITIVE
    else:
        d = Definiteness.INDEFINITE
    comp = orthogonal_companion(space, M, tol)
    nondegenerate = nk.intersect(M, comp, tol).is_zero
    regular = nk.subspace_sum(M, comp, tol).is_full
    return SubspaceClass(
        definiteness=d,
        nondegenerate=nondegenerate,
        regular=regular,
        uniformly_positive=bool(ev[0] > band),
        uniformly_negative=bool(ev[-1] < -band),
    )
