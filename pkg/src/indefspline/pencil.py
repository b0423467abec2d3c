"""Admissible parameters of the Hermitian pencil ``A + rho B``.

``A = T# T`` and ``B = V# V`` act on the Hilbert space ``H``.  The set of
``rho`` with ``A + rho B >= 0`` is a closed interval, computed here by a
concave maximization of ``lambda_min(A + rho B)`` followed by bisection.
:func:`quotient_oracle` and :func:`cone_positivity_test` are sampling-based
cross-checks that never look at the pencil eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize

from . import numkernel as nk
from .errors import HypothesisError, NumericalFailure, ValidationError
from .krein import KreinSpace, krein_adjoint
from .numkernel import DEFAULT_TOL, Tolerances

__all__ = [
    "ProblemData",
    "IntervalStatus",
    "AdmissibleInterval",
    "build_grams",
    "inertia",
    "is_indefinite",
    "lambda_min",
    "admissible_interval",
    "quotient_oracle",
    "neutral_cone_sample",
    "ConeTest",
    "cone_positivity_test",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_MAX_DOUBLINGS = 200


@dataclass(frozen=True, eq=False)
class ProblemData:
    """Operators ``T : H -> K`` and ``V : H -> E`` with ``H`` a Hilbert space.

    Both operators must be surjective.  ``A`` and ``B`` are cached at
    construction.
    """

    T: np.ndarray
    V: np.ndarray
    K: KreinSpace
    E: KreinSpace
    tol: Tolerances = DEFAULT_TOL
    A: np.ndarray = field(init=False, repr=False)
    B: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        T = nk.as_matrix(self.T, "T")
        V = nk.as_matrix(self.V, "V")
        if T.shape[1] != V.shape[1]:
            raise ValidationError(
                f"T and V must share the domain H, got {T.shape[1]} and {V.shape[1]} columns")
        if T.shape[0] != self.K.dim:
            raise ValidationError(f"T has {T.shape[0]} rows but dim K = {self.K.dim}", "T")
        if V.shape[0] != self.E.dim:
            raise ValidationError(f"V has {V.shape[0]} rows but dim E = {self.E.dim}", "V")
        for name, M in (("T", T), ("V", V)):
            r = nk.rank_factor(M, self.tol)[0]
            if r != M.shape[0]:
                raise ValidationError(
                    f"{name} is not surjective (rank {r} < {M.shape[0]})", name)
            M.setflags(write=False)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "V", V)
        A = T.conj().T @ self.K.gram @ T
        B = V.conj().T @ self.E.gram @ V
        A = (A + A.conj().T) / 2
        B = (B + B.conj().T) / 2
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def H_dim(self) -> int:
        return self.T.shape[1]

    @property
    def H(self) -> KreinSpace:
        return KreinSpace.hilbert(self.H_dim, self.tol)

    def T_adj(self) -> np.ndarray:
        return krein_adjoint(self.T, self.H, self.K)

    def V_adj(self) -> np.ndarray:
        return krein_adjoint(self.V, self.H, self.E)

    def pencil(self, rho: float) -> np.ndarray:
        return self.A + rho * self.B


def build_grams(data: ProblemData) -> tuple[np.ndarray, np.ndarray]:
    """``(T# T, V# V)`` as Hermitian matrices on ``H``."""
    return data.A, data.B


def _check_hermitian(M: np.ndarray, tol: Tolerances, name: str) -> np.ndarray:
    M = nk.as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square", name)
    scale = max(1.0, float(np.linalg.norm(M, 2))) if M.size else 1.0
    if M.size and np.linalg.norm(M - M.conj().T, 2) > tol.residual_tol * scale:
        raise ValidationError(f"{name} is not Hermitian", name)
    return (M + M.conj().T) / 2


def inertia(B, tol: Tolerances = DEFAULT_TOL) -> tuple[int, int, int]:
    """Counts of positive, negative and zero eigenvalues (zero band ``psd_tol``)."""
    B = _check_hermitian(B, tol, "B")
    ev = np.linalg.eigvalsh(B) if B.size else np.zeros(0)
    npos = int(np.sum(ev > tol.psd_tol))
    nneg = int(np.sum(ev < -tol.psd_tol))
    return npos, nneg, len(ev) - npos - nneg


def is_indefinite(B, tol: Tolerances = DEFAULT_TOL) -> bool:
    npos, nneg, _ = inertia(B, tol)
    return npos > 0 and nneg > 0


def lambda_min(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(M)[0])


class IntervalStatus(Enum):
    EMPTY = "empty"
    POINT = "point"
    INTERVAL = "interval"


@dataclass(frozen=True)
class AdmissibleInterval:
    """The closed set of ``rho`` with ``A + rho B`` positive semidefinite.

    ``peak_rho`` maximizes ``lambda_min(A + rho B)``; ``peak_value`` is that
    maximum, which measures how robustly the interval is (non)empty.  For an
    empty interval ``rho_minus`` and ``rho_plus`` are NaN.
    """

    status: IntervalStatus
    rho_minus: float
    rho_plus: float
    peak_rho: float
    peak_value: float

    @property
    def is_empty(self) -> bool:
        return self.status is IntervalStatus.EMPTY

    def contains(self, rho: float, slack: float = 0.0) -> bool:
        if self.is_empty:
            return False
        return self.rho_minus - slack <= rho <= self.rho_plus + slack

    @property
    def mu_plus(self) -> float:
        return -self.rho_minus

    @property
    def mu_minus(self) -> float:
        return -self.rho_plus

    def is_trivial(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        """Interval reduced to ``{0}``: only the degenerate parameter remains."""
        return (self.status is IntervalStatus.POINT
                and abs(self.peak_rho) <= 10 * tol.bisection_tol)

    def nonzero_parameter(self) -> float | None:
        """A representative admissible ``rho != 0``, or None."""
        if self.status is not IntervalStatus.INTERVAL:
            if self.status is IntervalStatus.POINT and self.peak_rho != 0:
                return self.peak_rho
            return None
        mid = 0.5 * (self.rho_minus + self.rho_plus)
        if mid != 0:
            return mid
        return 0.5 * self.rho_plus

    def as_dict(self) -> dict:
        return {
            "status": self.status.name,
            "rho_minus": None if self.is_empty else self.rho_minus,
            "rho_plus": None if self.is_empty else self.rho_plus,
            "peak_rho": self.peak_rho,
            "peak_value": self.peak_value,
        }


def _step_tol(tol: Tolerances, *points: float) -> float:
    scale = max(1.0, *(abs(p) for p in points))
    return max(tol.bisection_tol, 8 * np.finfo(float).eps * scale)


def admissible_interval(A, B, tol: Tolerances = DEFAULT_TOL) -> AdmissibleInterval:
    """Interval of ``rho`` where ``A + rho B`` is positive semidefinite.

    ``rho -> lambda_min(A + rho B)`` is concave and tends to ``-inf`` in both
    directions when ``B`` is indefinite, so a golden-section search on an
    expanding bracket finds its maximum.  The common kernel of ``A`` and
    ``B`` is deflated first so that it cannot pin the maximum at zero.  If the maximum is below
    ``-psd_tol`` the interval is EMPTY; otherwise each endpoint is bisected
    to ``bisection_tol`` and reported on the feasible side.
    """
    A = _check_hermitian(A, tol, "A")
    B = _check_hermitian(B, tol, "B")
    if A.shape != B.shape:
        raise ValidationError("A and B must have the same shape")
    if not is_indefinite(B, tol):
        raise HypothesisError("B = V#V is semidefinite; the instance belongs to the "
                              "linearly constrained interpolation regime")

    # A + rho B vanishes on N(A) & N(B) for every rho; search on its complement
    _, _, common = nk.rank_factor(np.vstack([A, B]), tol)
    if not common.is_zero:
        Q = nk.euclid_complement(common, tol).basis
        A = Q.conj().T @ A @ Q
        B = Q.conj().T @ B @ Q

    def f(rho: float) -> float:
        return lambda_min(A + rho * B)

    # bracket [a, b] around the maximizer: f(a) < f(0) > f(b) after expansion
    f0 = f(0.0)
    a, b = -1.0, 1.0
    fa, fb = f(a), f(b)
    for _ in range(_MAX_DOUBLINGS):
        if fa < f0:
            break
        a *= 2.0
        fa = f(a)
    else:
        raise NumericalFailure("could not bracket the pencil maximum on the left")
    for _ in range(_MAX_DOUBLINGS):
        if fb < f0:
            break
        b *= 2.0
        fb = f(b)
    else:
        raise NumericalFailure("could not bracket the pencil maximum on the right")

    lo, hi = a, b
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(400):
        if hi - lo <= _step_tol(tol, lo, hi):
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    candidates = [(fc, c), (fd, d), (f0, 0.0)]
    peak_value, peak_rho = max(candidates)

    if peak_value < -tol.psd_tol:
        return AdmissibleInterval(IntervalStatus.EMPTY, math.nan, math.nan,
                                  peak_rho, peak_value)
    if peak_value <= 0.0:
        return AdmissibleInterval(IntervalStatus.POINT, peak_rho, peak_rho,
                                  peak_rho, peak_value)

    def endpoint(direction: float) -> float:
        # feasible at `inside`, infeasible at `outside`
        inside = peak_rho
        step = max(1.0, abs(peak_rho))
        outside = peak_rho + direction * step
        for _ in range(_MAX_DOUBLINGS):
            if f(outside) < 0.0:
                break
            step *= 2.0
            outside = peak_rho + direction * step
        else:
            raise NumericalFailure("admissible interval endpoint not bracketed")
        for _ in range(400):
            if abs(outside - inside) <= _step_tol(tol, inside, outside):
                break
            mid = 0.5 * (inside + outside)
            if f(mid) >= 0.0:
                inside = mid
            else:
                outside = mid
        return inside

    rho_minus = endpoint(-1.0)
    rho_plus = endpoint(+1.0)
    status = (IntervalStatus.POINT if rho_plus - rho_minus <= _step_tol(tol, rho_minus, rho_plus)
              else IntervalStatus.INTERVAL)
    return AdmissibleInterval(status, rho_minus, rho_plus, peak_rho, peak_value)


def _random_unit(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    X = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _forms(X: np.ndarray, M: np.ndarray) -> np.ndarray:
    # row-wise x^H M x for the rows x of X
    return np.einsum("ij,jk,ik->i", X.conj(), M, X).real


@dataclass(frozen=True)
class OracleEstimate:
    rho_minus: float
    rho_plus: float
    samples_positive: int
    samples_negative: int

    def __iter__(self):
        return iter((self.rho_minus, self.rho_plus))


def quotient_oracle(A, B, sample_count: int = 100_000, seed: int = 0,
                    batch: int = 2_000) -> OracleEstimate:
    """Monte-Carlo estimate of the interval from the Rayleigh-type quotients.

    ``rho_minus = sup(-x^H A x / x^H B x)`` over ``x^H B x > 0`` and
    ``rho_plus = inf(-x^H A x / x^H B x)`` over ``x^H B x < 0``.  Every batch mixes uniform
    directions, directions whitened by the eigenvalues of ``B`` (so that rare
    signs of ``x^H B x`` are still sampled) and multi-scale random
    perturbations of the current best witnesses.  Every sample gives a valid
    bound, so ``rho_minus`` is approached from below and ``rho_plus`` from
    above.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    # directions whitened by |B| hit both signs of x^H B x at comparable rates
    ev, U = np.linalg.eigh(B)
    mags = np.abs(ev)
    whiten = U / np.sqrt(np.maximum(mags, 1e-6 * max(mags.max(), 1e-300)))
    best_lo, best_hi = -math.inf, math.inf
    x_lo = x_hi = None
    n_pos = n_neg = 0
    drawn = 0
    while drawn < sample_count:
        m = min(batch, sample_count - drawn)
        X = _random_unit(rng, m, n)
        k = m // 4
        for j, x0 in enumerate((x_lo, x_hi)):
            if x0 is None or k == 0:
                continue
            sl = slice(j * k, (j + 1) * k)
            scales = 10.0 ** rng.uniform(-8, 0, size=(k, 1))
            G = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
            Y = x0 + scales * G / math.sqrt(2 * n)
            X[sl] = Y / np.linalg.norm(Y, axis=1, keepdims=True)
        if k:
            G = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
            Y = G @ whiten.T
            X[2 * k:3 * k] = Y / np.linalg.norm(Y, axis=1, keepdims=True)
        drawn += m
        a = _forms(X, A)
        b = _forms(X, B)
        pos = b > 0
        neg = b < 0
        n_pos += int(pos.sum())
        n_neg += int(neg.sum())
        if pos.any():
            q = -a[pos] / b[pos]
            i = int(np.argmax(q))
            if q[i] > best_lo:
                best_lo, x_lo = float(q[i]), X[pos][i]
        if neg.any():
            q = -a[neg] / b[neg]
            i = int(np.argmin(q))
            if q[i] < best_hi:
                best_hi, x_hi = float(q[i]), X[neg][i]
    if n_pos == 0 or n_neg == 0:
        raise HypothesisError("no samples with both signs of x^H B x; B is not indefinite")
    return OracleEstimate(best_lo, best_hi, n_pos, n_neg)


class _ConeParam:
    """Exact parametrization of the neutral cone of ``B``.

    ``x = P c_pos + t e^{i phi} N c_neg + Z c_zero`` with ``t`` chosen so that
    the positive and negative contributions cancel exactly.
    """

    def __init__(self, B: np.ndarray, tol: Tolerances):
        ev, U = np.linalg.eigh(B)
        pos = ev > tol.psd_tol
        neg = ev < -tol.psd_tol
        if not pos.any() or not neg.any():
            raise HypothesisError(
                "B is semidefinite: its neutral cone reduces to the kernel")
        self.lp, self.P = ev[pos], U[:, pos]
        self.ln, self.N = ev[neg], U[:, neg]
        self.Z = U[:, ~(pos | neg)]

    def draw(self, rng: np.random.Generator, count: int):
        def cgauss(k):
            return rng.standard_normal((count, k)) + 1j * rng.standard_normal((count, k))

        cp = cgauss(self.P.shape[1])
        cn = cgauss(self.N.shape[1])
        # randomly sparsify so single-direction mixtures are covered too
        for c in (cp, cn):
            keep = rng.random(c.shape) < 0.5
            one = rng.integers(0, c.shape[1], size=count)
            keep[np.arange(count), one] = True
            c *= keep
        cz = cgauss(self.Z.shape[1]) * rng.uniform(0, 2, size=(count, 1))
        phi = rng.uniform(0, 2 * np.pi, size=count)
        return cp, cn, cz, phi

    def polish(self, A: np.ndarray, start) -> tuple[np.ndarray, float]:
        """BFGS descent of the normalized form of ``A`` from cone parameters ``start``."""
        sizes = (self.P.shape[1], self.N.shape[1], self.Z.shape[1])
        cuts = np.cumsum(sizes)[:-1]

        def unpack(v):
            c = v[:-1:2] + 1j * v[1:-1:2]
            cp, cn, cz = np.split(c, cuts)
            return cp[None], cn[None], cz[None], v[-1:]

        def value(v):
            if not np.all(np.isfinite(v)):
                return math.inf
            with np.errstate(invalid="ignore", divide="ignore"):
                X = self.build(*unpack(v))
            val = _forms(X, A)[0]
            return float(val) if np.isfinite(val) else math.inf

        c = np.concatenate([np.ravel(part) for part in start[:3]])
        v0 = np.empty(2 * c.size + 1)
        v0[:-1:2], v0[1:-1:2], v0[-1] = c.real, c.imag, float(np.real(start[3]))
        res = minimize(value, v0, method="BFGS")
        v = res.x if res.fun <= value(v0) else v0
        return self.build(*unpack(v))[0], value(v)

    def build(self, cp, cn, cz, phi) -> np.ndarray:
        qp = (np.abs(cp) ** 2) @ self.lp
        qn = (np.abs(cn) ** 2) @ self.ln
        t = np.sqrt(qp / -qn)
        X = cp @ self.P.T + (t * np.exp(1j * phi))[:, None] * (cn @ self.N.T) + cz @ self.Z.T
        return X / np.linalg.norm(X, axis=1, keepdims=True)


def neutral_cone_sample(B, count: int, seed: int = 0,
                        tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``count`` unit vectors ``x`` with ``x^H B x = 0`` (rows of the result)."""
    B = _check_hermitian(B, tol, "B")
    cone = _ConeParam(B, tol)
    rng = np.random.default_rng(seed)
    return cone.build(*cone.draw(rng, count))


@dataclass(frozen=True)
class ConeTest:
    holds: bool
    worst_value: float
    witness: np.ndarray
    samples: int

    def __bool__(self) -> bool:
        return self.holds


def cone_positivity_test(A, B=None, count: int = 4_000, seed: int = 0,
                         tol: Tolerances = DEFAULT_TOL, batch: int = 500,
                         polish: int = 4) -> ConeTest:
    """Sampled test of ``x^H A x >= 0`` on the neutral cone of ``B``.

    After a first batch of random cone points, later batches mix fresh draws
    with local perturbations of the worst cone parameters found so far; every
    draw stays exactly on the cone.  Returns the most negative normalized
    value and its witness.  ``A`` may also be a :class:`ProblemData`.
    """
    if isinstance(A, ProblemData):
        A, B = A.A, A.B
    A = _check_hermitian(A, tol, "A")
    B = _check_hermitian(B, tol, "B")
    cone = _ConeParam(B, tol)
    rng = np.random.default_rng(seed)
    worst, witness, best_param = math.inf, None, None
    drawn = 0
    while drawn < count:
        m = min(batch, count - drawn)
        cp, cn, cz, phi = cone.draw(rng, m)
        if best_param is not None:
            k = m // 2
            scales = 10.0 ** rng.uniform(-6, 0, size=(k, 1))
            bp, bn, bz, bphi = best_param
            for c, base in ((cp, bp), (cn, bn), (cz, bz)):
                g = rng.standard_normal((k, c.shape[1])) + 1j * rng.standard_normal((k, c.shape[1]))
                c[:k] = base + scales * g * max(1.0, float(np.linalg.norm(base)))
            phi[:k] = bphi + scales[:, 0] * rng.standard_normal(k)
        X = cone.build(cp, cn, cz, phi)
        vals = _forms(X, A)
        i = int(np.argmin(vals))
        if vals[i] < worst:
            worst, witness = float(vals[i]), X[i]
            best_param = (cp[i], cn[i], cz[i], phi[i])
        drawn += m

    # local minimization over the cone parameters from the worst sample and a
    # few fresh starts; sampling alone misses narrow negative regions
    starts = [best_param] + [tuple(c[0] for c in cone.draw(rng, 1)) for _ in range(polish)]
    for start in starts:
        x, val = cone.polish(A, start)
        if val < worst:
            worst, witness = val, x
    return ConeTest(bool(worst >= -tol.psd_tol), worst, witness, drawn)
