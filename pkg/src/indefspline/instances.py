"""Instance files and random instance generation.

An instance file is UTF-8 JSON.  Complex numbers are ``[re, im]`` pairs, a
vector is a list of pairs and a matrix a list of rows::

    {
      "field": "complex",
      "H_dim": 2,
      "K": {"dim": 2, "gram": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]},
      "E": {"dim": 2, "gram": ...},
      "T": ..., "V": ...,
      "rho": 1.0, "z0": [[1.0, 0.0], [1.0, 0.0]], "w0": ..., "seed": 7,
      "tolerances": {"rank_rtol": 1e-10, ...}
    }

``rho``, ``z0``, ``w0``, ``tolerances`` and ``seed`` are optional.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import numkernel as nk
from .errors import HypothesisError, NumericalFailure, ValidationError
from .interpolation import constraint_subspaces, image_of_kernel
from .krein import KreinSpace, classify_subspace, orthogonal_companion
from .numkernel import DEFAULT_TOL, Tolerances
from .pencil import IntervalStatus, ProblemData, admissible_interval, inertia
from .smoothing import companion_of_V_kernel_image

__all__ = [
    "Instance",
    "Regime",
    "parse_instance",
    "render_instance",
    "load_instance",
    "digest",
    "gen_instance",
    "random_instance",
    "encode",
]

_TOP_KEYS = ("field", "H_dim", "K", "E", "T", "V", "rho", "z0", "w0", "tolerances", "seed")


@dataclass(frozen=True, eq=False)
class Instance:
    K_gram: np.ndarray
    E_gram: np.ndarray
    T: np.ndarray
    V: np.ndarray
    rho: float | None = None
    z0: np.ndarray | None = None
    w0: np.ndarray | None = None
    tolerances: Tolerances | None = None
    seed: int | None = None

    @property
    def H_dim(self) -> int:
        return self.T.shape[1]

    @property
    def tol(self) -> Tolerances:
        return self.tolerances or DEFAULT_TOL

    def problem(self, tol: Tolerances | None = None) -> ProblemData:
        """Validated :class:`ProblemData`; field paths are attached to errors."""
        tol = tol or self.tol
        try:
            K = KreinSpace(self.K_gram, tol)
        except ValidationError as exc:
            raise ValidationError(str(exc).split(": ", 1)[-1], "K.gram") from exc
        try:
            E = KreinSpace(self.E_gram, tol)
        except ValidationError as exc:
            raise ValidationError(str(exc).split(": ", 1)[-1], "E.gram") from exc
        return ProblemData(self.T, self.V, K, E, tol)

    def with_tolerances(self, tol: Tolerances) -> "Instance":
        return replace(self, tolerances=tol)

    def same_as(self, other: "Instance") -> bool:
        return render_instance(self) == render_instance(other)


class Regime(Enum):
    INDEFINITE = "INDEFINITE"
    SEMIDEFINITE = "SEMIDEFINITE"
    EMPTY_INTERVAL = "EMPTY_INTERVAL"


# -- encoding -----------------------------------------------------------------

def encode(value):
    """JSON-ready form: complex arrays become nested ``[re, im]`` lists."""
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value) or value.dtype.kind == "f":
            arr = np.asarray(value, dtype=complex)
            if arr.ndim == 0:
                return [float(arr.real), float(arr.imag)]
            return [encode(row) for row in arr]
        return value.tolist()
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, Enum):
        return value.name
    return value


def _decode_scalar(v, path: str) -> complex:
    if (not isinstance(v, list) or len(v) != 2
            or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in v)):
        raise ValidationError("expected a [re, im] pair of numbers", path)
    re, im = float(v[0]), float(v[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ValidationError("non-finite entry", path)
    return complex(re, im)


def _decode_vector(v, path: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(v, list):
        raise ValidationError("expected a list of [re, im] pairs", path)
    out = np.array([_decode_scalar(e, f"{path}[{i}]") for i, e in enumerate(v)], dtype=complex)
    if dim is not None and len(out) != dim:
        raise ValidationError(f"expected length {dim}, got {len(out)}", path)
    return out


def _decode_matrix(v, path: str, shape: tuple[int, int]) -> np.ndarray:
    if not isinstance(v, list) or len(v) != shape[0]:
        raise ValidationError(f"expected {shape[0]} rows", path)
    rows = [_decode_vector(r, f"{path}[{i}]", shape[1]) for i, r in enumerate(v)]
    return np.array(rows, dtype=complex).reshape(shape)


def _decode_count(v, path: str) -> int:
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ValidationError("expected a positive integer", path)
    return v


def parse_instance(text: str) -> Instance:
    """Parse and structurally validate an instance file.

    Operator-level invariants (Hermitian invertible grams, surjectivity) are
    checked as well, so a returned instance always builds a ProblemData.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("instance must be a JSON object")
    unknown = sorted(set(obj) - set(_TOP_KEYS))
    if unknown:
        raise ValidationError(f"unknown keys {unknown}")
    if obj.get("field") != "complex":
        raise ValidationError('must be "complex"', "field")
    n = _decode_count(obj.get("H_dim"), "H_dim")
    spaces = {}
    for name in ("K", "E"):
        sp = obj.get(name)
        if not isinstance(sp, dict) or set(sp) != {"dim", "gram"}:
            raise ValidationError("expected an object with keys dim, gram", name)
        d = _decode_count(sp["dim"], f"{name}.dim")
        spaces[name] = (d, _decode_matrix(sp["gram"], f"{name}.gram", (d, d)))
    T = _decode_matrix(obj.get("T"), "T", (spaces["K"][0], n))
    V = _decode_matrix(obj.get("V"), "V", (spaces["E"][0], n))
    rho = obj.get("rho")
    if rho is not None:
        if not isinstance(rho, (int, float)) or isinstance(rho, bool) or not math.isfinite(rho):
            raise ValidationError("expected a finite real number", "rho")
        rho = float(rho)
    z0 = obj.get("z0")
    z0 = None if z0 is None else _decode_vector(z0, "z0", spaces["E"][0])
    w0 = obj.get("w0")
    w0 = None if w0 is None else _decode_vector(w0, "w0", spaces["E"][0])
    tol = None
    if obj.get("tolerances") is not None:
        t = obj["tolerances"]
        if not isinstance(t, dict) or not set(t) <= set(DEFAULT_TOL.as_dict()):
            raise ValidationError("expected an object with tolerance names", "tolerances")
        tol = Tolerances(**{k: float(v) for k, v in t.items()})
    seed = obj.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise ValidationError("expected a nonnegative integer", "seed")
    inst = Instance(spaces["K"][1], spaces["E"][1], T, V, rho, z0, w0, tol, seed)
    inst.problem()
    return inst


def render_instance(inst: Instance) -> str:
    """Canonical text form; ``parse_instance(render_instance(x))`` reproduces ``x``."""
    obj = {
        "field": "complex",
        "H_dim": inst.H_dim,
        "K": {"dim": inst.K_gram.shape[0], "gram": encode(inst.K_gram)},
        "E": {"dim": inst.E_gram.shape[0], "gram": encode(inst.E_gram)},
        "T": encode(inst.T),
        "V": encode(inst.V),
    }
    if inst.rho is not None:
        obj["rho"] = float(inst.rho)
    if inst.z0 is not None:
        obj["z0"] = encode(inst.z0)
    if inst.w0 is not None:
        obj["w0"] = encode(inst.w0)
    if inst.tolerances is not None:
        obj["tolerances"] = inst.tolerances.as_dict()
    if inst.seed is not None:
        obj["seed"] = int(inst.seed)
    lines = [f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in obj.items()]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def load_instance(path: str) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def digest(inst: Instance) -> str:
    return hashlib.sha256(render_instance(inst).encode("utf-8")).hexdigest()


# -- random generation ----------------------------------------------------------

def _cgauss(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def _unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Q, R = np.linalg.qr(_cgauss(rng, n, n))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_gram(rng: np.random.Generator, n: int, n_pos: int) -> np.ndarray:
    """Random Hermitian gram with ``n_pos`` positive and ``n - n_pos`` negative eigenvalues."""
    signs = np.array([1.0] * n_pos + [-1.0] * (n - n_pos))
    mags = rng.uniform(0.5, 2.0, size=n)
    U = _unitary(rng, n)
    J = (U * (signs * mags)) @ U.conj().T
    return (J + J.conj().T) / 2


def _parse_dims(dims) -> tuple[int, int | None, int | None]:
    if isinstance(dims, int):
        return dims, None, None
    dims = tuple(int(d) for d in dims)
    if len(dims) == 1:
        return dims[0], None, None
    if len(dims) != 3:
        raise ValidationError("dims must be H or (H, K, E)", "dims")
    return dims


def _pick(rng, fixed, lo, hi):
    if fixed is not None:
        return fixed
    return int(rng.integers(lo, hi + 1))


_MAX_ATTEMPTS = 5000


def gen_instance(dims, regime: Regime | str = Regime.INDEFINITE, seed: int = 0,
                 tol: Tolerances = DEFAULT_TOL) -> Instance:
    """Rejection-sample a random instance of the requested regime.

    ``dims`` is ``H_dim`` or ``(H_dim, K_dim, E_dim)``; free dimensions are
    drawn per attempt.  INDEFINITE instances have an admissible interval of
    positive width and record an interior ``rho != 0``; SEMIDEFINITE ones a
    definite ``E`` and a nonnegative ``T(N(V))``; EMPTY_INTERVAL ones an
    empty interval.  Output is a deterministic function of the arguments.
    """
    regime = Regime(regime.value if isinstance(regime, Regime) else str(regime).upper())
    n, k_fixed, e_fixed = _parse_dims(dims)
    if n < 1:
        raise ValidationError("H_dim must be positive", "dims")
    if regime is not Regime.SEMIDEFINITE and n < 2:
        raise ValidationError("an indefinite V#V needs H_dim >= 2", "dims")
    rng = np.random.default_rng(seed)
    for _ in range(_MAX_ATTEMPTS):
        if regime is Regime.INDEFINITE:
            k = _pick(rng, k_fixed, max(1, n - 2), n)
            e = _pick(rng, e_fixed, 2, n)
        elif regime is Regime.EMPTY_INTERVAL:
            k = _pick(rng, k_fixed, 2, n) if n >= 2 else 1
            e = _pick(rng, e_fixed, 2, n)
        else:
            k = _pick(rng, k_fixed, 1, n)
            e = _pick(rng, e_fixed, 1, n)
        if k > n or e > n or k < 1 or e < 1:
            raise ValidationError("K and E dimensions must lie in [1, H_dim]", "dims")
        if regime is Regime.SEMIDEFINITE:
            e_pos = e if rng.random() < 0.5 else 0
        else:
            if e < 2:
                raise ValidationError("an indefinite E needs dim >= 2", "dims")
            e_pos = int(rng.integers(1, e))
        if regime is Regime.EMPTY_INTERVAL:
            if k < 2:
                raise ValidationError("an empty interval needs an indefinite K", "dims")
            k_pos = int(rng.integers(1, k))
        else:
            k_pos = k if rng.random() < 0.5 else int(rng.integers(1, k + 1))
        KJ = random_gram(rng, k, k_pos)
        EJ = random_gram(rng, e, e_pos)
        T = _cgauss(rng, k, n)
        V = _cgauss(rng, e, n)
        z0 = _cgauss(rng, e)
        try:
            data = ProblemData(T, V, KreinSpace(KJ, tol), KreinSpace(EJ, tol), tol)
        except ValidationError:
            continue
        if regime is Regime.SEMIDEFINITE:
            npos, nneg, _ = inertia(data.B, tol)
            if npos and nneg:
                continue
            if not classify_subspace(data.K, image_of_kernel(data), tol).nonnegative:
                continue
            W = constraint_subspaces(data).W
            w0 = V @ W.random_element(rng)
            return Instance(KJ, EJ, T, V, None, z0, w0, None, seed)
        iv = admissible_interval(data.A, data.B, tol)
        if regime is Regime.EMPTY_INTERVAL:
            if iv.is_empty and iv.peak_value < -1e-3:
                return Instance(KJ, EJ, T, V, 1.0, z0, None, None, seed)
            continue
        if iv.status is not IntervalStatus.INTERVAL:
            continue
        width = iv.rho_plus - iv.rho_minus
        scale = 1.0 + abs(iv.rho_minus) + abs(iv.rho_plus)
        if width < 1e-3 * scale:
            continue
        rho = iv.rho_minus + rng.uniform(0.15, 0.85) * width
        if abs(rho) < 0.05 * width:
            continue
        W = constraint_subspaces(data).W
        w0 = V @ W.random_element(rng)
        return Instance(KJ, EJ, T, V, float(rho), z0, w0, None, seed)
    raise NumericalFailure(f"no {regime.value} instance found in {_MAX_ATTEMPTS} attempts "
                           f"for dims {dims!r}")


def _factor_hermitian(A: np.ndarray, rank_rtol: float):
    """``A = T^H J T`` with ``T`` surjective and ``J = diag(+-1)``."""
    ev, U = np.linalg.eigh(A)
    keep = np.abs(ev) > rank_rtol * max(1.0, np.max(np.abs(ev)))
    ev, U = ev[keep], U[:, keep]
    T = np.sqrt(np.abs(ev))[:, None] * U.conj().T
    return T, np.diag(np.sign(ev)).astype(complex)


def pencil_kernel_instance(rng: np.random.Generator, n: int, *, kernel_in_L: bool,
                           tol: Tolerances = DEFAULT_TOL) -> Instance:
    """Instance whose pencil is PSD and singular at a recorded ``rho``.

    With ``kernel_in_L`` the kernel is ``N(T) & N(V)`` (equality case holds
    and the directions are nontrivial); otherwise ``T`` is injective and the
    kernel is a generic line, so ``rho`` is an interval endpoint and the
    bridge inclusion is strict.
    """
    d = 1 if n < 4 else int(rng.integers(1, 3))
    e_max = n - d if kernel_in_L else n
    if e_max < 2:
        raise ValidationError("dimension too small for this construction")
    e = int(rng.integers(2, e_max + 1))
    EJ = random_gram(rng, e, int(rng.integers(1, e)))
    rho = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))
    if kernel_in_L:
        Nb = np.linalg.qr(_cgauss(rng, n, d))[0]
        P = np.eye(n) - Nb @ Nb.conj().T
        V = _cgauss(rng, e, n) @ P
        C = _cgauss(rng, n, n) @ P
    else:
        V = _cgauss(rng, e, n)
        C = _cgauss(rng, n - d, n)
    M = C.conj().T @ C
    B = V.conj().T @ EJ @ V
    A = M - rho * (B + B.conj().T) / 2
    T, KJ = _factor_hermitian((A + A.conj().T) / 2, 1e-8)
    data = ProblemData(T, V, KreinSpace(KJ, tol), KreinSpace(EJ, tol), tol)
    # admissible z0: in the E-companion of V(N(M))
    z0 = companion_of_V_kernel_image(data, rho).random_element(rng)
    w0 = data.V @ constraint_subspaces(data).W.random_element(rng)
    return Instance(KJ, EJ, T, V, rho, z0, w0, None, None)


def degenerate_tnv_instance(rng: np.random.Generator, n: int,
                            tol: Tolerances = DEFAULT_TOL) -> Instance:
    """Instance whose ``T(N(V))`` contains a neutral vector orthogonal to all of it."""
    m = 1 if n < 5 else int(rng.integers(1, 3))
    if n - m < 2:
        raise ValidationError("dimension too small for this construction")
    k = int(rng.integers(2, n - m + 1))
    e = n - m
    KJ = random_gram(rng, k, int(rng.integers(1, k)))
    K = KreinSpace(KJ, tol)
    ev, U = np.linalg.eigh(K.gram)
    u = U[:, -1] / math.sqrt(ev[-1]) + U[:, 0] / math.sqrt(-ev[0])
    comp = orthogonal_companion(K, nk.span(u[:, None], tol), tol)
    cols = [u] + [comp.random_element(rng) for _ in range(m - 1)]
    Y = np.column_stack(cols)
    Nb = np.linalg.qr(_cgauss(rng, n, m))[0]
    P = np.eye(n) - Nb @ Nb.conj().T
    T = Y @ Nb.conj().T + _cgauss(rng, k, n) @ P
    V = _cgauss(rng, e, n) @ P
    EJ = random_gram(rng, e, int(rng.integers(0, e + 1)))
    ProblemData(T, V, K, KreinSpace(EJ, tol), tol)
    return Instance(KJ, EJ, T, V, None, _cgauss(rng, e), None, None, None)


def random_instance(seed: int, n: int, kind: str = "mixed",
                    tol: Tolerances = DEFAULT_TOL) -> Instance:
    """One random instance of a named family, used by the verification suite.

    ``kind`` is one of ``indefinite``, ``semidefinite``, ``empty``,
    ``endpoint``, ``kernel``, ``degenerate_tnv`` or ``mixed`` (a seeded choice
    among them).
    """
    rng = np.random.default_rng(seed)
    kinds = ("indefinite", "indefinite", "endpoint", "kernel", "degenerate_tnv",
             "semidefinite", "empty")
    if kind == "mixed":
        kind = kinds[int(rng.integers(len(kinds)))]
        if n < 3 and kind in ("kernel", "degenerate_tnv"):
            kind = "indefinite"
    sub_seed = int(rng.integers(2**32))
    if kind == "indefinite":
        inst = gen_instance(n, Regime.INDEFINITE, sub_seed, tol)
    elif kind == "semidefinite":
        inst = gen_instance(n, Regime.SEMIDEFINITE, sub_seed, tol)
    elif kind == "empty":
        inst = gen_instance(n, Regime.EMPTY_INTERVAL, sub_seed, tol)
    elif kind == "endpoint":
        inst = pencil_kernel_instance(rng, n, kernel_in_L=False, tol=tol)
    elif kind == "kernel":
        inst = pencil_kernel_instance(rng, n, kernel_in_L=True, tol=tol)
    elif kind == "degenerate_tnv":
        inst = degenerate_tnv_instance(rng, n, tol)
    else:
        raise ValidationError(f"unknown instance family {kind!r}", "kind")
    return replace(inst, seed=seed)


def is_indefinite_problem(data: ProblemData) -> bool:
    npos, nneg, _ = inertia(data.B, data.tol)
    return bool(npos and nneg)


def require_indefinite(data: ProblemData):
    if not is_indefinite_problem(data):
        raise HypothesisError("V#V is semidefinite")
