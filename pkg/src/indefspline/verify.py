"""Structure-check suite run by ``indefspline verify``.

Each check evaluates one structural statement on a concrete instance,
usually by two independent routes, and records a :class:`Check`.  Checks
whose hypotheses do not hold on the instance are skipped, not failed.
"""

from __future__ import annotations

import math

import numpy as np

from . import numkernel as nk
from .errors import HypothesisError
from .instances import Instance
from .interpolation import (InterpolationProblem, analyze_TNV, bridge_w0_to_z0,
                            bridge_z0_to_w0, constraint_subspaces, equality_case,
                            image_of_kernel, interp_exists, interpolation_conditions,
                            solve_interpolation)
from .krein import (KreinSpace, classify_subspace, inner, krein_adjoint,
                    orthogonal_companion)
from .pencil import (ProblemData, admissible_interval, cone_positivity_test,
                     is_indefinite, lambda_min, quotient_oracle)
from .smoothing import (Check, SmoothingProblem, lift_L, normal_residual, objective,
                        product_space, residual_orthogonality, smoothing_exists,
                        solve_smoothing, verify_structure)

__all__ = ["run_suite", "krein_checks", "pencil_checks", "smoothing_checks",
           "interpolation_checks", "positivity_classes_consistent"]


def _cg(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def positivity_classes_consistent(space: KreinSpace, S) -> bool:
    """Uniformly positive iff regular and nonnegative; same for the negative side."""
    c = classify_subspace(space, S)
    return (c.uniformly_positive == (c.regular and c.nonnegative)
            and c.uniformly_negative == (c.regular and c.nonpositive))


def krein_checks(data: ProblemData, rng: np.random.Generator) -> list[Check]:
    tol = data.tol
    H, K, E = data.H, data.K, data.E
    out = []
    Ts = data.T_adj()
    worst = 0.0
    for _ in range(100):
        x, y = _cg(rng, H.dim), _cg(rng, K.dim)
        d = abs(inner(K, data.T @ x, y) - inner(H, x, Ts @ y))
        worst = max(worst, d / (np.linalg.norm(x) * np.linalg.norm(y)
                                * np.linalg.norm(data.T, 2) * np.linalg.norm(K.gram, 2)))
    out.append(Check("adjoint_identity", worst <= 1e-10, {"max_relative_gap": worst}))
    back = krein_adjoint(Ts, K, H)
    err = float(np.max(np.abs(back - data.T)) / max(1.0, np.max(np.abs(data.T))))
    out.append(Check("adjoint_involution", err <= 1e-10, {"max_entry_error": err}))

    ok = True
    for space in (K, E):
        if space.dim < 2:
            continue
        S = nk.span(_cg(rng, space.dim, int(rng.integers(1, space.dim))), tol)
        C = orthogonal_companion(space, S)
        ok &= S.dim + C.dim == space.dim and nk.equal(orthogonal_companion(space, C), S, tol)
    out.append(Check("companion_involution", ok))

    # uniform positivity vs regular and nonnegative, on random, definite and degenerate subspaces
    probes = []
    for space in (K, E):
        ev, U = np.linalg.eigh(space.gram)
        probes.append((space, nk.span(_cg(rng, space.dim, max(1, space.dim // 2)), tol)))
        if np.any(ev > 0):
            probes.append((space, nk.span(U[:, ev > 0][:, :1], tol)))
        if np.any(ev > 0) and np.any(ev < 0):
            u = U[:, -1] / math.sqrt(ev[-1]) + U[:, 0] / math.sqrt(-ev[0])
            probes.append((space, nk.span(u[:, None], tol)))
    probes.append((K, image_of_kernel(data)))
    consistent = sum(positivity_classes_consistent(sp, S) for sp, S in probes)
    out.append(Check("uniform_positivity_iff_regular_nonnegative", consistent == len(probes),
                     {"subspaces": len(probes), "consistent": consistent}))
    return out


def pencil_checks(data: ProblemData, rng: np.random.Generator, samples: int = 20_000
                  ) -> list[Check]:
    tol = data.tol
    A, B = data.A, data.B
    out = []
    iv = admissible_interval(A, B, tol)
    cone = cone_positivity_test(A, B, count=4000, seed=int(rng.integers(2**31)), tol=tol)
    margin = 10 * tol.psd_tol
    agree = bool(cone) == (not iv.is_empty) or abs(iv.peak_value) <= margin
    out.append(Check("cone_positivity_iff_interval_nonempty", agree,
                     {"interval": iv.as_dict(), "cone_holds": cone.holds,
                      "cone_worst": cone.worst_value}))
    if iv.is_empty:
        grid = np.linspace(iv.peak_rho - 5, iv.peak_rho + 5, 21)
        vals = [lambda_min(data.pencil(r)) for r in grid]
        out.append(Check("empty_interval_grid", max(vals) < 0,
                         {"grid_max_lambda_min": max(vals)}))
        return out

    lo, hi = iv.rho_minus, iv.rho_plus
    inner_ok = all(lambda_min(data.pencil(r)) >= -tol.psd_tol
                   for r in np.linspace(lo, hi, 22)[1:-1])
    step = 1e3 * tol.bisection_tol
    outer_ok = (lambda_min(data.pencil(lo - step)) < 0 and lambda_min(data.pencil(hi + step)) < 0)
    out.append(Check("interval_correctness", inner_ok and outer_ok,
                     {"rho_minus": lo, "rho_plus": hi}))

    est = quotient_oracle(A, B, samples, seed=int(rng.integers(2**31)))
    slack = 1e-8 * (1 + abs(lo) + abs(hi))
    sound = est.rho_minus <= lo + slack and est.rho_plus >= hi - slack
    out.append(Check("quotient_oracle_bounds", sound,
                     {"oracle": [est.rho_minus, est.rho_plus], "interval": [lo, hi]}))
    # sampled form of mu_-(T) <= mu_+(T)
    out.append(Check("quotient_ordering", est.rho_minus <= est.rho_plus + slack,
                     {"oracle": [est.rho_minus, est.rho_plus]}))
    if iv.contains(0.0):
        out.append(Check("zero_admissible_implies_A_psd", lambda_min(A) >= -tol.psd_tol,
                         {"lambda_min_A": lambda_min(A)}))
    return out


def _batch_objective(data: ProblemData, rho: float, z0: np.ndarray, X: np.ndarray) -> np.ndarray:
    TX = data.T @ X
    R = data.V @ X - z0[:, None]
    return (np.einsum("ij,ik,kj->j", TX.conj(), data.K.gram, TX)
            + rho * np.einsum("ij,ik,kj->j", R.conj(), data.E.gram, R)).real


def smoothing_checks(data: ProblemData, rho: float, z0: np.ndarray,
                     rng: np.random.Generator) -> list[Check]:
    tol = data.tol
    P = SmoothingProblem(data, rho, z0)
    out = []
    ex = smoothing_exists(P)
    if not ex:
        if ex.clause.name == "PENCIL":
            # a rho-negative direction of R(L) makes F unbounded below
            ev, U = np.linalg.eigh(data.pencil(rho))
            x = U[:, 0]
            L = lift_L(data)
            q = inner(product_space(data, rho), L @ x, L @ x).real
            f = [objective(P, t * x) for t in (1e2, 1e3, 1e4)]
            out.append(Check("unbounded_below_certificate", q < 0 and f[0] > f[1] > f[2],
                             {"form_value": q, "objective": f}))
        out.append(Check("existence_clause", True, {"reason": str(ex)}))
        return out

    sm = solve_smoothing(P)
    x = sm.particular
    res = normal_residual(P, x)
    out.append(Check("normal_equation", res <= tol.residual_tol, {"backward_error": res}))
    pert = _cg(rng, data.H_dim)
    pert -= sm.directions.project(pert)
    perturbed_rejected = not residual_orthogonality(P, x + pert / np.linalg.norm(pert))
    out.append(Check("residual_orthogonality",
                     residual_orthogonality(P, x) and perturbed_rejected))

    f0 = objective(P, x)
    D = _cg(rng, data.H_dim, 10_000)
    D *= 10 * rng.random(10_000) ** (1 / (2 * data.H_dim)) / np.linalg.norm(D, axis=0)
    F = _batch_objective(data, rho, z0, x[:, None] + D)
    gap = float(np.min(F) - f0)
    out.append(Check("minimality", gap >= -1e-8 * (1 + abs(f0)), {"min_gap": gap}))

    h = 1e-5
    grad = []
    for j in range(data.H_dim):
        for unit in (1.0, 1j):
            e = np.zeros(data.H_dim, dtype=complex)
            e[j] = unit * h
            grad.append((objective(P, x + e) - objective(P, x - e)) / (2 * h))
    gnorm = float(np.linalg.norm(grad))
    out.append(Check("stationarity", gnorm <= 1e-6 * (1 + np.linalg.norm(x)),
                     {"gradient_norm": gnorm}))
    if sm.dim:
        pts = sm.directions.basis @ _cg(rng, sm.dim, 100)
        pts /= np.linalg.norm(pts, axis=0)
        Fd = _batch_objective(data, rho, z0, x[:, None] + pts)
        drift = float(np.max(np.abs(Fd - f0)))
        out.append(Check("flat_along_directions", drift <= 1e-9 * (1 + abs(f0)),
                         {"max_drift": drift}))
    out.extend(verify_structure(data, rho, trials=50, seed=int(rng.integers(2**31))))
    return out


def interpolation_checks(data: ProblemData, rho: float | None, w0: np.ndarray | None,
                         z0: np.ndarray | None, rng: np.random.Generator) -> list[Check]:
    tol = data.tol
    out = []
    rep = analyze_TNV(data)
    out.append(Check("tnv_isotropic_part", rep.isotropic_is_T_N0, rep.as_dict()))
    out.append(Check("tnv_decomposition", rep.decomposition_verified))
    out.append(Check("tnv_nondegenerate_iff_N0_is_kernel_meet",
                     rep.nondegenerate == rep.nondegenerate_rhs))
    out.append(Check("tnv_regular_iff_sum_is_H", rep.regular == rep.regular_rhs))

    tnv_nonneg = classify_subspace(data.K, rep.TNV, tol).nonnegative
    if w0 is not None and tnv_nonneg:
        Pi = InterpolationProblem(data, w0)
        if interp_exists(Pi):
            sp = solve_interpolation(Pi)
            pts = sp.sample(10, rng)
            ok = all(interpolation_conditions(data, pts[:, j], w0) for j in range(pts.shape[1]))
            out.append(Check("interpolation_conditions", ok, {"dim_N0": sp.dim}))

    pencil_psd = rho is not None and lambda_min(data.pencil(rho)) >= -tol.psd_tol
    if not pencil_psd:
        return out
    M = data.pencil(rho)
    # nonnegative R(L): T(N(V)) positive, and uniformly so
    NV = constraint_subspaces(data).NV
    ok = True
    if NV.dim:
        G = NV.basis.conj().T @ data.A @ NV.basis
        ev, U = np.linalg.eigh((G + G.conj().T) / 2)
        for j in np.flatnonzero(ev <= tol.psd_tol):
            xv = NV.basis @ U[:, j]
            scale = max(1.0, np.linalg.norm(M, 2))
            ok &= (np.linalg.norm(M @ xv) <= 1e-6 * scale
                   and np.linalg.norm(data.T @ xv) <= 1e-6 * max(1.0, np.linalg.norm(data.T, 2)))
    cls = classify_subspace(data.K, rep.TNV, tol)
    out.append(Check("tnv_positive_when_range_nonnegative",
                     ok and cls.nondegenerate and cls.nonnegative))
    out.append(Check("tnv_uniformly_positive_when_range_nonnegative", cls.uniformly_positive))

    eq = equality_case(data, rho)
    if z0 is not None:
        Ps = SmoothingProblem(data, rho, z0)
        if smoothing_exists(Ps):
            c = bridge_z0_to_w0(Ps, samples=20, seed=int(rng.integers(2**31)))
            out.append(Check("bridge_z0_to_w0_inclusion", c.inclusion,
                             {"max_residual": c.max_residual, "strict": c.strict}))
            if eq:
                out.append(Check("equality_case_z0_to_w0", c.sp.equals(c.sm, tol),
                                 {"angle": c.sp.angle_to(c.sm)}))
            else:
                out.append(Check("strict_inclusion_detected", c.strict))
    if w0 is not None:
        Pi = InterpolationProblem(data, w0)
        if interp_exists(Pi):
            c = bridge_w0_to_z0(Pi, rho, samples=20, seed=int(rng.integers(2**31)))
            out.append(Check("bridge_w0_to_z0_inclusion", c.inclusion,
                             {"max_residual": c.max_residual, "strict": c.strict}))
            if eq:
                out.append(Check("equality_case_w0_to_z0", c.sp.equals(c.sm, tol),
                                 {"angle": c.sp.angle_to(c.sm)}))
    return out


def run_suite(inst: Instance, seed: int = 0) -> list[Check]:
    """All applicable checks for one instance."""
    data = inst.problem()
    rng = np.random.default_rng(seed)
    checks = krein_checks(data, rng)
    if is_indefinite(data.B, data.tol):
        checks += pencil_checks(data, rng)
    if inst.rho is not None and inst.rho != 0 and inst.z0 is not None:
        checks += smoothing_checks(data, inst.rho, inst.z0, rng)
    try:
        checks += interpolation_checks(data, inst.rho, inst.w0, inst.z0, rng)
    except HypothesisError as exc:  # pragma: no cover - guarded above
        checks.append(Check("interpolation_hypothesis", True, {"skipped": str(exc)}))
    return checks
