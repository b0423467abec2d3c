"""Command-line interface.

Every command reads an instance file (or generates instances), computes a
report dictionary and prints it as JSON or as ``key: value`` text lines.
Both renderings come from the same encoded dictionary.  Exit status is 0
whenever a report was computed (including NO_SOLUTION and UNSUPPORTED), 1
for invalid input and 2 for a numerical breakdown.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .errors import HypothesisError, NoSolution, NumericalFailure, ValidationError
from .instances import (Instance, Regime, digest, encode, gen_instance, load_instance,
                        random_instance, render_instance)
from .interpolation import (InterpolationProblem, analyze_TNV, bridge_w0_to_z0,
                            bridge_z0_to_w0, constraint_subspaces, interp_exists,
                            solve_interpolation)
from .numkernel import Tolerances
from .pencil import admissible_interval, inertia, is_indefinite, lambda_min, quotient_oracle
from .smoothing import (SmoothingProblem, global_solvability, normal_residual, objective,
                        residual_orthogonality, smoothing_exists, solve_smoothing)
from .verify import run_suite

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _check(name: str, passed: bool, detail=None) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail or {}}


def _report(argv: list[str], inst_digest, tol: Tolerances, status: str,
            results: dict, checks: list[dict]) -> dict:
    return {
        "command": list(argv),
        "instance_digest": inst_digest,
        "tolerances": tol.as_dict(),
        "status": status,
        "results": results,
        "checks": checks,
    }


def _tolerances(args, base: Tolerances) -> Tolerances:
    overrides = {k: v for k, v in (("rank_rtol", args.tol_rank), ("psd_tol", args.tol_psd),
                                   ("residual_tol", args.tol_res)) if v is not None}
    return replace(base, **overrides) if overrides else base


def _resolve(args) -> tuple[Instance, Tolerances]:
    inst = load_instance(args.file)
    tol = _tolerances(args, inst.tol)
    if getattr(args, "rho", None) is not None:
        inst = replace(inst, rho=args.rho)
    return inst, tol


def _require(value, field: str, command: str):
    if value is None:
        raise ValidationError(f"required by `{command}`", field)
    return value


# -- commands -----------------------------------------------------------------

def cmd_interval(args, argv) -> dict:
    inst, tol = _resolve(args)
    data = inst.problem(tol)
    n_pos, n_neg, n_zero = inertia(data.B, tol)
    results = {"inertia_B": {"positive": n_pos, "negative": n_neg, "zero": n_zero}}
    if not is_indefinite(data.B, tol):
        results["note"] = ("B = V#V is semidefinite: interpolation regime, "
                           "use the `interp` command")
        return _report(argv, digest(inst), tol, "UNSUPPORTED", results, [])
    iv = admissible_interval(data.A, data.B, tol)
    est = quotient_oracle(data.A, data.B, args.samples, seed=args.seed)
    results["interval"] = iv.as_dict()
    results["oracle"] = {"rho_minus": est.rho_minus, "rho_plus": est.rho_plus,
                         "samples_positive": est.samples_positive,
                         "samples_negative": est.samples_negative}
    checks = []
    if iv.is_empty:
        # witness: lambda_min stays negative on a grid around the peak
        spread = max(1.0, abs(iv.peak_rho))
        grid = iv.peak_rho + spread * np.linspace(-2.0, 2.0, 21)
        values = [lambda_min(data.pencil(r)) for r in grid]
        results["witness_grid"] = {"rho": grid.tolist(), "lambda_min": values}
        checks.append(_check("grid_negative", max(values) < 0.0,
                             {"max_lambda_min": max(values)}))
        checks.append(_check("oracle_confirms_empty", est.rho_minus > est.rho_plus))
    else:
        gap = max(abs(est.rho_minus - iv.rho_minus), abs(est.rho_plus - iv.rho_plus))
        slack = 10 * tol.bisection_tol
        checks.append(_check("oracle_bounds_inside",
                             est.rho_minus <= iv.rho_minus + slack
                             and est.rho_plus >= iv.rho_plus - slack))
        checks.append(_check("oracle_agreement", gap <= args.oracle_tol,
                             {"max_gap": gap, "bound": args.oracle_tol}))
        checks.append(_check("endpoints_psd",
                             lambda_min(data.pencil(iv.rho_minus)) >= -tol.psd_tol
                             and lambda_min(data.pencil(iv.rho_plus)) >= -tol.psd_tol))
    status = "TRIVIAL" if iv.is_trivial(tol) else iv.status.name
    if status == "TRIVIAL":
        results["note"] = "the interval is {0}; the smoothing problem is trivial"
    return _report(argv, digest(inst), tol, status, results, checks)


def cmd_smooth(args, argv) -> dict:
    inst, tol = _resolve(args)
    data = inst.problem(tol)
    rho = _require(inst.rho, "rho", "smooth")
    z0 = _require(inst.z0, "z0", "smooth")
    P = SmoothingProblem(data, rho, z0)
    if is_indefinite(data.B, tol) and admissible_interval(data.A, data.B, tol).is_trivial(tol):
        return _report(argv, digest(inst), tol, "TRIVIAL",
                       {"rho": P.rho, "note": "the admissible interval is {0}"}, [])
    ex = smoothing_exists(P)
    results = {"rho": P.rho, "lambda_min": ex.lambda_min, "range_residual": ex.range_residual}
    if not ex:
        results["clause"] = ex.clause.name
        results["reason"] = str(ex)
        return _report(argv, digest(inst), tol, "NO_SOLUTION", results, [])
    sm = solve_smoothing(P)
    x = sm.particular
    res = normal_residual(P, x)
    results.update({
        "solution": sm.as_dict(),
        "dim_directions": sm.dim,
        "objective": objective(P, x),
        "normal_residual": res,
        "global_solvability": global_solvability(data, P.rho),
    })
    checks = [
        _check("normal_equation", res <= tol.residual_tol, {"residual": res}),
        _check("residual_orthogonality", residual_orthogonality(P, x)),
    ]
    return _report(argv, digest(inst), tol, "SOLVED", results, checks)


def _interp_datum(inst: Instance):
    if inst.z0 is not None:
        return inst.z0
    return _require(inst.w0, "z0", "interp")


def cmd_interp(args, argv) -> dict:
    inst, tol = _resolve(args)
    data = inst.problem(tol)
    z0 = _interp_datum(inst)
    NV, W, N0 = constraint_subspaces(data)
    results = {"subspaces": {"NV": NV.basis, "W": W.basis, "N0": N0.basis,
                             "dims": {"NV": NV.dim, "W": W.dim, "N0": N0.dim}}}
    P = InterpolationProblem(data, z0)
    try:
        exists = interp_exists(P)
    except HypothesisError as exc:
        results["reason"] = str(exc)
        return _report(argv, digest(inst), tol, "UNSUPPORTED", results, [])
    report = analyze_TNV(data)
    results["tnv"] = report.as_dict()
    checks = [_check("tnv_characterizations_consistent", report.consistent)]
    if not exists:
        results["reason"] = "z0 is not in V((T#T N(V))^perp)"
        return _report(argv, digest(inst), tol, "NO_SOLUTION", results, checks)
    sp = solve_interpolation(P)
    x = sp.particular
    results["solution"] = sp.as_dict()
    results["dim_directions"] = sp.dim
    results["energy"] = float(np.vdot(data.T @ x, data.K.gram @ (data.T @ x)).real)
    err = float(np.linalg.norm(data.V @ x - z0))
    checks.append(_check("constraint_satisfied",
                         err <= tol.residual_tol * max(1.0, float(np.linalg.norm(z0))),
                         {"residual": err}))
    return _report(argv, digest(inst), tol, "SOLVED", results, checks)


def cmd_bridge(args, argv) -> dict:
    inst, tol = _resolve(args)
    data = inst.problem(tol)
    rho = _require(inst.rho, "rho", "bridge")
    try:
        if args.direction == "z2w":
            P = SmoothingProblem(data, rho, _require(inst.z0, "z0", "bridge --direction z2w"))
            cert = bridge_z0_to_w0(P, samples=args.points, seed=args.seed)
            key = "w0"
        else:
            P = InterpolationProblem(data, _require(inst.w0, "w0", "bridge --direction w2z"))
            cert = bridge_w0_to_z0(P, rho, samples=args.points, seed=args.seed)
            key = "z0"
    except HypothesisError as exc:
        return _report(argv, digest(inst), tol, "UNSUPPORTED", {"reason": str(exc)}, [])
    except NoSolution as exc:
        return _report(argv, digest(inst), tol, "NO_SOLUTION", {"reason": str(exc)}, [])
    results = {"direction": args.direction, key: cert.vector, "sp": cert.sp.as_dict(),
               "sm": cert.sm.as_dict(), "dim_sp": cert.sp.dim, "dim_sm": cert.sm.dim,
               "strict_inclusion": cert.strict}
    checks = [_check("inclusion", cert.inclusion,
                     {"max_residual": cert.max_residual, "points": cert.points_checked})]
    return _report(argv, digest(inst), tol, "SOLVED", results, checks)


def _suite_entry(job: tuple[int, Instance, int]) -> dict:
    index, inst, seed = job
    checks = run_suite(inst, seed=seed)
    return {
        "index": index,
        "instance_digest": digest(inst),
        "passed": all(c.passed for c in checks),
        "checks": [c.as_dict() for c in checks],
    }


def _random_jobs(args, tol: Tolerances) -> list[tuple[int, Instance, int]]:
    parts = [int(p) for p in str(args.dims).split(",")]
    seeds = np.random.SeedSequence(args.seed).generate_state(args.random).tolist()
    jobs = []
    for i, s in enumerate(seeds):
        if len(parts) == 1:
            inst = random_instance(int(s), parts[0], tol=tol)
        else:
            inst = gen_instance(tuple(parts), Regime.INDEFINITE, int(s), tol)
        if tol != Tolerances():
            inst = inst.with_tolerances(tol)
        jobs.append((i, inst, int(s)))
    return jobs


def cmd_verify(args, argv) -> dict:
    if args.random is not None:
        tol = _tolerances(args, Tolerances())
        jobs = _random_jobs(args, tol)
        inst_digest = hashlib.sha256(
            "".join(digest(j[1]) for j in jobs).encode("ascii")).hexdigest()
    else:
        if args.file is None:
            raise ValidationError("give an instance file or --random N")
        inst, tol = _resolve(args)
        if tol != inst.tol:
            inst = inst.with_tolerances(tol)
        jobs = [(0, inst, args.seed)]
        inst_digest = digest(inst)
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            entries = list(pool.map(_suite_entry, jobs))
    else:
        entries = [_suite_entry(j) for j in jobs]
    entries.sort(key=lambda e: e["index"])
    passed = sum(e["passed"] for e in entries)
    failed = sorted({c["name"] for e in entries for c in e["checks"] if not c["passed"]})
    results = {"instances": len(entries), "passed": passed, "failed_checks": failed,
               "per_instance": entries}
    checks = [_check("all_instances_pass", passed == len(entries),
                     {"passed": passed, "total": len(entries)})]
    status = "PASS" if passed == len(entries) else "FAIL"
    return _report(argv, inst_digest, tol, status, results, checks)


# -- rendering ------------------------------------------------------------------

def to_json(report: dict) -> str:
    return json.dumps(encode(report), indent=2) + "\n"


def _flatten(prefix: str, value, out: list[str]):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif (isinstance(value, list) and value
          and all(isinstance(v, dict) for v in value)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append(f"{prefix}: {json.dumps(value)}")


def to_text(report: dict) -> str:
    """One ``dotted.key: json-value`` line per leaf of the encoded report."""
    lines: list[str] = []
    _flatten("", encode(report), lines)
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rank", type=float, help="relative rank cutoff")
    common.add_argument("--tol-psd", type=float, help="eigenvalue sign slack")
    common.add_argument("--tol-res", type=float, help="residual tolerance")
    common.add_argument("--out", help="write the output here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")

    parser = argparse.ArgumentParser(
        prog="indefspline",
        description="Indefinite smoothing and constrained interpolation in Krein spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interval", parents=[common], help="admissible parameter interval")
    p.add_argument("file")
    p.add_argument("--samples", type=int, default=100_000, help="quotient oracle samples")
    p.add_argument("--oracle-tol", type=float, default=1e-3)

    for name, text in (("smooth", "solve the smoothing problem"),
                       ("interp", "solve the constrained interpolation problem")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("file")
        p.add_argument("--rho", type=float, help="override the rho stored in the file")

    p = sub.add_parser("bridge", parents=[common], help="map between smoothing and interpolation data")
    p.add_argument("file")
    p.add_argument("--direction", choices=("z2w", "w2z"), required=True)
    p.add_argument("--rho", type=float, help="override the rho stored in the file")
    p.add_argument("--points", type=int, default=20, help="sampled points of sp(w0)")

    p = sub.add_parser("verify", parents=[common], help="run the structure check suite")
    p.add_argument("file", nargs="?")
    p.add_argument("--random", type=int, metavar="N", help="verify N generated instances")
    p.add_argument("--dims", default="6", help="H_dim, or H,K,E for INDEFINITE instances")
    p.add_argument("--rho", type=float, help="override the rho stored in the file")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for --random")

    p = sub.add_parser("gen", parents=[common], help="generate a random instance file")
    p.add_argument("--regime", required=True,
                   type=str.upper, choices=[r.name for r in Regime])
    p.add_argument("--dims", required=True, help="H_dim, or H,K,E")
    return parser


COMMANDS = {"interval": cmd_interval, "smooth": cmd_smooth, "interp": cmd_interp,
            "bridge": cmd_bridge, "verify": cmd_verify}


def run(argv: list[str]) -> tuple[int, str]:
    """Execute a command line; returns (exit status, rendered output or error)."""
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            parts = [int(p) for p in args.dims.split(",")]
            dims = parts[0] if len(parts) == 1 else tuple(parts)
            tol = _tolerances(args, Tolerances())
            inst = gen_instance(dims, Regime[args.regime], args.seed, tol)
            return EXIT_OK, render_instance(inst)
        report = COMMANDS[args.command](args, argv)
    except ValidationError as exc:
        return EXIT_INVALID, f"validation error: {exc}\n"
    except (OSError, UnicodeDecodeError) as exc:
        return EXIT_INVALID, f"cannot read input: {exc}\n"
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        return EXIT_NUMERICAL, f"numerical failure: {exc}\n"
    return EXIT_OK, to_json(report) if args.format == "json" else to_text(report)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    code, text = run(argv)
    if code == EXIT_OK:
        _emit(text, build_parser().parse_args(argv).out)
    else:
        sys.stderr.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
