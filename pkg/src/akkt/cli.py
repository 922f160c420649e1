"""Command-line front end.

Exit codes: 0 KKT (or all checks pass), 1 error, 2 infeasible-stationary,
3 AKKT-trending, 4 inconclusive.
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .alm import AlmConfig, alm_solve, config_dict
from .certificates import Certificate, akkt_residuals, is_kkt
from .checks import SUITES, run_suite
from .families import SpecError, build, initial_point, problem_hash
from .io import dumps, read_json, write_json, write_trace

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_AKKT, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
VERDICT_EXIT = {Certificate.KKT: EXIT_OK, Certificate.INFEASIBLE: EXIT_INFEASIBLE,
                Certificate.AKKT: EXIT_AKKT, Certificate.INCONCLUSIVE: EXIT_INCONCLUSIVE}

log = logging.getLogger("akkt")


def _load_spec(path, seed: int | None = None) -> dict:
    try:
        spec = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise SpecError(f"{path}: spec must be a JSON object")
    if seed is not None:
        spec["seed"] = seed
    return spec


def _config(spec: dict, overrides: dict) -> AlmConfig:
    solver = dict(spec.get("solver", {}))
    solver.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return AlmConfig.from_dict(solver)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"invalid solver settings: {exc}") from None


def solve_spec(spec_path, overrides: dict | None = None, seed: int | None = None):
    """Load, build and solve one spec; returns (problem, config, certificate, trace)."""
    spec = _load_spec(spec_path, seed)
    problem = build(spec)
    cfg = _config(spec, overrides or {})
    cert, trace = alm_solve(problem, cfg, x0=initial_point(problem))
    return problem, cfg, cert, trace


def cmd_solve(args) -> int:
    overrides = {"outer_tol_kkt": args.tol_kkt, "outer_tol_feas": args.tol_feas,
                 "max_outer": args.max_outer}
    t0 = time.perf_counter()
    problem, cfg, cert, trace = solve_spec(args.spec, overrides, args.seed)
    elapsed = time.perf_counter() - t0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = problem.name
    trace_path = write_trace(trace, out / f"{stem}.trace.jsonl")
    meta = {"name": problem.name, "problem_hash": problem_hash(problem),
            "spec": problem.spec, "config": config_dict(cfg)}
    write_json(meta, out / f"{stem}.meta.json")
    report = {"name": problem.name, "verdict": cert.verdict,
              "final_record": cert.final_record.summary(),
              "history_summary": cert.history_summary,
              "trace": str(trace_path), "timing": {"wall": elapsed, "solver": trace.elapsed},
              "config": config_dict(cfg), "checks": []}
    write_json(report, out / f"{stem}.report.json")
    rec = cert.final_record
    print(f"{problem.name}: {cert.verdict} after {len(trace.rows)} outer iterations "
          f"({trace.stop_reason})")
    print(f"  eps={rec.eps_residual:.3e} r={rec.r_residual:.3e} feas={rec.feasibility:.3e} "
          f"|lambda|={rec.multiplier_norm:.3e}")
    expo = cert.history_summary.get("multiplier_growth_exponent")
    if expo is not None:
        print(f"  multiplier growth exponent {expo:.3f} "
              f"(bounded trend: {cert.history_summary['bounded_trend']})")
    print(f"  report: {out / f'{stem}.report.json'}")
    return VERDICT_EXIT[cert.verdict]


def cmd_certify(args) -> int:
    problem = build(_load_spec(args.spec, args.seed))
    point = read_json(args.point)
    try:
        x = np.asarray(point["x"], dtype=float)
        lam = np.asarray(point.get("lambda", np.zeros(problem.m)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"point file needs numeric 'x' and 'lambda': {exc}") from None
    if x.shape != (problem.n,) or lam.shape != (problem.m,):
        raise SpecError(f"dimension mismatch: expected x in R^{problem.n} and lambda in "
                        f"R^{problem.m}, got {x.shape} and {lam.shape}")
    tol = 1e-8 if args.tol_kkt is None else args.tol_kkt
    rec = akkt_residuals(problem, x, lam)
    ok = is_kkt(problem, x, lam, tol)
    print(dumps({**rec.summary(), "kkt": ok, "tol": tol}))
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_examples(args) -> int:
    checks = run_suite(args.which)
    width = max(len(f"{c.suite}/{c.name}") for c in checks)
    print(f"{'check':<{width}}  {'expected':>14}  {'actual':>22}  {'tol':>8}  result")
    for c in checks:
        label = f"{c.suite}/{c.name}"
        print(f"{label:<{width}}  {c.expected:>14.8g}  {c.actual:>22.17g}  {c.tol:>8.1e}  "
              f"{'pass' if c.passed else 'FAIL'}   [{c.anchor}]")
        if c.note:
            print(f"{'':<{width}}  note: {c.note}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json({"checks": [c.as_dict() for c in checks]}, out / "examples.report.json")
    n_fail = sum(not c.passed for c in checks)
    print(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return EXIT_OK if n_fail == 0 else EXIT_ERROR


def _bench_one(job):
    path, repeats, seed = job
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        problem, _, cert, trace = solve_spec(path, seed=seed)
        times.append(time.perf_counter() - t0)
    rec = cert.final_record
    return {"spec": str(path), "name": problem.name, "median_seconds": statistics.median(times),
            "repeats": repeats, "verdict": cert.verdict, "outer_iterations": len(trace.rows),
            "inner_iterations": int(sum(r.inner_iters for r in trace.rows)),
            "eps_residual": rec.eps_residual, "r_residual": rec.r_residual,
            "feasibility": rec.feasibility}


def cmd_bench(args) -> int:
    paths = sorted(glob.glob(args.spec_glob))
    if not paths:
        print(f"error: no spec matches {args.spec_glob!r}", file=sys.stderr)
        return EXIT_ERROR
    jobs = [(p, args.repeats, args.seed) for p in paths]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    for row in rows:
        print(dumps(row))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json({"rows": rows}, out / "bench.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="akkt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log outer iterations")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the spec seed")

    p = sub.add_parser("solve", parents=[common], help="run the safeguarded ALM on a spec")
    p.add_argument("spec")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--tol-kkt", type=float, default=None)
    p.add_argument("--tol-feas", type=float, default=None)
    p.add_argument("--max-outer", type=int, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", parents=[common], help="evaluate residuals at a given point")
    p.add_argument("spec")
    p.add_argument("point", help='JSON file {"x": [...], "lambda": [...]}')
    p.add_argument("--tol-kkt", type=float, default=None, help="KKT tolerance (default 1e-8)")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("examples", help="run the reproduction checks")
    p.add_argument("which", nargs="?", default="all", choices=("all",) + SUITES)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("bench", parents=[common], help="time the solver on matching specs")
    p.add_argument("spec_glob")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1, help="worker processes (one spec each)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (SpecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
