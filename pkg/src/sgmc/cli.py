"""Command-line surface: solve one instance, sweep a parameter line,
enumerate the zone graph, or run the cross-oracle verification suite.

Exit codes: 0 success, 1 input error, 2 numerical non-convergence or failed
verification, 3 truncation/incomplete enumeration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .candidate import eqnq_membership, strictly_inside
from .elars import (
    EnumerationConfig,
    InitializationError,
    PathSegment,
    PathSweepResult,
    enumerate_zones,
    evaluate_path,
    initialize_indicator,
    line_from_dict,
    path_sweep,
)
from .sweep import ParameterLine
from .model import (
    INDEX_CONVENTION,
    ProblemInstance,
    indicator_to_string,
    load_instance,
    load_matrix_csv,
)
from .optimality import check_opt, encode_sopt, l1_bound_holds, summarize
from .oracle import (
    NonConvergenceError,
    OracleConfig,
    min_norm_over_eqnq,
    solve_saddle,
)

HEADER = {"version": f"sgmc-{__version__}", "index_convention": INDEX_CONVENTION}


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",") if v.strip() != ""])


def _load_problem(args) -> ProblemInstance:
    if args.instance:
        return load_instance(args.instance)
    if not args.matrix_csv:
        raise ValueError("either --instance or --matrix-csv is required")
    if args.y is None or args.lam is None:
        raise ValueError("--matrix-csv mode needs --y and --lambda")
    A = load_matrix_csv(args.matrix_csv)
    return ProblemInstance(
        A=A,
        rho=args.rho,
        y=_parse_vector(args.y),
        r=None if args.r is None else _parse_vector(args.r),
        lam=args.lam,
    )


def _write_json(path: str | None, payload: dict):
    text = json.dumps({**HEADER, **payload}, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _add_instance_flags(p: argparse.ArgumentParser):
    p.add_argument("--instance", help="JSON instance file")
    p.add_argument("--matrix-csv", help="CSV file holding A (alternative to --instance)")
    p.add_argument("--y", help="comma-separated y (CSV mode)")
    p.add_argument("--r", help="comma-separated r (CSV mode, optional)")
    p.add_argument("--lambda", dest="lam", type=float, help="lambda (CSV mode)")
    p.add_argument("--rho", type=float, default=0.0, help="rho (CSV mode, default 0)")
    p.add_argument("--out", help="output JSON path (stdout when omitted)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)


def cmd_solve(args) -> int:
    inst = _load_problem(args)
    cfg = OracleConfig(tol=max(args.tol, 1e-12))
    converged = True
    try:
        w = solve_saddle(inst, cfg)
    except NonConvergenceError as exc:
        w = exc.w if exc.w is not None else np.zeros(2 * inst.n)
        converged = False
    report = check_opt(inst, w, tol=args.tol)
    summary = summarize(inst, w)
    _write_json(
        args.out,
        {
            "w": w.tolist(),
            "indicator": indicator_to_string(encode_sopt(inst, w, tol=max(args.tol, 10 * cfg.tol))),
            "beta_e": summary.beta_e.tolist(),
            "gamma_e": summary.gamma_e,
            "opt_report": report.to_dict(),
            "converged": converged,
        },
    )
    return 0 if converged else 2


def _resolve_init(inst, line, t_start, strategy, tol):
    b0, lam0 = line.point_at(t_start)
    if strategy in ("auto", "zero"):
        try:
            return initialize_indicator(inst, b0, lam0, strategy="zero", tol=tol)
        except ValueError:
            if strategy == "zero":
                raise
    return initialize_indicator(inst, b0, lam0, strategy="from_oracle", tol=tol)


def cmd_path(args) -> int:
    inst = _load_problem(args)
    delta_b = (
        _parse_vector(args.delta_b) if args.delta_b else np.zeros(2 * inst.m)
    )
    if delta_b.size == inst.m:  # y-only velocity: keep r fixed
        delta_b = np.concatenate([delta_b, np.zeros(inst.m)])
    line = ParameterLine(inst.b, inst.lam, delta_b, args.delta_lambda)
    s_init = _resolve_init(inst, line, args.t_start, args.init, args.tol)
    result = path_sweep(
        inst,
        line,
        s_init,
        t_start=args.t_start,
        t_end=args.t_end if args.t_end is not None else math.inf,
        max_segments=args.max_segments,
    )
    _write_json(args.out, result.to_dict())
    if args.csv_out:
        _write_path_csv(args.csv_out, inst, line, result, args.grid)
    return 3 if result.truncated else 0


def _write_path_csv(path, inst, line, result: PathSweepResult, grid: int):
    if not result.segments:
        return
    t0 = result.segments[0].t_start
    t1 = result.segments[-1].t_end
    if math.isinf(t1):
        t1 = result.segments[-1].t_start + 1.0
    ts = np.linspace(t0, t1, grid)
    with open(path, "w") as fh:
        labels = ",".join(f"w_{i}" for i in range(2 * inst.n))
        fh.write(f"t,lambda,{labels}\n")
        for t in ts:
            w = evaluate_path(result, t)
            if w is None:
                continue
            row = ",".join(repr(float(v)) for v in w)
            fh.write(f"{float(t)!r},{float(line.lam_at(t))!r},{row}\n")


def cmd_enumerate(args) -> int:
    inst = _load_problem(args)
    config = EnumerationConfig(
        r_y=args.r_y,
        delta_lambda_min=args.delta_lambda_min,
        max_nodes=args.max_nodes,
        n_coverage=args.coverage_samples,
        seed=args.seed,
        workers=args.workers,
    )
    graph = enumerate_zones(inst, config)
    _write_json(args.out, graph.to_dict())
    return 3 if graph.incomplete else 0


def _verify_checks(inst: ProblemInstance, args):
    """Cross-oracle invariant suite on one instance; yields (name, ok, detail)."""
    cfg = OracleConfig(tol=min(args.tol, 1e-9))
    w = solve_saddle(inst, cfg)
    rep = check_opt(inst, w, tol=1e-9)
    yield "saddle_optimality", rep.worst_violation <= 1e-7, f"violation {rep.worst_violation:.2e}"
    yield "l1_bound", l1_bound_holds(inst, w), ""

    rng = np.random.default_rng(args.seed)
    pattern = indicator_to_string(encode_sopt(inst, w, tol=1e-8))
    stable = True
    for _ in range(2):
        w_alt = solve_saddle(inst, cfg, w0=rng.normal(size=2 * inst.n))
        if indicator_to_string(encode_sopt(inst, w_alt, tol=1e-8)) != pattern:
            stable = False
    yield "indicator_invariance", stable, pattern

    lam_max = float(np.abs(inst.matrices.C.T @ inst.b).max())
    if lam_max <= 0:
        yield "path_continuity", True, "zero signal, single zone"
        return
    lam0 = 1.05 * lam_max
    line = ParameterLine(inst.b, lam0, np.zeros(2 * inst.m), -1.0)
    result = path_sweep(inst, line, initialize_indicator(inst, inst.b, lam0), t_start=0.0)
    breaks_ok = True
    for a, b in zip(result.segments, result.segments[1:]):
        jump = np.abs(a.weq_at(a.t_end) - b.weq_at(b.t_start)).max()
        breaks_ok = breaks_ok and jump <= 1e-8
    yield "path_continuity", breaks_ok, f"{len(result.segments)} segments"

    opt_ok = True
    worst = 0.0
    for seg in result.segments:
        t_hi = seg.t_end if math.isfinite(seg.t_end) else seg.t_start + 1.0
        for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
            t = seg.t_start + frac * (t_hi - seg.t_start)
            probe = inst.with_params(b=line.b_at(t), lam=line.lam_at(t))
            v = check_opt(probe, seg.weq_at(t)).worst_violation
            worst = max(worst, v)
            opt_ok = opt_ok and v <= 1e-7
    yield "path_optimality", opt_ok, f"worst {worst:.2e}"

    agree_ok = True
    detail = ""
    for frac in (0.25, 0.5, 0.75):
        lam_t = frac * lam0
        t = (lam0 - lam_t) / 1.0
        w_path = evaluate_path(result, t)
        if w_path is None:
            continue
        probe = inst.with_params(lam=lam_t)
        w_it = solve_saddle(probe, cfg)
        s_path = summarize(probe, w_path)
        s_it = summarize(probe, w_it)
        gap = max(
            float(np.abs(s_path.beta_e - s_it.beta_e).max()),
            abs(s_path.gamma_e - s_it.gamma_e),
        )
        detail = f"gap {gap:.2e}"
        agree_ok = agree_ok and gap <= 1e-5
    yield "cross_oracle_agreement", agree_ok, detail

    mid = result.segments[len(result.segments) // 2]
    t_hi = mid.t_end if math.isfinite(mid.t_end) else mid.t_start + 1.0
    t_mid = 0.5 * (mid.t_start + t_hi)
    b_mid, lam_mid = line.point_at(t_mid)
    if strictly_inside(inst, mid.s, b_mid, lam_mid):
        probe = inst.with_params(b=b_mid, lam=lam_mid)
        w_mn = min_norm_over_eqnq(probe, mid.s)
        gap = float(np.abs(w_mn - mid.weq_at(t_mid)).max())
        yield "min_norm_agreement", gap <= 1e-6, f"gap {gap:.2e}"
    else:
        yield "min_norm_agreement", True, "no strictly interior sample"


def _verify_segments_file(inst: ProblemInstance, path: str):
    with open(path) as fh:
        data = json.load(fh)
    segments = [PathSegment.from_dict(d) for d in data["segments"]]
    line = line_from_dict(data["line"])
    cont_ok = True
    for a, b in zip(segments, segments[1:]):
        if np.abs(a.weq_at(a.t_end) - b.weq_at(b.t_start)).max() > 1e-8:
            cont_ok = False
    yield "segments_continuity", cont_ok, f"{len(segments)} segments"
    spot_ok = True
    for seg in segments:
        t_hi = seg.t_end if math.isfinite(seg.t_end) else seg.t_start + 1.0
        t = 0.5 * (seg.t_start + t_hi)
        b_t, lam_t = line.point_at(t)
        if lam_t <= 0:
            continue
        probe = inst.with_params(b=b_t, lam=lam_t)
        w = seg.weq_at(t)
        if not eqnq_membership(probe, seg.s, w, tol=1e-6):
            spot_ok = False
        if check_opt(probe, w).worst_violation > 1e-6:
            spot_ok = False
    yield "segments_spot_checks", spot_ok, ""


def cmd_verify(args) -> int:
    inst = _load_problem(args)
    rows = list(_verify_checks(inst, args))
    if args.segments:
        rows.extend(_verify_segments_file(inst, args.segments))
    width = max(len(name) for name, *_ in rows)
    all_ok = True
    for name, ok, detail in rows:
        flag = "ok  " if ok else "FAIL"
        print(f"{flag}  {name:<{width}}  {detail}")
        all_ok = all_ok and ok
    if args.out:
        _write_json(
            args.out,
            {"checks": [{"name": n, "ok": bool(ok), "detail": d} for n, ok, d in rows]},
        )
    return 0 if all_ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgmc",
        description="Piecewise-linear min-norm solution maps of the sGMC/LASSO model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance and certify optimality")
    _add_instance_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_path = sub.add_parser("path", help="piecewise-linear path along a parameter line")
    _add_instance_flags(p_path)
    p_path.add_argument("--delta-b", help="comma-separated velocity of b (or of y alone)")
    p_path.add_argument("--delta-lambda", type=float, default=0.0)
    p_path.add_argument("--t-start", type=float, default=0.0)
    p_path.add_argument("--t-end", type=float, default=None)
    p_path.add_argument("--max-segments", type=int, default=64)
    p_path.add_argument("--init", choices=("auto", "zero", "oracle"), default="auto")
    p_path.add_argument("--csv-out", help="plot-ready CSV of (t, lambda, w)")
    p_path.add_argument("--grid", type=int, default=201)
    p_path.set_defaults(func=cmd_path)

    p_enum = sub.add_parser("enumerate", help="breadth-first zone-graph enumeration")
    _add_instance_flags(p_enum)
    p_enum.add_argument("--r-y", type=float, required=True)
    p_enum.add_argument("--delta-lambda-min", type=float, required=True)
    p_enum.add_argument("--max-nodes", type=int, default=256)
    p_enum.add_argument("--coverage-samples", type=int, default=64)
    p_enum.add_argument("--workers", type=int, default=None)
    p_enum.set_defaults(func=cmd_enumerate)

    p_verify = sub.add_parser("verify", help="cross-oracle invariant suite")
    _add_instance_flags(p_verify)
    p_verify.add_argument("--segments", help="path JSON to spot-check")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InitializationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
