"""Command-line entry point.

Subcommands
-----------
shrink     unnormalized flow run: trace CSV + summary JSON + body snapshots
normalize  normalized flow run, same outputs
soliton    direct Newton solve, writes the report and the solution body
toolkit    static convex-geometry report for one body
validate   run every module's invariant suite, print a table, exit 1 on fail
sweep      repeat shrink/normalize over a theta or alpha grid

Exit codes: 0 success, 1 invariant failure, 2 bad arguments, 3 runtime abort.
Angles are radians (use --theta-deg to convert); every float is printed with
17 significant digits, so identical configs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import body as body_mod
from . import flow
from .convex import build_toolkit_report
from .errors import CapflowError
from .grid import GridMode, build_grid
from .output import fmt17, write_json
from .soliton import newton_solve

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_ABORT = 3


class UsageError(Exception):
    pass


def _parse_kv(spec: str, prefix: str) -> dict:
    out = {}
    rest = spec[len(prefix):]
    if rest.startswith(":"):
        rest = rest[1:]
    if rest:
        for part in rest.split(","):
            if "=" not in part:
                raise UsageError(f"bad parameter {part!r} in {spec!r}")
            k, v = part.split("=", 1)
            out[k] = v
    return out


def make_initial_body(spec: str, grid):
    """cap[:r=..,x0=..] | random:amp=..,modes=..,seed=.. | file:path"""
    if spec.startswith("cap"):
        kv = _parse_kv(spec, "cap")
        return body_mod.cap_body(grid, radius=float(kv.get("r", 1.0)),
                                 center=float(kv.get("x0", 0.0)))
    if spec.startswith("random"):
        kv = _parse_kv(spec, "random")
        try:
            return body_mod.random_body(grid, float(kv["amp"]),
                                        int(kv["modes"]), int(kv["seed"]))
        except KeyError as exc:
            raise UsageError(f"random body needs amp, modes, seed ({exc})")
    if spec.startswith("file:"):
        loaded = body_mod.load_snapshot(spec[5:])
        if loaded.grid.to_dict() != grid.to_dict():
            raise UsageError("snapshot grid does not match the requested grid")
        return loaded
    raise UsageError(f"unknown body spec {spec!r}")


def _add_grid_args(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, default=1, help="surface dimension")
    p.add_argument("--theta", type=float, help="contact angle in radians")
    p.add_argument("--theta-deg", type=float, dest="theta_deg",
                   help="contact angle in degrees (converted)")
    p.add_argument("--nodes", type=int, default=201)
    p.add_argument("--mode", choices=["full1d", "axisymmetric"],
                   help="default: full1d for n=1, axisymmetric otherwise")


def _add_flow_args(p: argparse.ArgumentParser):
    p.add_argument("--init", default="cap:r=1", help="initial body spec")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--tmax", type=float, default=math.inf)
    p.add_argument("--dt-safety", type=float, dest="dt_safety", default=0.2)
    p.add_argument("--dt-cap", type=float, dest="dt_cap", default=1e-3)
    p.add_argument("--stop-u-min", type=float, dest="stop_u_min", default=None)
    p.add_argument("--stop-rate", type=float, dest="stop_rate", default=1e-6)
    p.add_argument("--trace-stride", type=int, dest="trace_stride", default=500)
    p.add_argument("--recenter", type=int, default=None, metavar="PERIOD",
                   help="re-center on the entropy point every PERIOD steps "
                        "(0 disables; normalize defaults to 1000)")
    p.add_argument("--out")


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capflow", description=__doc__)
    parser.add_argument("--config", help="JSON file with argument defaults "
                                         "(same field names as the flags)")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = []

    for name in ("shrink", "normalize"):
        p = sub.add_parser(name)
        subparsers.append(p)
        _add_grid_args(p)
        _add_flow_args(p)

    p = sub.add_parser("soliton")
    subparsers.append(p)
    _add_grid_args(p)
    p.add_argument("--init", default="cap:r=1")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1.0,
                   help="stationary-equation multiplier")
    p.add_argument("--newton-tol", type=float, dest="newton_tol",
                   default=1e-10)
    p.add_argument("--out")

    p = sub.add_parser("toolkit")
    subparsers.append(p)
    _add_grid_args(p)
    p.add_argument("--body", default="cap", help="body spec (as --init)")
    p.add_argument("--out")

    p = sub.add_parser("validate")
    subparsers.append(p)
    p.add_argument("--fast", action="store_true",
                   help="smaller grids / shorter horizons")

    p = sub.add_parser("sweep")
    subparsers.append(p)
    _add_grid_args(p)
    _add_flow_args(p)
    p.add_argument("--run", choices=["shrink", "normalize"], default="shrink")
    p.add_argument("--param", choices=["theta", "alpha"], required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated parameter values")
    if defaults:
        parser.set_defaults(**defaults)
        for sp in subparsers:
            sp.set_defaults(**defaults)
    return parser


def _require_out(args) -> Path:
    if not getattr(args, "out", None):
        raise UsageError("--out is required (flag or config file)")
    return Path(args.out)


def _resolve_theta(args) -> float:
    if args.theta_deg is not None:
        if args.theta is not None:
            raise UsageError("give --theta or --theta-deg, not both")
        return math.radians(args.theta_deg)
    if args.theta is None:
        raise UsageError("--theta (radians) or --theta-deg is required")
    return args.theta


def _make_grid(args, theta=None):
    theta = _resolve_theta(args) if theta is None else theta
    if args.mode is not None:
        mode = GridMode(args.mode)
    else:
        mode = GridMode.FULL1D if args.n == 1 else GridMode.AXISYMMETRIC
    return build_grid(args.n, theta, args.nodes, mode)


def _flow_config(args, normalized: bool, alpha=None) -> flow.FlowConfig:
    recenter = args.recenter
    if recenter is None:
        recenter = 1000 if normalized else 0
    return flow.FlowConfig(
        alpha=args.alpha if alpha is None else alpha,
        normalized=normalized,
        dt_safety=args.dt_safety,
        dt_cap=args.dt_cap,
        t_max=args.tmax,
        stop_u_min=args.stop_u_min,
        stop_rate=args.stop_rate,
        recenter_period=recenter or None,
        trace_stride=args.trace_stride,
    )


def _run_flow(args, normalized: bool, outdir: Path, theta=None,
              alpha=None) -> dict:
    grid = _make_grid(args, theta)
    initial = make_initial_body(args.init, grid)
    config = _flow_config(args, normalized, alpha)
    result = flow.run(initial, config)
    outdir.mkdir(parents=True, exist_ok=True)
    body_mod.write_snapshot(outdir / "body_initial.json", initial,
                            label="initial")
    body_mod.write_snapshot(outdir / "body_final.json",
                            result.final_state.body, label="final")
    flow.write_trace_csv(outdir / "trace.csv", result.traces, grid.n)
    summary = {
        "outcome": result.outcome.to_dict(),
        "T_est": result.outcome.t_est,
        "t_final": result.final_state.t,
        "residual_final": result.traces[-1].res_sup if result.traces else None,
        "config": config.to_dict(),
        "grid": grid.to_dict(),
        "steps": result.final_state.step_index,
        "recenterings": [[t, z] for t, z in result.recenterings],
        "max_volume_correction": result.max_volume_correction,
    }
    write_json(outdir / "summary.json", summary)
    return summary


def cmd_flow(args, normalized: bool) -> int:
    summary = _run_flow(args, normalized, _require_out(args))
    kind = summary["outcome"]["kind"]
    t_est = summary["outcome"]["t_est"]
    extra = f", T_est = {fmt17(t_est)}" if t_est is not None else ""
    print(f"outcome: {kind}{extra}  (t_final = {fmt17(summary['t_final'])}, "
          f"steps = {summary['steps']})")
    return EXIT_ABORT if kind == "aborted" else EXIT_OK


def cmd_soliton(args) -> int:
    grid = _make_grid(args)
    initial = make_initial_body(args.init, grid)
    solution, report = newton_solve(initial, alpha=args.alpha, lam=args.lam,
                                    newton_tol=args.newton_tol)
    outdir = _require_out(args)
    outdir.mkdir(parents=True, exist_ok=True)
    body_mod.write_snapshot(outdir / "body_solution.json", solution,
                            label="soliton")
    write_json(outdir / "soliton_report.json", {
        "residual_sup": report.residual_sup,
        "residual_l2": report.residual_l2,
        "newton_iterations": report.newton_iterations,
        "converged": report.converged,
        "distance_to_cap": report.distance_to_cap,
        "residual_history": list(report.residual_history),
        "grid": grid.to_dict(),
        "alpha": args.alpha,
        "lam": args.lam,
    })
    print(f"converged: {report.converged} after {report.newton_iterations} "
          f"iterations, residual {fmt17(report.residual_sup)}")
    return EXIT_OK if report.converged else EXIT_INVARIANT


def cmd_toolkit(args) -> int:
    grid = _make_grid(args)
    body = make_initial_body(args.body, grid)
    report = build_toolkit_report(body)
    outdir = _require_out(args)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict()
    payload["grid"] = grid.to_dict()
    write_json(outdir / "toolkit_report.json", payload)
    print(f"santalo point {fmt17(payload['santalo_point'][0])}, "
          f"entropy {fmt17(report.entropy_value)}, "
          f"margin {fmt17(report.bs_bound - report.bs_product)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_all
    results = run_all(fast=args.fast)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        if not r.passed:
            failures += 1
        print(f"{r.module:<16} {r.name:<{width}}  {status}  {r.detail}")
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_INVARIANT


def cmd_sweep(args) -> int:
    values = [float(v) for v in args.values.split(",") if v]
    if not values:
        raise UsageError("--values must list at least one number")
    base = _require_out(args)
    normalized = args.run == "normalize"
    summaries = []
    for v in values:
        sub = base / f"{args.param}_{v:.6g}"
        if args.param == "theta":
            summary = _run_flow(args, normalized, sub, theta=v)
        else:
            summary = _run_flow(args, normalized, sub, alpha=v)
        summary["sweep_value"] = v
        summaries.append(summary)
        print(f"{args.param} = {v:.6g}: {summary['outcome']['kind']}")
    write_json(base / "sweep.json", summaries)
    return EXIT_OK


def main(argv=None) -> int:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    try:
        known, _ = pre.parse_known_args(argv)
        defaults = None
        if known.config:
            with open(known.config, "r", encoding="utf-8") as fh:
                defaults = json.load(fh)
        args = build_parser(defaults).parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "shrink":
            return cmd_flow(args, normalized=False)
        if args.command == "normalize":
            return cmd_flow(args, normalized=True)
        if args.command == "soliton":
            return cmd_soliton(args)
        if args.command == "toolkit":
            return cmd_toolkit(args)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapflowError as exc:
        print(f"abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ABORT


def entry() -> None:  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    entry()
