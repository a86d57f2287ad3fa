"""Command-line front door.

Subcommands: solve, sweep, build-grid, simulate, serve, replay.
Exit codes: 0 success, 1 contract/validation failure, 2 non-convergence.
CSV output uses a fixed column order with '.' decimals regardless of locale.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

from .chain import Direction, load_chain
from .defaults import default_chain, default_composition, default_expressions
from .ebps import build_grid_from_erik, direction_from_yaw_pitch, save_grids
from .erik import ErikSettings, erik_solve, load_expressions
from .errors import ContractViolationError, CorruptLogError, LoadError
from .game import Condition, load_composition, metrics, phase_to_dict
from .session import replay_session_log
from .defaults import default_layout
from .simulation import (
    ExpressionClassifier,
    SimulationStack,
    default_stack,
    run_experiment,
    summary_text,
    write_results_csv,
    write_summary_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NOT_CONVERGED = 2

SWEEP_COLUMNS = (
    "expression", "yaw_deg", "pitch_deg", "angle_error_rad",
    "posture_divergence_rad", "iterations", "converged", "solve_time_us",
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--chain", help="chain description JSON (default: built-in desk chain)")
    parser.add_argument("--config", help="config JSON with defaults for this command")
    parser.add_argument("--seed", type=int, default=7, help="seed for anything randomized")
    parser.add_argument("--out", help="output file (default: stdout where sensible)")


def _config_overlay(args) -> dict:
    if not args.config:
        return {}
    try:
        with open(args.config) as fh:
            return json.load(fh)
    except OSError as exc:
        raise LoadError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"config {args.config} is not valid JSON: {exc}") from exc


def _setting(args, overlay: dict, key: str, fallback=None):
    """Flags beat config-file values beat the fallback."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    if key in overlay:
        return overlay[key]
    return fallback


def _load_chain(args, overlay):
    path = _setting(args, overlay, "chain")
    return load_chain(path) if path else default_chain()


def _load_expressions(args, overlay, chain):
    path = _setting(args, overlay, "expressions")
    return load_expressions(path, chain) if path else default_expressions(chain)


def _degree_range(lo: float, hi: float, step: float) -> list[float]:
    values = []
    v = lo
    while v <= hi + 1e-9:
        values.append(round(v, 9))
        v += step
    if values[-1] != hi:
        values.append(hi)
    return values


def cmd_solve(args) -> int:
    overlay = _config_overlay(args)
    chain = _load_chain(args, overlay)
    expressions = _load_expressions(args, overlay, chain)
    if args.expression not in expressions:
        raise LoadError(f"unknown expression {args.expression!r}; have {sorted(expressions)}")
    settings = ErikSettings(
        tolerance=math.radians(args.tolerance_deg),
        max_iterations=args.max_iterations,
        record_trace=bool(args.trace),
    )
    target = Direction(direction_from_yaw_pitch(args.yaw, args.pitch))
    posture, report = erik_solve(chain, expressions[args.expression], target, settings)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "error_rad"])
            for i, err in enumerate(report.trace or (), start=1):
                writer.writerow([i, f"{err:.9f}"])
    result = {
        "expression": args.expression,
        "yaw_deg": args.yaw,
        "pitch_deg": args.pitch,
        "angles_deg": list(posture.degrees()),
        "angle_error_rad": report.angle_error,
        "posture_divergence_rad": report.posture_divergence,
        "iterations": report.iterations,
        "converged": report.converged,
    }
    text = json.dumps(result, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_sweep(args) -> int:
    overlay = _config_overlay(args)
    chain = _load_chain(args, overlay)
    expressions = _load_expressions(args, overlay, chain)
    yaw_step = args.step if args.step is not None else args.yaw_step
    pitch_step = args.step if args.step is not None else args.pitch_step
    yaws = _degree_range(-70.0, 70.0, yaw_step)
    pitches = _degree_range(0.0, 80.0, pitch_step)
    settings = ErikSettings()
    rows = []
    any_failed = False
    for name in sorted(expressions):
        expr = expressions[name]
        for yaw in yaws:
            for pitch in pitches:
                target = Direction(direction_from_yaw_pitch(yaw, pitch))
                t0 = time.perf_counter()
                _, report = erik_solve(chain, expr, target, settings)
                elapsed_us = (time.perf_counter() - t0) * 1e6
                if not report.converged:
                    any_failed = True
                rows.append([
                    name, f"{yaw:g}", f"{pitch:g}", f"{report.angle_error:.9f}",
                    f"{report.posture_divergence:.9f}", report.iterations,
                    int(report.converged), f"{elapsed_us:.1f}",
                ])
    out = args.out or "-"
    stream = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        writer = csv.writer(stream)
        writer.writerow(SWEEP_COLUMNS)
        writer.writerows(rows)
    finally:
        if stream is not sys.stdout:
            stream.close()
    if any_failed:
        print("sweep contains non-converged cells", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_build_grid(args) -> int:
    overlay = _config_overlay(args)
    chain = _load_chain(args, overlay)
    expressions = _load_expressions(args, overlay, chain)
    grids = {name: build_grid_from_erik(chain, expr) for name, expr in sorted(expressions.items())}
    out = args.out or "grids.json"
    save_grids(grids, out)
    print(f"wrote {len(grids)} grids ({sum(g.knot_count for g in grids.values())} knots) to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    conditions = []
    for raw in args.conditions.split(","):
        raw = raw.strip()
        try:
            conditions.append(Condition(raw))
        except ValueError:
            raise LoadError(f"unknown condition {raw!r}; valid: c-erik, c-ebps, c-control")
    overlay = _config_overlay(args)
    comp_path = _setting(args, overlay, "composition")
    composition = load_composition(comp_path) if comp_path else default_composition()
    chain_path = _setting(args, overlay, "chain")
    if chain_path:
        chain = load_chain(chain_path)
        expressions = _load_expressions(args, overlay, chain)
        grids = {name: build_grid_from_erik(chain, expr) for name, expr in expressions.items()}
        stack = SimulationStack(
            chain=chain, expressions=expressions, grids=grids,
            layout=default_layout(), classifier=ExpressionClassifier(chain, grids),
        )
    else:
        stack = default_stack()
    result = run_experiment(
        conditions=conditions,
        policies=args.policy,
        episodes_per_cell=args.episodes,
        seed=args.seed,
        composition=composition,
        dt=args.dt,
        stack=stack,
    )
    out = args.out or "results.csv"
    write_results_csv(result, out)
    summary_path = args.summary or (os.path.splitext(out)[0] + "_summary.csv")
    write_summary_csv(result, summary_path)
    print(summary_text(result))
    print(f"\nwrote {out} and {summary_path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    overlay = _config_overlay(args)
    port = int(_setting(args, overlay, "port", os.environ.get("AVANTSATIE_PORT", 8080)))
    host = _setting(args, overlay, "host", os.environ.get("AVANTSATIE_BIND", "127.0.0.1"))
    log_dir = _setting(args, overlay, "log_dir", "session_logs")
    static = _setting(args, overlay, "static")
    serve(host=host, port=port, log_dir=log_dir, static_dir=static)
    return EXIT_OK


def cmd_replay(args) -> int:
    final_state, comparison = replay_session_log(args.log)
    print(json.dumps({
        "phase": phase_to_dict(final_state.phase),
        "metrics": comparison["replayed"],
        "logged_metrics": comparison["logged"],
    }, indent=2))
    if comparison["logged"] is not None and comparison["logged"] != comparison["replayed"]:
        print("replayed metrics do not match the logged metrics", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avantsatie",
        description="Expressive IK solver stack and the hot/cold piano game.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one expression toward one gaze target")
    _add_common(p)
    p.add_argument("--expressions", help="expression set JSON (default: built-ins)")
    p.add_argument("--expression", default="neutral")
    p.add_argument("--yaw", type=float, default=0.0, help="target yaw, degrees")
    p.add_argument("--pitch", type=float, default=25.0, help="target pitch, degrees")
    p.add_argument("--tolerance-deg", type=float, default=1.0)
    p.add_argument("--max-iterations", type=int, default=30)
    p.add_argument("--trace", help="debug: write per-iteration (iteration, error) CSV here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve the gaze envelope, one CSV row per cell")
    _add_common(p)
    p.add_argument("--expressions", help="expression set JSON (default: built-ins)")
    p.add_argument("--step", type=float, default=None,
                   help="set both yaw and pitch steps (degrees)")
    p.add_argument("--yaw-step", type=float, default=10.0)
    p.add_argument("--pitch-step", type=float, default=80.0,
                   help="default spans just the two authored pitch knots")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("build-grid", help="author posture grids by solving at every knot")
    _add_common(p)
    p.add_argument("--expressions", help="expression set JSON (default: built-ins)")
    p.set_defaults(func=cmd_build_grid)

    p = sub.add_parser("simulate", help="run seeded player episodes per condition")
    _add_common(p)
    p.add_argument("--conditions", default="c-erik,c-ebps,c-control")
    p.add_argument("--policy", default="auto", help="auto | random | hint | fallback-scan")
    p.add_argument("--episodes", type=int, default=19)
    p.add_argument("--dt", type=float, default=0.1, help="simulation tick, seconds")
    p.add_argument("--composition", help="composition JSON (default: built-in)")
    p.add_argument("--summary", help="summary CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="host interactive sessions over HTTP + WebSocket")
    _add_common(p)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--log-dir", default=None)
    p.add_argument("--static", help="directory of client files to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-execute a session log and print its metrics")
    _add_common(p)
    p.add_argument("log", help="session JSONL log file")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CorruptLogError as exc:
        print(f"corrupt log: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (LoadError, ContractViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
