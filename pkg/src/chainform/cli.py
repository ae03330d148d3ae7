"""Command-line entry points: run, sweep, serve, render.

Exit codes: 0 success, 1 input/configuration error, 2 solver
non-convergence. Log level comes from the CHAINFORM_LOG environment
variable (DEBUG/INFO/WARNING/ERROR, default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

from .errors import ChainformError, NonConvergenceError
from .runner import run_scenario, run_sweep, sweep_report
from .scenario import (
    ScenarioFile,
    SvgStyle,
    load_scenario,
    read_trajectory,
    render_svg,
    write_trajectory,
)

log = logging.getLogger("chainform")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGENCE = 2


def bundled_scenario_names() -> list[str]:
    root = resources.files("chainform") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_scenario_path(name: str) -> Path:
    return Path(str(resources.files("chainform") / "scenarios" / f"{name}.json"))


def resolve_scenario(spec: str) -> ScenarioFile:
    """Load a scenario from a path, or by bundled name when no file matches."""
    path = Path(spec)
    if path.exists():
        return load_scenario(path)
    bundled = bundled_scenario_path(spec.removesuffix(".json"))
    if bundled.exists():
        return load_scenario(bundled)
    raise ChainformError(
        f"scenario {spec!r} is neither a file nor a bundled name "
        f"(bundled: {', '.join(bundled_scenario_names())})"
    )


def _write_svg_frames(frames, out_dir: Path, every: int) -> None:
    svg_dir = out_dir / "frames"
    svg_dir.mkdir(parents=True, exist_ok=True)
    style = SvgStyle()
    for rec in frames:
        if rec.frame % every == 0 or rec is frames[-1]:
            (svg_dir / f"frame_{rec.frame:06d}.svg").write_text(
                render_svg(rec, style), encoding="utf-8"
            )


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_run(args) -> int:
    scenario = resolve_scenario(args.scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        run = run_scenario(scenario)
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    outputs = scenario.outputs
    if outputs.csv:
        write_trajectory(run.frames, out_dir / "trajectory.csv")
    if outputs.metrics:
        _dump_json(run.metrics_report(), out_dir / "metrics.json")
    if outputs.svg or args.svg:
        (out_dir / "final.svg").write_text(render_svg(run.frames[-1]), encoding="utf-8")
        if args.frames_every:
            _write_svg_frames(run.frames, out_dir, args.frames_every)
    if outputs.figures or args.figures:
        from .figures import save_run_figures

        save_run_figures(run, out_dir / "figures")
    log.info("run %s: %d frames -> %s", scenario.name, len(run.frames), out_dir)
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = resolve_scenario(args.scenario)
    param = args.param or (scenario.sweep.param if scenario.sweep else None)
    if param is None:
        print("no sweep parameter: pass --param or use a scenario with a sweep block",
              file=sys.stderr)
        return EXIT_INPUT
    if args.values:
        values = [float(v) for v in args.values.split(",")]
    elif scenario.sweep and scenario.sweep.param == param:
        values = list(scenario.sweep.values)
    else:
        print(f"no values for sweep over {param!r}: pass --values", file=sys.stderr)
        return EXIT_INPUT

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = run_sweep(scenario, param, values)
    report = sweep_report(scenario, param, results)
    _dump_json(report, out_dir / "sweep_report.json")

    failed = False
    for value, res in results:
        tag = f"{param}={value:g}"
        if isinstance(res, Exception):
            failed = True
            print(f"  {tag}: FAILED ({res})", file=sys.stderr)
            continue
        sub_dir = out_dir / tag
        sub_dir.mkdir(parents=True, exist_ok=True)
        write_trajectory(res.frames, sub_dir / "trajectory.csv")
        _dump_json(res.metrics_report(), sub_dir / "metrics.json")
        print(f"  {tag}: ok ({len(res.frames)} frames)")
    from .figures import save_sweep_figure

    save_sweep_figure(scenario.name, param, results, out_dir / "figures")
    if failed:
        print("status table written to sweep_report.json", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_render(args) -> int:
    frames = read_trajectory(args.trajectory)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    every = args.frames_every or 1
    _write_svg_frames(frames, out_dir, every)
    (out_dir / "final.svg").write_text(render_svg(frames[-1]), encoding="utf-8")
    print(f"rendered {len(frames)} frames (every {every}) to {out_dir}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    scenario_dir = Path(args.scenarios) if args.scenarios else None
    app = create_app(scenario_dir=scenario_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainform",
        description="Displacement-driven geometry prediction for tensile chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario to completion")
    p_run.add_argument("--scenario", required=True,
                       help="scenario file path or bundled scenario name")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--svg", action="store_true", help="write SVG output")
    p_run.add_argument("--figures", action="store_true", help="write report figures")
    p_run.add_argument("--frames-every", type=int, default=0, metavar="K",
                       help="with --svg, also write every K-th frame as SVG")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--param", choices=("k", "l", "theta"),
                         help="swept parameter (defaults to the scenario's sweep block)")
    p_sweep.add_argument("--values", help="comma-separated values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_render = sub.add_parser("render", help="render SVG frames from a trajectory CSV")
    p_render.add_argument("--trajectory", required=True, help="trajectory.csv path")
    p_render.add_argument("--out", required=True)
    p_render.add_argument("--frames-every", type=int, default=0, metavar="K")
    p_render.set_defaults(func=cmd_render)

    p_serve = sub.add_parser("serve", help="start the interactive session service")
    p_serve.add_argument("--port", type=int, default=8742)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--scenarios", help="directory of scenario files "
                                             "(defaults to the bundled set)")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("CHAINFORM_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ChainformError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
