"""Simulate and check gradient-free two-agent level-curve tracking.

Usage::

    curvetrak run <config.json> [--out DIR]
    curvetrak sweep <config.json> [--jobs N] [--out DIR]
    curvetrak plot <trajectory.csv> --field <config.json> --out <file.svg>
    curvetrak validate

Exit codes: 0 success, 1 invalid configuration or failed validation,
2 simulation aborted (degenerate frame or divergence), 3 I/O failure,
4 malformed trajectory file.
"""
from __future__ import annotations

import argparse
import dataclasses
import itertools
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import io as cio
from .analysis import RunSummary
from .config import ExperimentConfig, parse_config, parse_config_dict, set_path
from .errors import ConfigError
from .sim import RNG_ID, run

log = logging.getLogger("curvetrak")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ABORTED = 2
EXIT_IO = 3
EXIT_BAD_TRAJECTORY = 4

MASK64 = (1 << 64) - 1


def mix_index(index: int) -> int:
    """SplitMix64 finaliser applied to ``index``."""
    z = (index + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def sweep_seed(base_seed: int, index: int) -> int:
    return (base_seed ^ mix_index(index)) & MASK64


def cmd_run(config: ExperimentConfig, out_dir: Optional[Path] = None) -> int:
    out_dir = Path(out_dir) if out_dir is not None else config.output_dir
    traj, summary = run(config.sim)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if "trajectory" in config.emit:
            cio.write_trajectory_csv(traj, out_dir / "trajectory.csv")
        if "summary" in config.emit:
            cio.write_summary_json(summary, out_dir / "summary.json")
        if "plot" in config.emit and len(traj):
            from .plot import render_svg
            cols = _csv_columns(traj)
            render_svg(cols, config.sim.field, config.sim.params.z_d, out_dir / "plot.svg")
    except OSError as exc:
        print(f"error: cannot write outputs to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    if summary.aborted:
        print(f"aborted: {summary.abort_reason}", file=sys.stderr)
        return EXIT_ABORTED
    status = "converged" if summary.converged else "did not converge"
    print(f"{status}; {len(traj)} steps written to {out_dir}")
    return EXIT_OK


def _csv_columns(traj):
    c = traj.columns
    return {
        "step": c["step"], "r1x": c["r1"][:, 0], "r1y": c["r1"][:, 1],
        "r2x": c["r2"][:, 0], "r2y": c["r2"][:, 1], "rcx": c["rc"][:, 0], "rcy": c["rc"][:, 1],
    }


def _sweep_one(args):
    raw, overrides, seed = args
    try:
        for path, value in overrides:
            raw = set_path(raw, path, value)
        raw.pop("sweep", None)
        cfg = parse_config_dict(raw)
        sim = dataclasses.replace(cfg.sim, seed=seed)
        _, summary = run(sim)
    except Exception as exc:  # recorded in the aggregate, never fatal
        summary = RunSummary(aborted=True, abort_reason=f"{type(exc).__name__}: {exc}", rng_id=RNG_ID)
    return summary.to_dict()


def cmd_sweep(config: ExperimentConfig, jobs: int = 1, out_dir: Optional[Path] = None) -> int:
    if not config.sweep:
        print("error: sweep: config has no (or an empty) sweep map", file=sys.stderr)
        return EXIT_INVALID
    out_dir = Path(out_dir) if out_dir is not None else config.output_dir
    names = list(config.sweep)
    combos = list(itertools.product(*(config.sweep[n] for n in names)))
    base = dict(config.raw)
    base["seed"] = config.sim.seed
    tasks = [(base, list(zip(names, vals)), sweep_seed(config.sim.seed, i)) for i, vals in enumerate(combos)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    keys = list(RunSummary().to_dict())
    for r in results:
        for k in r:
            if k not in keys:
                keys.append(k)
    rows = [(vals + (seed,), {k: r.get(k) for k in keys})
            for vals, (_, _, seed), r in zip(combos, tasks, results)]
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        cio.write_sweep_csv(out_dir / "sweep.csv", names + ["seed"], rows)
    except OSError as exc:
        print(f"error: cannot write sweep results to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    failed = sum(1 for r in results if r.get("aborted"))
    print(f"{len(results)} runs ({failed} aborted) written to {out_dir / 'sweep.csv'}")
    return EXIT_OK


def cmd_plot(trajectory_csv, field_config, out) -> int:
    from .plot import render_svg

    try:
        cfg = parse_config(field_config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        cols = cio.read_trajectory_csv(trajectory_csv)
    except cio.MalformedTrajectoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_TRAJECTORY
    try:
        render_svg(cols, cfg.sim.field, cfg.sim.params.z_d, out)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out}")
    return EXIT_OK


def cmd_validate(suite=None) -> int:
    from .checks import run_suite

    results, elapsed = run_suite(suite)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed in {elapsed:.1f} s")
    if failed:
        print("failed: " + "; ".join(failed))
        return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvetrak", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one configuration")
    p.add_argument("config")
    p.add_argument("--out", type=Path, help="output directory (overrides output_dir)")

    p = sub.add_parser("sweep", help="run the Cartesian product of the sweep map")
    p.add_argument("config")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path, help="output directory (overrides output_dir)")

    p = sub.add_parser("plot", help="render a trajectory CSV as SVG")
    p.add_argument("trajectory")
    p.add_argument("--field", required=True, help="config file providing the field and z_d")
    p.add_argument("--out", required=True, type=Path)

    sub.add_parser("validate", help="run the numerical self-check suite")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command == "validate":
        return cmd_validate()
    if args.command == "plot":
        return cmd_plot(args.trajectory, args.field, args.out)
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "run":
        return cmd_run(cfg, args.out)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    return cmd_sweep(cfg, args.jobs, args.out)


if __name__ == "__main__":
    sys.exit(main())
