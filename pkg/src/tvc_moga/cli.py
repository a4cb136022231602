"""``tvc-moga`` command line: simulate, optimize, sweep, plot."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import svg
from .config import ConfigError, GainsRef, RunConfig, load_config, sim_to_dict
from .moga import LOG_COLUMNS, evolve
from .simulation import ControllerFitness, objectives, overshoot, rollout, settling_time, Trajectory
from .sweep import (
    COMPROMISE_RULE,
    MATRIX_KEYS,
    POINT_TYPES,
    SweepGrid,
    extract_points,
    front_from_dict,
    front_to_dict,
    matrix_csv,
    points_to_dict,
    report_from_dict,
    report_to_json,
    run_grid,
)

PLOT_KINDS = ("trajectory", "thrust-angle", "pareto", "matrix-bar")


class CliError(Exception):
    pass


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def output_dir(args, cfg: RunConfig) -> Path:
    out = args.out or cfg.output_dir or os.environ.get("TVC_MOGA_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def load_front(path: str | Path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read front JSON {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("kind") != "front":
        raise CliError(f"{path}: expected a 'front' document")
    return front_from_dict(doc["members"]), doc


def resolve_gains(cfg: RunConfig) -> np.ndarray:
    if cfg.gains is None:
        raise CliError("gains: simulate needs 'gains' (six numbers or {\"front\": path, \"point\": A|B|C|index})")
    if isinstance(cfg.gains, GainsRef):
        front, _ = load_front(cfg.gains.front)
        if len(front) == 0:
            raise CliError("empty front")
        point = cfg.gains.point
        if isinstance(point, int):
            if point >= len(front):
                raise CliError(f"gains.point: index {point} out of range for a {len(front)}-member front")
            return front.members[point].genome
        return extract_points(front)[point].genome
    return np.asarray(cfg.gains, dtype=float)


def generation_log_csv(history: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LOG_COLUMNS)
    for row in history:
        w.writerow([row[c] if isinstance(row[c], int) else format(row[c], ".17g") for c in LOG_COLUMNS])
    return buf.getvalue()


def _trajectory_svgs(traj: Trajectory, out: Path, stem: str = "trajectory"):
    (out / f"{stem}_theta.svg").write_text(plot_trajectory(traj, "trajectory"))
    (out / f"{stem}_phi.svg").write_text(plot_trajectory(traj, "thrust-angle"))


def plot_trajectory(traj: Trajectory, kind: str) -> str:
    if kind == "trajectory":
        return svg.line_chart([("theta", traj.t, traj.theta)], "Pitch deviation", "t (s)", "theta (rad)")
    return svg.line_chart([("phi", traj.t, traj.phi)], "Thrust vector angle", "t (s)", "phi (rad)")


def plot_front(front, title: str = "Pareto front") -> str:
    if len(front) == 0:
        raise CliError("empty front")
    pts = extract_points(front)
    F = front.objectives()
    markers = {p: (pts[p].of1, pts[p].of2) for p in POINT_TYPES}
    return svg.scatter_chart(F[:, 0], F[:, 1], title, "OF1 = int |theta| dt", "OF2 = int |phi| dt", markers)


def plot_matrices(report) -> str:
    g = report.grid
    labels = [f"PS={ps}/CF={cf}" for ps in g.ps_values for cf in g.cf_values]
    panels = [(key.replace("_", " "), labels, np.ravel(report.summaries[key]["matrix"]))
              for key in (*MATRIX_KEYS, "hypervolume")]
    return svg.bar_panels(panels, "GA parameters versus objectives at the A/B/C points")


def cmd_simulate(args) -> int:
    cfg = _load(args)
    genome = resolve_gains(cfg)
    traj = rollout(genome, cfg.sim)
    out = output_dir(args, cfg)
    traj.to_csv(out / "trajectory.csv")
    if cfg.plots.get("trajectory", True):
        _trajectory_svgs(traj, out)
    if traj.diverged:
        print(f"warning: rollout diverged (|theta| > 1e3 rad) at t={traj.t[-1]:.4g} s", file=sys.stderr)
    obj = objectives(traj)
    print(f"gains      {' '.join(format(v, '.6g') for v in genome)}")
    print(f"OF1        {obj.of1:.10g}")
    print(f"OF2        {obj.of2:.10g}")
    print(f"settling   {settling_time(traj):.4g} s (2% band)")
    print(f"overshoot  {100 * overshoot(traj):.4g} %")
    print(f"wrote      {out / 'trajectory.csv'}")
    return 0


def front_document(result, sim) -> dict:
    pts = extract_points(result.front)
    return {
        "kind": "front",
        "seed": result.config.rng_seed,
        "cfg": result.config.to_dict(),
        "sim": sim_to_dict(sim),
        "generations": result.generations,
        "stop_reason": result.stop_reason,
        "compromise_rule": COMPROMISE_RULE,
        "points": points_to_dict(pts),
        "members": front_to_dict(result.front),
    }


def cmd_optimize(args) -> int:
    cfg = _load(args)
    ga = cfg.ga if args.seed is None else replace(cfg.ga, rng_seed=args.seed)
    result = evolve(ga, ControllerFitness(cfg.sim))
    out = output_dir(args, cfg)
    doc = front_document(result, cfg.sim)
    (out / "front.json").write_text(_dumps(doc))
    (out / "generations.csv").write_text(generation_log_csv(result.log))
    if cfg.plots.get("pareto", True):
        (out / "pareto.svg").write_text(plot_front(result.front, f"Pareto front (PS={ga.ps}, CF={ga.cf})"))
    print(f"PS={ga.ps} CF={ga.cf} seed={ga.rng_seed} generations={result.generations} ({result.stop_reason}) front={len(result.front)}")
    print(f"{'point':<6}{'OF1':>14}{'OF2':>14}  genome")
    for p in POINT_TYPES:
        m = doc["points"][p]
        print(f"{p:<6}{m['objectives'][0]:>14.6g}{m['objectives'][1]:>14.6g}  " + " ".join(f"{v:.4g}" for v in m["genome"]))
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    settings = cfg.sweep if args.seed is None else replace(cfg.sweep, base_seed=args.seed)
    grid = SweepGrid.from_settings(settings, cfg.ga, cfg.sim)
    jobs = args.jobs or os.cpu_count() or 1
    report = run_grid(grid, jobs=jobs)
    out = output_dir(args, cfg)
    (out / "sweep_report.json").write_text(report_to_json(report))
    mdir = out / "matrices"
    mdir.mkdir(exist_ok=True)
    for key in (*MATRIX_KEYS, "hypervolume"):
        (mdir / f"{key}.csv").write_text(matrix_csv(report, key))
    if cfg.plots.get("matrix", True):
        (out / "sweep_matrices.svg").write_text(plot_matrices(report))
    failed = [c for c in report.cells if not c.ok]
    for c in failed:
        print(f"cell ps={c.ps} cf={c.cf} seed={c.seed} failed: {c.error}", file=sys.stderr)
    print(f"{len(report.cells) - len(failed)}/{len(report.cells)} cells ok; hypervolume reference {report.hv_reference}")
    for key in MATRIX_KEYS:
        a = report.summaries[key]["argmin"]
        tie = " (tie)" if a["tie"] else ""
        print(f"best {key:<7} PS={a['ps']} CF={a['cf']} value={a['value']}{tie}")
    h = report.summaries["hypervolume"]["argmax"]
    print(f"best hypervolume PS={h['ps']} CF={h['cf']} value={h['value']}")
    return 1 if failed and len(failed) == len(report.cells) else 0


def cmd_plot(args) -> int:
    kind, src, dst = args.kind, args.input, args.output
    if args.config:
        spec = json.loads(Path(args.config).read_text())
        unknown = set(spec) - {"kind", "input", "output"}
        if unknown:
            raise CliError(f"{sorted(unknown)[0]}: unknown plot-spec key")
        kind, src, dst = spec.get("kind", kind), spec.get("input", src), spec.get("output", dst)
    if kind not in PLOT_KINDS:
        raise CliError(f"kind: expected one of {', '.join(PLOT_KINDS)}")
    if not src or not dst:
        raise CliError("plot needs an input artifact and an output path")
    if kind in ("trajectory", "thrust-angle"):
        try:
            traj = Trajectory.from_csv(src)
        except ValueError as exc:
            raise CliError(f"expected a trajectory CSV for kind '{kind}': {exc}") from exc
        text = plot_trajectory(traj, kind)
    else:
        try:
            doc = json.loads(Path(src).read_text())
        except json.JSONDecodeError as exc:
            raise CliError(f"expected a JSON artifact for kind '{kind}': {exc}") from exc
        want = "front" if kind == "pareto" else "sweep-report"
        if not isinstance(doc, dict) or doc.get("kind") != want:
            raise CliError(f"expected a '{want}' document for kind '{kind}'")
        text = plot_front(front_from_dict(doc["members"])) if kind == "pareto" else plot_matrices(report_from_dict(doc))
    Path(dst).write_text(text)
    return 0


def _load(args) -> RunConfig:
    if not args.config:
        raise CliError("--config is required")
    return load_config(args.config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tvc-moga", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("simulate", cmd_simulate), ("optimize", cmd_optimize), ("sweep", cmd_sweep), ("plot", cmd_plot)):
        p = sub.add_parser(name)
        p.set_defaults(func=fn)
        p.add_argument("--config", help="run config JSON (plot: optional plot-spec JSON)")
        p.add_argument("--out", help="output directory (fallback: $TVC_MOGA_OUT, then ./out)")
        p.add_argument("--jobs", type=int, default=None, help="parallel sweep cells (default: cores)")
        p.add_argument("--seed", type=int, default=None, help="override the GA / sweep base seed")
        if name == "plot":
            p.add_argument("--kind", choices=PLOT_KINDS)
            p.add_argument("--input")
            p.add_argument("--output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CliError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
