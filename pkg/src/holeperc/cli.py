"""``holeperc`` command line.

Exit codes: 0 success, 1 invariant or verification failure, 2 usage error.
Any long option can also come from a ``--config`` file of ``key=value`` lines;
flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import estimators
from .config import SimulationParams, load_snapshot, sample_configuration, save_snapshot
from .errors import InvariantViolation
from .holes import build_hole_graph, hole_graph_summary, write_hole_graph
from .lattice import DualVertex
from .report import FORMAT_VERSION, reports_to_json, rows_to_csv, sweep_rows, sweep_to_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _coords(text: str) -> DualVertex:
    try:
        return DualVertex(tuple(int(x) for x in text.split(",")))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_params(p: argparse.ArgumentParser, need_p=True):
    p.add_argument("--d", type=int, default=2, help="lattice dimension")
    p.add_argument("--n", type=int, default=8, help="window radius")
    if need_p:
        p.add_argument("--p", type=float, default=0.5, help="face-open probability")
    p.add_argument("--seed", type=int, default=0)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value defaults file")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (env HOLEPERC_JOBS)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="holeperc", description="Hole percolation on the cubical lattice.")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="Monte Carlo estimates, one row per quantity")
    _add_params(e)
    _add_common(e)
    e.add_argument("--quantity", help="quantity name, or several separated by commas")
    e.add_argument("--reps", type=int, default=100)
    e.add_argument("--dual-p", type=float, help="dual-bond probability (kappa only)")
    e.add_argument("--per-vertex", action="store_true", help="ergodic theta_bond")
    e.add_argument("--x", type=_coords, help="first dual vertex, e.g. 0,0")
    e.add_argument("--y", type=_coords, help="second dual vertex")
    e.add_argument("--n-values", type=_int_list, help="window ladder for spanning_hole_clusters")
    e.add_argument("--format", choices=("csv", "json"), default="csv")
    e.add_argument("--out", help="output file (default stdout)")

    s = sub.add_parser("sweep", help="spanning curves and crossing estimates")
    _add_common(s)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--n-list", type=_int_list, default=[16, 32, 64])
    s.add_argument("--p-grid", type=_float_list, help="explicit grid (overrides min/max/step)")
    s.add_argument("--p-min", type=float, default=0.40)
    s.add_argument("--p-max", type=float, default=0.60)
    s.add_argument("--p-step", type=float, default=0.01)
    s.add_argument("--reps", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--audit", type=int, default=2, help="replicates re-checked by direct labelling")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")

    v = sub.add_parser("verify", help="randomised invariant suite")
    v.add_argument("--config")
    v.add_argument("--d", type=_int_list, default=[2, 3], help="dimensions, e.g. 2,3")
    v.add_argument("--max-n", type=int, default=4)
    v.add_argument("--seeds", type=int, default=500)
    v.add_argument("--seed", type=int, default=0, help="first seed")
    v.add_argument("--inject-fault", action="store_true",
                   help="negative control: flip face 0 after sampling for the hole code")

    r = sub.add_parser("render", help="SVG picture of a d=2 configuration")
    _add_params(r)
    r.add_argument("--config")
    r.add_argument("--replicate", type=int, default=0)
    r.add_argument("--snapshot", help="render this snapshot instead of sampling")
    r.add_argument("--format", choices=("svg",), default="svg")
    r.add_argument("--out", required=False)

    sn = sub.add_parser("snapshot", help="save or inspect configuration files")
    ssub = sn.add_subparsers(dest="action", required=True)
    sv = ssub.add_parser("save", help="sample a configuration and save it")
    _add_params(sv)
    sv.add_argument("--config")
    sv.add_argument("--replicate", type=int, default=0)
    sv.add_argument("--out", required=True)
    si = ssub.add_parser("info", help="print a JSON summary of a snapshot")
    si.add_argument("path")
    sh = ssub.add_parser("holes", help="export the hole graph of a snapshot")
    sh.add_argument("path")
    sh.add_argument("--adjacency", required=True)
    sh.add_argument("--summary", required=True)
    ap.set_defaults(_subs={"estimate": e, "sweep": s, "verify": v, "render": r, "save": sv, "info": si, "holes": sh})
    return ap


def _load_config(path: str) -> dict:
    vals = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key=value")
        k, v = (x.strip() for x in line.split("=", 1))
        vals[k.replace("-", "_")] = v
    return vals


def parse_args(argv):
    """Parse with optional config-file defaults that explicit flags override."""
    ap = build_parser()
    args = ap.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if not cfg_path:
        return ap, args
    try:
        vals = _load_config(cfg_path)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    sp = args._subs[getattr(args, "action", None) or args.command]
    known = {a.dest: a for a in sp._actions}
    defaults = {}
    for k, raw in vals.items():
        if k not in known or k in ("help", "config"):
            raise UsageError(f"unknown config key {k!r}")
        act = known[k]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[k] = raw.lower() in ("1", "true", "yes", "on")
        elif act.type is not None:
            try:
                defaults[k] = act.type(raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad value for {k}: {exc}")
        else:
            defaults[k] = raw
    sp.set_defaults(**defaults)
    return ap, ap.parse_args(argv)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _quantities(args) -> list[str]:
    qs = [x.strip() for x in (args.quantity or "").split(",") if x.strip()]
    if not qs:
        raise UsageError("--quantity is required")
    for q in qs:
        if q not in estimators.QUANTITIES or q == "pc_estimate":
            raise UsageError(f"unknown quantity {q!r} (pc_estimate comes from the sweep command)")
    if args.dual_p is not None and qs != ["kappa"]:
        raise UsageError("--dual-p only applies to --quantity kappa")
    if args.per_vertex and qs != ["theta_bond"]:
        raise UsageError("--per-vertex only applies to --quantity theta_bond")
    if (args.x is not None or args.y is not None) and qs != ["two_point_hole"]:
        raise UsageError("--x/--y only apply to --quantity two_point_hole")
    if args.n_values is not None and qs != ["spanning_hole_clusters"]:
        raise UsageError("--n-values only applies to --quantity spanning_hole_clusters")
    return qs


def cmd_estimate(args) -> int:
    qs = _quantities(args)
    try:
        params = SimulationParams(p=args.p, d=args.d, n=args.n, replicates=args.reps, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    for pt in (args.x, args.y):
        if pt is not None and len(pt.coords) != args.d:
            raise UsageError("--x/--y must have d coordinates")
    reports = []
    for q in qs:
        try:
            reports.extend(estimators.estimate(
                q, params, jobs=args.jobs, dual_p=args.dual_p, per_vertex=args.per_vertex,
                x=args.x, y=args.y, n_values=args.n_values,
            ))
        except (ValueError, IndexError) as exc:
            raise UsageError(str(exc))
    meta = {"command": "estimate", "quantities": ",".join(qs), "d": args.d, "n": args.n,
            "p": args.p, "reps": args.reps, "seed": args.seed}
    if args.dual_p is not None:
        meta["dual_p"] = args.dual_p
    if args.format == "json":
        _emit(reports_to_json(reports, meta), args.out)
    else:
        _emit(rows_to_csv([r.row() for r in reports], meta), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.p_grid:
        grid = np.asarray(args.p_grid, dtype=float)
    else:
        if args.p_step <= 0:
            raise UsageError("--p-step must be positive")
        k = int(round((args.p_max - args.p_min) / args.p_step))
        grid = np.round(args.p_min + args.p_step * np.arange(k + 1), 10)
    try:
        res = estimators.sweep_pc(args.d, args.n_list, grid, args.reps, args.seed,
                                  audit_replicates=args.audit, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc))
    meta = {"command": "sweep", "d": args.d, "n_list": ",".join(map(str, args.n_list)),
            "p_min": float(grid[0]), "p_max": float(grid[-1]), "points": len(grid),
            "reps": args.reps, "seed": args.seed}
    if args.format == "json":
        _emit(sweep_to_json(res, meta), args.out)
    else:
        _emit(rows_to_csv(sweep_rows(res), meta), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_verify

    if any(d < 2 for d in args.d) or args.max_n < 1 or args.seeds < 1:
        raise UsageError("need d >= 2, --max-n >= 1 and --seeds >= 1")
    res = run_verify(tuple(args.d), args.max_n, args.seeds, args.seed, args.inject_fault)
    print(f"instances={res.instances} " + " ".join(f"{k}={v}" for k, v in res.counts.items()))
    if any(res.skipped.values()):
        print("skipped (oracle scale) " + " ".join(f"{k}={v}" for k, v in res.skipped.items()))
    if res.ok:
        print("verify: all checks passed")
        return EXIT_OK
    f = res.failure
    print(f"verify: FAILED {f.check}: {f.detail}")
    print(f"reproduce: {f.repro()}")
    return EXIT_FAIL


def _describe(cfg) -> str:
    return (f"format_version={FORMAT_VERSION} d={cfg.d} n={cfg.n} "
            f"p={'' if cfg.p_label is None else cfg.p_label} seed={'' if cfg.seed is None else cfg.seed}")


def _sampled(args):
    try:
        params = SimulationParams(p=args.p, d=args.d, n=args.n, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.replicate < 0:
        raise UsageError("--replicate must be non-negative")
    return sample_configuration(params.replace(replicates=args.replicate + 1), args.replicate)


def _load(path):
    try:
        return load_snapshot(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load snapshot {path}: {exc}")


def cmd_render(args) -> int:
    from .render import render_svg

    cfg = _load(args.snapshot) if args.snapshot else _sampled(args)
    if cfg.d != 2:
        raise UsageError("render supports d = 2 only")
    svg = render_svg(cfg, description=_describe(cfg))
    if args.out:
        Path(args.out).write_bytes(svg)
    else:
        sys.stdout.buffer.write(svg)
    return EXIT_OK


def cmd_snapshot(args) -> int:
    if args.action == "save":
        save_snapshot(_sampled(args), args.out)
        return EXIT_OK
    cfg = _load(args.path)
    if args.action == "info":
        g = build_hole_graph(cfg)
        info = {"d": cfg.d, "n": cfg.n, "p": cfg.p_label, "seed": cfg.seed,
                "faces": cfg.window.n_faces, "open_faces": cfg.n_open}
        summary = hole_graph_summary(g)
        info.update({k: summary[k] for k in ("hole_count", "edge_count", "cluster_count", "spanning_clusters")})
        print(json.dumps(info, indent=2))
        return EXIT_OK
    write_hole_graph(build_hole_graph(cfg), args.adjacency, args.summary)
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "sweep": cmd_sweep, "verify": cmd_verify,
            "render": cmd_render, "snapshot": cmd_snapshot}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _, args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"holeperc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"holeperc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"holeperc: invariant violated: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
