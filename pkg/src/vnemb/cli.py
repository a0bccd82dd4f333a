"""Command-line entry point.

Subcommands: validate-config, run, offline, sweep, scale, serve-env.
Exit codes: 0 success, 2 configuration error, 3 runtime error. Errors go
to stderr as one JSON object so scripts can parse them.
"""

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import load_config, preset_config
from .environment import RewardSpec
from .errors import ConfigError, VnembError
from .harness import (OfflineInstanceSet, export_scalability_csv,
                      export_solvability_csv, export_sweep_csv,
                      generalization_sweep, offline_solvability,
                      scalability_profile)
from .simulator import run_many
from .solvers import solver_names

DEFAULT_SEEDS = [0, 1111, 2222, 3333, 4444, 5555, 6666, 7777, 8888, 9999]


def _parse_seeds(text):
    return [int(s) for s in text.split(",") if s.strip() != ""]


def _parse_values(text):
    return [float(s) for s in text.split(",") if s.strip() != ""]


def _load_cfg(args):
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        cfg = preset_config(getattr(args, "topology", "wx100") or "wx100")
    if getattr(args, "eta", None) is not None:
        cfg = replace(cfg, arrival_rate=args.eta)
    if getattr(args, "requests", None) is not None:
        cfg = replace(cfg, vn_count=args.requests)
    return cfg.validate()


def _outdir(args):
    out = Path(getattr(args, "out", None) or os.environ.get("VNEMB_OUT", "results"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _check_solvers(names):
    known = set(solver_names())
    for name in names:
        if name not in known:
            raise ConfigError(f"unknown solver {name!r}; registered: "
                              f"{', '.join(sorted(known))}", field="solver")
    return names


def _manifest(out, cfg, args_dict, seeds):
    args_dict = {k: v for k, v in args_dict.items()
                 if isinstance(v, (str, int, float, bool, list, type(None)))}
    manifest = {"tool_version": __version__, "config_fingerprint": cfg.fingerprint(),
                "seeds": list(seeds), "args": args_dict}
    with open(out / "run_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)


def cmd_validate_config(args):
    cfg = load_config(args.path)
    print(f"ok: schema_version 1, fingerprint {cfg.fingerprint()}")
    return 0


def cmd_run(args):
    cfg = _load_cfg(args)
    seeds = _parse_seeds(args.seeds) if args.seeds else DEFAULT_SEEDS
    names = _check_solvers(args.solver or ["grc_rank"])
    out = _outdir(args)
    _manifest(out, cfg, vars(args) | {"command": "run"}, seeds)
    for name in names:
        if args.log_solutions:
            from dataclasses import replace as _replace
            from .simulator import run_simulation
            from .solvers import make_solver
            records = []
            for seed in seeds:
                lines = []
                rec = run_simulation(_replace(cfg, seed=int(seed)),
                                     make_solver(name, cfg.solver_params.get(name)),
                                     debug_checks=args.debug_accounting,
                                     solution_log=lines)
                (out / f"{rec.basename()}.solutions.log").write_text(
                    "\n".join(lines) + "\n")
                records.append(rec)
        else:
            records = run_many(cfg, name, seeds,
                               solver_params=cfg.solver_params.get(name),
                               workers=args.workers,
                               debug_checks=args.debug_accounting)
        for rec in records:
            rec.to_csv(out / f"{rec.basename()}.csv")
            rec.save_summary(out / f"{rec.basename()}.summary.json")
            s = rec.summary
            print(f"{rec.basename()}: RAC {s.rac:.2f}  LRC {s.lrc:.3f}  "
                  f"LAR {s.lar:.2f}  AST {s.ast:.4f}s")
    return 0


def cmd_offline(args):
    cfg = _load_cfg(args)
    names = _check_solvers(args.solvers.split(","))
    sizes = range(args.size_low, args.size_high + 1)
    instances = OfflineInstanceSet.generate(sizes=sizes, per_size=args.per_size,
                                            seed=args.seed, base_cfg=cfg)
    table = offline_solvability(instances, names, cfg.solver_params)
    out = _outdir(args)
    export_solvability_csv(table, out / "solvability.csv")
    _manifest(out, cfg, vars(args) | {"command": "offline"}, [args.seed])
    for name in names:
        cells = " ".join(
            f"{size}:{'-' if table[name][size] is None else format(table[name][size], '.3f')}"
            for size in instances.sizes)
        print(f"{name}: {cells}")
    return 0


def cmd_sweep(args):
    cfg = _load_cfg(args)
    names = _check_solvers([args.solver])
    seeds = _parse_seeds(args.seeds) if args.seeds else DEFAULT_SEEDS[:5]
    values = _parse_values(args.values) if args.values else None
    if args.axis == "arrival_rate" and not values:
        raise ConfigError("arrival_rate sweep needs --values", field="values")
    points = generalization_sweep(cfg, args.axis, values=values,
                                  solver_name=names[0], seeds=seeds,
                                  solver_params=cfg.solver_params.get(names[0]),
                                  workers=args.workers)
    out = _outdir(args)
    export_sweep_csv(points, out / f"sweep_{args.axis}.csv")
    if args.axis == "demand_phases":
        for p in points:
            p["record"].to_csv(out / f"{p['record'].basename()}_phases.csv")
    _manifest(out, cfg, vars(args) | {"command": "sweep"}, seeds)
    for p in points:
        s = p["record"].summary
        print(f"{args.axis}={p['value']:g} seed={p['seed']}: RAC {s.rac:.2f} "
              f"LRC {s.lrc:.3f}")
    return 0


def cmd_scale(args):
    cfg = _load_cfg(args)
    names = _check_solvers(args.solvers.split(","))
    vn_sizes = [int(x) for x in args.vn_sizes.split(",")] if args.vn_sizes else \
        [5, 10, 15, 20, 25, 30]
    pn_sizes = [int(x) for x in args.pn_sizes.split(",")] if args.pn_sizes else \
        [200, 400, 600, 800, 1000]
    rows = scalability_profile(names, vn_sizes=vn_sizes, pn_sizes=pn_sizes,
                               per_point=args.per_point, seed=args.seed,
                               solver_params=cfg.solver_params, base_cfg=cfg)
    out = _outdir(args)
    export_scalability_csv(rows, out / "scalability.csv")
    _manifest(out, cfg, vars(args) | {"command": "scale"}, [args.seed])
    for r in rows:
        ast = "refused" if r["refused"] else f"{r['mean_ast']:.4f}s"
        print(f"{r['solver']} {r['axis']}={r['size']}: {ast}")
    return 0


def cmd_serve_env(args):
    from .envserver import serve_environment, serve_stdio
    cfg = _load_cfg(args)
    kind, _, value = (args.reward or "fir:0.1").partition(":")
    reward = RewardSpec(kind=kind, value=float(value) if value else 0.1)
    if args.stdio:
        serve_stdio(cfg, reward)
        return 0
    host, _, port = args.listen.rpartition(":")
    host = host or "127.0.0.1"

    def announce(addr):
        print(f"listening on {addr[0]}:{addr[1]}", flush=True)

    serve_environment(cfg, host=host, port=int(port), reward_spec=reward,
                      ready_callback=announce)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="vnemb",
                                     description="Embedding simulator and solver suite")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-config", help="check a TOML config file")
    p.add_argument("path")
    p.set_defaults(fn=cmd_validate_config)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config path")
    common.add_argument("--topology", default=None,
                        help="preset name (wx100, waxman-N) or GraphML path")
    common.add_argument("--eta", type=float, default=None, help="arrival rate override")
    common.add_argument("--requests", type=int, default=None, help="request count override")
    common.add_argument("--out", default=None, help="output directory (or $VNEMB_OUT)")

    p = sub.add_parser("run", parents=[common], help="online simulation runs")
    p.add_argument("--solver", action="append", help="solver name (repeatable)")
    p.add_argument("--seeds", default=None, help="comma-separated seed list")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--debug-accounting", action="store_true",
                   help="verify resource conservation on every event")
    p.add_argument("--log-solutions", action="store_true",
                   help="write one audit record per request next to the CSV")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("offline", parents=[common], help="offline solvability table")
    p.add_argument("--solvers", required=True, help="comma-separated solver names")
    p.add_argument("--size-low", type=int, default=2)
    p.add_argument("--size-high", type=int, default=10)
    p.add_argument("--per-size", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_offline)

    p = sub.add_parser("sweep", parents=[common], help="generalization sweeps")
    p.add_argument("--axis", choices=["arrival_rate", "demand_phases"], required=True)
    p.add_argument("--values", default=None, help="comma-separated axis values")
    p.add_argument("--solver", default="grc_rank")
    p.add_argument("--seeds", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("scale", parents=[common], help="solve-time scalability profile")
    p.add_argument("--solvers", required=True)
    p.add_argument("--vn-sizes", default=None, help="comma-separated request sizes")
    p.add_argument("--pn-sizes", default=None, help="comma-separated substrate sizes")
    p.add_argument("--per-point", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_scale)

    p = sub.add_parser("serve-env", parents=[common], help="serve the episodic protocol")
    p.add_argument("--listen", default="127.0.0.1:0", help="host:port (port 0 = ephemeral)")
    p.add_argument("--stdio", action="store_true", help="single session over stdio")
    p.add_argument("--reward", default="fir:0.1", help="kind:value (noir, fir:V, air)")
    p.set_defaults(fn=cmd_serve_env)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        json.dump({"error": {"code": "config", "message": str(exc),
                             "field": exc.field}}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except VnembError as exc:
        json.dump({"error": {"code": "runtime", "message": str(exc)}}, sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
