"""Practicality harnesses: offline solvability, sweeps, scalability profiling."""

import csv
import hashlib
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .config import generate_request_sequence, preset_config, build_physical_network
from .environment import Instance
from .errors import SolverRefusal
from .simulator import run_many, run_simulation
from .solvers import make_solver
from .rng import solver_seed

DEMAND_PHASES = [
    (0, {"node_high": 30, "link_high": 75}),
    (250, {"node_high": 40, "link_high": 100}),
    (500, {"size_low": 2, "size_high": 15}),
    (750, {"size_low": 2, "size_high": 20}),
]


@dataclass
class OfflineInstanceSet:
    """Frozen (substrate, request) pairs stratified by request size."""

    instances: list = field(default_factory=list)  # (size, Instance)
    sizes: tuple = ()
    per_size: int = 0
    seed: int = 0

    @classmethod
    def generate(cls, sizes=range(2, 11), per_size=20, seed=0, base_cfg=None):
        base = base_cfg or preset_config("wx100")
        out = cls(sizes=tuple(sizes), per_size=per_size, seed=seed)
        counter = 0
        for size in out.sizes:
            for _i in range(per_size):
                cfg = replace(base, seed=seed + 7919 * counter, vn_count=1,
                              vn_size_low=size, vn_size_high=size)
                pn = build_physical_network(cfg)
                vn = generate_request_sequence(cfg)[0]
                out.instances.append((size, Instance(vn, pn, k_paths=base.k_paths)))
                counter += 1
        return out

    def fingerprint(self):
        h = hashlib.sha256()
        for size, inst in self.instances:
            h.update(np.int64(size).tobytes())
            h.update(inst.vn.node_demand.tobytes())
            h.update(inst.vn.link_demand.tobytes())
            h.update(inst.vn.edge_a.tobytes())
            h.update(inst.vn.edge_b.tobytes())
            h.update(inst.pn.node_available.tobytes())
            h.update(inst.pn.link_available.tobytes())
            h.update(inst.pn.edge_u.tobytes())
            h.update(inst.pn.edge_v.tobytes())
        return h.hexdigest()[:16]


def offline_solvability(instance_set, solver_names, solver_params=None):
    """Mean R2C per (solver, request size) over frozen instances.

    Every solver sees the same pristine substrate per instance. Refused
    instances (size-limited solvers) yield a None cell.
    """
    params = solver_params or {}
    table = {}
    for name in solver_names:
        solver = make_solver(name, params.get(name))
        bucket = {size: [] for size in instance_set.sizes}
        refused = {size: False for size in instance_set.sizes}
        for size, inst in instance_set.instances:
            snapshot = Instance(inst.vn, inst.pn.snapshot(), k_paths=inst.k_paths)
            try:
                sol = solver.solve(snapshot, seed=solver_seed(instance_set.seed,
                                                              inst.vn.id))
                bucket[size].append(sol.r2c)
            except SolverRefusal:
                refused[size] = True
        table[name] = {size: (None if refused[size] or not bucket[size]
                              else float(np.mean(bucket[size])))
                       for size in instance_set.sizes}
    return table


def export_solvability_csv(table, path):
    solvers = sorted(table)
    sizes = sorted({s for col in table.values() for s in col})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", *solvers])
        for size in sizes:
            writer.writerow([size] + [
                "" if table[s][size] is None else f"{table[s][size]:.6f}"
                for s in solvers])


def generalization_sweep(cfg, axis, values=None, solver_name="grc_rank",
                         seeds=(0,), solver_params=None, workers=None):
    """Metric series along an axis: one run per (point, seed).

    axis "arrival_rate": ``values`` lists the rates to test. axis
    "demand_phases": a single 1000-request run per seed whose request
    generator switches distributions every 250 requests.
    """
    points = []
    if axis == "arrival_rate":
        for eta in values:
            swept = replace(cfg, arrival_rate=float(eta))
            for rec in run_many(swept, solver_name, seeds,
                                solver_params=solver_params, workers=workers):
                points.append({"axis": "arrival_rate", "value": float(eta),
                               "seed": rec.seed, "record": rec})
    elif axis == "demand_phases":
        swept = replace(cfg, vn_count=1000)
        for seed in seeds:
            solver = make_solver(solver_name, solver_params)
            rec = run_simulation(replace(swept, seed=int(seed)), solver,
                                 phases=DEMAND_PHASES)
            points.append({"axis": "demand_phases", "value": 0.0,
                           "seed": int(seed), "record": rec})
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")
    return points


def export_sweep_csv(points, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis", "value", "seed", "solver", "rac", "lrc", "lar",
                         "ast", "total_revenue"])
        for p in points:
            s = p["record"].summary
            writer.writerow([p["axis"], p["value"], p["seed"],
                             p["record"].solver_name, f"{s.rac:.4f}",
                             f"{s.lrc:.6f}", f"{s.lar:.4f}", f"{s.ast:.6f}",
                             f"{s.total_revenue:.4f}"])


def scalability_profile(solver_names, vn_sizes=(5, 10, 15, 20, 25, 30),
                        pn_sizes=(200, 400, 600, 800, 1000), per_point=10,
                        seed=0, solver_params=None, base_cfg=None):
    """Mean solve time per (solver, size) along the request- and
    substrate-size axes; refusals are recorded, not fatal."""
    params = solver_params or {}
    base = base_cfg or preset_config("wx100")
    rows = []

    def profile(instances, axis, size):
        for name in solver_names:
            solver = make_solver(name, params.get(name))
            times, quality = [], []
            refused = False
            for inst in instances:
                work = Instance(inst.vn, inst.pn.snapshot(), k_paths=inst.k_paths)
                start = time.perf_counter()
                try:
                    sol = solver.solve(work, seed=solver_seed(seed, inst.vn.id))
                except SolverRefusal:
                    refused = True
                    break
                times.append(time.perf_counter() - start)
                quality.append(sol.r2c)
            rows.append({"solver": name, "axis": axis, "size": size,
                         "refused": refused,
                         "mean_ast": float(np.mean(times)) if times and not refused else None,
                         "mean_r2c": float(np.mean(quality)) if quality and not refused else None})

    for size in vn_sizes:
        cfg = replace(base, vn_count=per_point, vn_size_low=size,
                      vn_size_high=size, seed=seed)
        pn = build_physical_network(cfg)
        instances = [Instance(vn, pn, k_paths=cfg.k_paths)
                     for vn in generate_request_sequence(cfg)]
        profile(instances, "vn_size", size)
    for size in pn_sizes:
        cfg = replace(base, pn_nodes=int(size), vn_count=per_point, seed=seed,
                      topology_name=f"waxman-{size}")
        pn = build_physical_network(cfg)
        instances = [Instance(vn, pn, k_paths=cfg.k_paths)
                     for vn in generate_request_sequence(cfg)]
        profile(instances, "pn_size", size)
    return rows


def export_scalability_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["solver", "axis", "size", "mean_ast", "mean_r2c", "refused"])
        for r in rows:
            writer.writerow([r["solver"], r["axis"], r["size"],
                             "" if r["mean_ast"] is None else f"{r['mean_ast']:.6f}",
                             "" if r["mean_r2c"] is None else f"{r['mean_r2c']:.6f}",
                             int(r["refused"])])
