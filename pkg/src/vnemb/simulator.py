"""Event-driven online system.

Arrivals and departures are processed in nondecreasing time order, ties
broken departures-first then by request id. Each arrival hands the solver
an immutable snapshot of the substrate; feasible solutions are re-verified
against the live network before allocation. Departures release exactly
what was allocated, so a fully drained queue restores availabilities to
capacities bit-exactly.
"""

import csv
import heapq
import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .config import build_physical_network, generate_request_sequence
from .embedding import (FAIL_SOLVER, Solution, allocate, release, to_record,
                        verify_solution)
from .environment import Instance
from .errors import SolverRefusal, StateError
from .metrics import compute_metrics
from .rng import solver_seed

DEPARTURE = 0  # sorts before arrivals at equal times
ARRIVAL = 1


@dataclass(frozen=True)
class Event:
    time: float
    priority: int
    request_id: int

    @property
    def kind(self):
        return "departure" if self.priority == DEPARTURE else "arrival"


class RunRecord:
    """Per-request rows plus recomputable aggregates for one simulation."""

    def __init__(self, solver_name, topology, eta, seed, fingerprint):
        self.solver_name = solver_name
        self.topology = topology
        self.eta = eta
        self.seed = seed
        self.fingerprint = fingerprint
        self.rows = []
        self.summary = None
        self.horizon = 0.0
        self.energy = 0.0

    def add_row(self, vn, accepted, solution, solve_time, phase=None):
        self.rows.append({
            "id": vn.id, "arrival": vn.arrival_time, "lifetime": vn.lifetime,
            "size": vn.num_nodes, "accepted": bool(accepted),
            "revenue": solution.revenue if accepted else vn.revenue(),
            "cost": solution.cost if accepted else 0.0,
            "r2c": solution.r2c, "solve_time": solve_time,
            "failure_reason": "" if accepted else (solution.failure_reason or "rejected"),
            "phase": phase if phase is not None else 0,
        })

    def finalize(self):
        self.summary = compute_metrics(self.rows, self.horizon, self.energy)
        return self.summary

    def basename(self):
        return f"{self.solver_name}_{self.topology}_eta{self.eta:g}_seed{self.seed}"

    def to_csv(self, path):
        fields = ["id", "arrival", "lifetime", "size", "accepted", "revenue",
                  "cost", "r2c", "solve_time", "failure_reason", "phase"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row)

    def summary_dict(self):
        if self.summary is None:
            self.finalize()
        return {"solver": self.solver_name, "topology": self.topology,
                "eta": self.eta, "seed": self.seed,
                "config_fingerprint": self.fingerprint,
                **self.summary.to_dict()}

    def save_summary(self, path):
        with open(path, "w") as fh:
            json.dump(self.summary_dict(), fh, indent=2)


def _conservation_check(pn, active):
    """capacity - availability must equal the demands of active requests."""
    expected_node = np.zeros_like(pn.node_capacity)
    expected_link = np.zeros(pn.num_links)
    for vn, sol in active.values():
        for v in range(vn.num_nodes):
            expected_node[:, int(sol.node_mapping[v])] += vn.node_demand[:, v]
        for e, path in enumerate(sol.link_paths):
            for q in range(len(path) - 1):
                pe = pn.edge_between(int(path[q]), int(path[q + 1]))
                expected_link[pe] += float(vn.link_demand[e])
    node_gap = np.abs((pn.node_capacity - pn.node_available) - expected_node)
    link_gap = np.abs((pn.link_capacity - pn.link_available) - expected_link)
    if node_gap.max(initial=0.0) > 1e-9 or link_gap.max(initial=0.0) > 1e-9:
        raise StateError(
            f"resource accounting drifted: node gap {node_gap.max(initial=0.0):.3e}, "
            f"link gap {link_gap.max(initial=0.0):.3e}")


def _node_power(pn):
    active = np.array([1.0 if holds else 0.0 for holds in pn._node_holds])
    util = pn.utilization(kind=0)
    return float(np.sum(pn.energy_idle * active
                        + (pn.energy_peak - pn.energy_idle) * util))


def handle_arrival(pn, vn, solver, cfg, run_seed):
    """Solve one arrival against a snapshot; returns (solution, seconds)."""
    snapshot = pn.snapshot()
    instance = Instance(vn, snapshot, k_paths=cfg.k_paths)
    start = time.perf_counter()
    try:
        solution = solver.solve(instance, seed=solver_seed(run_seed, vn.id))
    except Exception:
        solution = Solution.empty(vn, reason=FAIL_SOLVER)
    elapsed = time.perf_counter() - start
    if cfg.time_limit > 0 and elapsed > cfg.time_limit:
        solution = Solution.empty(vn, reason="timeout")
    return solution, elapsed


def run_simulation(cfg, solver, debug_checks=False, phases=None,
                   solution_log=None, requests=None):
    """Run the full online episode described by the config.

    ``phases`` forwards distribution overrides to the request generator;
    ``solution_log`` optionally collects one audit line per request.
    """
    cfg.validate()
    pn = build_physical_network(cfg)
    if requests is None:
        requests = generate_request_sequence(cfg, phases=phases)
    record = RunRecord(getattr(solver, "name", solver.__class__.__name__),
                       cfg.topology_name, cfg.arrival_rate, cfg.seed,
                       cfg.fingerprint())
    queue = []
    for vn in requests:
        heapq.heappush(queue, (vn.arrival_time, ARRIVAL, vn.id))
    by_id = {vn.id: vn for vn in requests}
    active = {}
    track_energy = cfg.energy_tracking and pn.energy_idle is not None
    clock = 0.0
    energy = 0.0
    lines = solution_log if solution_log is not None else None
    while queue:
        when, priority, rid = heapq.heappop(queue)
        if track_energy and when > clock:
            energy += (when - clock) * _node_power(pn)
        clock = max(clock, when)
        vn = by_id[rid]
        if priority == ARRIVAL:
            solution, elapsed = handle_arrival(pn, vn, solver, cfg, cfg.seed)
            accepted = False
            if solution.feasible:
                report = verify_solution(pn, vn, solution)
                if report.all_pass:
                    allocate(pn, vn, solution, verify=False)
                    active[rid] = (vn, solution)
                    heapq.heappush(queue, (vn.departure_time, DEPARTURE, rid))
                    accepted = True
                else:
                    solution.feasible = False
                    solution.failure_reason = report.first_violated
                    solution.r2c = 0.0
            phase = _phase_of(phases, rid)
            record.add_row(vn, accepted, solution, elapsed, phase=phase)
            if lines is not None:
                lines.append(to_record(solution))
        else:
            handle_departure(pn, active, rid)
        if debug_checks:
            _conservation_check(pn, active)
    record.horizon = clock
    record.energy = energy
    if debug_checks:
        if active:
            raise StateError(f"{len(active)} requests still active after drain")
        node_gap = np.abs(pn.node_capacity - pn.node_available).max(initial=0.0)
        link_gap = np.abs(pn.link_capacity - pn.link_available).max(initial=0.0)
        if node_gap > 0.0 or link_gap > 0.0:
            raise StateError(f"end-of-run availabilities differ from capacities "
                             f"(node {node_gap:.3e}, link {link_gap:.3e})")
    record.finalize()
    return record


def handle_departure(pn, active, rid):
    if rid not in active:
        raise StateError(f"departure for request {rid} that is not active")
    vn, solution = active.pop(rid)
    release(pn, vn, solution)


def _phase_of(phases, request_id):
    if not phases:
        return 0
    current = 0
    for i, (start, _over) in enumerate(phases):
        if request_id >= start:
            current = i + 1
    return current


def _run_one(args):
    cfg, solver_name, solver_params, seed, debug = args
    from .solvers import make_solver
    run_cfg = replace(cfg, seed=seed)
    solver = make_solver(solver_name, solver_params)
    return run_simulation(run_cfg, solver, debug_checks=debug)


def run_many(cfg, solver_name, seeds, solver_params=None, workers=None,
             debug_checks=False):
    """One independent simulation per seed, optionally across processes."""
    jobs = [(cfg, solver_name, solver_params, int(s), debug_checks) for s in seeds]
    if workers is None or workers > 1:
        import concurrent.futures as cf
        import os
        max_workers = workers or min(len(jobs), os.cpu_count() or 1)
        if max_workers > 1 and len(jobs) > 1:
            with cf.ProcessPoolExecutor(max_workers=max_workers) as pool:
                return list(pool.map(_run_one, jobs))
    return [_run_one(job) for job in jobs]
