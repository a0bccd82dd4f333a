"""Constraint system, path routing, solution accounting and allocation.

A Solution pairs a node mapping (virtual node -> physical node) with one
simple physical path per virtual link. ``verify_solution`` re-checks every
constraint from scratch -- one-to-one placement, per-kind node capacity,
path endpoint consistency, loop-freeness, aggregate bandwidth, latency --
without consulting whatever solver produced the mapping.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, StateError

RTOL = 1e-9  # slack for real-valued resource comparisons in verification

FAIL_NODE = "node_resource"
FAIL_LINK = "link_resource"
FAIL_LATENCY = "latency"
FAIL_CONNECTIVITY = "connectivity"
FAIL_ONE_TO_ONE = "one_to_one"
FAIL_UNPLACED = "unplaced"
FAIL_SOLVER = "solver_error"


@dataclass
class Solution:
    request_id: int
    node_mapping: np.ndarray  # (num virtual nodes,) int32, -1 while unplaced
    link_paths: list  # per virtual link: int32 node sequence or None
    feasible: bool = False
    revenue: float = 0.0
    cost: float = 0.0
    r2c: float = 0.0
    failure_reason: str = ""

    @classmethod
    def empty(cls, vn, reason=""):
        return cls(vn.id, np.full(vn.num_nodes, -1, dtype=np.int32),
                   [None] * vn.num_links, failure_reason=reason)

    def mapped_count(self):
        return int(np.sum(self.node_mapping >= 0))

    def copy(self):
        return Solution(self.request_id, self.node_mapping.copy(),
                        [None if p is None else p.copy() for p in self.link_paths],
                        self.feasible, self.revenue, self.cost, self.r2c,
                        self.failure_reason)


@dataclass
class FeasibilityReport:
    checks: list = field(default_factory=list)  # (constraint id, passed, detail)
    first_violated: str = ""

    def add(self, constraint, passed, detail=""):
        self.checks.append((constraint, passed, detail))
        if not passed and not self.first_violated:
            self.first_violated = constraint

    @property
    def all_pass(self):
        return all(passed for _, passed, _ in self.checks)

    def describe(self):
        lines = [f"{'ok ' if passed else 'FAIL'} {cid}{': ' + d if d else ''}"
                 for cid, passed, d in self.checks]
        return "\n".join(lines)


def k_shortest_paths(pn, src, dst, k):
    """Up to k loop-free paths ordered by (hop count, lexicographic sequence)."""
    if src == dst:
        raise ConfigError("k_shortest_paths requires distinct endpoints")
    if not (0 <= src < pn.num_nodes and 0 <= dst < pn.num_nodes):
        raise ConfigError("endpoint outside the physical network")
    return kernels.k_shortest_paths_csr(pn.indptr, pn.nbr, pn.eid, pn.num_nodes,
                                        pn.num_links, int(src), int(dst), int(k))


def route_virtual_link(pn, demand, src, dst, k, latency_limit=None,
                       link_avail=None):
    """First of the k hop-shortest paths meeting bandwidth (and latency).

    ``link_avail`` lets multi-link routing check against a working copy
    that already reflects links routed for the same request.
    """
    avail = pn.link_available if link_avail is None else link_avail
    lat = pn.link_latency
    limit = -1.0
    if latency_limit is not None:
        if lat is None:
            raise ConfigError("latency limit given but the network has no link latency")
        limit = float(latency_limit)
    if lat is None:
        lat = np.zeros(pn.num_links)
    return kernels.route_csr(pn.indptr, pn.nbr, pn.eid, pn.num_nodes, pn.num_links,
                             int(src), int(dst), int(k), avail, float(demand),
                             lat, limit)


def check_node_placement(pn, vn, vnode, pnode, mapping, node_avail=None):
    """Node-level feasibility: unused by this request and capacity across kinds."""
    if vn.node_kinds != pn.node_kinds:
        raise ConfigError(f"resource kinds differ: request {vn.node_kinds} "
                          f"vs substrate {pn.node_kinds}")
    if not (0 <= pnode < pn.num_nodes):
        return False
    if np.any(mapping == pnode):
        return False
    avail = pn.node_available if node_avail is None else node_avail
    return bool(np.all(avail[:, pnode] >= vn.node_demand[:, vnode]))


def placement_mask(pn, vn, vnode, mapping, node_avail=None):
    """Vector form of check_node_placement over all physical nodes."""
    avail = pn.node_available if node_avail is None else node_avail
    ok = np.all(avail >= vn.node_demand[:, vnode][:, None], axis=0)
    used = mapping[mapping >= 0]
    ok[used] = False
    return ok


def evaluate_solution(vn, solution):
    """REV / COST / R2C accounting; infeasible solutions score zero."""
    if solution.feasible:
        if solution.mapped_count() != vn.num_nodes or any(
                p is None for p in solution.link_paths):
            raise StateError("solution flagged feasible but mappings are incomplete")
    revenue = vn.revenue()
    node_part = float(vn.node_demand.sum())
    link_part = 0.0
    for demand, path in zip(vn.link_demand, solution.link_paths):
        if path is not None:
            link_part += (len(path) - 1) * float(demand)
    cost = node_part + link_part
    if solution.feasible:
        solution.revenue = revenue
        solution.cost = cost
        solution.r2c = revenue / cost if cost > 0 else 1.0
    else:
        solution.revenue = revenue
        solution.cost = cost
        solution.r2c = 0.0
    return solution.revenue, solution.cost, solution.r2c


def verify_solution(pn, vn, solution):
    """Independent re-check of every embedding constraint.

    Works purely from the mapping, the request and the substrate's current
    availabilities; never trusts solver bookkeeping.
    """
    report = FeasibilityReport()
    mapping = solution.node_mapping
    placed = mapping >= 0
    report.add("totality", bool(placed.all()),
               "" if placed.all() else f"{int((~placed).sum())} virtual nodes unplaced")
    in_range = bool(np.all((mapping[placed] >= 0) & (mapping[placed] < pn.num_nodes)))
    used = mapping[placed]
    injective = len(np.unique(used)) == len(used)
    report.add("one_to_one", injective and in_range,
               "" if injective else "two virtual nodes share a physical node")
    node_ok = True
    detail = ""
    if vn.node_kinds != pn.node_kinds:
        node_ok = False
        detail = "resource kind mismatch"
    else:
        for v in range(vn.num_nodes):
            p = mapping[v]
            if p < 0 or p >= pn.num_nodes:
                continue
            short = vn.node_demand[:, v] > pn.node_available[:, p] + RTOL
            if short.any():
                node_ok = False
                kind = vn.node_kinds[int(np.argmax(short))]
                detail = f"node {p} lacks {kind} for virtual node {v}"
                break
    report.add("node_resource", node_ok, detail)
    endpoints_ok = True
    simple_ok = True
    detail_e = detail_s = ""
    for e in range(vn.num_links):
        path = solution.link_paths[e]
        a, b = mapping[vn.edge_a[e]], mapping[vn.edge_b[e]]
        if path is None:
            endpoints_ok = False
            detail_e = f"virtual link {e} not routed"
            continue
        if a < 0 or b < 0 or not ((path[0] == a and path[-1] == b)
                                  or (path[0] == b and path[-1] == a)):
            endpoints_ok = False
            detail_e = f"virtual link {e}: path endpoints do not match hosts"
        if len(np.unique(path)) != len(path):
            simple_ok = False
            detail_s = f"virtual link {e}: path revisits a node"
        for q in range(len(path) - 1):
            if pn.edge_between(int(path[q]), int(path[q + 1])) is None:
                endpoints_ok = False
                detail_e = f"virtual link {e}: {path[q]}-{path[q + 1]} is not a physical link"
                break
    report.add("connectivity", endpoints_ok, detail_e)
    report.add("loop_free", simple_ok, detail_s)
    usage = np.zeros(pn.num_links)
    lat_ok = True
    detail_l = ""
    for e in range(vn.num_links):
        path = solution.link_paths[e]
        if path is None:
            continue
        total_lat = 0.0
        for q in range(len(path) - 1):
            pe = pn.edge_between(int(path[q]), int(path[q + 1]))
            if pe is None:
                continue
            usage[pe] += float(vn.link_demand[e])
            if pn.link_latency is not None:
                total_lat += float(pn.link_latency[pe])
        if vn.latency_limit is not None and pn.link_latency is not None:
            if total_lat > float(vn.latency_limit[e]) + RTOL:
                lat_ok = False
                detail_l = (f"virtual link {e}: latency {total_lat:.3f} over "
                            f"limit {float(vn.latency_limit[e]):.3f}")
    over = usage > pn.link_available + RTOL
    report.add("link_resource", not over.any(),
               "" if not over.any() else
               f"physical link {int(np.argmax(over))} oversubscribed")
    report.add("latency", lat_ok, detail_l)
    return report


def _solution_holds(pn, vn, solution):
    nodes = [int(p) for p in solution.node_mapping]
    links = set()
    for path in solution.link_paths:
        if path is None:
            continue
        for q in range(len(path) - 1):
            links.add(pn.edge_between(int(path[q]), int(path[q + 1])))
    return nodes, sorted(links)


def allocate(pn, vn, solution, verify=True):
    """Commit a feasible solution's demands onto the substrate."""
    if verify:
        report = verify_solution(pn, vn, solution)
        if not report.all_pass:
            err = StateError(f"allocation rejected: {report.first_violated}")
            err.report = report
            raise err
    for v in range(vn.num_nodes):
        pn.hold_node(int(solution.node_mapping[v]), vn.id, vn.node_demand[:, v])
    link_totals = {}
    for e, path in enumerate(solution.link_paths):
        for q in range(len(path) - 1):
            pe = pn.edge_between(int(path[q]), int(path[q + 1]))
            link_totals[pe] = link_totals.get(pe, 0.0) + float(vn.link_demand[e])
    for pe in sorted(link_totals):
        pn.hold_link(pe, vn.id, link_totals[pe])
    return pn


def release(pn, vn, solution):
    """Return a previously allocated solution's demands to the substrate."""
    nodes, links = _solution_holds(pn, vn, solution)
    pn.drop_request(vn.id, nodes, links)
    return pn


def to_record(solution):
    """One-line audit record for a solution."""
    nodes = ",".join(f"{v}:{int(p)}" for v, p in enumerate(solution.node_mapping))
    paths = ";".join("-" if p is None else "-".join(str(int(x)) for x in p)
                     for p in solution.link_paths)
    return (f"solution id={solution.request_id} feasible={int(solution.feasible)} "
            f"rev={solution.revenue!r} cost={solution.cost!r} r2c={solution.r2c!r} "
            f"reason={solution.failure_reason or '-'} nodes={nodes or '-'} "
            f"paths={paths or '-'}")


def parse_record(line):
    parts = line.split()
    if not parts or parts[0] != "solution":
        raise ValueError(f"not a solution record: {line!r}")
    fields = dict(p.split("=", 1) for p in parts[1:])
    node_pairs = ([] if fields["nodes"] == "-" else
                  [tuple(map(int, kv.split(":"))) for kv in fields["nodes"].split(",")])
    mapping = np.full(len(node_pairs), -1, dtype=np.int32)
    for v, p in node_pairs:
        mapping[v] = p
    paths = []
    if fields["paths"] != "-":
        for chunk in fields["paths"].split(";"):
            paths.append(None if chunk == "-" else
                         np.array([int(x) for x in chunk.split("-")], dtype=np.int32))
    return Solution(int(fields["id"]), mapping, paths,
                    feasible=bool(int(fields["feasible"])),
                    revenue=float(fields["rev"]), cost=float(fields["cost"]),
                    r2c=float(fields["r2c"]),
                    failure_reason="" if fields["reason"] == "-" else fields["reason"])
