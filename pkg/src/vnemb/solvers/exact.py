"""Branch-and-bound oracle for small instances.

Searches all injective node assignments depth-first (largest-demand node
first), pruning partial assignments whose best-case R2C -- node revenue
plus every placed link pair at its hop-distance lower bound and every
remaining link at one hop -- cannot beat the incumbent. Full assignments
are evaluated by sequential routing under both canonical link orders
(request edge order, and the placement-driven demand-descending order the
environment uses), keeping the cheaper feasible result, so its optimum
dominates every shipped construction policy.
"""

import numpy as np

from .. import kernels
from ..embedding import (FAIL_LINK, FAIL_NODE, Solution, evaluate_solution)
from ..errors import SolverRefusal
from .ranking import _route_all_links

DEFAULT_VN_LIMIT = 5
DEFAULT_PN_LIMIT = 15


def _env_link_order(vn):
    """Global routing order induced by stepwise placement (demand-desc nodes)."""
    order = vn.decision_order()
    pos = {int(v): i for i, v in enumerate(order)}
    seq = []
    for i, v in enumerate(order):
        incident = [e for e in range(vn.num_links)
                    if (pos[int(vn.edge_a[e])] == i and pos[int(vn.edge_b[e])] < i)
                    or (pos[int(vn.edge_b[e])] == i and pos[int(vn.edge_a[e])] < i)]
        incident.sort(key=lambda e: (-float(vn.link_demand[e]), e))
        seq.extend(incident)
    return seq


class ExactSolver:
    deterministic = True
    name = "exact"

    def __init__(self, vn_limit=DEFAULT_VN_LIMIT, pn_limit=DEFAULT_PN_LIMIT):
        self.vn_limit = int(vn_limit)
        self.pn_limit = int(pn_limit)

    def solve(self, instance, seed=0):
        vn, pn = instance.vn, instance.pn
        if vn.num_nodes > self.vn_limit or pn.num_nodes > self.pn_limit:
            raise SolverRefusal(
                f"instance {vn.num_nodes}x{pn.num_nodes} exceeds the exact "
                f"solver's limits ({self.vn_limit}x{self.pn_limit})")
        n_v, n_p = vn.num_nodes, pn.num_nodes
        hop = np.stack([kernels.hop_distances(pn.indptr, pn.nbr, pn.eid, n_p,
                                              pn.num_links, s)
                        for s in range(n_p)])
        revenue = vn.revenue()
        node_part = float(vn.node_demand.sum())
        order = vn.decision_order()
        link_orders = [None, _env_link_order(vn)]  # None = request edge order
        vlinks = [(int(vn.edge_a[e]), int(vn.edge_b[e]), float(vn.link_demand[e]))
                  for e in range(vn.num_links)]

        best = {"cost": np.inf, "paths": None, "assign": None}
        state = {"leaf_seen": False, "route_failed": False}
        assign = np.full(n_v, -1, dtype=np.int32)
        node_avail = pn.node_available.copy()

        def lower_bound():
            # link cost if every placed pair routed at hop distance and
            # every not-yet-determined link in a single hop
            lb = 0.0
            for a, b, demand in vlinks:
                pa, pb = assign[a], assign[b]
                if pa >= 0 and pb >= 0:
                    d = hop[pa, pb]
                    if d < 0:
                        return np.inf
                    lb += d * demand
                else:
                    lb += demand
            return lb

        def beats_incumbent(lb_links):
            return node_part + lb_links < best["cost"]

        def evaluate_leaf():
            state["leaf_seen"] = True
            if not beats_incumbent(lower_bound()):
                return
            for link_order in link_orders:
                link_avail = pn.link_available.copy()
                paths, cost, failed, _ = _route_all_links(
                    instance, assign, link_avail, order=link_order)
                if failed >= 0:
                    state["route_failed"] = True
                    continue
                total = node_part + cost
                if total < best["cost"]:
                    best["cost"] = total
                    best["paths"] = list(paths)
                    best["assign"] = assign.copy()

        def dfs(idx):
            if idx == n_v:
                evaluate_leaf()
                return
            v = int(order[idx])
            demand = vn.node_demand[:, v]
            candidates = []
            for p in range(n_p):
                if np.any(assign == p):
                    continue
                if not np.all(node_avail[:, p] >= demand):
                    continue
                prox = 0
                for a, b, _d in vlinks:
                    if a == v and assign[b] >= 0:
                        prox += hop[p, assign[b]]
                    elif b == v and assign[a] >= 0:
                        prox += hop[p, assign[a]]
                candidates.append((prox, p))
            candidates.sort()
            for _, p in candidates:
                assign[v] = p
                node_avail[:, p] -= demand
                if beats_incumbent(lower_bound()):
                    dfs(idx + 1)
                node_avail[:, p] += demand
                assign[v] = -1

        dfs(0)

        if best["paths"] is None:
            reason = FAIL_LINK if state["route_failed"] else FAIL_NODE
            sol = Solution.empty(vn, reason=reason)
            evaluate_solution(vn, sol)
            return sol
        sol = Solution(vn.id, best["assign"], best["paths"], feasible=True)
        evaluate_solution(vn, sol)
        return sol
