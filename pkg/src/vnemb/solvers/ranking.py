"""Node-ranking heuristics and the rank-guided BFS embedder.

Scores operate on a "resource view": current availabilities on the
substrate side, demands on the request side. The random-walk style ranks
(grc, rw) damp with d = 0.85 and power-iterate to an L1 residual of 1e-6.
"""

from dataclasses import dataclass

import numpy as np

from .. import graphmetrics, kernels
from ..embedding import (FAIL_LATENCY, FAIL_LINK, FAIL_NODE, Solution, evaluate_solution,
                         placement_mask, route_virtual_link)
from ..errors import VnembError

DAMPING = 0.85
POWER_TOL = 1e-6
POWER_MAX_ITERS = 1000

RANK_KINDS = ("grc", "nrm", "rw", "nea", "pl")


@dataclass
class RankScore:
    scores: np.ndarray
    order: np.ndarray  # node ids, best first (descending score, ties by id)


def _resource_view(graph, node_values=None, link_values=None):
    if node_values is None:
        node_values = graph.node_available.sum(axis=0) \
            if hasattr(graph, "node_available") else graph.node_demand.sum(axis=0)
    if link_values is None:
        link_values = graph.link_available \
            if hasattr(graph, "link_available") else graph.link_demand
    return np.asarray(node_values, dtype=np.float64), \
        np.asarray(link_values, dtype=np.float64)


def _walk_scores(graph, node_res, link_vals, weight_by_destination):
    """Damped walk fixpoint r = (1-d) c + d M^T r over link-weighted transitions."""
    n = graph.num_nodes
    total = node_res.sum()
    c = node_res / total if total > 0 else np.full(n, 1.0 / n)
    src = np.repeat(np.arange(n), np.diff(graph.indptr))
    dst = graph.nbr.astype(np.int64)
    w = link_vals[graph.eid].astype(np.float64)
    if weight_by_destination:
        w = w * np.maximum(node_res[dst], 1e-12)
    out = np.zeros(n)
    np.add.at(out, src, w)
    w_norm = w / np.maximum(out[src], 1e-12)
    r = c.copy()
    for _ in range(POWER_MAX_ITERS):
        nxt = np.zeros(n)
        np.add.at(nxt, dst, r[src] * w_norm)
        nxt = (1 - DAMPING) * c + DAMPING * nxt
        residual = float(np.abs(nxt - r).sum())
        r = nxt
        if residual < POWER_TOL:
            return r
    raise VnembError(f"walk ranking did not converge: residual {residual:.3e} "
                     f"after {POWER_MAX_ITERS} iterations")


def _adjacent_bandwidth(graph, link_vals):
    out = np.zeros(graph.num_nodes)
    np.add.at(out, np.repeat(np.arange(graph.num_nodes), np.diff(graph.indptr)),
              link_vals[graph.eid])
    return out


def rank_nodes(kind, graph, node_values=None, link_values=None):
    """Score every node of ``graph`` under the named strategy.

    grc/rw: damped random-walk fixpoints (rw additionally biases
    transitions toward resource-rich destinations); nrm: node resource
    times adjacent bandwidth; nea: nrm boosted by betweenness; pl: nrm
    scaled by closeness.
    """
    node_res, link_vals = _resource_view(graph, node_values, link_values)
    if kind == "grc":
        scores = _walk_scores(graph, node_res, link_vals, weight_by_destination=False)
    elif kind == "rw":
        scores = _walk_scores(graph, node_res, link_vals, weight_by_destination=True)
    elif kind == "nrm":
        scores = node_res * _adjacent_bandwidth(graph, link_vals)
    elif kind == "nea":
        scores = node_res * _adjacent_bandwidth(graph, link_vals) * (
            1.0 + graphmetrics.betweenness_normalized(graph))
    elif kind == "pl":
        scores = node_res * _adjacent_bandwidth(graph, link_vals) * \
            graphmetrics.closeness_centrality(graph)
    else:
        raise VnembError(f"unknown ranking kind {kind!r}; expected one of {RANK_KINDS}")
    if not np.all(np.isfinite(scores)):
        raise VnembError(f"ranking {kind!r} produced non-finite scores")
    order = np.lexsort((np.arange(graph.num_nodes), -scores)).astype(np.int32)
    return RankScore(scores, order)


def _route_all_links(instance, mapping, link_avail, order=None):
    """Route virtual links sequentially.

    Returns (paths, cost, failed_edge, reason); failed_edge is -1 when
    every link routed.
    """
    vn, pn = instance.vn, instance.pn
    paths = [None] * vn.num_links
    cost = 0.0
    seq = range(vn.num_links) if order is None else order
    for e in seq:
        a = int(mapping[vn.edge_a[e]])
        b = int(mapping[vn.edge_b[e]])
        limit = (float(vn.latency_limit[e])
                 if vn.latency_limit is not None and pn.link_latency is not None
                 else None)
        path = route_virtual_link(pn, float(vn.link_demand[e]), a, b,
                                  instance.k_paths, latency_limit=limit,
                                  link_avail=link_avail)
        if path is None:
            reason = FAIL_LINK
            if limit is not None and route_virtual_link(
                    pn, float(vn.link_demand[e]), a, b, instance.k_paths,
                    link_avail=link_avail) is not None:
                reason = FAIL_LATENCY
            return paths, cost, e, reason
        for q in range(len(path) - 1):
            pe = pn.edge_between(int(path[q]), int(path[q + 1]))
            link_avail[pe] -= float(vn.link_demand[e])
        paths[e] = path
        cost += (len(path) - 1) * float(vn.link_demand[e])
    return paths, cost, -1, ""


class RankingSolver:
    """Greedy embedding: ranked virtual nodes onto ranked physical nodes."""

    deterministic = True

    def __init__(self, kind):
        if kind not in RANK_KINDS:
            raise VnembError(f"unknown ranking kind {kind!r}")
        self.kind = kind
        self.name = f"{kind}_rank"

    def solve(self, instance, seed=0):
        vn, pn = instance.vn, instance.pn
        p_rank = rank_nodes(self.kind, pn)
        v_rank = rank_nodes(self.kind, vn)
        mapping = np.full(vn.num_nodes, -1, dtype=np.int32)
        node_avail = pn.node_available.copy()
        for v in v_rank.order:
            placed = False
            for p in p_rank.order:
                if np.any(mapping == p):
                    continue
                if np.all(node_avail[:, p] >= vn.node_demand[:, int(v)]):
                    mapping[v] = p
                    node_avail[:, p] -= vn.node_demand[:, int(v)]
                    placed = True
                    break
            if not placed:
                sol = Solution(vn.id, mapping, [None] * vn.num_links,
                               failure_reason=FAIL_NODE)
                evaluate_solution(vn, sol)
                return sol
        link_avail = pn.link_available.copy()
        paths, _, failed, reason = _route_all_links(instance, mapping, link_avail)
        if failed >= 0:
            sol = Solution(vn.id, mapping, paths, failure_reason=reason)
            evaluate_solution(vn, sol)
            return sol
        sol = Solution(vn.id, mapping, paths, feasible=True)
        evaluate_solution(vn, sol)
        return sol


class RwBfsSolver:
    """Walk-ranked placement along a breadth-first traversal of the request.

    Children must land within ``hop_budget`` hops of their BFS parent's
    host; a bounded backtracking budget retries earlier choices when a
    branch dead-ends.
    """

    deterministic = True
    name = "rw_bfs"

    def __init__(self, hop_budget=1, backtrack_budget=200):
        self.hop_budget = int(hop_budget)
        self.backtrack_budget = int(backtrack_budget)

    def solve(self, instance, seed=0):
        vn, pn = instance.vn, instance.pn
        p_rank = rank_nodes("rw", pn)
        v_rank = rank_nodes("rw", vn)
        root = int(v_rank.order[0])
        v_pos = {int(v): i for i, v in enumerate(v_rank.order)}
        # BFS over the request from the top-ranked node, neighbors best-first
        bfs_order = [root]
        parent = {root: -1}
        queue = [root]
        while queue:
            u = queue.pop(0)
            nbrs = sorted((int(vn.nbr[p]) for p in range(vn.indptr[u], vn.indptr[u + 1])),
                          key=lambda w: v_pos[w])
            for w in nbrs:
                if w not in parent:
                    parent[w] = u
                    bfs_order.append(w)
                    queue.append(w)
        for v in v_rank.order:  # disconnected requests are invalid, but stay safe
            if int(v) not in parent:
                parent[int(v)] = -1
                bfs_order.append(int(v))

        hop_cache = {}

        def hops_from(p):
            if p not in hop_cache:
                hop_cache[p] = kernels.hop_distances(
                    pn.indptr, pn.nbr, pn.eid, pn.num_nodes, pn.num_links, int(p))
            return hop_cache[p]

        mapping = np.full(vn.num_nodes, -1, dtype=np.int32)
        node_avail = pn.node_available.copy()
        link_avail = pn.link_available.copy()
        paths = [None] * vn.num_links
        cost_box = [0.0]
        budget = [self.backtrack_budget]

        def candidates(v):
            mask = placement_mask(pn, vn, v, mapping, node_avail)
            par = parent[v]
            if par >= 0:
                dist = hops_from(int(mapping[par]))
                mask &= (dist >= 0) & (dist <= self.hop_budget)
            return [int(p) for p in p_rank.order if mask[p]]

        def place(idx):
            if idx == len(bfs_order):
                return True
            v = bfs_order[idx]
            for p in candidates(v):
                mapping[v] = p
                node_avail[:, p] -= vn.node_demand[:, v]
                routed = []
                ok = True
                incident = [e for e in range(vn.num_links)
                            if (vn.edge_a[e] == v and mapping[vn.edge_b[e]] >= 0)
                            or (vn.edge_b[e] == v and mapping[vn.edge_a[e]] >= 0)]
                incident.sort(key=lambda e: (-float(vn.link_demand[e]), e))
                for e in incident:
                    other = int(vn.edge_b[e]) if vn.edge_a[e] == v else int(vn.edge_a[e])
                    limit = (float(vn.latency_limit[e])
                             if vn.latency_limit is not None and pn.link_latency is not None
                             else None)
                    path = route_virtual_link(pn, float(vn.link_demand[e]), p,
                                              int(mapping[other]), instance.k_paths,
                                              latency_limit=limit, link_avail=link_avail)
                    if path is None:
                        ok = False
                        break
                    for q in range(len(path) - 1):
                        pe = pn.edge_between(int(path[q]), int(path[q + 1]))
                        link_avail[pe] -= float(vn.link_demand[e])
                    paths[e] = path
                    routed.append((e, path))
                    cost_box[0] += (len(path) - 1) * float(vn.link_demand[e])
                if ok and place(idx + 1):
                    return True
                for e, path in routed:
                    for q in range(len(path) - 1):
                        pe = pn.edge_between(int(path[q]), int(path[q + 1]))
                        link_avail[pe] += float(vn.link_demand[e])
                    paths[e] = None
                    cost_box[0] -= (len(path) - 1) * float(vn.link_demand[e])
                node_avail[:, p] += vn.node_demand[:, v]
                mapping[v] = -1
                budget[0] -= 1
                if budget[0] <= 0:
                    return False
            return False

        if place(0):
            sol = Solution(vn.id, mapping, paths, feasible=True)
        else:
            sol = Solution(vn.id, mapping, paths,
                           failure_reason=FAIL_NODE if all(p is None for p in paths)
                           else FAIL_LINK)
        evaluate_solution(vn, sol)
        return sol
