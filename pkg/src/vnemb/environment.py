"""Episodic decision environment: one virtual node placed per step.

A step attempts to place the current virtual node on the chosen physical
node, then routes every virtual link back to already-placed neighbors
(largest demand first). Any failure terminates the episode. Action masks
cover the node-level constraints only; link routing is resolved by the
transition itself.
"""

from dataclasses import dataclass, field

import numpy as np

from . import graphmetrics
from .embedding import (FAIL_LATENCY, FAIL_LINK, FAIL_NODE, Solution,
                        evaluate_solution, placement_mask, route_virtual_link)
from .errors import ProtocolError, StateError

IN_PROGRESS = "in_progress"
SUCCESS = "success"
FAILURE = "failure"

DEFAULT_FEATURES = ("status", "topological", "resources")


@dataclass(frozen=True)
class RewardSpec:
    kind: str = "fir"  # "noir" | "fir" | "air"
    value: float = 0.1
    failure_penalty: float = None  # default: -intermediate (fir/air), 0 (noir)

    def intermediate(self, num_vnodes):
        if self.kind == "fir":
            return self.value
        if self.kind == "air":
            return 1.0 / num_vnodes
        if self.kind == "noir":
            return 0.0
        raise ValueError(f"unknown reward kind {self.kind!r}")

    def penalty(self, num_vnodes):
        if self.failure_penalty is not None:
            return self.failure_penalty
        return -self.intermediate(num_vnodes)


@dataclass
class Instance:
    """One solvable unit: a request plus the substrate snapshot it sees."""
    vn: object
    pn: object
    k_paths: int = 10


class EnvState:
    def __init__(self, instance, reward_spec=None, feature_spec=DEFAULT_FEATURES):
        self.instance = instance
        self.reward_spec = reward_spec or RewardSpec()
        self.feature_spec = tuple(feature_spec)
        vn, pn = instance.vn, instance.pn
        self.order = vn.decision_order()
        self.t = 0
        self.mapping = np.full(vn.num_nodes, -1, dtype=np.int32)
        self.link_paths = [None] * vn.num_links
        self.node_avail = pn.node_available.copy()
        self.link_avail = pn.link_available.copy()
        self.link_cost = 0.0
        self.outcome = IN_PROGRESS
        self.failure = ""

    @property
    def done(self):
        return self.outcome != IN_PROGRESS

    @property
    def current_vnode(self):
        if self.t >= len(self.order):
            return -1
        return int(self.order[self.t])

    def clone(self):
        other = object.__new__(EnvState)
        other.instance = self.instance
        other.reward_spec = self.reward_spec
        other.feature_spec = self.feature_spec
        other.order = self.order
        other.t = self.t
        other.mapping = self.mapping.copy()
        other.link_paths = list(self.link_paths)
        other.node_avail = self.node_avail.copy()
        other.link_avail = self.link_avail.copy()
        other.link_cost = self.link_cost
        other.outcome = self.outcome
        other.failure = self.failure
        return other

    def r2c(self):
        vn = self.instance.vn
        if self.outcome != SUCCESS:
            return 0.0
        cost = float(vn.node_demand.sum()) + self.link_cost
        return vn.revenue() / cost if cost > 0 else 1.0

    def to_solution(self):
        vn = self.instance.vn
        sol = Solution(vn.id, self.mapping.copy(), list(self.link_paths),
                       feasible=self.outcome == SUCCESS,
                       failure_reason=self.failure)
        evaluate_solution(vn, sol)
        return sol


@dataclass
class Observation:
    pn_features: np.ndarray
    vn_features: np.ndarray
    current_vnode: int
    mask: np.ndarray
    manifest: dict = field(default_factory=dict)


def action_mask(state):
    if state.done:
        raise StateError("mask requested for a finished episode")
    return placement_mask(state.instance.pn, state.instance.vn,
                          state.current_vnode, state.mapping, state.node_avail)


def _pn_topology_features(pn):
    cache = pn._topo_cache
    if "feature_block" not in cache:
        cols = np.stack([
            graphmetrics.degree_centrality(pn),
            graphmetrics.normalized_by_max(graphmetrics.closeness_centrality(pn)),
            graphmetrics.normalized_by_max(graphmetrics.betweenness_raw(pn)),
            graphmetrics.eigenvector_centrality(pn),
        ], axis=1)
        cache["feature_block"] = cols
    return cache["feature_block"]


def _adj_link_sums(pn, link_values):
    out = np.zeros(pn.num_nodes)
    np.add.at(out, pn.edge_u, link_values)
    np.add.at(out, pn.edge_v, link_values)
    return out


def extract_features(state, feature_spec=None):
    """Observation matrices per the feature specification, all in [0, 1]."""
    spec = tuple(feature_spec or state.feature_spec)
    vn, pn = state.instance.vn, state.instance.pn
    cur = state.current_vnode
    kinds = pn.node_kinds
    max_cap = np.maximum(pn.node_capacity.max(axis=1), 1e-12)
    pn_cols, pn_names = [], []
    vn_cols, vn_names = [], []
    if "resources" in spec:
        for r, kind in enumerate(kinds):
            pn_cols.append(state.node_avail[r] / max_cap[r])
            pn_names.append(f"avail_{kind}")
            pn_cols.append(pn.node_capacity[r] / max_cap[r])
            pn_names.append(f"cap_{kind}")
        adj_cap = _adj_link_sums(pn, pn.link_capacity)
        max_adj = max(float(adj_cap.max()), 1e-12)
        pn_cols.append(_adj_link_sums(pn, state.link_avail) / max_adj)
        pn_names.append("adj_avail_bandwidth")
        pn_cols.append(adj_cap / max_adj)
        pn_names.append("adj_cap_bandwidth")
        demand = vn.node_demand[:, cur] if cur >= 0 else np.zeros(len(kinds))
        for r, kind in enumerate(kinds):
            pn_cols.append(np.full(pn.num_nodes,
                                   min(float(demand[r]) / max_cap[r], 1.0)))
            pn_names.append(f"demand_{kind}")
        for r, kind in enumerate(kinds):
            vn_cols.append(np.minimum(vn.node_demand[r] / max_cap[r], 1.0))
            vn_names.append(f"demand_{kind}")
        vn_adj = np.zeros(vn.num_nodes)
        np.add.at(vn_adj, vn.edge_a, vn.link_demand)
        np.add.at(vn_adj, vn.edge_b, vn.link_demand)
        vn_cols.append(np.minimum(vn_adj / max_adj, 1.0))
        vn_names.append("adj_demand_bandwidth")
    if "status" in spec:
        hosts = np.zeros(pn.num_nodes)
        hosts[state.mapping[state.mapping >= 0]] = 1.0
        pn_cols.append(hosts)
        pn_names.append("hosts_request")
        placed = (state.mapping >= 0).astype(np.float64)
        vn_cols.append(placed)
        vn_names.append("placed")
        is_cur = np.zeros(vn.num_nodes)
        if cur >= 0:
            is_cur[cur] = 1.0
        vn_cols.append(is_cur)
        vn_names.append("is_current")
    if "topological" in spec:
        block = _pn_topology_features(pn)
        for j, name in enumerate(("degree", "closeness", "betweenness", "eigenvector")):
            pn_cols.append(block[:, j])
            pn_names.append(name)
    pn_mat = np.stack(pn_cols, axis=1) if pn_cols else np.zeros((pn.num_nodes, 0))
    vn_mat = np.stack(vn_cols, axis=1) if vn_cols else np.zeros((vn.num_nodes, 0))
    manifest = {"pn": pn_names, "vn": vn_names,
                "normalization": "resource columns divided by the network-wide "
                                 "max capacity of their kind (clipped at 1); "
                                 "centralities divided by their max"}
    return pn_mat, vn_mat, manifest


def _observe(state):
    pn_mat, vn_mat, manifest = extract_features(state)
    return Observation(pn_mat, vn_mat, state.current_vnode,
                       action_mask(state) if not state.done else
                       np.zeros(state.instance.pn.num_nodes, dtype=bool),
                       manifest)


def env_reset(instance, reward_spec=None, feature_spec=DEFAULT_FEATURES):
    state = EnvState(instance, reward_spec, feature_spec)
    return state, _observe(state)


def env_step(state, action, build_obs=True):
    """Place the current virtual node on ``action`` and route its links.

    Returns (state, observation, reward, done, info). The observation is
    None when build_obs is false (internal search use).
    """
    if state.done:
        raise StateError("episode is finished; reset before stepping")
    vn, pn = state.instance.vn, state.instance.pn
    if not (0 <= int(action) <= pn.num_nodes - 1):
        raise ProtocolError("bad_action", f"action {action} outside 0..{pn.num_nodes - 1}")
    action = int(action)
    v = state.current_vnode
    spec = state.reward_spec
    ok_node = (not np.any(state.mapping == action) and
               bool(np.all(state.node_avail[:, action] >= vn.node_demand[:, v])))
    if not ok_node:
        state.outcome = FAILURE
        state.failure = FAIL_NODE
        reward = spec.penalty(vn.num_nodes)
        return state, (_observe(state) if build_obs else None), reward, True, _info(state)
    state.mapping[v] = action
    state.node_avail[:, action] -= vn.node_demand[:, v]
    incident = [e for e in range(vn.num_links)
                if (vn.edge_a[e] == v and state.mapping[vn.edge_b[e]] >= 0)
                or (vn.edge_b[e] == v and state.mapping[vn.edge_a[e]] >= 0)]
    incident.sort(key=lambda e: (-float(vn.link_demand[e]), e))
    for e in incident:
        other = int(vn.edge_b[e]) if vn.edge_a[e] == v else int(vn.edge_a[e])
        limit = (float(vn.latency_limit[e])
                 if vn.latency_limit is not None and pn.link_latency is not None
                 else None)
        path = route_virtual_link(pn, float(vn.link_demand[e]), action,
                                  int(state.mapping[other]), _k_paths(state),
                                  latency_limit=limit, link_avail=state.link_avail)
        if path is None:
            state.outcome = FAILURE
            state.failure = FAIL_LINK
            if limit is not None:
                relaxed = route_virtual_link(pn, float(vn.link_demand[e]), action,
                                             int(state.mapping[other]),
                                             _k_paths(state),
                                             link_avail=state.link_avail)
                if relaxed is not None:
                    state.failure = FAIL_LATENCY
            reward = spec.penalty(vn.num_nodes)
            return state, (_observe(state) if build_obs else None), reward, True, _info(state)
        for q in range(len(path) - 1):
            pe = pn.edge_between(int(path[q]), int(path[q + 1]))
            state.link_avail[pe] -= float(vn.link_demand[e])
        state.link_paths[e] = path
        state.link_cost += (len(path) - 1) * float(vn.link_demand[e])
    state.t += 1
    if state.t == vn.num_nodes:
        state.outcome = SUCCESS
        reward = spec.intermediate(vn.num_nodes) + state.r2c()
        done = True
    else:
        reward = spec.intermediate(vn.num_nodes)
        done = False
    return state, (_observe(state) if build_obs else None), reward, done, _info(state)


def _k_paths(state):
    return getattr(state.instance, "k_paths", 10)


def _info(state):
    return {"outcome": state.outcome, "r2c": state.r2c(),
            "failure": state.failure, "step": state.t}
