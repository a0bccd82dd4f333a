"""Monte Carlo tree search over the placement MDP.

One tree decision commits one virtual node placement. Selection uses UCT;
leaf evaluation runs a uniform-random feasible rollout to episode end and
scores the resulting R2C (0 for failures). After each decision budget the
most-visited child is committed and the search descends into its subtree.
"""

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..environment import SUCCESS, EnvState, action_mask, env_step
from ..errors import VnembError


@dataclass
class MctsConfig:
    simulations: int = 200
    exploration: float = math.sqrt(2.0)
    rollout: str = "random_feasible"

    def validate(self):
        if self.simulations < 1:
            raise VnembError("mcts needs simulations >= 1")
        if self.exploration <= 0:
            raise VnembError("mcts exploration constant must be positive")
        if self.rollout != "random_feasible":
            raise VnembError(f"unknown rollout policy {self.rollout!r}")
        return self


class _Node:
    __slots__ = ("state", "action", "children", "untried", "visits", "value_sum",
                 "terminal_value")

    def __init__(self, state, action=-1):
        self.state = state
        self.action = action
        self.children = {}
        self.visits = 0
        self.value_sum = 0.0
        self.terminal_value = None
        if state.done:
            self.terminal_value = state.r2c() if state.outcome == SUCCESS else 0.0
            self.untried = []
        else:
            self.untried = list(np.flatnonzero(action_mask(state)))
            if not self.untried:
                self.terminal_value = 0.0  # every action fails on node constraints


class MctsSolver:
    deterministic = False  # seeded-deterministic

    name = "mcts"

    def __init__(self, cfg=None):
        self.cfg = (cfg or MctsConfig()).validate()

    def _rollout(self, state, rng):
        vn, pn = state.instance.vn, state.instance.pn
        lat_aware = vn.latency_limit is not None and pn.link_latency is not None
        vlat = (vn.latency_limit if lat_aware
                else np.full(max(vn.num_links, 1), -1.0))
        link_lat = pn.link_latency if pn.link_latency is not None \
            else np.zeros(pn.num_links)
        assign = state.mapping.copy()
        ok, added = kernels.rollout_uniform(
            pn.indptr, pn.nbr, pn.eid, pn.num_nodes, pn.num_links,
            state.node_avail.copy(), state.link_avail.copy(),
            vn.node_demand, vn.edge_a, vn.edge_b, vn.link_demand,
            np.asarray(vlat, dtype=np.float64), state.order, state.t,
            assign, state.instance.k_paths, link_lat, lat_aware,
            kernels.make_rng_state(int(rng.integers(0, 2**62))))
        if not ok:
            return 0.0
        cost = float(vn.node_demand.sum()) + state.link_cost + added
        return vn.revenue() / cost if cost > 0 else 1.0

    def _simulate(self, root, rng, c):
        path = [root]
        node = root
        while node.terminal_value is None and not node.untried:
            log_n = math.log(max(node.visits, 1))
            best, best_key = None, None
            for action in sorted(node.children):
                child = node.children[action]
                key = (child.value_sum / child.visits
                       + c * math.sqrt(log_n / child.visits))
                if best_key is None or key > best_key:
                    best, best_key = child, key
            node = best
            path.append(node)
        if node.terminal_value is not None:
            value = node.terminal_value
        else:
            action = node.untried.pop(int(rng.integers(len(node.untried))))
            child_state = node.state.clone()
            env_step(child_state, int(action), build_obs=False)
            child = _Node(child_state, action=int(action))
            node.children[int(action)] = child
            path.append(child)
            value = (child.terminal_value if child.terminal_value is not None
                     else self._rollout(child_state, rng))
        for entry in path:
            entry.visits += 1
            entry.value_sum += value
        return value

    def solve(self, instance, seed=0):
        rng = np.random.Generator(np.random.PCG64(seed))
        c = self.cfg.exploration
        committed = EnvState(instance)
        root = _Node(committed.clone())
        while not committed.done:
            for _ in range(self.cfg.simulations):
                self._simulate(root, rng, c)
            if not root.children:
                env_step(committed, 0, build_obs=False)  # no legal action: fail out
                break
            action = max(root.children,
                         key=lambda a: (root.children[a].visits, -a))
            env_step(committed, int(action), build_obs=False)
            root = root.children[action]
        return committed.to_solution()
