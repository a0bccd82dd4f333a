"""Solver suite: node-ranking greedies, meta-heuristics, tree search, exact.

Every solver maps an Instance (request + substrate snapshot) to a Solution.
Stochastic solvers are pure functions of (instance, config, seed).
"""

from .ranking import RankingSolver, RwBfsSolver, rank_nodes
from .meta import MetaConfig, MetaSolver
from .mcts import MctsConfig, MctsSolver
from .exact import ExactSolver

_RANK_KINDS = {"grc_rank": "grc", "nrm_rank": "nrm", "rw_rank": "rw",
               "nea_rank": "nea", "pl_rank": "pl"}
_META_KINDS = {"ga_meta": "ga", "pso_meta": "pso", "aco_meta": "aco",
               "sa_meta": "sa", "ts_meta": "ts"}


def make_solver(name, params=None):
    """Instantiate a registered solver; params come from the config file."""
    params = dict(params or {})
    if name in _RANK_KINDS:
        return RankingSolver(_RANK_KINDS[name])
    if name in _META_KINDS:
        return MetaSolver(_META_KINDS[name], MetaConfig(**params))
    if name == "rw_bfs":
        return RwBfsSolver(**params)
    if name == "mcts":
        return MctsSolver(MctsConfig(**params))
    if name == "exact":
        return ExactSolver(**params)
    raise KeyError(f"unknown solver {name!r}; registered: {', '.join(solver_names())}")


def solver_names():
    return [*_RANK_KINDS, *_META_KINDS, "rw_bfs", "mcts", "exact"]
