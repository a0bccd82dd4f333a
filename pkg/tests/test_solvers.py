"""Solver suite: ranking strategies, meta-heuristics, MCTS, exact oracle."""

import numpy as np
import pytest

from conftest import make_pn, make_vn, random_small_instance
from oracles import exhaustive_best_r2c
from vnemb.embedding import verify_solution
from vnemb.environment import Instance
from vnemb.errors import SolverRefusal
from vnemb.solvers import make_solver, solver_names
from vnemb.solvers.meta import MetaConfig, MetaSolver
from vnemb.solvers.mcts import MctsConfig, MctsSolver
from vnemb.solvers.ranking import RankingSolver, rank_nodes, _route_all_links

ALL_SOLVERS = solver_names()


class TestRankNodes:
    def test_grc_star_center_first(self):
        # power iteration by hand on the 4-node star: the center absorbs
        # every leaf's walk mass, so it must rank first
        pn = make_pn(4, [(0, 1), (0, 2), (0, 3)])
        rank = rank_nodes("grc", pn)
        assert rank.order[0] == 0
        assert rank.scores[0] > rank.scores[1]
        assert np.allclose(rank.scores[1:], rank.scores[1])  # leaves symmetric

    def test_nrm_monotone_in_adjacent_bandwidth(self):
        pn = make_pn(4, [(0, 1), (2, 3)],
                     node_cap=np.array([[10.0, 10.0, 10.0, 10.0]]),
                     link_cap=np.array([100.0, 50.0]))
        rank = rank_nodes("nrm", pn)
        assert rank.scores[0] == pytest.approx(10.0 * 100.0)
        assert rank.scores[2] == pytest.approx(10.0 * 50.0)
        assert rank.scores[0] > rank.scores[2]

    def test_rw_symmetric_cycle_falls_back_to_ids(self):
        pn = make_pn(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        rank = rank_nodes("rw", pn)
        assert np.allclose(rank.scores, rank.scores[0])
        assert rank.order.tolist() == [0, 1, 2, 3]

    def test_rankings_are_permutations_with_finite_scores(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            inst = random_small_instance(rng, max_vn=4, max_pn=10)
            for kind in ("grc", "nrm", "rw", "nea", "pl"):
                rank = rank_nodes(kind, inst.pn)
                assert sorted(rank.order.tolist()) == list(range(inst.pn.num_nodes))
                assert np.all(np.isfinite(rank.scores))


class TestRankingSolver:
    def test_single_node_goes_to_feasible(self):
        pn = make_pn(2, [(0, 1)], node_cap=np.array([[3.0, 10.0]]))
        vn = make_vn(2, [(0, 1)], node_demand=np.array([[5.0, 1.0]]),
                     link_demand=1.0)
        sol = RankingSolver("grc").solve(Instance(vn, pn))
        assert sol.feasible
        assert sol.node_mapping[0] == 1  # only node with room for demand 5

    def test_feasible_solutions_verify(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            inst = random_small_instance(rng)
            for kind in ("grc", "nrm", "rw", "nea", "pl"):
                sol = RankingSolver(kind).solve(inst)
                if sol.feasible:
                    assert verify_solution(inst.pn, inst.vn, sol).all_pass

    def test_relabeling_maps_solution(self):
        rng = np.random.default_rng(5)
        inst = random_small_instance(rng, max_vn=4, max_pn=10)
        vn = inst.vn
        perm = rng.permutation(vn.num_nodes)
        inv = np.argsort(perm)
        relabeled = make_vn(vn.num_nodes,
                            [(int(perm[a]), int(perm[b]))
                             for a, b in zip(vn.edge_a, vn.edge_b)],
                            node_demand=vn.node_demand[:, inv],
                            link_demand=vn.link_demand,
                            request_id=vn.id)
        base = RankingSolver("nrm").solve(inst)
        other = RankingSolver("nrm").solve(Instance(relabeled, inst.pn))
        if base.feasible and other.feasible:
            for v in range(vn.num_nodes):
                assert other.node_mapping[perm[v]] == base.node_mapping[v]


class TestRwBfs:
    def test_single_node_matches_rw_rank(self):
        pn = make_pn(4, [(0, 1), (1, 2), (2, 3)],
                     node_cap=np.array([[50.0, 80.0, 90.0, 20.0]]))
        vn2 = make_vn(2, [(0, 1)], node_demand=1.0, link_demand=1.0)
        bfs_sol = make_solver("rw_bfs").solve(Instance(vn2, pn))
        rank_sol = make_solver("rw_rank").solve(Instance(vn2, pn))
        assert bfs_sol.feasible and rank_sol.feasible
        # the BFS root (higher-demand node) lands on the top rw-ranked node
        root = vn2.decision_order()[0]
        assert bfs_sol.node_mapping[root] == rank_sol.node_mapping[
            rank_nodes("rw", vn2).order[0]]

    def test_star_on_star_center_to_center(self):
        pn = make_pn(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        vn = make_vn(4, [(0, 1), (0, 2), (0, 3)], node_demand=5.0, link_demand=5.0)
        sol = make_solver("rw_bfs").solve(Instance(vn, pn))
        assert sol.feasible
        assert sol.node_mapping[0] == 0  # hub hosts hub; leaves must be adjacent

    def test_infeasible_instance(self):
        pn = make_pn(2, [(0, 1)], node_cap=1.0)
        vn = make_vn(2, [(0, 1)], node_demand=50.0)
        sol = make_solver("rw_bfs").solve(Instance(vn, pn))
        assert not sol.feasible and sol.r2c == 0.0

    def test_feasible_solutions_verify(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            inst = random_small_instance(rng)
            sol = make_solver("rw_bfs").solve(inst)
            if sol.feasible:
                assert verify_solution(inst.pn, inst.vn, sol).all_pass


class TestMetaSolvers:
    def test_single_node_all_kinds_match_exhaustive(self):
        pn = make_pn(3, [(0, 1), (1, 2)],
                     node_cap=np.array([[30.0, 80.0, 50.0]]))
        vn = make_vn(2, [(0, 1)], node_demand=np.array([[20.0, 25.0]]),
                     link_demand=5.0)
        inst = Instance(vn, pn)
        expected = exhaustive_best_r2c(inst, _route_all_links)
        for kind in ("ga", "pso", "aco", "sa", "ts"):
            sol = MetaSolver(kind).solve(inst, seed=3)
            assert sol.feasible
            assert sol.r2c == pytest.approx(expected)

    def test_zero_generations_still_honest(self):
        rng = np.random.default_rng(4)
        inst = random_small_instance(rng, max_vn=3, max_pn=8)
        cfg = MetaConfig(generations=0)
        sol = MetaSolver("ga", cfg).solve(inst, seed=1)
        if sol.feasible:
            assert verify_solution(inst.pn, inst.vn, sol).all_pass
        else:
            assert sol.r2c == 0.0

    def test_sa_zero_temperature_hill_climbs(self):
        rng = np.random.default_rng(6)
        inst = random_small_instance(rng, max_vn=4, max_pn=10)
        cfg = MetaConfig(initial_temperature=0.0, sa_steps=200)
        solver = MetaSolver("sa", cfg)
        sol = solver.solve(inst, seed=2)
        baseline = MetaSolver("sa", MetaConfig(initial_temperature=0.0,
                                               sa_steps=1)).solve(inst, seed=2)
        assert sol.r2c >= baseline.r2c  # monotone acceptance only improves

    def test_seeded_determinism(self):
        rng = np.random.default_rng(7)
        inst = random_small_instance(rng)
        for kind in ("ga", "pso", "aco", "sa", "ts"):
            a = MetaSolver(kind).solve(inst, seed=11)
            b = MetaSolver(kind).solve(inst, seed=11)
            assert a.r2c == b.r2c
            assert np.array_equal(a.node_mapping, b.node_mapping)

    def test_feasible_solutions_verify(self):
        rng = np.random.default_rng(8)
        small = MetaConfig(population=10, generations=6, swarm=8, pso_iterations=6,
                           ants=6, aco_iterations=5, sa_steps=40, neighborhood=6,
                           ts_iterations=10)
        for _ in range(8):
            inst = random_small_instance(rng)
            for kind in ("ga", "pso", "aco", "sa", "ts"):
                sol = MetaSolver(kind, small).solve(inst, seed=0)
                if sol.feasible:
                    assert verify_solution(inst.pn, inst.vn, sol).all_pass


class TestMcts:
    def test_single_node_optimal(self):
        pn = make_pn(3, [(0, 1), (1, 2)], node_cap=np.array([[30.0, 80.0, 50.0]]))
        vn = make_vn(2, [(0, 1)], node_demand=np.array([[20.0, 25.0]]),
                     link_demand=5.0)
        inst = Instance(vn, pn)
        expected = exhaustive_best_r2c(inst, _route_all_links)
        sol = MctsSolver(MctsConfig(simulations=100)).solve(inst, seed=0)
        assert sol.feasible
        assert sol.r2c == pytest.approx(expected)

    def test_budget_one_is_single_rollout(self):
        rng = np.random.default_rng(10)
        inst = random_small_instance(rng, max_vn=3, max_pn=8)
        sol = MctsSolver(MctsConfig(simulations=1)).solve(inst, seed=5)
        if sol.feasible:
            assert verify_solution(inst.pn, inst.vn, sol).all_pass
        else:
            assert sol.r2c == 0.0

    def test_feasible_solutions_verify(self):
        rng = np.random.default_rng(11)
        solver = MctsSolver(MctsConfig(simulations=40))
        for _ in range(15):
            inst = random_small_instance(rng)
            sol = solver.solve(inst, seed=3)
            if sol.feasible:
                assert verify_solution(inst.pn, inst.vn, sol).all_pass

    def test_seeded_determinism(self):
        rng = np.random.default_rng(12)
        inst = random_small_instance(rng)
        solver = MctsSolver(MctsConfig(simulations=30))
        a = solver.solve(inst, seed=9)
        b = solver.solve(inst, seed=9)
        assert np.array_equal(a.node_mapping, b.node_mapping)
        assert a.r2c == b.r2c


class TestExact:
    def test_refuses_oversize(self):
        rng = np.random.default_rng(13)
        inst = random_small_instance(rng, max_vn=3, max_pn=8)
        with pytest.raises(SolverRefusal):
            make_solver("exact", {"vn_limit": 2}).solve(inst)

    def test_two_node_line_only_adjacent_pair_fits(self):
        pn = make_pn(3, [(0, 1), (1, 2)],
                     node_cap=np.array([[50.0, 50.0, 5.0]]),
                     link_cap=np.array([50.0, 5.0]))
        vn = make_vn(2, [(0, 1)], node_demand=30.0, link_demand=20.0)
        sol = make_solver("exact").solve(Instance(vn, pn))
        assert sol.feasible
        assert sorted(sol.node_mapping.tolist()) == [0, 1]
        assert sol.r2c == 1.0

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(14)
        for _ in range(25):
            inst = random_small_instance(rng, max_vn=3, max_pn=7)
            expected = exhaustive_best_r2c(inst, _route_all_links)
            sol = make_solver("exact").solve(inst)
            got = sol.r2c if sol.feasible else 0.0
            assert got == pytest.approx(expected, abs=1e-12)

    def test_infeasible_reported(self):
        pn = make_pn(2, [(0, 1)], node_cap=1.0)
        vn = make_vn(2, [(0, 1)], node_demand=50.0)
        sol = make_solver("exact").solve(Instance(vn, pn))
        assert not sol.feasible and sol.failure_reason


class TestDominanceProperty:
    def test_exact_dominates_all_solvers(self):
        rng = np.random.default_rng(15)
        exact = make_solver("exact", {"vn_limit": 4, "pn_limit": 12})
        others = [make_solver(n) for n in ALL_SOLVERS if n != "exact"]
        fast_meta = MetaConfig(population=12, generations=8, swarm=10,
                               pso_iterations=8, ants=8, aco_iterations=6,
                               sa_steps=60, neighborhood=8, ts_iterations=15)
        others = [MetaSolver(k, fast_meta) for k in ("ga", "pso", "aco", "sa", "ts")] \
            + [make_solver(n) for n in ("grc_rank", "nrm_rank", "rw_rank",
                                        "nea_rank", "pl_rank", "rw_bfs")] \
            + [MctsSolver(MctsConfig(simulations=50))]
        for trial in range(40):
            inst = random_small_instance(rng, max_vn=4, max_pn=12)
            best = exact.solve(inst)
            exact_r2c = best.r2c if best.feasible else 0.0
            for solver in others:
                sol = solver.solve(inst, seed=trial)
                got = sol.r2c if sol.feasible else 0.0
                assert got <= exact_r2c + 1e-9, \
                    f"{solver.name} beat exact on trial {trial}"


def test_registry_names_complete():
    assert set(ALL_SOLVERS) == {
        "grc_rank", "nrm_rank", "rw_rank", "nea_rank", "pl_rank", "rw_bfs",
        "ga_meta", "pso_meta", "aco_meta", "sa_meta", "ts_meta", "mcts", "exact"}
    for name in ALL_SOLVERS:
        solver = make_solver(name)
        assert solver.name == name
