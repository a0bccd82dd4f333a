"""Environment: reset/step semantics, masks, rewards, features."""

import numpy as np
import pytest

from conftest import make_pn, make_vn, random_small_instance
from oracles import (PATH3_BETWEENNESS_NORM_BY_MAX, PATH3_CLOSENESS_NORM,
                     PATH3_DEGREE, PATH3_EIGENVECTOR, STAR4_BETWEENNESS_NORM_BY_MAX,
                     STAR4_CLOSENESS, STAR4_DEGREE, STAR4_EIGENVECTOR)
from vnemb.embedding import verify_solution
from vnemb.environment import (Instance, RewardSpec, action_mask, env_reset,
                               env_step, extract_features)
from vnemb.errors import ProtocolError, StateError


def small_instance(node_cap=100.0, link_cap=100.0, node_demand=10.0,
                   link_demand=10.0, vn_nodes=3, vn_edges=((0, 1), (1, 2))):
    pn = make_pn(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)],
                 node_cap=node_cap, link_cap=link_cap)
    vn = make_vn(vn_nodes, list(vn_edges), node_demand=node_demand,
                 link_demand=link_demand)
    return Instance(vn, pn)


class TestResetAndMask:
    def test_reset_exposes_demand_order(self):
        inst = small_instance(node_demand=np.array([[5.0, 30.0, 10.0]]))
        state, obs = env_reset(inst)
        assert obs.vn_features.shape[0] == 3
        assert state.current_vnode == 1  # largest total demand first
        assert obs.current_vnode == 1
        assert len(obs.mask) == 5

    def test_all_false_mask_when_starved(self):
        inst = small_instance(node_cap=5.0, node_demand=20.0)
        state, obs = env_reset(inst)
        assert not obs.mask.any()

    def test_reset_deterministic(self):
        inst = small_instance()
        _, a = env_reset(inst)
        _, b = env_reset(inst)
        assert np.array_equal(a.pn_features, b.pn_features)
        assert np.array_equal(a.vn_features, b.vn_features)

    def test_mask_matches_placement_rules(self):
        inst = small_instance(node_cap=np.array([[10.0, 25.0, 30.0, 9.0, 50.0]]),
                              node_demand=20.0)
        state, obs = env_reset(inst)
        assert obs.mask.tolist() == [False, True, True, False, True]
        env_step(state, 1)
        mask = action_mask(state)
        assert not mask[1]  # already used by this request


class TestStepSemantics:
    def test_full_episode_rewards_fir(self):
        inst = small_instance(node_demand=np.array([[10.0, 10.0, 10.0]]),
                              link_demand=5.0)
        state, _ = env_reset(inst, RewardSpec("fir", 0.1))
        rewards = []
        # place in a line 0-1-2 so each link is one hop
        for action in (0, 1, 2):
            state, _obs, reward, done, info = env_step(state, action)
            rewards.append(reward)
        assert done and info["outcome"] == "success"
        assert rewards[0] == pytest.approx(0.1)
        assert rewards[1] == pytest.approx(0.1)
        assert rewards[2] == pytest.approx(0.1 + 1.0)  # all 1-hop: ratio 1
        assert sum(rewards) == pytest.approx(3 * 0.1 + 1.0)

    def test_air_reward_is_one_over_size(self):
        inst = small_instance(vn_nodes=4, vn_edges=((0, 1), (1, 2), (2, 3)))
        state, _ = env_reset(inst, RewardSpec("air"))
        state, _o, reward, done, _i = env_step(state, 0)
        assert reward == pytest.approx(0.25) and not done

    def test_noir_failure_and_penalty(self):
        inst = small_instance(node_cap=np.array([[100.0, 5.0, 5.0, 5.0, 5.0]]),
                              node_demand=10.0)
        state, _ = env_reset(inst, RewardSpec("noir"))
        state, _o, r1, done, _ = env_step(state, 0)
        assert r1 == 0.0 and not done
        state, _o, r2, done, info = env_step(state, 1)  # starved node
        assert done and info["outcome"] == "failure"
        assert r2 == 0.0  # noir penalty defaults to zero

    def test_fir_failure_penalty_is_negative_value(self):
        inst = small_instance(node_cap=np.array([[100.0, 5.0, 5.0, 5.0, 5.0]]),
                              node_demand=10.0)
        state, _ = env_reset(inst, RewardSpec("fir", 0.1))
        env_step(state, 0)
        _s, _o, reward, done, _ = env_step(state, 1)
        assert done and reward == pytest.approx(-0.1)

    def test_link_failure_reason(self):
        inst = small_instance(link_cap=1.0, link_demand=10.0)
        state, _ = env_reset(inst)
        state, _o, _r, done, info = env_step(state, 0)
        if not done:
            state, _o, _r, done, info = env_step(state, 1)
        assert done and info["outcome"] == "failure"
        assert state.failure == "link_resource"

    def test_step_after_done_raises(self):
        inst = small_instance(node_cap=1.0)
        state, _ = env_reset(inst)
        env_step(state, 0)
        with pytest.raises(StateError):
            env_step(state, 0)

    def test_out_of_range_action(self):
        state, _ = env_reset(small_instance())
        with pytest.raises(ProtocolError):
            env_step(state, 99)

    def test_success_solution_verifies(self):
        rng = np.random.default_rng(0)
        done_count = 0
        for _ in range(50):
            inst = random_small_instance(rng, max_vn=4, max_pn=10)
            state, obs = env_reset(inst)
            while not state.done:
                mask = action_mask(state)
                if not mask.any():
                    env_step(state, 0)
                    break
                action = int(rng.choice(np.flatnonzero(mask)))
                env_step(state, action)
            if state.outcome == "success":
                done_count += 1
                sol = state.to_solution()
                assert verify_solution(inst.pn, inst.vn, sol).all_pass
        assert done_count > 5


class TestRewardAccountingIdentity:
    def test_fir_identity_over_random_episodes(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 200:
            inst = random_small_instance(rng, max_vn=5, max_pn=12)
            state, _ = env_reset(inst, RewardSpec("fir", 0.1))
            rewards = []
            while not state.done:
                mask = action_mask(state)
                if not mask.any():
                    break
                _s, _o, r, _d, _i = env_step(
                    state, int(rng.choice(np.flatnonzero(mask))))
                rewards.append(r)
            if state.outcome != "success":
                continue
            checked += 1
            n = inst.vn.num_nodes
            assert rewards[-1] == 0.1 + state.r2c()  # exact construction
            assert sum(rewards) == pytest.approx(n * 0.1 + state.r2c(), abs=1e-12)


class TestFeatures:
    def test_path3_centralities(self):
        pn = make_pn(3, [(0, 1), (1, 2)])
        vn = make_vn(2, [(0, 1)], node_demand=1.0, link_demand=1.0)
        state, _ = env_reset(Instance(vn, pn))
        mat, _vn_mat, manifest = extract_features(state, ("topological",))
        cols = {name: mat[:, i] for i, name in enumerate(manifest["pn"])}
        assert np.allclose(cols["degree"], PATH3_DEGREE, atol=1e-9)
        assert np.allclose(cols["closeness"], PATH3_CLOSENESS_NORM, atol=1e-9)
        assert np.allclose(cols["betweenness"], PATH3_BETWEENNESS_NORM_BY_MAX, atol=1e-9)
        assert np.allclose(cols["eigenvector"], PATH3_EIGENVECTOR, atol=1e-9)

    def test_star4_centralities(self):
        pn = make_pn(4, [(0, 1), (0, 2), (0, 3)])
        vn = make_vn(2, [(0, 1)], node_demand=1.0, link_demand=1.0)
        state, _ = env_reset(Instance(vn, pn))
        mat, _vn_mat, manifest = extract_features(state, ("topological",))
        cols = {name: mat[:, i] for i, name in enumerate(manifest["pn"])}
        assert np.allclose(cols["degree"], STAR4_DEGREE, atol=1e-9)
        assert np.allclose(cols["closeness"], STAR4_CLOSENESS, atol=1e-9)
        assert np.allclose(cols["betweenness"], STAR4_BETWEENNESS_NORM_BY_MAX, atol=1e-9)
        assert np.allclose(cols["eigenvector"], STAR4_EIGENVECTOR, atol=1e-9)

    def test_status_flags_zero_at_reset(self):
        state, obs = env_reset(small_instance())
        manifest = obs.manifest
        hosts = obs.pn_features[:, manifest["pn"].index("hosts_request")]
        placed = obs.vn_features[:, manifest["vn"].index("placed")]
        assert not hosts.any() and not placed.any()

    def test_all_features_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            inst = random_small_instance(rng)
            state, obs = env_reset(inst)
            for mat in (obs.pn_features, obs.vn_features):
                assert np.all(mat >= 0.0) and np.all(mat <= 1.0 + 1e-12)

    def test_noir_gamma_one_matches_objective(self):
        # with no intermediate reward the episode return is exactly
        # r2c * [success], the per-instance objective
        rng = np.random.default_rng(9)
        seen_success = seen_failure = False
        for _ in range(60):
            inst = random_small_instance(rng, max_vn=3, max_pn=8)
            state, _ = env_reset(inst, RewardSpec("noir"))
            total = 0.0
            while not state.done:
                mask = action_mask(state)
                if not mask.any():
                    env_step(state, 0)
                    break
                _s, _o, r, _d, _i = env_step(
                    state, int(rng.choice(np.flatnonzero(mask))))
                total += r
            if state.outcome == "success":
                assert total == pytest.approx(state.r2c())
                seen_success = True
            else:
                assert total == 0.0
                seen_failure = True
            if seen_success and seen_failure:
                break
        assert seen_success


class TestMaskSoundness:
    def test_masked_true_actions_never_fail_on_node_constraints(self):
        # a true mask entry may still fail link routing, never placement
        rng = np.random.default_rng(2718)
        link_failures = 0
        for _ in range(80):
            inst = random_small_instance(rng, max_vn=4, max_pn=10)
            state, _ = env_reset(inst)
            while not state.done:
                mask = action_mask(state)
                legal = np.flatnonzero(mask)
                if len(legal) == 0:
                    break
                env_step(state, int(rng.choice(legal)), build_obs=False)
                if state.outcome == "failure":
                    assert state.failure in ("link_resource", "latency")
                    link_failures += 1
        assert link_failures > 0  # the scenario actually exercises failures
