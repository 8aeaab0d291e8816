import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nudgeopt import (ModelParams, NudgingPolicy, ObjectiveKind, PolicyParams,
                      StaticPolicy, degroot_static_opinion, greedy_content_step,
                      initial_opinion, integrate, path_network, policy_objective)
from nudgeopt.oracle import grid_argmax


MODEL = ModelParams()


class TestGreedyContentStep:
    def test_single_target_positive_weight(self):
        assert greedy_content_step([1.0], [0.5], None, None, MODEL) == 0.6

    def test_single_target_negative_weight(self):
        assert greedy_content_step([-1.0], [0.5], None, None, MODEL) == 0.4

    def test_gamma_box_binds(self):
        u = greedy_content_step([1.0], [0.5], 0.55, PolicyParams(0.001), MODEL)
        assert u == pytest.approx(0.551)

    def test_two_disjoint_windows_tie_breaks_low(self):
        # maximizers are the two window tops; closest to the target mean wins
        u = greedy_content_step([1.0, 1.0], [0.2, 0.8], None, None, MODEL)
        assert u == pytest.approx(0.3)
        g_u = policy_objective(u, [1.0, 1.0], [0.2, 0.8], MODEL)
        g_alt = policy_objective(0.9, [1.0, 1.0], [0.2, 0.8], MODEL)
        assert g_u == pytest.approx(g_alt)
        assert g_u == pytest.approx(MODEL.omega * MODEL.epsilon, rel=1e-9)

    def test_result_always_inside_box(self):
        rng = np.random.default_rng(0)
        params = PolicyParams(0.001)
        for _ in range(200):
            k = int(rng.integers(1, 6))
            th = rng.uniform(0, 1, k)
            w = rng.uniform(-1, 1, k)
            prev = float(rng.uniform(0, 1))
            u = greedy_content_step(w, th, prev, params, MODEL)
            assert max(MODEL.u_min, prev - 0.001) - 1e-15 <= u
            assert u <= min(MODEL.u_max, prev + 0.001) + 1e-15

    def test_empty_targets_rejected(self):
        with pytest.raises(ValueError):
            greedy_content_step([], [], None, None, MODEL)

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(150):
            k = int(rng.integers(1, 9))
            th = rng.uniform(0, 1, k)
            w = rng.uniform(-1, 1, k)
            w /= np.abs(w).sum()
            u = greedy_content_step(w, th, None, None, MODEL)
            u_grid = grid_argmax(w, th, (0, 1), MODEL, 1e-5)
            g = policy_objective(u, w, th, MODEL)
            g_grid = policy_objective(u_grid, w, th, MODEL)
            assert g >= g_grid - 1e-15
            assert abs(g - g_grid) <= MODEL.omega * 1e-5

    @given(scale=st.floats(min_value=1e-3, max_value=1e3),
           seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=60, deadline=None)
    def test_argmax_invariant_under_positive_scaling(self, scale, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 6))
        th = rng.uniform(0, 1, k)
        w = rng.uniform(-1, 1, k)
        u1 = greedy_content_step(w, th, None, None, MODEL)
        u2 = greedy_content_step(scale * w, th, None, None, MODEL)
        assert u1 == u2

    @given(theta=st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=100, deadline=None)
    def test_single_positive_target_closed_form(self, theta):
        u = greedy_content_step([1.0], [theta], None, None, MODEL)
        expect = min(theta + MODEL.epsilon, MODEL.u_max)
        assert u == pytest.approx(expect, abs=1e-12)


class TestInitialOpinion:
    def test_single_target_at_zero(self):
        assert initial_opinion([1.0], [0.0], MODEL) == pytest.approx(MODEL.epsilon)

    def test_overlapping_windows_value_matches_oracle(self):
        # equal positive weights on 0.4 / 0.6: one full-strength window edge
        # beats the cancelling midpoint; compare against the dense scan
        w, th = [1.0, 1.0], [0.4, 0.6]
        u = initial_opinion(w, th, MODEL)
        g = policy_objective(u, w, th, MODEL)
        u_grid = grid_argmax(w, th, (0, 1), MODEL, 1e-5)
        g_grid = policy_objective(u_grid, w, th, MODEL)
        assert g >= g_grid - 1e-15
        assert g == pytest.approx(MODEL.omega * MODEL.epsilon, rel=1e-6)

    def test_no_targets_rejected(self):
        with pytest.raises(ValueError):
            initial_opinion([], [], MODEL)


class TestDegrootStaticOpinion:
    def test_values(self):
        assert degroot_static_opinion(ObjectiveKind.MAX_MEAN) == 1.0
        assert degroot_static_opinion(ObjectiveKind.MAX_VAR) == 0.0
        assert degroot_static_opinion(ObjectiveKind.MIN_VAR) == 0.5


class TestPolicyCallbacks:
    def test_gamma_lipschitz_on_trajectory(self):
        net = path_network(10, 1.0)
        rows = [np.array([1, 2]), np.array([7])]
        params = PolicyParams(0.001)
        policy = NudgingPolicy(ObjectiveKind.MIN_VAR, rows, MODEL, params)
        traj = integrate(net, rows, policy, 60, 0.1, MODEL)
        du = np.abs(np.diff(traj.agent_opinions[:-1], axis=0))
        assert (du <= params.gamma + 1e-12).all()

    def test_idle_agent_holds_midpoint(self):
        net = path_network(4, 1.0)
        rows = [np.array([], dtype=np.int64), np.array([1])]
        policy = NudgingPolicy(ObjectiveKind.MAX_MEAN, rows, MODEL, PolicyParams())
        traj = integrate(net, rows, policy, 3, 0.5, MODEL)
        assert (traj.agent_opinions[:, 0] == 0.5).all()

    def test_static_policy_broadcast(self):
        policy = StaticPolicy([0.25], n_agents=3)
        assert policy(0, np.zeros(2), None).tolist() == [0.25, 0.25, 0.25]
