"""Rollout engine: trajectory recursion, exact gradients, determinism."""

import numpy as np
import pytest

from alphagrad.engine import (
    ConfigurationError,
    DivergedRolloutError,
    EnvModel,
    NoiseModel,
    Policy,
    policy_jacobian,
    rollout,
    rollout_with_gradient,
    run_batch,
    value_to_go,
)
from alphagrad.envs import make_problem
from conftest import central_diff, open_loop, scalar_integrator


class TestRollout:
    def test_zero_cost_env(self):
        prob = make_problem("zero")
        tr = rollout(prob.env, prob.policy, np.array([0.7]), prob.x1, np.zeros((1, 1)))
        assert tr.total_cost == 0.0

    def test_scalar_integrator_example(self):
        env = scalar_integrator(2)
        tr = rollout(env, open_loop(2), np.array([1.0, 1.0]), np.array([0.0]), np.zeros((2, 1)))
        assert tr.total_cost == 2.0
        assert list(tr.states.ravel()) == [0.0, 1.0, 2.0]

    def test_one_step_heaviside(self):
        prob = make_problem("heaviside")
        tr = rollout(prob.env, prob.policy, np.array([0.3]), prob.x1, np.array([[-0.5]]))
        assert tr.total_cost == 0.0

    def test_trajectory_recursion_invariants(self):
        env = scalar_integrator(4)
        theta = np.array([0.3, -0.2, 0.5, 0.1])
        noises = np.array([[0.05], [-0.1], [0.2], [0.0]])
        tr = rollout(env, open_loop(4), theta, np.array([0.0]), noises)
        for h in range(4):
            u = theta[h] + noises[h, 0]
            assert tr.inputs[h, 0] == pytest.approx(u)
            assert tr.states[h + 1, 0] == pytest.approx(tr.states[h, 0] + u)
        assert tr.total_cost == pytest.approx(tr.step_costs.sum())
        assert tr.total_cost == pytest.approx(tr.step_costs[0] + value_to_go(tr, 2))

    def test_purity_and_determinism(self):
        env = scalar_integrator(3)
        theta = np.array([0.1, 0.2, 0.3])
        noises = np.full((3, 1), 0.01)
        a = rollout(env, open_loop(3), theta, np.array([0.0]), noises)
        b = rollout(env, open_loop(3), theta, np.array([0.0]), noises)
        assert np.array_equal(a.states, b.states)
        assert a.total_cost == b.total_cost

    def test_dimension_mismatch(self):
        env = scalar_integrator(2)
        with pytest.raises(ConfigurationError):
            rollout(env, open_loop(2), np.array([1.0]), np.array([0.0]), np.zeros((2, 1)))
        with pytest.raises(ConfigurationError):
            rollout(env, open_loop(2), np.array([1.0, 1.0]), np.array([0.0, 0.0]), np.zeros((2, 1)))
        with pytest.raises(ConfigurationError):
            rollout(env, open_loop(2), np.array([1.0, 1.0]), np.array([0.0]), np.zeros((3, 1)))

    def test_diverged_rollout_carries_step(self):
        env = EnvModel(
            name="doubler",
            state_dim=1,
            input_dim=1,
            horizon=400,
            step=lambda s, u: (s[0] * 4.0 + u[0],),
            cost=lambda h, s, u: s[0] * s[0],
            x1=(1.0,),
        )
        with pytest.raises(DivergedRolloutError) as err:
            rollout(env, open_loop(400), np.zeros(400), np.array([1.0]), np.zeros((400, 1)))
        assert err.value.step > 1


class TestValueToGo:
    def test_partial_sum(self):
        env = scalar_integrator(3)
        tr = rollout(env, open_loop(3), np.array([1.0, np.sqrt(2.0), np.sqrt(3.0)]),
                     np.array([0.0]), np.zeros((3, 1)))
        assert value_to_go(tr, 2) == pytest.approx(2.0 + 3.0)
        assert value_to_go(tr, 1) == pytest.approx(tr.total_cost)

    def test_zero_costs(self):
        prob = make_problem("zero")
        tr = rollout(prob.env, prob.policy, np.array([1.0]), prob.x1, np.zeros((1, 1)))
        assert value_to_go(tr, 1) == 0.0

    def test_out_of_range(self):
        env = scalar_integrator(2)
        tr = rollout(env, open_loop(2), np.zeros(2), np.array([0.0]), np.zeros((2, 1)))
        with pytest.raises(IndexError):
            value_to_go(tr, 0)
        with pytest.raises(IndexError):
            value_to_go(tr, 3)


class TestPolicyJacobian:
    def test_open_loop_selector_block(self):
        pol = Policy(kind="open-loop", input_dim=1, horizon=3)
        jac = policy_jacobian(pol, np.array([0.0]), np.zeros(3), h=2)
        assert list(jac[0]) == [0.0, 1.0, 0.0]

    def test_linear_feedback_row(self):
        pol = Policy(kind="linear-feedback", input_dim=1, state_dim=2)
        jac = policy_jacobian(pol, np.array([3.0, 5.0]), np.zeros(3))
        assert list(jac[0]) == [3.0, 5.0, 1.0]

    @pytest.mark.parametrize(
        "pol,x",
        [
            (Policy(kind="open-loop", input_dim=2, horizon=3), np.zeros(1)),
            (Policy(kind="linear-feedback", input_dim=2, state_dim=3), np.array([0.4, -1.2, 2.0])),
            (
                Policy(kind="linear-feedback", input_dim=2, state_dim=4, feature_indices=(0, 2)),
                np.array([0.4, -1.2, 2.0, 0.3]),
            ),
        ],
    )
    def test_matches_finite_differences(self, pol, x):
        rng = np.random.default_rng(7)
        theta = rng.normal(size=pol.param_dim)
        h = 2 if pol.kind == "open-loop" else 1
        jac = policy_jacobian(pol, x, theta, h=h)
        state = tuple(np.asarray(v) for v in x)
        for j in range(pol.input_dim):
            def f(th, j=j):
                return float(np.asarray(pol.act(h, state, th)[j]))
            fd = central_diff(f, theta, rel_step=1e-7)
            np.testing.assert_allclose(jac[j], fd, rtol=1e-6, atol=1e-7)

    def test_feedback_jac_state(self):
        pol = Policy(kind="linear-feedback", input_dim=2, state_dim=2)
        theta = np.arange(6.0)  # K = [[0,1,2],[3,4,5]]
        jac = pol.jac_state(theta)
        assert np.array_equal(jac, np.array([[0.0, 1.0], [3.0, 4.0]]))

    def test_wrong_theta_length(self):
        pol = Policy(kind="open-loop", input_dim=1, horizon=3)
        with pytest.raises(ConfigurationError):
            policy_jacobian(pol, np.zeros(1), np.zeros(4))


class TestRolloutWithGradient:
    def test_one_step_square(self):
        prob = make_problem("quadratic")
        v, g = rollout_with_gradient(prob.env, prob.policy, np.array([2.0]), prob.x1,
                                     np.zeros((1, 1)))
        assert v == 4.0
        assert g[0] == pytest.approx(4.0)

    def test_integrator_matches_finite_differences(self, rollout_cost):
        env = scalar_integrator(2)
        theta = np.array([1.0, 1.0])
        noises = np.zeros((2, 1))
        _, grad = rollout_with_gradient(env, open_loop(2), theta, np.array([0.0]), noises)
        f = rollout_cost(env, open_loop(2), np.array([0.0]), noises)
        np.testing.assert_allclose(grad, central_diff(f, theta), atol=1e-6)

    def test_heaviside_gradient_zero_off_kink(self):
        prob = make_problem("heaviside")
        for theta, w in [(0.5, 0.2), (-0.3, 0.1), (0.2, -0.9)]:
            _, g = rollout_with_gradient(prob.env, prob.policy, np.array([theta]),
                                         prob.x1, np.array([[w]]))
            assert g[0] == 0.0

    def test_value_matches_rollout_bitwise(self):
        env = scalar_integrator(3)
        theta = np.array([0.37, -0.21, 0.93])
        noises = np.array([[0.11], [-0.35], [0.02]])
        v, _ = rollout_with_gradient(env, open_loop(3), theta, np.array([0.0]), noises)
        out = run_batch(env, open_loop(3), theta, np.array([0.0]), noises[None, ...])
        assert v == out.total[0]

    @pytest.mark.parametrize("env_name", ["quadratic", "quad2", "zero"])
    def test_chain_rule_vs_fd_on_smooth_envs(self, env_name, rollout_cost):
        prob = make_problem(env_name)
        assert prob.env.smooth_everywhere
        rng = np.random.default_rng(11)
        d = prob.policy.param_dim
        for _ in range(100):
            theta = rng.normal(size=d)
            noises = rng.normal(size=(prob.env.horizon, prob.env.input_dim))
            _, grad = rollout_with_gradient(prob.env, prob.policy, theta, prob.x1, noises)
            fd = central_diff(rollout_cost(prob.env, prob.policy, prob.x1, noises), theta)
            np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-7)

    def test_chain_rule_vs_fd_pendulum(self, rollout_cost):
        prob = make_problem("pendulum", {"sim_steps": 40})
        assert prob.env.smooth_everywhere
        rng = np.random.default_rng(13)
        for _ in range(5):
            theta = np.array([2.7, 2.7, 0.0, 0.0]) + rng.normal(scale=0.2, size=4)
            noises = rng.normal(scale=0.05, size=(1, 4))
            _, grad = rollout_with_gradient(prob.env, prob.policy, theta, prob.x1, noises)
            fd = central_diff(rollout_cost(prob.env, prob.policy, prob.x1, noises), theta)
            np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-6)


class TestEnvJacobianHelpers:
    def test_step_jacobians_match_fd(self):
        prob = make_problem("pushing")
        x = np.array([0.0, 0.5, 0.62, -0.1])  # in contact, nonzero approach
        u = np.array([0.4])
        A, B = prob.env.step_jacobians(x, u)
        for i in range(4):
            def fx(xx, i=i):
                out = prob.env.step(tuple(xx), (u[0],))
                return float(np.asarray(out[i]))
            np.testing.assert_allclose(A[i], central_diff(fx, x), rtol=1e-5, atol=1e-7)
            def fu(uu, i=i):
                out = prob.env.step(tuple(x), (uu[0],))
                return float(np.asarray(out[i]))
            np.testing.assert_allclose(B[i], central_diff(fu, u), rtol=1e-5, atol=1e-7)

    def test_cost_gradients_match_fd(self):
        prob = make_problem("pushing")
        x = np.array([0.1, 0.2, 0.8, 0.05])
        u = np.array([0.3])
        gx, gu = prob.env.cost_gradients(1, x, u)
        def cx(xx):
            return float(np.asarray(prob.env.cost(1, tuple(xx), (u[0],))))
        def cu(uu):
            return float(np.asarray(prob.env.cost(1, tuple(x), (uu[0],))))
        np.testing.assert_allclose(gx, central_diff(cx, x), rtol=1e-5, atol=1e-8)
        np.testing.assert_allclose(gu, central_diff(cu, u), rtol=1e-5, atol=1e-8)


class TestNoiseModel:
    def test_score_is_w_over_sigma_squared(self):
        nm = NoiseModel(sigma=2.0, dim=3)
        w = np.array([1.0, -2.0, 4.0])
        np.testing.assert_allclose(nm.score(w), w / 4.0)

    def test_invalid_sigma(self):
        with pytest.raises(ConfigurationError):
            NoiseModel(sigma=0.0, dim=1)
        with pytest.raises(ConfigurationError):
            NoiseModel(sigma=-1.0, dim=1)

    def test_draw_mean_shrinks_with_samples(self):
        nm = NoiseModel(sigma=1.0, dim=1)
        small = nm.draw(100, 1, 0, "m").mean()
        big = nm.draw(1_000_000, 1, 0, "m").mean()
        assert abs(big) < abs(small)
        assert abs(big) < 5.0 / np.sqrt(1_000_000)

    def test_streams_reproducible_and_distinct(self):
        nm = NoiseModel(sigma=1.0, dim=2)
        a = nm.draw(10, 3, 42, "x")
        b = nm.draw(10, 3, 42, "x")
        c = nm.draw(10, 3, 42, "y")
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
