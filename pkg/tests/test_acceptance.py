"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with:  pytest -v -s tests/test_acceptance.py
Every criterion checks its stated tolerance and its runtime budget.
"""

import json
import math
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from alphagrad.analysis import (
    BoundInputs,
    EmpiricalBiasSpec,
    empirical_bias_variance_bound,
    fobg_zero_batch_probability,
    reinforce_forms_check,
    variance_sweep,
    zobg_variance_bound,
)
from alphagrad.cli import main
from alphagrad.engine import NoiseModel
from alphagrad.envs import make_problem
from alphagrad.estimators import bernstein_epsilon, fobg, interpolation_alpha, zobg
from alphagrad.optimize import gradient_descent


@contextmanager
def criterion(number, name, budget_s):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < budget_s, f"criterion {number} overran: {elapsed:.1f}s >= {budget_s}s"
    print(f"ACCEPTANCE {number:2d} {name}: PASS ({elapsed:.1f}s < {budget_s}s)")


def test_criterion_01_heaviside_exactness():
    with criterion(1, "heaviside-exactness", 10):
        prob = make_problem("heaviside")
        for theta, sigma, n in [(0.0, 1.0, 100), (0.7, 0.3, 1000), (-1.2, 2.0, 10_000)]:
            noise = NoiseModel(sigma=sigma, dim=1)
            fb = fobg(prob.env, prob.policy, np.array([theta]), prob.x1, n, noise, 0)
            assert np.all(fb.mean == 0.0)
            assert fb.emp_var == 0.0
        noise = NoiseModel(sigma=1.0, dim=1)
        zb = zobg(prob.env, prob.policy, np.array([0.0]), prob.x1, 1_000_000, noise, 0)
        target = 1.0 / math.sqrt(2.0 * math.pi)
        se = math.sqrt(zb.emp_var / zb.n_samples)
        assert abs(zb.mean[0] - target) <= 3.0 * se


def test_criterion_02_coulomb_scaling():
    with criterion(2, "coulomb-variance-scaling", 60):
        grid = (1e-3, 1e-2, 1e-1, 1.0)
        noise = NoiseModel(sigma=1.0, dim=1)
        variances = []
        for nu in grid:
            prob = make_problem("coulomb", {"nu": nu, "theta0": 0.0})
            fb = fobg(prob.env, prob.policy, np.array([0.0]), prob.x1, 100_000, noise, 2)
            variances.append(fb.emp_var)
        slope = np.polyfit(np.log(grid), np.log(variances), 1)[0]
        assert -1.3 <= slope <= -0.7, f"slope {slope}"

        nu, n, batches = 0.1, 4, 10_000
        prob = make_problem("coulomb", {"nu": nu, "theta0": 0.0})
        zero = 0
        for b in range(batches):
            fb = fobg(prob.env, prob.policy, np.array([0.0]), prob.x1, n, noise, seed=b)
            zero += int(np.all(fb.per_sample == 0.0))
        p = fobg_zero_batch_probability(0.0, nu, 1.0, n)
        se = math.sqrt(p * (1.0 - p) / batches)
        assert abs(zero / batches - p) <= 4.0 * se


def test_criterion_03_empirical_bias_lemma():
    with criterion(3, "empirical-bias-lemma", 1):
        for beta in (0.5, 0.1, 0.01, 0.003):
            true_var = 1.0 / beta - 1.0
            spec = EmpiricalBiasSpec(beta=beta, delta_gap=1.0, spread=0.0, mean_norm=1.0)
            assert empirical_bias_variance_bound(spec) <= true_var + 1e-12
            # canonical two-point example: variance is exactly 1/beta - 1
            z = np.array([0.0, 1.0 / beta])
            pr = np.array([1.0 - beta, beta])
            mean = float(pr @ z)
            assert pr @ (z - mean) ** 2 == pytest.approx(true_var, rel=1e-12)
        rng = np.random.default_rng(5)
        for _ in range(1000):
            beta = float(rng.uniform(0.005, 0.995))
            a, b = rng.normal(scale=4.0, size=2)
            mean = (1 - beta) * a + beta * b
            true_var = (1 - beta) * (a - mean) ** 2 + beta * (b - mean) ** 2
            spec = EmpiricalBiasSpec(
                beta=beta, delta_gap=abs(a - mean), spread=0.0, mean_norm=abs(mean)
            )
            assert empirical_bias_variance_bound(spec) <= true_var + 1e-9


def test_criterion_04_zobg_variance_bound():
    with criterion(4, "zobg-variance-bound", 10):
        prob = make_problem("heaviside")  # |V| <= 1, open-loop Jacobian norm 1
        sigma = 1.0
        noise = NoiseModel(sigma=sigma, dim=1)
        batch = zobg(prob.env, prob.policy, np.array([0.0]), prob.x1, 100_000,
                     noise, 4, use_baseline=False)
        bound = zobg_variance_bound(BoundInputs(1.0, 1.0), 1, 1, sigma, 1)
        assert batch.emp_var <= bound


def test_criterion_05_alpha_closed_form():
    with criterion(5, "alpha-closed-form", 5):
        rng = np.random.default_rng(55)
        checked_infeasible = 0
        for _ in range(1000):
            s0, s1 = rng.uniform(0.0, 5.0, 2)
            s1 += 1e-12
            B = rng.uniform(0.0, 4.0)
            eps = rng.uniform(0.0, 2.0)
            gamma = rng.uniform(0.0, 3.0)
            alpha, feasible = interpolation_alpha(s0, s1, B, eps, gamma)
            if eps > gamma:
                assert (alpha, feasible) == (0.0, False)
                checked_infeasible += 1
                continue
            cap = 1.0 if B == 0 else min(1.0, (gamma - eps) / B)
            coarse = np.linspace(0.0, cap, 1001)
            obj = coarse**2 * s1 + (1 - coarse) ** 2 * s0
            best = coarse[np.argmin(obj)]
            fine = np.clip(np.linspace(best - 2e-3, best + 2e-3, 4001), 0.0, cap)
            obj = fine**2 * s1 + (1 - fine) ** 2 * s0
            assert abs(alpha - fine[np.argmin(obj)]) <= 1e-6
        assert checked_infeasible > 50  # the alpha=0 branch was exercised


def test_criterion_06_bernstein_radius():
    with criterion(6, "bernstein-radius", 1):
        rng = np.random.default_rng(66)
        for _ in range(1000):
            s2 = float(rng.uniform(1e-3, 1e3))
            R = float(rng.uniform(0.0, 100.0))
            n = int(rng.integers(1, 100_000))
            d = int(rng.integers(1, 500))
            delta = float(rng.uniform(0.005, 0.995))
            eps = bernstein_epsilon(s2, R, n, d, delta)
            tail = (d + 1) * math.exp(-n * eps**2 / 2.0 / (s2 + R * eps / 3.0))
            assert abs(tail - delta) <= 1e-10
        eps_by_n = [bernstein_epsilon(3.0, 2.0, n, 7, 0.05)
                    for n in (1, 2, 4, 8, 64, 512, 4096, 10**6)]
        assert all(a > b for a, b in zip(eps_by_n, eps_by_n[1:]))


def test_criterion_07_interpolated_variance_identity():
    with criterion(7, "interpolated-variance-identity", 60):
        prob = make_problem("quadratic")
        noise = NoiseModel(sigma=prob.sigma, dim=1)
        n, reps, alpha = 8, 10_000, 0.3
        m1 = np.empty(reps)
        m0 = np.empty(reps)
        for r in range(reps):
            fb = fobg(prob.env, prob.policy, prob.theta0, prob.x1, n, noise, seed=r)
            zb = zobg(prob.env, prob.policy, prob.theta0, prob.x1, n, noise, seed=r)
            m1[r] = fb.mean[0]
            m0[r] = zb.mean[0]
        blended_var = (alpha * m1 + (1 - alpha) * m0).var(ddof=1)
        rhs = alpha**2 * m1.var(ddof=1) + (1 - alpha) ** 2 * m0.var(ddof=1)
        ratio = blended_var / rhs
        assert 0.9 <= ratio <= 1.1, f"ratio {ratio}"


def test_criterion_08_causality_equivalence():
    with criterion(8, "causality-two-forms", 30):
        prob = make_problem("quad2")
        noise = NoiseModel(sigma=prob.sigma, dim=1)
        chk = reinforce_forms_check(prob.env, prob.policy, prob.theta0, prob.x1,
                                    100_000, noise, 8)
        assert chk.discrepancy <= 4.0 * chk.discrepancy_se


def test_criterion_09_stiffness_sweep():
    with criterion(9, "stiffness-sweep", 300):
        res = variance_sweep("pushing", "k", [10.0, 100.0, 1000.0, 10_000.0],
                             n_samples=128, seed=9)
        vf = res.column("var_fobg")
        vz = res.column("var_zobg")
        assert not any(r.diverged for r in res.rows)
        assert all(vf[i] <= vf[i + 1] for i in range(3)), f"not nondecreasing: {vf}"
        assert vf[0] < vz[0], f"k=10: {vf[0]} !< {vz[0]}"
        assert vf[3] > vz[3], f"k=1e4: {vf[3]} !> {vz[3]}"


def test_criterion_10_chaos_sweep():
    with criterion(10, "chaos-sweep", 300):
        ratios = []
        for steps in (100, 300, 1000):
            prob = make_problem("pendulum", {"sim_steps": steps})
            noise = NoiseModel(sigma=prob.sigma, dim=4)
            fb = fobg(prob.env, prob.policy, prob.theta0, prob.x1, 256, noise, 10)
            zb = zobg(prob.env, prob.policy, prob.theta0, prob.x1, 256, noise, 10)
            ratios.append(fb.emp_var / zb.emp_var)
        assert ratios[0] < ratios[1] < ratios[2], f"ratios {ratios}"


def _near_window_alphas(run, jump, sigma):
    dist = np.abs(run.thetas[: run.steps_done, 0] - jump)
    near = dist <= sigma
    if not near.any():
        near = dist == dist.min()  # nearest-iterate fallback
    return run.alphas[near]


def test_criterion_11_landscape_outcomes():
    with criterion(11, "landscape-case-studies", 120):
        seed = 0
        # ball with wall: flat-region blindness of the first-order run
        prob = make_problem("ballwall")
        noise = NoiseModel(sigma=prob.sigma, dim=1)
        runs = {
            est: gradient_descent(prob.env, prob.policy, prob.theta0, est, prob.steps,
                                  prob.lr, prob.n_samples, noise, gamma=prob.gamma,
                                  delta=prob.delta, n_eval=prob.eval_samples, seed=seed)
            for est in ("fobg", "zobg", "aobg")
        }
        all_costs = np.concatenate([runs["fobg"].costs, runs["zobg"].costs])
        cost_range = all_costs.max() - all_costs.min()
        gap = runs["fobg"].costs[-1] - runs["zobg"].costs[-1]
        assert gap >= 0.2 * cost_range, f"gap {gap} < 0.2 * {cost_range}"
        assert runs["fobg"].thetas[:, 0].max() < prob.jump_at  # never left the flat
        med_bw = np.median(runs["aobg"].alphas)
        assert med_bw > 0.0
        near_bw = _near_window_alphas(runs["aobg"], prob.jump_at, prob.sigma)
        assert np.median(near_bw) < med_bw

        # momentum transfer: the first-order run walks off the cliff
        prob = make_problem("momentum")
        noise = NoiseModel(sigma=prob.sigma, dim=1)
        runs = {
            est: gradient_descent(prob.env, prob.policy, prob.theta0, est, prob.steps,
                                  prob.lr, prob.n_samples, noise, gamma=prob.gamma,
                                  delta=prob.delta, n_eval=prob.eval_samples, seed=seed)
            for est in ("fobg", "zobg", "aobg")
        }
        L, P, mass, speed = 1.0, 10.0, 1.0, 5.0
        assert runs["fobg"].thetas[-1, 0] > L
        assert runs["fobg"].costs[-1] >= P - mass * speed * L
        for est in ("zobg", "aobg"):
            assert 0.0 <= runs[est].thetas[-1, 0] <= L
            assert runs[est].costs[-1] < 0.0
        med_mt = np.median(runs["aobg"].alphas)
        assert med_mt > 0.0
        near_mt = _near_window_alphas(runs["aobg"], prob.jump_at, prob.sigma)
        assert np.median(near_mt) < med_mt


def test_criterion_12_determinism(tmp_path):
    with criterion(12, "byte-identical-reruns", 60):
        configs = {
            "estimate": {
                "command": "estimate", "env": {"name": "heaviside"},
                "estimator": {"n_samples": 200},
            },
            "sweep": {
                "command": "sweep", "env": {"name": "coulomb"},
                "estimator": {"n_samples": 64},
                "sweep": {"parameter": "nu", "grid": [0.1, 1.0]},
            },
            "optimize": {
                "command": "optimize", "env": {"name": "quadratic"},
                "optimizer": {"estimator": "aobg", "steps": 5, "eval_samples": 32},
                "estimator": {"n_samples": 16},
            },
            "landscape": {
                "command": "landscape", "env": {"name": "heaviside"},
                "estimator": {"n_samples": 32},
                "optimizer": {"eval_samples": 32},
                "landscape": {"points": 7, "lo": [-1.0], "hi": [1.0]},
            },
        }
        for cmd, cfg in configs.items():
            cfg["seed"] = 3
            path = tmp_path / f"{cmd}.json"
            path.write_text(json.dumps(cfg))
            outputs = []
            for tag, threads in (("a", "1"), ("b", "4"), ("c", "1")):
                out = tmp_path / f"{cmd}_{tag}"
                os.environ["ALPHAGRAD_THREADS"] = threads
                try:
                    rc = main([cmd, "--config", str(path), "--out", str(out)])
                finally:
                    os.environ.pop("ALPHAGRAD_THREADS", None)
                assert rc == 0
                outputs.append((out / f"{cmd}.csv").read_bytes())
            assert outputs[0] == outputs[1] == outputs[2], f"{cmd} not reproducible"
