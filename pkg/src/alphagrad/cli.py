"""Experiment runner.

    alphagrad <estimate|sweep|optimize|landscape> --config cfg.json
              [--out DIR] [--seed N] [--plot spec.json]

Each command is a pure function of (config, seed) to output bytes: results
go to ``<out>/<command>.csv`` and, with ``--plot``, a figure rendered from
that table is written next to it.  Exit codes: 0 success, 2 invalid
config/spec, 3 numeric divergence (partial CSV is still written).

``ALPHAGRAD_THREADS`` caps worker threads for sweep and landscape grids;
results are identical at any thread count because every grid point is an
independent pure computation reduced in index order.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import variance_sweep
from .config import ConfigError, ExperimentConfig, load_config
from .engine import ConfigurationError, DivergedRolloutError, NoiseModel, run_batch
from .estimators import aobg, fobg, zobg
from .optimize import evaluate_objective, gradient_descent
from .streams import derive_seed
from .table import ResultTable

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _thread_count() -> int:
    raw = os.environ.get("ALPHAGRAD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_indexed(fn, items):
    """Map preserving order; parallel when ALPHAGRAD_THREADS > 1."""
    workers = _thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_estimate(cfg: ExperimentConfig) -> ResultTable:
    prob = cfg.build_problem()
    noise = NoiseModel(sigma=prob.sigma, dim=prob.env.input_dim)
    fb = fobg(prob.env, prob.policy, prob.theta0, prob.x1, prob.n_samples, noise, cfg.seed)
    zb = zobg(
        prob.env,
        prob.policy,
        prob.theta0,
        prob.x1,
        prob.n_samples,
        noise,
        cfg.seed,
        use_baseline=cfg.use_baseline,
    )
    grad, dec = aobg(fb, zb, gamma=prob.gamma, delta=prob.delta, R=cfg.R)
    d = prob.policy.param_dim
    nan = float("nan")
    cols = (
        ["estimator"]
        + [f"mean_{i}" for i in range(d)]
        + ["emp_var", "B", "epsilon", "alpha"]
    )
    rows = (
        tuple(["fobg"] + [float(v) for v in fb.mean] + [fb.emp_var, nan, nan, nan]),
        tuple(["zobg"] + [float(v) for v in zb.mean] + [zb.emp_var, nan, nan, nan]),
        tuple(
            ["aobg"]
            + [float(v) for v in grad]
            + [nan, dec.gap, dec.epsilon, dec.alpha]
        ),
    )
    return ResultTable(
        name="estimate",
        columns=tuple(cols),
        rows=rows,
        label_columns=frozenset({"estimator"}),
        optional_columns=frozenset({"emp_var", "B", "epsilon", "alpha"}),
    )


def run_sweep(cfg: ExperimentConfig) -> ResultTable:
    prob = cfg.build_problem()
    result = variance_sweep(
        cfg.env_name,
        cfg.sweep_parameter,
        cfg.sweep_grid,
        n_samples=prob.n_samples,
        seed=cfg.seed,
        sigma=cfg.sigma,
        reps=cfg.sweep_reps,
        use_baseline=cfg.use_baseline,
        env_params=cfg.env_params,
    )
    rows = []
    for r in result.rows:
        gap = float(np.linalg.norm(r.mean_fobg - r.mean_zobg)) if not r.diverged else float("nan")
        rows.append(
            (
                result.parameter,
                r.value,
                r.var_fobg,
                r.var_zobg,
                r.zero_batch_rate,
                gap,
                1.0 if r.diverged else 0.0,
            )
        )
    return ResultTable(
        name="sweep",
        columns=("param", "value", "var_fobg", "var_zobg", "zero_batch_rate", "mean_gap", "diverged"),
        rows=tuple(rows),
        label_columns=frozenset({"param"}),
        optional_columns=frozenset({"var_fobg", "var_zobg", "zero_batch_rate", "mean_gap"}),
    )


def run_optimize(cfg: ExperimentConfig):
    prob = cfg.build_problem()
    noise = NoiseModel(sigma=prob.sigma, dim=prob.env.input_dim)
    run = gradient_descent(
        prob.env,
        prob.policy,
        prob.theta0,
        cfg.opt_estimator,
        prob.steps,
        prob.lr,
        prob.n_samples,
        noise,
        gamma=prob.gamma,
        delta=prob.delta,
        R=cfg.R,
        n_eval=prob.eval_samples,
        seed=cfg.seed,
    )
    d = prob.policy.param_dim
    cols = (
        ["t", "cost", "stderr", "alpha", "sig0sq", "sig1sq", "B", "epsilon"]
        + [f"theta_{i}" for i in range(d)]
    )
    rows = []
    for t in range(run.steps_done):
        rows.append(
            tuple(
                [
                    float(t),
                    run.costs[t],
                    run.cost_stderrs[t],
                    run.alphas[t],
                    run.sig0sq[t],
                    run.sig1sq[t],
                    run.gaps[t],
                    run.epsilons[t],
                ]
                + [float(v) for v in run.thetas[t]]
            )
        )
    table = ResultTable(
        name="optimize",
        columns=tuple(cols),
        rows=tuple(rows),
        optional_columns=frozenset({"sig0sq", "sig1sq", "B", "epsilon"}),
    )
    return table, run.diverged


def run_landscape(cfg: ExperimentConfig) -> ResultTable:
    prob = cfg.build_problem()
    d = prob.policy.param_dim
    if d > 2:
        raise ConfigError(f"landscape supports 1 or 2 decision dimensions, env has {d}")
    lo = prob.landscape_lo or tuple(float(t) - 1.0 for t in prob.theta0)
    hi = prob.landscape_hi or tuple(float(t) + 1.0 for t in prob.theta0)
    if len(lo) != d or len(hi) != d:
        raise ConfigError(f"landscape bounds must have {d} component(s)")
    if any(h <= l for l, h in zip(lo, hi)):
        raise ConfigError("landscape bounds need hi > lo componentwise")
    pts = prob.landscape_points
    axes = [np.linspace(lo[i], hi[i], pts) for i in range(d)]
    grid = (
        [(x,) for x in axes[0]]
        if d == 1
        else [(x, y) for x in axes[0] for y in axes[1]]
    )
    noise = NoiseModel(sigma=prob.sigma, dim=prob.env.input_dim)
    x1 = prob.x1

    def point_row(item):
        idx, theta = item
        theta = np.asarray(theta, dtype=float)
        det = run_batch(
            prob.env,
            prob.policy,
            theta,
            x1,
            np.zeros((1, prob.env.horizon, prob.env.input_dim)),
        ).total[0]
        mean, stderr = evaluate_objective(
            prob.env, prob.policy, theta, prob.eval_samples, noise, cfg.seed
        )
        pseed = derive_seed(cfg.seed, "landscape", idx)
        fb = fobg(prob.env, prob.policy, theta, x1, prob.n_samples, noise, pseed)
        zb = zobg(
            prob.env,
            prob.policy,
            theta,
            x1,
            prob.n_samples,
            noise,
            pseed,
            use_baseline=cfg.use_baseline,
        )
        return tuple(
            [float(v) for v in theta]
            + [float(det), mean, stderr]
            + [float(v) for v in fb.mean]
            + [float(v) for v in zb.mean]
        )

    rows = _map_indexed(point_row, list(enumerate(grid)))
    cols = (
        [f"theta_{i}" for i in range(d)]
        + ["det_cost", "smoothed", "smoothed_stderr"]
        + [f"fobg_{i}" for i in range(d)]
        + [f"zobg_{i}" for i in range(d)]
    )
    return ResultTable(name="landscape", columns=tuple(cols), rows=tuple(rows))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="alphagrad",
        description="Policy-gradient estimator experiments on toy differentiable physics",
    )
    parser.add_argument("command", choices=["estimate", "sweep", "optimize", "landscape"])
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--out", default=None, help="output directory (default: config out_dir)")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--plot", default=None, help="plot spec JSON rendered from the result")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if cfg.command != args.command:
            raise ConfigError(
                f"config command {cfg.command!r} does not match CLI command {args.command!r}"
            )
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be >= 0")
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out

        plot_spec = None
        if args.plot is not None:
            from .plots import parse_plot_spec

            with open(args.plot, "r", encoding="utf-8") as fh:
                plot_spec = parse_plot_spec(fh.read())

        diverged = False
        if args.command == "estimate":
            table = run_estimate(cfg)
        elif args.command == "sweep":
            table = run_sweep(cfg)
        elif args.command == "optimize":
            table, diverged = run_optimize(cfg)
        else:
            table = run_landscape(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergedRolloutError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{args.command}.csv"
    table.write_csv(csv_path)
    print(f"wrote {csv_path}")

    if plot_spec is not None:
        from .plots import render_plot

        try:
            plot_path = out_dir / plot_spec["file"]
            render_plot(table, plot_spec, plot_path)
        except ConfigurationError as exc:
            print(f"plot error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"wrote {plot_path}")

    if diverged:
        print("run diverged; partial results written", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
