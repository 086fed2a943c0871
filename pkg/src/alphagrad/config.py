"""Experiment configuration: JSON schema, strict validation, defaults.

Unknown keys are rejected everywhere and every numeric field is checked
against its operation's preconditions before any computation starts.
Validation errors carry the line number of the offending key in the
original file where it can be located.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .engine import ConfigurationError
from .envs import BUILDERS, Problem, make_problem

COMMANDS = ("estimate", "sweep", "optimize", "landscape")


class ConfigError(ConfigurationError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass
class ExperimentConfig:
    command: str
    env_name: str
    env_params: dict = field(default_factory=dict)
    # estimator settings (None = use the benchmark default)
    n_samples: Optional[int] = None
    sigma: Optional[float] = None
    gamma: Optional[float] = None
    delta: Optional[float] = None
    R: Optional[float] = None
    use_baseline: bool = True
    # optimizer settings
    opt_estimator: str = "aobg"
    steps: Optional[int] = None
    lr: Optional[float] = None
    theta0: Optional[list] = None
    eval_samples: Optional[int] = None
    # sweep settings
    sweep_parameter: Optional[str] = None
    sweep_grid: Optional[list] = None
    sweep_reps: int = 1
    # landscape settings
    landscape_points: Optional[int] = None
    landscape_lo: Optional[list] = None
    landscape_hi: Optional[list] = None
    # run settings
    seed: int = 0
    out_dir: str = "out"

    def build_problem(self) -> Problem:
        prob = make_problem(self.env_name, self.env_params)
        over = {}
        if self.sigma is not None:
            over["sigma"] = self.sigma
        if self.n_samples is not None:
            over["n_samples"] = self.n_samples
        if self.gamma is not None:
            over["gamma"] = self.gamma
        if self.delta is not None:
            over["delta"] = self.delta
        if self.steps is not None:
            over["steps"] = self.steps
        if self.lr is not None:
            over["lr"] = self.lr
        if self.eval_samples is not None:
            over["eval_samples"] = self.eval_samples
        if self.theta0 is not None:
            import numpy as np

            over["theta0"] = np.asarray(self.theta0, dtype=float)
        if self.landscape_points is not None:
            over["landscape_points"] = self.landscape_points
        if self.landscape_lo is not None:
            over["landscape_lo"] = tuple(self.landscape_lo)
        if self.landscape_hi is not None:
            over["landscape_hi"] = tuple(self.landscape_hi)
        return prob.with_overrides(**over)


def _line_of(text: str, key: str) -> int:
    for i, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return i
    return 1


class _Checker:
    def __init__(self, raw_text: str):
        self.raw = raw_text

    def fail(self, key: str, message: str):
        raise ConfigError(f"line {_line_of(self.raw, key)}: {key}: {message}")

    def reject_unknown(self, mapping: dict, allowed: set, context: str):
        for key in mapping:
            if key not in allowed:
                raise ConfigError(
                    f"line {_line_of(self.raw, key)}: unknown key {key!r} in {context}"
                )

    def number(self, mapping, key, *, lo=None, hi=None, strict_lo=False, integer=False):
        if key not in mapping or mapping[key] is None:
            return None
        val = mapping[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.fail(key, f"expected a number, got {val!r}")
        if integer and int(val) != val:
            self.fail(key, f"expected an integer, got {val!r}")
        if lo is not None and (val <= lo if strict_lo else val < lo):
            self.fail(key, f"must be {'>' if strict_lo else '>='} {lo}, got {val}")
        if hi is not None and val > hi:
            self.fail(key, f"must be <= {hi}, got {val}")
        return int(val) if integer else float(val)


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("line 1: config must be a JSON object")
    chk = _Checker(text)
    chk.reject_unknown(
        data,
        {"command", "env", "estimator", "optimizer", "sweep", "landscape", "seed", "out_dir"},
        "config",
    )

    command = data.get("command")
    if command not in COMMANDS:
        chk.fail("command", f"must be one of {list(COMMANDS)}, got {command!r}")

    env = data.get("env")
    if not isinstance(env, dict):
        chk.fail("env", "must be an object with a 'name'")
    chk.reject_unknown(env, {"name", "params"}, "env")
    env_name = env.get("name")
    if env_name not in BUILDERS:
        chk.fail("name", f"unknown env {env_name!r}; available: {sorted(BUILDERS)}")
    env_params = env.get("params", {})
    if not isinstance(env_params, dict):
        chk.fail("params", "must be an object")

    cfg = ExperimentConfig(command=command, env_name=env_name, env_params=env_params)

    est = data.get("estimator", {})
    if not isinstance(est, dict):
        chk.fail("estimator", "must be an object")
    chk.reject_unknown(
        est, {"n_samples", "sigma", "gamma", "delta", "R", "use_baseline"}, "estimator"
    )
    cfg.n_samples = chk.number(est, "n_samples", lo=2, integer=True)
    cfg.sigma = chk.number(est, "sigma", lo=0, strict_lo=True)
    cfg.gamma = chk.number(est, "gamma", lo=0)
    cfg.delta = chk.number(est, "delta", lo=0, strict_lo=True)
    if cfg.delta is not None and cfg.delta >= 1.0:
        chk.fail("delta", f"must be in (0, 1), got {cfg.delta}")
    cfg.R = chk.number(est, "R", lo=0)
    if "use_baseline" in est:
        if not isinstance(est["use_baseline"], bool):
            chk.fail("use_baseline", "must be true or false")
        cfg.use_baseline = est["use_baseline"]

    opt = data.get("optimizer", {})
    if not isinstance(opt, dict):
        chk.fail("optimizer", "must be an object")
    chk.reject_unknown(
        opt, {"estimator", "steps", "lr", "theta0", "eval_samples"}, "optimizer"
    )
    if "estimator" in opt:
        if opt["estimator"] not in ("fobg", "zobg", "aobg"):
            chk.fail("estimator", f"must be fobg|zobg|aobg, got {opt['estimator']!r}")
        cfg.opt_estimator = opt["estimator"]
    cfg.steps = chk.number(opt, "steps", lo=1, integer=True)
    cfg.lr = chk.number(opt, "lr", lo=0, strict_lo=True)
    cfg.eval_samples = chk.number(opt, "eval_samples", lo=2, integer=True)
    if "theta0" in opt and opt["theta0"] is not None:
        th = opt["theta0"]
        if not isinstance(th, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in th
        ):
            chk.fail("theta0", "must be a list of numbers")
        cfg.theta0 = [float(v) for v in th]

    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        chk.fail("sweep", "must be an object")
    chk.reject_unknown(sweep, {"parameter", "grid", "reps"}, "sweep")
    if "parameter" in sweep:
        if not isinstance(sweep["parameter"], str):
            chk.fail("parameter", "must be a string")
        cfg.sweep_parameter = sweep["parameter"]
    if "grid" in sweep:
        grid = sweep["grid"]
        ok = isinstance(grid, list) and grid and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in grid
        )
        if not ok:
            chk.fail("grid", "must be a nonempty list of numbers")
        vals = [float(v) for v in grid]
        if sorted(vals) != vals or len(set(vals)) != len(vals):
            chk.fail("grid", "must be strictly increasing")
        cfg.sweep_grid = vals
    reps = chk.number(sweep, "reps", lo=1, integer=True)
    if reps is not None:
        cfg.sweep_reps = reps
    if command == "sweep" and (cfg.sweep_parameter is None or cfg.sweep_grid is None):
        chk.fail("sweep", "sweep command needs 'parameter' and 'grid'")

    land = data.get("landscape", {})
    if not isinstance(land, dict):
        chk.fail("landscape", "must be an object")
    chk.reject_unknown(land, {"points", "lo", "hi"}, "landscape")
    cfg.landscape_points = chk.number(land, "points", lo=2, integer=True)
    for key in ("lo", "hi"):
        if key in land and land[key] is not None:
            bounds = land[key]
            if not isinstance(bounds, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in bounds
            ):
                chk.fail(key, "must be a list of numbers")
            setattr(cfg, f"landscape_{key}", [float(v) for v in bounds])

    seed = chk.number(data, "seed", lo=0, integer=True)
    if seed is not None:
        cfg.seed = seed
    if "out_dir" in data:
        if not isinstance(data["out_dir"], str):
            chk.fail("out_dir", "must be a string")
        cfg.out_dir = data["out_dir"]
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
