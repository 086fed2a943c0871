"""Figure rendering for result tables.

A plot spec is a small JSON object naming the x column, the series columns
and the axis scales; figures are rendered with matplotlib to SVG or PNG
next to the CSV output.  Rendering is presentational only: no computation
depends on it, and the output is deterministic for a fixed table and spec
(fixed SVG hash salt, no timestamp metadata).
"""

from __future__ import annotations

import json
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .config import ConfigError
from .table import ResultTable

_ALLOWED = {"file", "x", "series", "logx", "logy", "title", "xlabel", "ylabel", "yscale"}


def parse_plot_spec(text: str) -> dict:
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: invalid plot spec JSON: {exc.msg}") from None
    if not isinstance(spec, dict):
        raise ConfigError("plot spec must be a JSON object")
    unknown = set(spec) - _ALLOWED
    if unknown:
        raise ConfigError(f"unknown plot spec key(s): {sorted(unknown)}")
    for key in ("file", "x"):
        if not isinstance(spec.get(key), str):
            raise ConfigError(f"plot spec needs string field {key!r}")
    series = spec.get("series")
    if not isinstance(series, list) or not series or not all(
        isinstance(s, str) for s in series
    ):
        raise ConfigError("plot spec 'series' must be a nonempty list of column names")
    if not spec["file"].endswith((".svg", ".png")):
        raise ConfigError("plot file must end in .svg or .png")
    for key in ("logx", "logy"):
        if key in spec and not isinstance(spec[key], bool):
            raise ConfigError(f"plot spec {key!r} must be a boolean")
    if "yscale" in spec:
        ys = spec["yscale"]
        if isinstance(ys, bool) or not isinstance(ys, (int, float)) or not ys > 0:
            raise ConfigError("plot spec 'yscale' must be a positive number")
    return spec


def _column_floats(table: ResultTable, name: str):
    vals = []
    for cell in table.column_values(name):
        if isinstance(cell, str):
            raise ConfigError(f"column {name!r} is a label column, cannot plot it")
        vals.append(float(cell))
    return vals


def render_plot(table: ResultTable, spec: dict, out_path) -> None:
    x = _column_floats(table, spec["x"])
    yscale = float(spec.get("yscale", 1.0))  # display-only magnification
    series = {
        name: [v * yscale for v in _column_floats(table, name)]
        for name in spec["series"]
    }

    for axis, flag, cols in (
        ("x", spec.get("logx", False), {spec["x"]: x}),
        ("y", spec.get("logy", False), series),
    ):
        if not flag:
            continue
        for name, vals in cols.items():
            for i, v in enumerate(vals):
                if not v > 0 and not math.isnan(v):
                    raise ConfigError(
                        f"log-{axis} scale but column {name!r} row {i} is {v}"
                    )

    plt.rcParams["svg.hashsalt"] = "alphagrad"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, vals in series.items():
        ax.plot(x, vals, marker="o", markersize=3, linewidth=1.2, label=name)
    if spec.get("logx"):
        ax.set_xscale("log")
    if spec.get("logy"):
        ax.set_yscale("log")
    ax.set_xlabel(spec.get("xlabel", spec["x"]))
    ax.set_ylabel(spec.get("ylabel", ""))
    if "title" in spec:
        ax.set_title(spec["title"])
    if len(series) > 1:
        ax.legend(frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, metadata={"Date": None} if str(out_path).endswith(".svg") else None)
    plt.close(fig)
