"""Seed-averaged line charts from the runner's CSV files, rendered to SVG."""

from __future__ import annotations

import csv
import re
from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SEED_SUFFIX = re.compile(r"_seed\d+$")


class SchemaError(ValueError):
    """Input CSV files do not share a usable column layout."""


def _read(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def _x(text: str) -> float:
    # non-sweep summaries carry axis_value "none"; plot them at x = 0
    try:
        return float(text)
    except ValueError:
        return 0.0


def collect_series(paths: Sequence[str | Path], metric: str) -> tuple[str, dict[str, dict[float, list[float]]]]:
    """Group values by series label and x position.

    Training-curve files (``episode`` column) are labelled by file stem with
    any ``_seedN`` suffix removed; sweep summaries (``axis_value`` column) by
    their ``strategy`` column.
    """
    if not paths:
        raise SchemaError("no CSV files given")
    header = None
    series: dict[str, dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
    xcol = None
    for p in map(Path, paths):
        cols, rows = _read(p)
        if header is None:
            header = cols
        elif cols != header:
            raise SchemaError(f"{p}: columns {cols} differ from {header}")
        if metric not in cols:
            raise SchemaError(f"{p}: no column {metric!r} (have {cols})")
        if "episode" in cols:
            xcol, label_of = "episode", (lambda row, p=p: SEED_SUFFIX.sub("", p.stem))
        elif "axis_value" in cols and "strategy" in cols:
            xcol, label_of = "axis_value", (lambda row: row["strategy"])
        else:
            raise SchemaError(f"{p}: neither a training curve nor a sweep summary")
        for row in rows:
            series[label_of(row)][_x(row[xcol])].append(float(row[metric]))
    return xcol, series


def plot(paths: Sequence[str | Path], out: str | Path, metric: str = "asr_ema",
         band: bool = False, title: str | None = None, ylabel: str | None = None) -> Path:
    xcol, series = collect_series(paths, metric)
    plt.rcParams["svg.hashsalt"] = "coopcache"
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label in sorted(series):
        xs = np.array(sorted(series[label]))
        vals = [series[label][x] for x in xs]
        mean = np.array([np.mean(v) for v in vals])
        marker = "o" if xcol == "axis_value" or len(xs) == 1 else None
        (line,) = ax.plot(xs, mean, label=label, marker=marker, linewidth=1.4)
        if band:
            lo = np.array([np.min(v) for v in vals])
            hi = np.array([np.max(v) for v in vals])
            ax.fill_between(xs, lo, hi, color=line.get_color(), alpha=0.2, linewidth=0)
    ax.set_xlabel("episode" if xcol == "episode" else "sweep value")
    ax.set_ylabel(ylabel or metric)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    out = Path(out)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out
