"""Experiment specs, strategy dispatch, parameter sweeps and CSV output.

Config files are INI text with three sections; every field of
:class:`~coopcache.config.Config` and :class:`~coopcache.config.AgentConfig`
is addressable as ``env.<field>`` / ``agent.<field>``::

    [env]
    L = 26
    P_s = 0.1

    [agent]
    episodes = 2500
    hidden = 512, 128

    [experiment]
    strategies = ddqn_ucbz, epsilon_greedy, lru, non_cooperative
    seeds = 0, 1, 2, 3, 4
    sweep_axis = L
    sweep_values = 18, 22, 26, 30
    output_dir = results
    workers = 1
"""

from __future__ import annotations

import configparser
import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .agent import train
from .baselines import run_baseline
from .config import SMOKE_AGENT, AgentConfig, Config, ConfigError, updated
from .metrics import MetricsRecord, final_metrics

logger = logging.getLogger(__name__)

DDQN_UCBZ = "ddqn_ucbz"
STRATEGIES = (DDQN_UCBZ, "epsilon_greedy", "lru", "non_cooperative")
SWEEP_AXES = {"none": None, "L": "L", "P_s": "P_s", "gamma_s": "gamma_s"}
DEFAULT_GRIDS = {
    "L": (18, 22, 26, 30),
    "P_s": (0.05, 0.1, 0.15, 0.2),
    "gamma_s": (0.1, 0.3, 0.6, 0.9),
}
CURVE_COLUMNS = ("episode", "asr_ema", "delay_ema", "su_hit_rate", "pu_hit_rate")
SUMMARY_COLUMNS = ("axis_value", "strategy", "seed", "final_asr", "final_delay",
                   "final_su_hit_rate", "final_pu_hit_rate")
OUTPUT_ENV = "COOPCACHE_OUTPUT_DIR"
PROFILES = {"full": AgentConfig(), "smoke": SMOKE_AGENT}


@dataclass(frozen=True)
class ExperimentSpec:
    config: Config = field(default_factory=Config)
    agent: AgentConfig = field(default_factory=AgentConfig)
    strategies: tuple[str, ...] = STRATEGIES
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    sweep_axis: str = "none"
    sweep_values: tuple = ()
    output_dir: str = "results"
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown or not self.strategies:
            raise ConfigError(f"unknown strategies {sorted(unknown)}; choose from {STRATEGIES}")
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {tuple(SWEEP_AXES)}")
        if self.sweep_axis != "none":
            if not self.sweep_values:
                raise ConfigError(f"sweep over {self.sweep_axis} needs sweep_values")
            for v in self.sweep_values:
                self.point_config(v)  # raises ConfigError on invalid values
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def point_config(self, value) -> Config:
        if self.sweep_axis == "none":
            return self.config
        return updated(self.config, {self.sweep_axis: value})

    def points(self) -> list:
        return list(self.sweep_values) if self.sweep_axis != "none" else [None]


def run_strategy(strategy: str, cfg: Config, agent_cfg: AgentConfig, seed: int) -> list[MetricsRecord]:
    if strategy == DDQN_UCBZ:
        return train(replace(cfg, cooperative=True),
                     replace(agent_cfg, exploration_mode="ucbz"), seed).records
    return run_baseline(strategy, cfg, agent_cfg, seed)


def _split_list(text: str) -> list[str]:
    return [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]


def _number(text: str):
    value = float(text)
    return int(value) if value.is_integer() and "." not in text and "e" not in text.lower() else value


def load_spec(path: str | os.PathLike | None = None, overrides: Sequence[str] = (),
              profile: str | None = None) -> ExperimentSpec:
    """Build a spec from an optional INI file plus ``section.key=value`` overrides."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep field-name case
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    values: dict[str, dict[str, str]] = {"env": {}, "agent": {}, "experiment": {}}
    for section in parser.sections():
        if section not in values:
            raise ConfigError(f"unknown config section [{section}]")
        values[section].update(parser[section])
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or section not in values:
            raise ConfigError(f"override {item!r} must look like env.L=26 or agent.episodes=500")
        values[section][name] = value.strip()

    if profile and profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}")
    agent = PROFILES[profile] if profile else AgentConfig()
    cfg = updated(Config(), values["env"])
    agent = updated(agent, values["agent"])
    exp = dict(values["experiment"])
    kwargs: dict = {"config": cfg, "agent": agent}
    known = {"strategies", "seeds", "sweep_axis", "sweep_values", "output_dir", "workers"}
    extra = set(exp) - known
    if extra:
        raise ConfigError(f"unknown experiment keys {sorted(extra)}")
    try:
        if "strategies" in exp:
            kwargs["strategies"] = tuple(_split_list(exp["strategies"]))
        if "seeds" in exp:
            kwargs["seeds"] = tuple(int(s) for s in _split_list(exp["seeds"]))
        if "sweep_axis" in exp:
            kwargs["sweep_axis"] = exp["sweep_axis"].strip()
        if "sweep_values" in exp:
            kwargs["sweep_values"] = tuple(_number(v) for v in _split_list(exp["sweep_values"]))
        elif kwargs.get("sweep_axis", "none") != "none":
            kwargs["sweep_values"] = DEFAULT_GRIDS[kwargs["sweep_axis"]]
        if "workers" in exp:
            kwargs["workers"] = int(exp["workers"])
    except ValueError as exc:
        raise ConfigError(f"[experiment]: {exc}") from exc
    kwargs["output_dir"] = exp.get("output_dir") or os.environ.get(OUTPUT_ENV, "results")
    return ExperimentSpec(**kwargs)


def fmt(value) -> str:
    """Locale-independent, round-trippable number formatting."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def write_curve(path: Path, records: Iterable[MetricsRecord]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for r in records:
            w.writerow([fmt(getattr(r, c)) for c in CURVE_COLUMNS])


def _job(args):
    strategy, cfg, agent_cfg, seed = args
    return run_strategy(strategy, cfg, agent_cfg, seed)


def _point_label(axis: str, value) -> str:
    return "train" if axis == "none" else f"{axis}={fmt(value)}"


def run(spec: ExperimentSpec) -> dict[str, list[Path]]:
    """Execute every (point, strategy, seed) run and write CSVs.

    Returns ``{"curves": [...], "summary": [...]}`` with the written paths.
    """
    out = Path(spec.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc

    jobs = [(point, strategy, seed)
            for point in spec.points() for strategy in spec.strategies for seed in spec.seeds]
    args = [(s, spec.point_config(p), spec.agent, seed) for p, s, seed in jobs]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_job, args))
    else:
        results = []
        for (point, strategy, seed), a in zip(jobs, args):
            logger.info("running %s seed=%d %s", strategy, seed, _point_label(spec.sweep_axis, point))
            results.append(_job(a))

    curves, rows = [], []
    for (point, strategy, seed), records in zip(jobs, results):
        sub = out / _point_label(spec.sweep_axis, point)
        sub.mkdir(exist_ok=True)
        path = sub / f"{strategy}_seed{seed}.csv"
        write_curve(path, records)
        curves.append(path)
        final = final_metrics(records, spec.agent.final_window)
        rows.append([fmt(point) if point is not None else "none", strategy, str(seed)]
                    + [fmt(final[c]) for c in SUMMARY_COLUMNS[3:]])

    summary = out / (f"sweep_{spec.sweep_axis}.csv" if spec.sweep_axis != "none" else "summary.csv")
    with open(summary, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        w.writerows(rows)
    return {"curves": curves, "summary": [summary]}


def read_summary(path) -> list[dict]:
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for c in SUMMARY_COLUMNS[3:]:
            r[c] = float(r[c])
        r["seed"] = int(r["seed"])
    return rows
