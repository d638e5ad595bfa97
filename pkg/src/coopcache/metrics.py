"""Per-episode evaluation quantities and their moving averages."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

import numpy as np

from .env import SlotOutcome


@dataclass(frozen=True)
class EpisodeSummary:
    sum_rate: float
    mean_delay: float
    su_hits: int
    pu_hits: int
    su_requests: int
    pu_requests: int
    reward: float = 0.0

    @property
    def su_hit_rate(self) -> float:
        return self.su_hits / self.su_requests if self.su_requests else 0.0

    @property
    def pu_hit_rate(self) -> float:
        return self.pu_hits / self.pu_requests if self.pu_requests else 0.0


@dataclass(frozen=True)
class MetricsRecord:
    episode: int
    asr_ema: float
    delay_ema: float
    su_hit_rate: float
    pu_hit_rate: float
    raw_episode_sum_rate: float
    raw_episode_mean_delay: float
    raw_su_hit_rate: float = 0.0
    raw_pu_hit_rate: float = 0.0
    episode_reward: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def ema_update(prev: float | None, value: float, w: float) -> float:
    """Exponential moving average; ``prev=None`` starts the average at ``value``."""
    if not 0 < w <= 1:
        raise ValueError(f"EMA weight must lie in (0, 1], got {w}")
    if prev is None:
        return float(value)
    return (1.0 - w) * prev + w * value


def episode_summary(outcomes: Sequence[SlotOutcome]) -> EpisodeSummary:
    """Totals over one episode.

    The PU request counts only slots in which the PU was transmitting; a PU
    hit is such a slot whose PU request the agent served from its cache.
    """
    if not outcomes:
        raise ValueError("episode_summary needs at least one slot outcome")
    return EpisodeSummary(
        sum_rate=float(sum(o.rate_achieved for o in outcomes)),
        mean_delay=float(np.mean([o.delay for o in outcomes])),
        su_hits=sum(1 for o in outcomes if o.served_su_from_cache),
        pu_hits=sum(1 for o in outcomes if o.omega_p == 1 and o.served_pu_from_cache),
        su_requests=len(outcomes),
        pu_requests=sum(1 for o in outcomes if o.omega_p == 1),
        reward=float(sum(o.reward for o in outcomes)),
    )


class MetricsTracker:
    """Turns a stream of episodes into smoothed :class:`MetricsRecord` values."""

    def __init__(self, weight: float = 0.05):
        self.weight = weight
        self.records: list[MetricsRecord] = []
        self._ema: dict[str, float | None] = dict.fromkeys(("asr", "delay", "su", "pu"))

    def update(self, outcomes: Sequence[SlotOutcome]) -> MetricsRecord:
        s = episode_summary(outcomes)
        raw = {"asr": s.sum_rate, "delay": s.mean_delay, "su": s.su_hit_rate, "pu": s.pu_hit_rate}
        for key, value in raw.items():
            self._ema[key] = ema_update(self._ema[key], value, self.weight)
        rec = MetricsRecord(
            episode=len(self.records) + 1,
            asr_ema=self._ema["asr"],
            delay_ema=self._ema["delay"],
            su_hit_rate=self._ema["su"],
            pu_hit_rate=self._ema["pu"],
            raw_episode_sum_rate=s.sum_rate,
            raw_episode_mean_delay=s.mean_delay,
            raw_su_hit_rate=s.su_hit_rate,
            raw_pu_hit_rate=s.pu_hit_rate,
            episode_reward=s.reward,
        )
        self.records.append(rec)
        return rec


FINAL_FIELDS = {
    "final_asr": "raw_episode_sum_rate",
    "final_delay": "raw_episode_mean_delay",
    "final_su_hit_rate": "raw_su_hit_rate",
    "final_pu_hit_rate": "raw_pu_hit_rate",
}


def final_metrics(records: Iterable[MetricsRecord], window: int = 100) -> dict[str, float]:
    """Mean of the raw per-episode values over the last ``window`` episodes."""
    tail = list(records)[-window:]
    if not tail:
        raise ValueError("no records to summarize")
    return {k: float(np.mean([getattr(r, f) for r in tail])) for k, f in FINAL_FIELDS.items()}
