"""Comparison strategies: non-cooperative DDQN, epsilon-greedy DDQN and LRU caching."""

from __future__ import annotations

from dataclasses import replace

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .actions import Action, ActionTable, encode, enumerate_actions
from .agent import split_streams, train
from .config import AgentConfig, Config
from .env import CIoTEnv
from .metrics import MetricsRecord, MetricsTracker, final_metrics

PU, SU = "PU", "SU"

NON_COOPERATIVE = "non_cooperative"
EPSILON_GREEDY = "epsilon_greedy"
LRU = "lru"
BASELINES = (NON_COOPERATIVE, EPSILON_GREEDY, LRU)


class LruCache:
    """Recency-ordered cache of ``(tag, index)`` items, most recent first."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.items: list[tuple[str, int]] = []

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, item) -> bool:
        return item in self.items

    def __repr__(self) -> str:
        return f"LruCache({self.items!r})"


def lru_update(cache: LruCache, tag: str, index: int) -> LruCache:
    item = (tag, int(index))
    if item in cache.items:
        cache.items.remove(item)
    cache.items.insert(0, item)
    del cache.items[cache.capacity:]
    return cache


def lru_policy_action(cache: LruCache, table: ActionTable) -> Action:
    """Project the LRU contents onto the caching action space.

    Share the cache when at least ``C_s / 2`` items of each catalog are
    held, using the most recent ones; otherwise cache the ``C_s`` most recent
    CIoT items, padded with the lowest unused indices.
    """
    if not table.cooperative:
        raise ValueError("LRU projection needs the cooperative action table")
    half = table.C_s // 2
    pu = [i for tag, i in cache.items if tag == PU]
    su = [i for tag, i in cache.items if tag == SU]
    if len(pu) >= half and len(su) >= half:
        return table[encode(table, 1, pu[:half], su[:half])]
    if table.N < table.C_s:
        # no all-CIoT placement exists; share with padded recency lists
        return table[encode(table, 1, _padded(pu, half, table.M), _padded(su, half, table.N))]
    return table[encode(table, 0, (), _padded(su, table.C_s, table.N))]


def _padded(recent: list[int], size: int, catalog: int) -> list[int]:
    chosen = recent[:size]
    for i in range(1, catalog + 1):
        if len(chosen) >= size:
            break
        if i not in chosen:
            chosen.append(i)
    return chosen


def run_lru(cfg: Config, agent_cfg: AgentConfig, seed: int = 0) -> list[MetricsRecord]:
    env_rng, _ = split_streams(seed)
    env = CIoTEnv(cfg, env_rng)
    table = enumerate_actions(cfg.M, cfg.N, cfg.C_s, cooperative=True)
    cache = LruCache(cfg.C_s)
    tracker = MetricsTracker(agent_cfg.ema_weight)
    for _ in range(agent_cfg.episodes):
        outcomes, done = [], False
        while not done:
            outcome, done = env.step(lru_policy_action(cache, table))
            # PU request first so the CIoT item ends up most recent
            lru_update(cache, PU, outcome.d_p_now)
            lru_update(cache, SU, outcome.d_s_now)
            outcomes.append(outcome)
        tracker.update(outcomes)
    return tracker.records


def run_baseline(kind: str, cfg: Config, agent_cfg: AgentConfig, seed: int = 0) -> list[MetricsRecord]:
    if kind == NON_COOPERATIVE:
        return train(replace(cfg, cooperative=False),
                     replace(agent_cfg, exploration_mode="ucbz"), seed).records
    if kind == EPSILON_GREEDY:
        return train(replace(cfg, cooperative=True),
                     replace(agent_cfg, exploration_mode="epsilon_greedy"), seed).records
    if kind == LRU:
        return run_lru(replace(cfg, cooperative=True), agent_cfg, seed)
    raise ValueError(f"unknown baseline {kind!r}; expected one of {BASELINES}")


class LRUCachingPolicy(BaseEstimator):
    """Non-learning LRU strategy exposed with the estimator API.

    ``fit`` simulates ``episodes`` episodes; ``predict`` is not meaningful
    for a recency policy and is not provided.
    """

    def __init__(self, env_config: Config | None = None, episodes: int = 2500,
                 ema_weight: float = 0.05, random_state: int = 0):
        self.env_config = env_config
        self.episodes = episodes
        self.ema_weight = ema_weight
        self.random_state = random_state

    def fit(self, X=None, y=None):
        cfg = self.env_config if self.env_config is not None else Config()
        agent_cfg = AgentConfig(episodes=self.episodes, ema_weight=self.ema_weight)
        self.records_ = run_lru(replace(cfg, cooperative=True), agent_cfg, int(self.random_state))
        return self

    def final_metrics(self, window: int = 100) -> dict[str, float]:
        check_is_fitted(self, "records_")
        return final_metrics(self.records_, window)
