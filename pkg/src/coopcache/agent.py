"""Double deep Q-network learner with UCB-Zipf (UCBZ) exploration.

:func:`train` runs the episodic loop: random actions until the replay
memory is full, then action selection on bonus-adjusted Q-values
(or epsilon-greedy for the baseline), one mini-batch Adam step per slot,
and a hard target-network copy every ``kappa_target`` gradient steps.
:class:`DDQNCachingAgent` wraps the same loop behind the scikit-learn
estimator API.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import nn
from .actions import ActionTable, enumerate_actions
from .config import AgentConfig, Config, check_compatible
from .env import CIoTEnv
from .metrics import MetricsRecord, MetricsTracker, final_metrics

logger = logging.getLogger(__name__)

N_FEATURES = 6


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action_index: int
    reward: float
    next_state: np.ndarray


class ReplayBuffer:
    """Fixed-capacity FIFO ring of transitions stored column-wise."""

    def __init__(self, capacity: int, n_features: int = N_FEATURES):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.states = np.zeros((capacity, n_features))
        self.next_states = np.zeros((capacity, n_features))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.size = 0
        self._pos = 0

    def __len__(self) -> int:
        return self.size

    @property
    def full(self) -> bool:
        return self.size == self.capacity

    def add(self, state, action: int, reward: float, next_state) -> None:
        i = self._pos
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self._pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int):
        """Uniform mini-batch (with replacement); only allowed once the buffer is full."""
        if not self.full:
            raise RuntimeError("replay buffer sampled before reaching capacity")
        idx = rng.integers(0, self.size, size=batch_size)
        return self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx]

    def transitions(self) -> list[Transition]:
        """Stored transitions, oldest first."""
        start = self._pos if self.full else 0
        order = [(start + k) % self.capacity for k in range(self.size)]
        return [Transition(self.states[i].copy(), int(self.actions[i]), float(self.rewards[i]),
                           self.next_states[i].copy()) for i in order]


@dataclass
class ActionStats:
    counts: np.ndarray
    t_global: int = 0

    @classmethod
    def empty(cls, z: int) -> "ActionStats":
        return cls(np.zeros(z, dtype=np.int64))

    def record(self, action: int) -> None:
        self.counts[action] += 1
        self.t_global += 1


def ucbz_scale(M: int, N: int, gamma_p: float, gamma_s: float, cooperative: bool = True) -> float:
    """Popularity factor ``1 / (M^gamma_p * N^gamma_s)``; the PU term is dropped without cooperation."""
    denom = N ** gamma_s
    if cooperative:
        denom *= M ** gamma_p
    return 1.0 / denom


def ucbz_bonus(t_global: int, counts, M: int, N: int, gamma_p: float, gamma_s: float,
               c_prime: float, cooperative: bool = True) -> np.ndarray:
    """Exploration bonus per action; untried actions get ``+inf``."""
    if t_global < 1:
        raise ValueError("t_global must be >= 1")
    counts = np.asarray(counts, dtype=float)
    scale = ucbz_scale(M, N, gamma_p, gamma_s, cooperative)
    with np.errstate(divide="ignore", invalid="ignore"):
        bonus = scale * np.sqrt(c_prime * np.log(t_global) / counts)
    return np.where(counts > 0, bonus, np.inf)


def select_action(q_values, stats: ActionStats, mode: str = "ucbz", epsilon: float = 0.0,
                  rng: np.random.Generator | None = None, *, scale: float = 1.0,
                  c_prime: float = 2.5) -> int:
    """Pick an action from Q-values.

    ``"ucbz"``: argmax of Q plus ``scale * sqrt(c' ln t / C_a)`` where ``t``
    counts the current decision. ``"epsilon_greedy"``: uniform with
    probability ``epsilon``, else argmax Q. Ties go to the lowest index.
    """
    q = np.asarray(q_values, dtype=float)
    if mode == "ucbz":
        t = stats.t_global + 1
        counts = stats.counts
        with np.errstate(divide="ignore", invalid="ignore"):
            bonus = scale * np.sqrt(c_prime * np.log(t) / counts)
        bonus = np.where(counts > 0, bonus, np.inf)
        return int(np.argmax(q + bonus))
    if mode == "epsilon_greedy":
        if rng is None:
            raise ValueError("epsilon-greedy selection needs a generator")
        if rng.random() < epsilon:
            return int(rng.integers(q.shape[0]))
        return int(np.argmax(q))
    raise ValueError(f"unknown exploration mode {mode!r}")


def compute_targets(next_states, rewards, online: nn.MlpParams, target: nn.MlpParams,
                    beta_discount: float, alpha: float = 0.01) -> np.ndarray:
    """Double-Q targets: online net picks the next action, target net values it."""
    rewards = np.asarray(rewards, dtype=float)
    if beta_discount == 0:
        return rewards.copy()
    q_online = nn.predict(online, next_states, alpha)
    q_target = nn.predict(target, next_states, alpha)
    best = np.argmax(q_online, axis=1)
    return rewards + beta_discount * q_target[np.arange(len(best)), best]


def epsilon_at(episode: int, agent_cfg: AgentConfig) -> float:
    """Linear decay over the first ``epsilon_decay_fraction`` of training (1-based episode)."""
    horizon = agent_cfg.epsilon_decay_fraction * agent_cfg.episodes
    frac = min(1.0, (episode - 1) / horizon) if horizon > 0 else 1.0
    return agent_cfg.epsilon_start + (agent_cfg.epsilon_end - agent_cfg.epsilon_start) * frac


def split_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (environment, policy) generators derived from one seed."""
    env_ss, policy_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(policy_ss)


@dataclass
class TrainResult:
    params: nn.MlpParams
    target_params: nn.MlpParams
    table: ActionTable
    records: list[MetricsRecord]
    stats: ActionStats
    grad_steps: int = 0
    first_update_episode: int | None = None
    first_update_step: int | None = None
    buffer_size_at_first_update: int | None = None
    target_syncs: list[int] = field(default_factory=list)
    episode_loss: list[float] = field(default_factory=list)

    def final(self, window: int = 100) -> dict[str, float]:
        return final_metrics(self.records, window)


def train(cfg: Config, agent_cfg: AgentConfig, seed: int = 0,
          env: object | None = None,
          callback: Callable[[MetricsRecord], None] | None = None) -> TrainResult:
    """Run the DDQN training loop and return the networks and the per-episode metrics.

    ``env`` may replace the simulator; it needs ``observe()`` and
    ``step(action) -> (SlotOutcome, episode_done)``.
    """
    check_compatible(cfg, agent_cfg)
    env_rng, rng = split_streams(seed)
    if env is None:
        env = CIoTEnv(cfg, env_rng)
    table = enumerate_actions(cfg.M, cfg.N, cfg.C_s, cfg.cooperative)
    z = table.z
    alpha = agent_cfg.leaky_alpha
    online = nn.init_kaiming(rng, (N_FEATURES, *agent_cfg.hidden, z))
    target = online.copy()
    adam = nn.AdamState.for_params(online, beta1=agent_cfg.adam_beta1,
                                   beta2=agent_cfg.adam_beta2, epsilon=agent_cfg.adam_eps,
                                   eta=agent_cfg.eta0)
    buffer = ReplayBuffer(agent_cfg.buffer_capacity(cfg.T))
    stats = ActionStats.empty(z)
    tracker = MetricsTracker(agent_cfg.ema_weight)
    result = TrainResult(online, target, table, tracker.records, stats)
    mode = agent_cfg.exploration_mode
    scale = ucbz_scale(cfg.M, cfg.N, cfg.gamma_p, cfg.gamma_s, cfg.cooperative)
    beta, batch_size = agent_cfg.beta_discount, agent_cfg.batch_size

    state = env.observe()
    for episode in range(1, agent_cfg.episodes + 1):
        adam.eta = nn.lr_schedule(episode - 1, agent_cfg.eta0, agent_cfg.lr_halving_period)
        epsilon = epsilon_at(episode, agent_cfg)
        outcomes, losses = [], []
        done = False
        while not done:
            learning = buffer.full
            if not learning:
                a = int(rng.integers(z))
            else:
                q = nn.predict(online, state, alpha)
                a = select_action(q, stats, mode, epsilon, rng, scale=scale,
                                  c_prime=agent_cfg.c_prime)
            outcome, done = env.step(table.actions[a])
            next_state = env.observe()
            buffer.add(state, a, outcome.reward, next_state)
            stats.record(a)
            outcomes.append(outcome)
            state = next_state
            if not learning:
                continue

            s, acts, r, s2 = buffer.sample(rng, batch_size)
            y = compute_targets(s2, r, online, target, beta, alpha)
            q_pred, trace = nn.forward(online, s, alpha)
            loss, dq = nn.mse_loss_and_grad(q_pred, acts, y)
            nn.adam_step(online, nn.backward(online, trace, dq), adam)
            losses.append(loss)
            result.grad_steps += 1
            if result.first_update_episode is None:
                result.first_update_episode = episode
                result.first_update_step = stats.t_global
                result.buffer_size_at_first_update = len(buffer)
            if result.grad_steps % agent_cfg.kappa_target == 0:
                target = online.copy()
                result.target_params = target
                result.target_syncs.append(result.grad_steps)

        rec = tracker.update(outcomes)
        result.episode_loss.append(float(np.mean(losses)) if losses else float("nan"))
        if callback is not None:
            callback(rec)
        if episode % 250 == 0:
            logger.debug("episode %d asr_ema=%.3f loss=%.3f", episode, rec.asr_ema,
                         result.episode_loss[-1])
    return result


class DDQNCachingAgent(BaseEstimator):
    """Scikit-learn style wrapper around :func:`train`.

    Parameters
    ----------
    env_config : Config, optional
        Environment parameters; defaults to ``Config()``.
    agent_config : AgentConfig, optional
        Learner hyperparameters; defaults to ``AgentConfig()``.
    random_state : int, default=0
        Seed of both the environment and the policy streams.

    Attributes
    ----------
    params_ : MlpParams
        Online network after training.
    action_table_ : ActionTable
        Decoding of the network outputs into caching actions.
    records_ : list of MetricsRecord
        One record per training episode.
    """

    def __init__(self, env_config: Config | None = None, agent_config: AgentConfig | None = None,
                 random_state: int = 0):
        self.env_config = env_config
        self.agent_config = agent_config
        self.random_state = random_state

    def _configs(self) -> tuple[Config, AgentConfig]:
        return (self.env_config if self.env_config is not None else Config(),
                self.agent_config if self.agent_config is not None else AgentConfig())

    def fit(self, X=None, y=None):
        """Train in the simulator. ``X`` and ``y`` are ignored."""
        cfg, agent_cfg = self._configs()
        result = train(cfg, agent_cfg, int(self.random_state))
        self.result_ = result
        self.params_ = result.params
        self.action_table_ = result.table
        self.records_ = result.records
        self.n_features_in_ = N_FEATURES
        return self

    def decision_function(self, X) -> np.ndarray:
        """Q-values, shape ``(n_samples, z)``."""
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return nn.predict(self.params_, X, self._configs()[1].leaky_alpha)

    def predict(self, X) -> np.ndarray:
        """Greedy action index for each encoded state."""
        return np.argmax(self.decision_function(X), axis=1)

    def final_metrics(self, window: int | None = None) -> dict[str, float]:
        check_is_fitted(self, "records_")
        return final_metrics(self.records_, window or self._configs()[1].final_window)
