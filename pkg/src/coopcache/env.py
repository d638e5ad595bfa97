"""Time-slotted cognitive-IoT channel with cooperative caching.

Per slot the PU either occupies the licensed channel or not, both users
issue one Zipf-distributed request, and the CIoT link sees Rayleigh fading
(exponential power gains). The CIoT agent is rewarded with its achievable
rate when its caching action serves the requests the channel state demands,
and with ``-phi`` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .actions import Action
from .config import Config


@dataclass(frozen=True)
class ChannelGains:
    g_ss: float
    g_sp: float
    g_ps: float


@dataclass(frozen=True)
class SlotState:
    omega_p: int
    d_p_prev: int
    d_s_prev: int
    gains: ChannelGains

    def encode(self, M: int, N: int) -> np.ndarray:
        """Six network features: occupancy, scaled previous requests, raw gains."""
        dp = (self.d_p_prev - 1) / (M - 1) if M > 1 else 0.0
        ds = (self.d_s_prev - 1) / (N - 1) if N > 1 else 0.0
        g = self.gains
        return np.array([float(self.omega_p), dp, ds, g.g_ps, g.g_sp, g.g_ss])


@dataclass(frozen=True)
class SlotOutcome:
    reward: float
    rate_achieved: float
    served_su_from_cache: bool
    served_pu_from_cache: bool
    offloaded: bool
    delay: float
    d_p_now: int
    d_s_now: int
    omega_p: int = 0


def sample_gains(rng: np.random.Generator, cfg: Config) -> ChannelGains:
    g_ss = rng.exponential(cfg.mean_gss)
    g_sp = rng.exponential(cfg.mean_gsp)
    return ChannelGains(g_ss=float(g_ss), g_sp=float(g_sp), g_ps=float(g_sp))


def generate_pu_schedule(rng: np.random.Generator, T: int, L: int) -> np.ndarray:
    """Occupancy vector with exactly ``L`` busy slots drawn without replacement."""
    if not 0 <= L <= T:
        raise ValueError(f"need 0 <= L <= T, got L={L}, T={T}")
    schedule = np.zeros(T, dtype=np.int8)
    schedule[rng.choice(T, size=L, replace=False)] = 1
    return schedule


def zipf_pmf(catalog: int, skew: float) -> np.ndarray:
    ranks = np.arange(1, catalog + 1, dtype=float)
    w = ranks ** (-skew)
    return w / w.sum()


def sample_request(rng: np.random.Generator, pmf: np.ndarray) -> int:
    """Inverse-CDF draw of a 1-based content index."""
    cdf = np.cumsum(pmf)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(i, len(pmf) - 1) + 1


def rate_r0(P_s: float, g_ss: float, sigma2: float, W_bw: float) -> float:
    return W_bw * np.log2(1.0 + P_s * g_ss / sigma2)


def rate_r1(P_s: float, g_ss: float, sigma2: float, W_bw: float, k_share: float) -> float:
    return rate_r0(P_s, g_ss, sigma2, W_bw) / k_share


def reward_branch(omega_p: int, I_t: int, pu_hit: bool, su_hit: bool, cooperative: bool) -> int:
    """Which reward case applies: 1 (shared band), 0 (idle channel) or -1 (penalty)."""
    if cooperative and I_t == 1 and omega_p == 1 and pu_hit and su_hit:
        return 1
    if omega_p == 0 and su_hit:
        return 0
    return -1


def evaluate_slot(state: SlotState, action: Action, d_p: int, d_s: int, cfg: Config) -> SlotOutcome:
    """Reward, rate and delay of ``action`` against the realized requests."""
    pu_hit, su_hit = d_p in action.B_p, d_s in action.B_s
    branch = reward_branch(state.omega_p, action.I_t, pu_hit, su_hit, cfg.cooperative)
    g_ss = state.gains.g_ss
    if branch == 1:
        rate = rate_r1(cfg.P_s, g_ss, cfg.sigma2, cfg.W_bw, cfg.k_share)
    elif branch == 0:
        rate = rate_r0(cfg.P_s, g_ss, cfg.sigma2, cfg.W_bw)
    else:
        rate = 0.0
    served = branch >= 0 and rate > 0
    return SlotOutcome(
        reward=float(rate) if branch >= 0 else -cfg.phi,
        rate_achieved=float(rate) if served else 0.0,
        served_su_from_cache=served,
        served_pu_from_cache=served and branch == 1,
        offloaded=not served,
        delay=cfg.F_size / rate if served else cfg.D_core,
        d_p_now=d_p,
        d_s_now=d_s,
        omega_p=state.omega_p,
    )


def step(state: SlotState, next_occupancy: int, action: Action,
         rng: np.random.Generator, cfg: Config,
         pmfs: tuple[np.ndarray, np.ndarray] | None = None) -> tuple[SlotOutcome, SlotState]:
    """Advance one slot: draw requests, score the action, draw the next gains."""
    pmf_p, pmf_s = pmfs if pmfs is not None else (zipf_pmf(cfg.M, cfg.gamma_p),
                                                  zipf_pmf(cfg.N, cfg.gamma_s))
    d_p = sample_request(rng, pmf_p)
    d_s = sample_request(rng, pmf_s)
    outcome = evaluate_slot(state, action, d_p, d_s, cfg)
    nxt = SlotState(int(next_occupancy), d_p, d_s, sample_gains(rng, cfg))
    return outcome, nxt


class CIoTEnv:
    """Episodic wrapper that owns the PU schedule and the environment stream.

    The draw order is fixed (schedule, then per slot: requests, next
    schedule at the episode boundary, next gains), so the sample path does
    not depend on the actions taken. The last state of an episode carries
    over as the first state of the next one, with the new episode's
    occupancy.
    """

    def __init__(self, cfg: Config, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.pmfs = (zipf_pmf(cfg.M, cfg.gamma_p), zipf_pmf(cfg.N, cfg.gamma_s))
        self.schedule = generate_pu_schedule(rng, cfg.T, cfg.L)
        self.t = 0
        d_p = sample_request(rng, self.pmfs[0])
        d_s = sample_request(rng, self.pmfs[1])
        self.state = SlotState(int(self.schedule[0]), d_p, d_s, sample_gains(rng, cfg))

    def observe(self) -> np.ndarray:
        return self.state.encode(self.cfg.M, self.cfg.N)

    def step(self, action: Action) -> tuple[SlotOutcome, bool]:
        """Apply ``action`` in the current slot; returns the outcome and an episode-end flag."""
        cfg, rng = self.cfg, self.rng
        d_p = sample_request(rng, self.pmfs[0])
        d_s = sample_request(rng, self.pmfs[1])
        outcome = evaluate_slot(self.state, action, d_p, d_s, cfg)
        self.t += 1
        done = self.t == cfg.T
        if done:
            self.schedule = generate_pu_schedule(rng, cfg.T, cfg.L)
            self.t = 0
        self.state = SlotState(int(self.schedule[self.t]), d_p, d_s, sample_gains(rng, cfg))
        return outcome, done
