"""Configuration containers for the simulator and the learning agents.

Two flat dataclasses hold every tunable scalar: :class:`Config` for the
network/environment side and :class:`AgentConfig` for the learner. Both
validate themselves on construction and raise :class:`ConfigError`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields, replace
from typing import Any


class ConfigError(ValueError):
    """Raised for an invalid or inconsistent configuration."""


@dataclass(frozen=True)
class Config:
    """Environment parameters of the cognitive-IoT caching network.

    Defaults reproduce the simulation setup of the reference scenario
    (30 slots of 1 s, PU busy in 26 of them, 5+5 content items, cache of 4).
    """

    T: int = 30
    tau: float = 1.0
    L: int = 26
    P_p: float = 0.2
    P_s: float = 0.1
    sigma2: float = 1e-3
    W_bw: float = 1.0
    k_share: float = 2.0
    M: int = 5
    N: int = 5
    C_s: int = 4
    gamma_p: float = 0.8
    gamma_s: float = 0.6
    lambda_p: float = 1.0
    lambda_s: float = 1.0
    mean_gss: float = 0.1
    mean_gsp: float = 0.2
    phi: float = 7.0
    cooperative: bool = True
    F_size: float = 1.0
    D_core: float = 5.0
    # path-loss exponent; kept for completeness, gains are drawn from their means directly
    alpha_pathloss: float = 4.0

    def __post_init__(self) -> None:
        if self.T < 1:
            raise ConfigError(f"T must be >= 1, got {self.T}")
        if not 0 <= self.L <= self.T:
            raise ConfigError(f"L must satisfy 0 <= L <= T, got L={self.L}, T={self.T}")
        if self.M < 1 or self.N < 1:
            raise ConfigError("catalog sizes M and N must be >= 1")
        if self.C_s < 1:
            raise ConfigError(f"C_s must be >= 1, got {self.C_s}")
        if self.C_s > self.M + self.N:
            raise ConfigError(f"C_s={self.C_s} exceeds total catalog M+N={self.M + self.N}")
        if self.cooperative and self.C_s % 2:
            raise ConfigError("cooperative scheme needs an even cache capacity C_s")
        if not self.cooperative and self.C_s > self.N:
            raise ConfigError("non-cooperative scheme needs C_s <= N")
        if self.sigma2 <= 0:
            raise ConfigError("sigma2 must be positive")
        if self.gamma_p <= 0 or self.gamma_s <= 0:
            raise ConfigError("Zipf skews must be positive")
        if self.k_share < 1:
            raise ConfigError("k_share must be >= 1")
        if self.mean_gss <= 0 or self.mean_gsp <= 0:
            raise ConfigError("channel gain means must be positive")
        if self.P_s <= 0 or self.P_p < 0 or self.W_bw <= 0:
            raise ConfigError("powers and bandwidth must be positive")
        if self.tau <= 0 or self.F_size <= 0 or self.D_core < 0:
            raise ConfigError("tau and F_size must be positive, D_core non-negative")
        if self.phi < 0:
            raise ConfigError("phi must be non-negative")
        if self.lambda_p != 1 or self.lambda_s != 1:
            raise ConfigError("only one request per user per slot is supported (lambda = 1)")


EXPLORATION_MODES = ("ucbz", "epsilon_greedy")


@dataclass(frozen=True)
class AgentConfig:
    """Hyperparameters of the double deep Q-network learner."""

    episodes: int = 2500
    hidden: tuple[int, int] = (512, 128)
    beta_discount: float = 0.99
    c_prime: float = 2.5
    kappa: int = 333
    # "episodes": buffer holds kappa * T transitions; "transitions": kappa transitions
    kappa_unit: str = "episodes"
    kappa_target: int = 200
    batch_size: int = 100
    eta0: float = 4e-4
    lr_halving_period: int = 500
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    leaky_alpha: float = 0.01
    exploration_mode: str = "ucbz"
    epsilon_start: float = 1.0
    epsilon_end: float = 0.01
    epsilon_decay_fraction: float = 0.5
    ema_weight: float = 0.05
    final_window: int = 100

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")
        if len(self.hidden) != 2 or min(self.hidden) < 1:
            raise ConfigError(f"hidden must be two positive widths, got {self.hidden}")
        if not 0 <= self.beta_discount < 1:
            raise ConfigError("beta_discount must lie in [0, 1)")
        if self.c_prime < 0:
            raise ConfigError("c_prime must be non-negative")
        if self.kappa < 1 or self.kappa_target < 1 or self.batch_size < 1:
            raise ConfigError("kappa, kappa_target and batch_size must be >= 1")
        if self.kappa_unit not in ("episodes", "transitions"):
            raise ConfigError(f"unknown kappa_unit {self.kappa_unit!r}")
        if self.exploration_mode not in EXPLORATION_MODES:
            raise ConfigError(f"exploration_mode must be one of {EXPLORATION_MODES}")
        if self.eta0 <= 0 or self.lr_halving_period < 1:
            raise ConfigError("eta0 must be positive and lr_halving_period >= 1")
        if not 0 < self.leaky_alpha < 1:
            raise ConfigError("leaky_alpha must lie in (0, 1)")
        if not (0 <= self.epsilon_end <= self.epsilon_start <= 1):
            raise ConfigError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if not 0 < self.epsilon_decay_fraction <= 1:
            raise ConfigError("epsilon_decay_fraction must lie in (0, 1]")
        if not 0 < self.ema_weight <= 1:
            raise ConfigError("ema_weight must lie in (0, 1]")
        if self.final_window < 1:
            raise ConfigError("final_window must be >= 1")

    def buffer_capacity(self, T: int) -> int:
        return self.kappa * T if self.kappa_unit == "episodes" else self.kappa


def check_compatible(cfg: Config, agent: AgentConfig) -> None:
    if agent.batch_size > agent.buffer_capacity(cfg.T):
        raise ConfigError(
            f"batch_size={agent.batch_size} exceeds replay capacity "
            f"{agent.buffer_capacity(cfg.T)}"
        )


# Reduced profile: same environment, fewer episodes and a smaller network.
SMOKE_AGENT = AgentConfig(
    episodes=500,
    hidden=(64, 32),
    kappa=100,
    lr_halving_period=200,
    eta0=1e-3,
    kappa_target=100,
    batch_size=32,
)


def _coerce(value: Any, target: Any, name: str) -> Any:
    if isinstance(target, bool):
        if isinstance(value, str):
            low = value.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ConfigError(f"{name}: cannot parse boolean from {value!r}")
        return bool(value)
    if isinstance(target, tuple):
        if isinstance(value, str):
            value = [v for v in value.replace("(", "").replace(")", "").split(",") if v.strip()]
        return tuple(int(v) for v in value)
    if isinstance(target, int):
        try:
            return int(value)
        except ValueError:
            f = float(value)
            if not f.is_integer():
                raise ConfigError(f"{name}: expected an integer, got {value!r}") from None
            return int(f)
    if isinstance(target, float):
        return float(value)
    return str(value).strip()


def updated(obj: Any, values: dict[str, Any]) -> Any:
    """Return a copy of a config dataclass with string or typed overrides applied."""
    known = {f.name: f for f in fields(obj)}
    kwargs = {}
    for name, value in values.items():
        if name not in known:
            raise ConfigError(f"unknown {type(obj).__name__} field {name!r}")
        try:
            kwargs[name] = _coerce(value, getattr(obj, name), name)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{name}: {exc}") from exc
    return replace(obj, **kwargs)


def as_dict(obj: Any) -> dict[str, Any]:
    return dataclasses.asdict(obj)
