"""Cooperative caching and spectrum access for cognitive-IoT networks with DDQN-UCBZ."""

from .actions import Action, ActionTable, decode, encode, enumerate_actions, satisfies_requests
from .agent import DDQNCachingAgent, train
from .baselines import LRUCachingPolicy, run_baseline
from .config import AgentConfig, Config, ConfigError

__version__ = "0.1.0"

__all__ = [
    "Action", "ActionTable", "AgentConfig", "Config", "ConfigError", "DDQNCachingAgent",
    "LRUCachingPolicy", "decode", "encode", "enumerate_actions", "run_baseline",
    "satisfies_requests", "train",
]
