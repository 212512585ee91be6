"""Semantic-aware downlink C&C scheduling: simulator, baselines, PPO agent."""

from .actions import EntitySet, ScheduleAction, validate_action
from .channel import ChannelParams, UavGeometry
from .config import RunConfig, default_config, load_config, parse_config_text
from .env import CncSchedulingEnv, SimConfig, StepOutcome
from .errors import ConfigError, ContractError
from .harness import RunMetrics, SweepSpec, run_episode, sweep
from .ppo import PpoConfig, PolicyParams, train
from .schedulers import make_scheduler
from .semantics import CommandVector, SemanticConfig

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "CncSchedulingEnv",
    "CommandVector",
    "ConfigError",
    "ContractError",
    "EntitySet",
    "PolicyParams",
    "PpoConfig",
    "RunConfig",
    "RunMetrics",
    "ScheduleAction",
    "SemanticConfig",
    "SimConfig",
    "StepOutcome",
    "SweepSpec",
    "UavGeometry",
    "default_config",
    "load_config",
    "make_scheduler",
    "parse_config_text",
    "run_episode",
    "sweep",
    "train",
    "validate_action",
    "__version__",
]
