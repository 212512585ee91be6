"""Flat key=value run configuration.

One human-readable file configures the whole stack. Values are typed against
a fixed schema; unknown or duplicate keys are rejected. Quantities that are
naturally quoted in dB (excess losses, noise PSD) live in dB here and are
converted to linear scale when the channel parameters are built, so all core
math stays linear. The canonical serialization is stable, which makes the
sha256 config hash reproducible and round-trip safe.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

from .channel import ChannelParams
from .env import SimConfig
from .errors import ConfigError
from .ppo import PpoConfig
from .semantics import SemanticConfig


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# key -> (type, default); schema order is the canonical serialization order
SCHEMA: dict[str, tuple] = {
    # simulation
    "n_uav": (int, 10),
    "n_rb": (int, 0),  # 0 derives floor(n_uav / 2)
    "radius_m": (float, 500.0),
    "max_alt_m": (float, 100.0),
    "repeat_e": (int, 5),
    "episode_ttis": (int, 200),
    "group_count": (int, 2),
    "group_size": (int, 3),
    "equiv_coverage": (float, 0.6),  # UAV fraction in groups when sweeps re-derive counts
    "sigma_step_m": (float, 1.0),
    "freeze_positions": (bool, False),
    "discount": (float, 0.99),
    "seed": (int, 0),
    "scheduler": (str, "greedy"),
    # channel (dB quantities converted to linear when ChannelParams is built)
    "carrier_freq_hz": (float, 2.4e9),
    "light_speed_m_s": (float, 3.0e8),
    "los_a": (float, 9.61),
    "los_b": (float, 0.16),
    "eta_los_db": (float, 1.0),
    "eta_nlos_db": (float, 20.0),
    "noise_psd_dbm_hz": (float, -174.0),
    "rb_bandwidth_hz": (float, 180e3),
    "total_power_w": (float, 2.0),
    "msg_bits": (int, 256),
    "tti_s": (float, 0.02),
    # semantics
    "equiv_tolerance": (float, 0.05),
    "trigger_threshold": (float, 0.02),
    # learning
    "clip_eps": (float, 0.2),
    "learn_rate": (float, 3e-4),
    "gae_lambda": (float, 0.95),
    "epochs_per_batch": (int, 4),
    "minibatch_size": (int, 64),
    "rollout_len": (int, 1024),
    "entropy_coef": (float, 0.01),
    "value_coef": (float, 0.5),
    "total_steps": (int, 100_000),
    "optimizer": (str, "adam"),
    "hidden_width": (int, 128),
    "eval_interval": (int, 20_000),
    "eval_episodes": (int, 2),
}


@dataclass(frozen=True)
class RunConfig:
    """Typed configuration snapshot; builders construct the component configs."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {k: default for k, (_, default) in SCHEMA.items()}
        for key, val in self.values.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = val
        object.__setattr__(self, "values", merged)

    def get(self, key: str):
        return self.values[key]

    def with_updates(self, **updates) -> "RunConfig":
        vals = dict(self.values)
        for key, val in updates.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            vals[key] = val
        return RunConfig(vals)

    # ------------------------------------------------------------- builders

    def sim(self) -> SimConfig:
        v = self.values
        return SimConfig(
            n_uav=v["n_uav"],
            n_rb=v["n_rb"],
            radius_m=v["radius_m"],
            max_alt_m=v["max_alt_m"],
            repeat_e=v["repeat_e"],
            episode_ttis=v["episode_ttis"],
            equiv_group_spec=(v["group_count"], v["group_size"]),
            sigma_step_m=v["sigma_step_m"],
            freeze_positions=v["freeze_positions"],
            discount=v["discount"],
            seed=v["seed"],
        )

    def chan(self) -> ChannelParams:
        v = self.values
        try:
            return ChannelParams(
                carrier_freq_hz=v["carrier_freq_hz"],
                light_speed_m_s=v["light_speed_m_s"],
                a_env=v["los_a"],
                b_env=v["los_b"],
                eta_los=10.0 ** (-v["eta_los_db"] / 10.0),
                eta_nlos=10.0 ** (-v["eta_nlos_db"] / 10.0),
                noise_psd_w_hz=10.0 ** ((v["noise_psd_dbm_hz"] - 30.0) / 10.0),
                rb_bandwidth_hz=v["rb_bandwidth_hz"],
                total_power_w=v["total_power_w"],
                n_rb=self.sim().n_rb,
                msg_bits=v["msg_bits"],
                tti_s=v["tti_s"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def semantics(self) -> SemanticConfig:
        v = self.values
        try:
            return SemanticConfig(
                equiv_tolerance=v["equiv_tolerance"],
                trigger_thresholds=(v["trigger_threshold"],) * 4,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def ppo(self) -> PpoConfig:
        v = self.values
        return PpoConfig(
            clip_eps=v["clip_eps"],
            learn_rate=v["learn_rate"],
            discount=v["discount"],
            gae_lambda=v["gae_lambda"],
            epochs_per_batch=v["epochs_per_batch"],
            minibatch_size=v["minibatch_size"],
            rollout_len=v["rollout_len"],
            entropy_coef=v["entropy_coef"],
            value_coef=v["value_coef"],
            total_steps=v["total_steps"],
            optimizer=v["optimizer"],
            hidden_width=v["hidden_width"],
            eval_interval=v["eval_interval"],
            eval_episodes=v["eval_episodes"],
            seed=v["seed"],
        )

    def validate(self) -> None:
        """Construct every component config, surfacing the first bad value."""
        self.sim()
        self.chan()
        self.semantics()
        self.ppo()

    # ---------------------------------------------------------- persistence

    def serialize(self) -> str:
        """Canonical text form: every key in schema order, one per line."""
        return "".join(f"{k} = {_fmt(self.values[k])}\n" for k in SCHEMA)

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()


def parse_config_text(text: str) -> RunConfig:
    """Parse key = value lines; '#' starts a comment, blank lines ignored."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}")
        caster = SCHEMA[key][0]
        try:
            values[key] = _parse_bool(val) if caster is bool else caster(val)
        except ValueError as exc:
            raise ConfigError(
                f"line {lineno}: bad value {val!r} for {key} ({exc})"
            ) from exc
    return RunConfig(values)


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def default_config() -> RunConfig:
    return RunConfig({})


def resolve_seed(cfg: RunConfig, cli_seed: int | None = None, env=None) -> int:
    """Seed precedence: explicit flag, then SEMCC_SEED, then the config file."""
    if cli_seed is not None:
        return cli_seed
    env = os.environ if env is None else env
    raw = env.get("SEMCC_SEED")
    if raw is not None:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"SEMCC_SEED must be an integer, got {raw!r}") from exc
    return cfg.get("seed")
