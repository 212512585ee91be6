"""Experiment harness: episode runs, sweeps and CSV emission.

Counts follow the resource-use convention: every scheduled RB is one
attempted transmission, so a multicast serving five UAVs still costs one
attempt; that accounting is what lets the semantic schedulers save resources.
Window-level effectiveness is delivered effective messages over total
effective messages (one per UAV per window).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import ppo as ppo_mod
from .config import RunConfig
from .env import CncSchedulingEnv
from .errors import ConfigError, ContractError
from .schedulers import SCHEDULER_NAMES, make_scheduler

CSV_HEADER = "axis,scheduler,seed,attempts,successes,effective_total,effective_delivered,effectiveness"

SWEEP_AXES = ("repeat_e", "n_uav")


@dataclass(frozen=True)
class RunMetrics:
    """Counters and reward trace from one full episode."""

    scheduler: str
    seed: int
    attempts: int
    successes: int
    effective_total: int
    effective_delivered: int
    rewards: tuple
    config_hash: str

    def __post_init__(self):
        if self.successes > self.attempts:
            raise ContractError("successes cannot exceed attempts")
        if self.effective_delivered > self.effective_total:
            raise ContractError("delivered cannot exceed total effective messages")

    @property
    def effectiveness(self) -> float:
        if self.effective_total == 0:
            return 0.0
        return self.effective_delivered / self.effective_total


def run_episode(scheduler_name: str, cfg: RunConfig, seed: int, params=None) -> RunMetrics:
    """One episode of episode_ttis TTIs under the named scheduler."""
    sim = replace(cfg.sim(), seed=seed)
    env = CncSchedulingEnv(sim, cfg.semantics(), cfg.chan())
    sched = make_scheduler(scheduler_name, params=params, seed=seed + 7919)
    sched.reset()
    obs = env.reset(seed=seed)
    rewards = []
    done = False
    while not done:
        action = sched.schedule(env.entity_set(), obs)
        outcome = env.step(action)
        rewards.append(outcome.reward)
        obs = outcome.observation
        done = outcome.done
    return RunMetrics(
        scheduler=scheduler_name,
        seed=seed,
        attempts=env.attempts,
        successes=env.successes,
        effective_total=env.effective_total,
        effective_delivered=env.effective_delivered,
        rewards=tuple(rewards),
        config_hash=cfg.hash,
    )


def derive_group_count(n_uav: int, group_size: int, coverage: float) -> int:
    """Groups per window so that about coverage * n_uav UAVs sit in groups."""
    if group_size < 2:
        return 0
    wanted = math.ceil(coverage * n_uav / group_size)
    return min(wanted, n_uav // group_size)


def config_for_axis_value(base: RunConfig, axis: str, value: int) -> RunConfig:
    """Specialize the base config to one sweep point.

    The n_uav axis re-derives the RB count as floor(K/2) and the group count
    from the configured coverage fraction, since a fixed group count would
    change the grouped share as K moves.
    """
    if axis == "repeat_e":
        return base.with_updates(repeat_e=int(value))
    if axis == "n_uav":
        k = int(value)
        count = derive_group_count(k, base.get("group_size"), base.get("equiv_coverage"))
        return base.with_updates(n_uav=k, n_rb=k // 2, group_count=count)
    raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    schedulers: tuple
    seeds: tuple
    base: RunConfig
    train_steps: int = 0  # 0 keeps the config's total_steps for ppo points

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep needs at least one axis value")
        if not self.schedulers:
            raise ConfigError("sweep needs at least one scheduler")
        for s in self.schedulers:
            if s not in SCHEDULER_NAMES:
                raise ConfigError(f"unknown scheduler {s!r}")
        if len(self.seeds) < 3:
            raise ConfigError("sweep needs at least 3 seeds per point")


def _train_for_point(cfg: RunConfig, train_steps: int):
    ppo_cfg = cfg.ppo()
    if train_steps > 0:
        ppo_cfg = replace(ppo_cfg, total_steps=train_steps)
    result = ppo_mod.train(
        lambda: CncSchedulingEnv(cfg.sim(), cfg.semantics(), cfg.chan()),
        ppo_cfg,
        config_hash=cfg.hash,
    )
    return result.params


def sweep(spec: SweepSpec, progress=None) -> list[dict]:
    """Serial, deterministic sweep; one row per (axis value, scheduler, seed).

    Each (axis value, scheduler) block is followed by mean and std summary
    rows whose seed column reads "mean" / "std". A ppo scheduler trains one
    policy per axis point (shapes change with K) and evaluates it across all
    seeds.
    """
    rows: list[dict] = []
    for value in spec.values:
        cfg = config_for_axis_value(spec.base, spec.axis, value)
        trained = None
        if "ppo" in spec.schedulers:
            trained = _train_for_point(cfg, spec.train_steps)
        for sched in spec.schedulers:
            block: list[RunMetrics] = []
            for seed in spec.seeds:
                metrics = run_episode(
                    sched, cfg, int(seed),
                    params=trained if sched == "ppo" else None,
                )
                block.append(metrics)
                rows.append(
                    {
                        "axis": value,
                        "scheduler": sched,
                        "seed": int(seed),
                        "attempts": metrics.attempts,
                        "successes": metrics.successes,
                        "effective_total": metrics.effective_total,
                        "effective_delivered": metrics.effective_delivered,
                        "effectiveness": metrics.effectiveness,
                    }
                )
                if progress is not None:
                    progress(value, sched, int(seed), metrics)
            for stat, fn in (("mean", np.mean), ("std", np.std)):
                rows.append(
                    {
                        "axis": value,
                        "scheduler": sched,
                        "seed": stat,
                        "attempts": float(fn([m.attempts for m in block])),
                        "successes": float(fn([m.successes for m in block])),
                        "effective_total": float(fn([m.effective_total for m in block])),
                        "effective_delivered": float(
                            fn([m.effective_delivered for m in block])
                        ),
                        "effectiveness": float(fn([m.effectiveness for m in block])),
                    }
                )
    return rows


def _fmt_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def render_csv(rows: list[dict], config_hash: str) -> str:
    """CSV text: a config-hash comment line, the fixed header, then the rows."""
    lines = [f"# config_hash={config_hash}", CSV_HEADER]
    cols = CSV_HEADER.split(",")
    for row in rows:
        lines.append(",".join(_fmt_cell(row[c]) for c in cols))
    return "\n".join(lines) + "\n"


def report(rows: list[dict], spec: SweepSpec, out_dir) -> list[Path]:
    """Write the transmissions and effectiveness CSVs plus a metadata JSON.

    Both CSVs carry the full fixed schema (the transmissions file is read for
    its attempts column, the effectiveness file for its effectiveness column)
    so each is self-contained and plot-ready.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        text = render_csv(rows, spec.base.hash)
        paths = [
            out / f"transmissions_vs_{spec.axis}.csv",
            out / f"effectiveness_vs_{spec.axis}.csv",
        ]
        for p in paths:
            p.write_text(text, encoding="utf-8")
        meta = {
            "axis": spec.axis,
            "values": list(spec.values),
            "schedulers": list(spec.schedulers),
            "seeds": [int(s) for s in spec.seeds],
            "config_hash": spec.base.hash,
            "config": {k: v for k, v in spec.base.values.items()},
        }
        meta_path = out / f"sweep_meta_{spec.axis}.json"
        meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        paths.append(meta_path)
    except OSError as exc:
        raise ConfigError(f"cannot write results under {out}: {exc}") from exc
    return paths
