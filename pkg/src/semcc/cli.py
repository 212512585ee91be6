"""Command-line entry point.

Subcommands: train, eval, sweep, validate-config. Exit codes: 0 on success,
1 on usage or configuration problems, 2 on contract violations (malformed
actions, checkpoint shape mismatches). The SEMCC_SEED environment variable
overrides the config seed; an explicit --seed flag overrides both.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import config as config_mod
from . import harness, ppo
from .env import CncSchedulingEnv
from .errors import ConfigError, ContractError
from .schedulers import SCHEDULER_NAMES

AXIS_BY_FLAG = {"e": "repeat_e", "k": "n_uav"}


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the harness contract
    # reserves 2 for contract violations, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _load_config(args) -> config_mod.RunConfig:
    if getattr(args, "config", None):
        cfg = config_mod.load_config(args.config)
    else:
        cfg = config_mod.default_config()
    seed = config_mod.resolve_seed(cfg, getattr(args, "seed", None))
    return cfg.with_updates(seed=seed)


def _cmd_train(args) -> int:
    cfg = _load_config(args)
    if args.steps is not None:
        if args.steps < 0:
            raise ConfigError("--steps must be >= 0")
        cfg = cfg.with_updates(total_steps=args.steps)
    cfg.validate()
    ppo_cfg = cfg.ppo()

    def factory():
        return CncSchedulingEnv(cfg.sim(), cfg.semantics(), cfg.chan())

    def progress(steps, score, diag):
        print(
            f"steps={steps} eval_reward={score:.3f} "
            f"entropy={diag.entropy:.3f} value_loss={diag.value_loss:.4f}"
        )

    result = ppo.train(
        factory, ppo_cfg,
        checkpoint_path=args.checkpoint_out,
        config_hash=cfg.hash,
        progress=progress,
    )
    print(f"trained {result.steps} steps; checkpoint written to {args.checkpoint_out}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config(args)
    cfg.validate()
    if args.episodes < 1:
        raise ConfigError("--episodes must be >= 1")
    params = None
    if args.scheduler == "ppo":
        if not args.checkpoint:
            raise ConfigError("scheduler 'ppo' needs --checkpoint")
        sim = cfg.sim()
        params, _, _ = ppo.load_checkpoint(
            args.checkpoint, expect_n_uav=sim.n_uav, expect_n_rb=sim.n_rb
        )
    seed0 = cfg.get("seed")
    runs = [
        harness.run_episode(args.scheduler, cfg, seed0 + ep, params=params)
        for ep in range(args.episodes)
    ]
    attempts = float(np.mean([r.attempts for r in runs]))
    eff = float(np.mean([r.effectiveness for r in runs]))
    reward = float(np.mean([sum(r.rewards) for r in runs]))
    print(f"scheduler={args.scheduler} episodes={args.episodes}")
    print(f"mean_attempts={attempts:.2f}")
    print(f"mean_effectiveness={eff:.4f}")
    print(f"mean_episode_reward={reward:.2f}")
    return 0


def _parse_int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        values = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"bad {what} list {text!r}: {exc}") from exc
    if not values:
        raise ConfigError(f"empty {what} list")
    return values


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    cfg.validate()
    schedulers = tuple(s.strip() for s in args.schedulers.split(",") if s.strip())
    if args.seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    seed0 = cfg.get("seed")
    spec = harness.SweepSpec(
        axis=AXIS_BY_FLAG[args.axis],
        values=_parse_int_list(args.values, "axis value"),
        schedulers=schedulers,
        seeds=tuple(seed0 + i for i in range(args.seeds)),
        base=cfg,
        train_steps=args.train_steps,
    )
    rows = harness.sweep(spec)
    paths = harness.report(rows, spec, args.out)
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_validate_config(args) -> int:
    cfg = _load_config(args)
    cfg.validate()
    print(f"config ok; hash={cfg.hash}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semcc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a PPO scheduling policy")
    p_train.add_argument("--config", help="key=value config file")
    p_train.add_argument("--steps", type=int, default=None, help="override total_steps")
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--checkpoint-out", default="checkpoint.npz")
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="run evaluation episodes for one scheduler")
    p_eval.add_argument("--checkpoint", help="policy checkpoint (for --scheduler ppo)")
    p_eval.add_argument("--scheduler", choices=SCHEDULER_NAMES, default="greedy")
    p_eval.add_argument("--episodes", type=int, default=5)
    p_eval.add_argument("--config", help="key=value config file")
    p_eval.add_argument("--seed", type=int, default=None)
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser("sweep", help="sweep window length or UAV count")
    p_sweep.add_argument("--axis", choices=sorted(AXIS_BY_FLAG), required=True,
                         help="e sweeps the window length, k the UAV count")
    p_sweep.add_argument("--values", required=True, help="comma-separated axis values")
    p_sweep.add_argument("--schedulers", default="bit,greedy",
                         help="comma-separated scheduler names")
    p_sweep.add_argument("--seeds", type=int, default=3, help="seeds per point")
    p_sweep.add_argument("--out", default="results", help="output directory")
    p_sweep.add_argument("--train-steps", type=int, default=0,
                         help="ppo training budget per point (0 = config value)")
    p_sweep.add_argument("--config", help="key=value config file")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_val = sub.add_parser("validate-config", help="typecheck a config file")
    p_val.add_argument("--config", help="key=value config file")
    p_val.add_argument("--seed", type=int, default=None)
    p_val.set_defaults(func=_cmd_validate_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        code = exc.code if exc.code is not None else 0
        return int(code) if not isinstance(code, str) else 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ContractError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
