"""Train the scheduling policy at the default operating point and evaluate it.

Saves a checkpoint, then plays held-out episodes with the trained policy and
the two baselines for a quick side-by-side. All randomness flows from one
seed, so reruns with the same arguments reproduce the same checkpoint.
"""

import argparse
import sys

from semcc.cli import main as cli_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=None, help="key=value config file")
    ap.add_argument("--checkpoint", default="policy.npz")
    ap.add_argument("--steps", type=int, default=None, help="override total_steps")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--episodes", type=int, default=10, help="eval episodes")
    args = ap.parse_args(argv)

    common = []
    if args.config:
        common += ["--config", args.config]
    if args.seed is not None:
        common += ["--seed", str(args.seed)]

    train = ["train", "--checkpoint-out", args.checkpoint] + common
    if args.steps is not None:
        train += ["--steps", str(args.steps)]
    code = cli_main(train)
    if code != 0:
        return code

    for sched in ("ppo", "greedy", "bit"):
        ev = ["eval", "--scheduler", sched, "--episodes", str(args.episodes)] + common
        if sched == "ppo":
            ev += ["--checkpoint", args.checkpoint]
        code = cli_main(ev)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
