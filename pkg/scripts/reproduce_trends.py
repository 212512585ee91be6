"""Reproduce the two headline scheduling trends at desk scale.

Sweeps the window length e over {1, 2, 4, 5, 8} and the fleet size K over
{4, 8, 12, 16}, with the bit-oriented and greedy semantic schedulers, and
writes plot-ready CSVs under the output directory. Pass --with-ppo to also
train and evaluate a policy per sweep point (slow; use --train-steps to
shrink the budget).
"""

import argparse
import sys

from semcc.cli import main as cli_main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--config", default=None, help="base key=value config file")
    ap.add_argument("--seeds", type=int, default=5, help="seeds per sweep point")
    ap.add_argument("--seed", type=int, default=None, help="first seed")
    ap.add_argument("--with-ppo", action="store_true",
                    help="include a trained policy at every sweep point")
    ap.add_argument("--train-steps", type=int, default=0,
                    help="training budget per ppo point (0 keeps the config's)")
    args = ap.parse_args(argv)

    schedulers = "bit,greedy,ppo" if args.with_ppo else "bit,greedy"
    common = ["--schedulers", schedulers, "--seeds", str(args.seeds),
              "--out", args.out, "--train-steps", str(args.train_steps)]
    if args.config:
        common += ["--config", args.config]
    if args.seed is not None:
        common += ["--seed", str(args.seed)]

    for axis, values in (("e", "1,2,4,5,8"), ("k", "4,8,12,16")):
        print(f"sweeping axis {axis} over {{{values}}} ...")
        code = cli_main(["sweep", "--axis", axis, "--values", values] + common)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
