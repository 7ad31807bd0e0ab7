"""Command line: one subcommand per experiment.

    qteleport fidelity-theorem-sweep --seed 1 --d 3 --samples 10000 --out runs/sweep
"""

from __future__ import annotations

import argparse
import sys

from .channels import ChannelError
from .experiments import EXPERIMENTS, ExperimentConfig, run
from .io import FormatError
from .states import InvalidStateError

# experiment-specific flags -> parameter names
EXTRA_FLAGS = {
    "fidelity-theorem-sweep": ["p_steps"],
    "twirl-convergence": ["state"],
    "sigma-quasi-distill": ["F", "n_max", "state"],
    "rho-threshold": ["F", "family", "state"],
    "witness-demo": ["p", "m", "state"],
}

DEFAULT_TRIALS = {"rho-threshold": 10_000, "witness-demo": 1000, "ppt-bound": 200}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qteleport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--seed", type=int, required=True, help="RNG seed (no implicit entropy)")
        p.add_argument("--d", type=int, default=3)
        p.add_argument("--samples", type=int, default=10_000)
        p.add_argument("--trials", type=int, default=DEFAULT_TRIALS.get(name, 20))
        p.add_argument("--out", required=True, help="output directory")
        extras = EXTRA_FLAGS.get(name, [])
        if "p" in extras:
            p.add_argument("--p", type=float)
        if "F" in extras:
            p.add_argument("--F", type=float)
        if "n_max" in extras:
            p.add_argument("--n-max", dest="n_max", type=int)
        if "p_steps" in extras:
            p.add_argument("--p-steps", dest="p_steps", type=int)
        if "m" in extras:
            p.add_argument("--m", type=int)
        if "family" in extras:
            p.add_argument("--family", choices=["rho", "sigma"])
        if "state" in extras:
            p.add_argument("--state", help="state JSON file")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    params = {
        k: getattr(args, k)
        for k in EXTRA_FLAGS.get(args.experiment, [])
        if getattr(args, k, None) is not None
    }
    config = ExperimentConfig(
        experiment=args.experiment,
        seed=args.seed,
        output_path=args.out,
        d=args.d,
        samples=args.samples,
        trials=args.trials,
        parameters=params,
    )
    try:
        files = run(config)
    except InvalidStateError as exc:
        print(f"error: loaded state violates invariant '{exc.invariant}': {exc}", file=sys.stderr)
        return 1
    except (FormatError, ChannelError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
