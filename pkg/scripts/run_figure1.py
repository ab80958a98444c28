#!/usr/bin/env python3
"""Oracle-tuned recovery error versus sample size, all four methods.

Full run (20 replicates per size at p = 116) takes a while on one core;
use --reps and --sizes to scale it down.
"""

import argparse

from signet.experiments import FIGURE1_SIZES, run_figure1


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--reps", type=int, default=20)
    parser.add_argument("--p", type=int, default=116)
    parser.add_argument(
        "--sizes", type=int, nargs="+", default=list(FIGURE1_SIZES),
        help="sample sizes to sweep",
    )
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()
    res = run_figure1(
        args.out,
        sizes=tuple(args.sizes),
        reps=args.reps,
        p=args.p,
        seed=args.seed,
        jobs=args.jobs,
    )
    for method, series in res["means"].items():
        cells = ", ".join(
            f"{n}: {'NA' if v is None else f'{v:.1f}'}" for n, v in series.items()
        )
        print(f"{method:8s} mean Hamming by n -> {cells}")


if __name__ == "__main__":
    main()
