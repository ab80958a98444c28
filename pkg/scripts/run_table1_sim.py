#!/usr/bin/env python3
"""Split-half reproducibility of the tuned estimators on synthetic data.

Each method re-calibrates on every half of every split, so this is the
most expensive pipeline; --instances and --splits scale it down.
"""

import argparse

from signet.experiments import TABLE1_METHODS, run_table1_sim


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--instances", type=int, default=10)
    parser.add_argument("--splits", type=int, default=20)
    parser.add_argument("--p", type=int, default=116)
    parser.add_argument("--n", type=int, default=210)
    parser.add_argument(
        "--methods", nargs="+", default=list(TABLE1_METHODS),
        choices=list(TABLE1_METHODS),
    )
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()
    res = run_table1_sim(
        args.out,
        instances=args.instances,
        splits=args.splits,
        p=args.p,
        n=args.n,
        seed=args.seed,
        methods=tuple(args.methods),
        jobs=args.jobs,
    )
    for method, row in res["summary"].items():
        print(
            f"{method:8s} mean agreement {row['mean_agreement']:.1f}% "
            f"(mean SD {row['mean_sd']:.1f}, {row['instances']} instances)"
        )


if __name__ == "__main__":
    main()
