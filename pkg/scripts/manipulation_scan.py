#!/usr/bin/env python3
"""Hunt for profitable misreports in markets with three or more buyers.

Two-buyer markets are truthful; beyond that, misreporting can pay.  This
scan samples random small economies, runs the exhaustive strategy search
for buyer 1, and prints every instance where some misreport beats
truthful reporting, with the gain.

Usage: python scripts/manipulation_scan.py [--count 100] [--buyers 3]
       [--items 3] [--seed 1] [--cap CAP]
"""

import argparse
import random
import sys

sys.path.insert(0, "src")

from rigidmarket import (  # noqa: E402
    ManipulationProblem,
    SizeGuard,
    TreeSizeExceeded,
    optimal_strategy_search,
    validate_economy,
)

ITEM_LETTERS = "abcdefgh"


def random_economy(rng, n_buyers, n_real, max_value=8):
    names = ("o",) + tuple(ITEM_LETTERS[:n_real])
    rows = [
        tuple([0] + [rng.randint(0, max_value) for _ in range(n_real)])
        for _ in range(n_buyers)
    ]
    lower = [0]
    upper = [0]
    for _ in range(n_real):
        lo = rng.randint(0, max_value)
        lower.append(lo)
        upper.append(rng.randint(lo, max_value))
    return validate_economy(names, rows, tuple(lower), tuple(upper))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=100)
    parser.add_argument("--buyers", type=int, default=3)
    parser.add_argument("--items", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--cap", type=int, default=None)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    found = 0
    skipped = 0
    for k in range(args.count):
        economy = random_economy(rng, args.buyers, args.items)
        problem = ManipulationProblem(economy, 1)
        try:
            result = optimal_strategy_search(problem, cap=args.cap)
        except (SizeGuard, TreeSizeExceeded):
            skipped += 1
            continue
        if not result.truthful_is_optimal:
            found += 1
            gain = result.best_profit - result.truthful_profit
            print(f"instance {k}: truthful {result.truthful_profit}, "
                  f"best {result.best_profit} (gain {gain})")
            print(f"  valuations: {[list(r[1:]) for r in economy.valuations]}")
            print(f"  bounds: {list(economy.lower_bounds[1:])} .. {list(economy.upper_bounds[1:])}")
            print(f"  best reported values: {list(result.best_strategy.reported_values[1:])}")
    print(f"{found} manipulable instance(s) out of {args.count} ({skipped} skipped)")


if __name__ == "__main__":
    main()
