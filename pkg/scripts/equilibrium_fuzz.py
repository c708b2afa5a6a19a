#!/usr/bin/env python3
"""Fuzz the mechanism: every history of random economies must end in equilibrium.

Samples random economies, walks every lottery path, and checks each
terminal tuple against the five equilibrium conditions.  Prints a
summary (and any counterexample immediately).

Usage: python scripts/equilibrium_fuzz.py [--count 500] [--seed 0]
"""

import argparse
import random
import sys

sys.path.insert(0, "src")

from rigidmarket import (  # noqa: E402
    TreeSizeExceeded,
    check_cwe,
    enumerate_histories,
    validate_economy,
)

ITEM_LETTERS = "abcdefgh"


def random_economy(rng, max_buyers=5, max_real=4, max_value=8):
    n = rng.randint(1, max_buyers)
    m = rng.randint(1, max_real)
    names = ("o",) + tuple(ITEM_LETTERS[:m])
    rows = [
        tuple([0] + [rng.randint(0, max_value) for _ in range(m)]) for _ in range(n)
    ]
    lower = [0]
    upper = [0]
    for _ in range(m):
        lo = rng.randint(0, max_value)
        lower.append(lo)
        upper.append(rng.randint(lo, max_value))
    return validate_economy(names, rows, tuple(lower), tuple(upper))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-leaves", type=int, default=500)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    histories = 0
    skipped = 0
    for k in range(args.count):
        economy = random_economy(rng)
        try:
            leaves = enumerate_histories(economy, max_leaves=args.max_leaves)
        except TreeSizeExceeded:
            skipped += 1
            continue
        for leaf in leaves:
            certificate = check_cwe(economy, leaf.prices, leaf.rationing, leaf.allocation)
            if not certificate.ok:
                print(f"COUNTEREXAMPLE at instance {k}: {certificate.failures()}")
                print(f"  valuations: {[list(r[1:]) for r in economy.valuations]}")
                print(f"  bounds: {list(economy.lower_bounds[1:])} .. {list(economy.upper_bounds[1:])}")
                print(f"  winners: {leaf.winners}")
                return 1
        histories += len(leaves)
    print(f"{args.count - skipped} economies, {histories} histories, all equilibria"
          f" ({skipped} skipped as too branchy)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
