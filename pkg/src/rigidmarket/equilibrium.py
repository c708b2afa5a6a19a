"""Constrained Walrasian equilibrium verification and brute-force oracles.

A tuple (prices, rationing, allocation) is a constrained Walrasian
equilibrium when

1. prices are admissible and the rationing system is well formed;
2. every buyer receives something from her constrained demand set;
3. any item left unassigned sits at its lower price bound;
4. any item some buyer is barred from is sold, at its upper bound;
5. a barred buyer would actually demand the item were the bar lifted.

The checker returns per-condition verdicts with a witness for each
failure instead of raising.  The module also hosts small exhaustive
searches used as independent oracles in tests: a consistent-allocation
search and over-demanded subset enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .errors import SizeGuard
from .model import (
    DUMMY,
    Allocation,
    DemandSituation,
    Economy,
    RationingSystem,
    demand_set,
)

CONDITION_NAMES = (
    "admissible prices and well-formed rationing",
    "every buyer gets an item she demands",
    "unsold items rest at their lower bound",
    "rationed items are sold at their upper bound",
    "rationing only hides items that would be demanded",
)


@dataclass(frozen=True)
class ConditionVerdict:
    ok: bool
    witness: Optional[tuple] = None


@dataclass(frozen=True)
class EquilibriumCertificate:
    conditions: tuple[ConditionVerdict, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.conditions)

    def failures(self) -> tuple[tuple[str, tuple], ...]:
        return tuple(
            (CONDITION_NAMES[k], c.witness)
            for k, c in enumerate(self.conditions)
            if not c.ok
        )


def check_cwe(
    economy: Economy,
    prices,
    rationing: RationingSystem,
    allocation: Allocation,
) -> EquilibriumCertificate:
    """Evaluate all five equilibrium conditions; failures become verdicts.

    Structurally malformed inputs (wrong lengths, out-of-range items)
    raise ValueError instead of producing a certificate.
    """
    if len(prices) != economy.n_items:
        raise ValueError("price vector length does not match the economy")
    if len(rationing.allowed) != economy.n_buyers:
        raise ValueError("rationing has the wrong number of buyer rows")
    if len(allocation.assignment) != economy.n_buyers:
        raise ValueError("allocation length does not match the economy")
    for a in allocation.assignment:
        if not 0 <= a < economy.n_items:
            raise ValueError(f"allocation refers to unknown item {a}")

    verdicts = []

    witness = None
    if prices[DUMMY] != 0:
        witness = (None, DUMMY)
    else:
        for a in economy.real_items:
            if not economy.lower_bounds[a] <= prices[a] <= economy.upper_bounds[a]:
                witness = (None, a)
                break
    verdicts.append(ConditionVerdict(witness is None, witness))

    witness = None
    for i in economy.buyers:
        if allocation.item_of(i) not in demand_set(economy, prices, rationing, i):
            witness = (i, allocation.item_of(i))
            break
    verdicts.append(ConditionVerdict(witness is None, witness))

    assigned = allocation.assigned_items()
    witness = None
    for a in economy.real_items:
        if a not in assigned and prices[a] != economy.lower_bounds[a]:
            witness = (None, a)
            break
    verdicts.append(ConditionVerdict(witness is None, witness))

    witness = None
    for i, a in rationing.zeros(economy.n_items):
        if prices[a] != economy.upper_bounds[a] or a not in assigned:
            witness = (i, a)
            break
    verdicts.append(ConditionVerdict(witness is None, witness))

    witness = None
    for i, a in rationing.zeros(economy.n_items):
        # Lift only this one bar and see whether the item becomes demanded.
        if a not in demand_set(economy, prices, rationing.allow(i, a), i):
            witness = (i, a)
            break
    verdicts.append(ConditionVerdict(witness is None, witness))

    return EquilibriumCertificate(tuple(verdicts))


def brute_force_equilibrium_allocation(
    situation: DemandSituation, guard: int = 25
) -> Optional[Allocation]:
    """Exhaustive search for an allocation serving every real-item demander.

    Returns one such allocation (buyers content with the dummy keep the
    dummy) or None.  Guarded: refuses instances with more than ``guard``
    buyer-item cells.
    """
    buyers = situation.buyers()
    universe = situation.demanded_items()
    if len(buyers) * (len(universe) + 1) > guard:
        raise SizeGuard("instance too large for exhaustive allocation search")

    demanders = situation.demanders()
    n = max(buyers, default=0)

    chosen: dict[int, int] = {}
    used: set[int] = set()

    def assign(k: int) -> bool:
        if k == len(demanders):
            return True
        i = demanders[k]
        for a in sorted(situation.demands[i]):
            if a not in used:
                used.add(a)
                chosen[i] = a
                if assign(k + 1):
                    return True
                used.discard(a)
                del chosen[i]
        return False

    if not assign(0):
        return None
    return Allocation(tuple(chosen.get(i, DUMMY) for i in range(1, n + 1)))


def over_demanded_sets(situation: DemandSituation, guard: int = 15) -> list[frozenset[int]]:
    """All over-demanded subsets of the demanded items, by direct counting.

    Exponential; intended as a test oracle only.  Any over-demanded set
    restricted to demanded items stays over-demanded, so the enumeration
    over demanded items is exhaustive for existence and minimality.
    """
    items = sorted(situation.demanded_items())
    if len(items) > guard:
        raise SizeGuard("too many items for subset enumeration")
    demands = list(situation.demands.values())
    found = []
    for size in range(1, len(items) + 1):
        for combo in combinations(items, size):
            subset = frozenset(combo)
            if sum(1 for d in demands if d <= subset) > size:
                found.append(subset)
    return found


def minimal_over_demanded_sets(
    situation: DemandSituation, guard: int = 15
) -> list[frozenset[int]]:
    sets = over_demanded_sets(situation, guard)
    return [s for s in sets if not any(t < s for t in sets)]
