"""Over-demanded item sets and the minimal over-demanded set search.

A set of real items is over-demanded when strictly more buyers demand
only items inside it than the set has items; such a set exists exactly
when no equilibrium allocation does.  ``mods`` first grows a witness set
from an unserved buyer by alternating between demanded items and their
current holders, then filters it down to a minimal over-demanded set.

Both stages follow fixed orders (lowest unmatched buyer as seed, items
scanned in ascending index), so the result is a deterministic function
of the demand situation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import DummyInSet, EquilibriumExists
from .matching import Matching, max_matching
from .model import DUMMY, DemandSituation


def _require_real(items: Iterable[int]) -> frozenset[int]:
    items = frozenset(items)
    if DUMMY in items:
        raise DummyInSet("item set must contain real items only")
    return items


def is_over_demanded(situation: DemandSituation, items: Iterable[int]) -> bool:
    """More buyers demand only items of this set than the set has items."""
    items = _require_real(items)
    exclusive = sum(1 for d in situation.demands.values() if d <= items)
    return exclusive > len(items)


def is_not_under_demanded(situation: DemandSituation, items: Iterable[int]) -> bool:
    """At least as many buyers touch the set as it has items."""
    items = _require_real(items)
    touching = sum(1 for d in situation.demands.values() if d & items)
    return touching >= len(items)


def _unmatched_demanders(situation: DemandSituation, matching: Matching) -> list[int]:
    return [i for i in situation.demanders() if not matching.covers_buyer(i)]


def grow_over_demanded(
    situation: DemandSituation, matching: Matching
) -> tuple[frozenset[int], int]:
    """Grow an over-demanded set from the lowest-id unserved buyer.

    ``matching`` must be a maximum matching that leaves some demander
    unmatched; otherwise no over-demanded set exists and
    :class:`EquilibriumExists` is raised.  Returns the grown set and the
    seed buyer.

    Starting from the seed's demand, repeatedly add the demands of the
    buyers currently holding the newly reached items.  Every reached item
    is held by someone (else the matching would admit an augmenting
    path), so the fixed point has as many holders as items, plus the
    unmatched seed demanding inside it: over-demanded.
    """
    unmatched = _unmatched_demanders(situation, matching)
    if not unmatched:
        raise EquilibriumExists("every demander is matched; no over-demanded set")
    seed = unmatched[0]

    grown: set[int] = set()
    frontier = set(situation.demands[seed])
    while frontier:
        holders = {
            matching.item_to_buyer[a] for a in frontier if matching.covers_item(a)
        }
        grown |= frontier
        frontier = set()
        for j in holders:
            frontier |= situation.demands[j]
        frontier -= grown
    return frozenset(grown), seed


def mods(situation: DemandSituation, matching: Matching) -> frozenset[int]:
    """A minimal over-demanded set of the situation.

    Filters the grown set one item at a time, in ascending item index:
    an item is kept exactly when dropping it would let all buyers
    confined to the remaining candidate set be matched inside it.
    """
    grown, _ = grow_over_demanded(situation, matching)
    x_min: set[int] = set()
    rest = set(grown)
    for a in sorted(grown):
        rest.discard(a)
        candidate = x_min | rest
        confined = [i for i, d in situation.demands.items() if d <= candidate]
        sub = DemandSituation({i: situation.demands[i] for i in confined})
        if len(max_matching(sub)) == len(confined):
            x_min.add(a)
    return frozenset(x_min)


@dataclass(frozen=True)
class OverdemandReport:
    """Trace of one minimal over-demanded set computation."""

    seed_buyer: int
    grown_set: frozenset[int]
    minimal_set: frozenset[int]


def overdemand_report(situation: DemandSituation, matching: Matching) -> OverdemandReport:
    grown, seed = grow_over_demanded(situation, matching)
    return OverdemandReport(seed, grown, mods(situation, matching))
