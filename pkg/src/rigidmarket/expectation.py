"""Exact expected profits and prices over the mechanism's lottery tree.

A run of the mechanism is nondeterministic only at lotteries, where each
of the ``k`` eligible buyers wins with chance ``1/k``.  Expected values
are therefore exact rationals; this module computes them two independent
ways:

* :func:`expected_values` evaluates the recursion over allocation
  situations: a (prices, rationing) pair in which every sold item is
  barred to everyone but its holder.  Nodes either settle (no minimal
  over-demanded set among unsold buyers: the value is each buyer's best
  attainable net benefit and the current prices), raise prices by one
  unit, or average over the lottery branches of the capped item.
* :func:`enumerate_histories` forks the live mechanism state at every
  lottery and collects one terminal tuple per complete history, with its
  probability.

The two agree leaf by leaf; tests cross-validate their aggregates.
All arithmetic uses :class:`fractions.Fraction`; floats never appear.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .errors import TreeSizeExceeded
from .matching import Matching, max_matching
from .mechanism import (
    MechanismState,
    apply_sale,
    complete_run,
    gate,
    initial_state,
    lottery_entrants,
    price_increase_step,
    refresh_demands,
)
from .model import (
    Allocation,
    DemandSituation,
    Economy,
    RationingSystem,
    demand_set,
    indirect_utility,
)
from .overdemand import mods

DEFAULT_NODE_LIMIT = 1_000_000


def sold_matching_from_rationing(rationing: RationingSystem, n_items: int) -> Matching:
    """Recover the partial sale a rationing system encodes.

    An item barred to anyone must be barred to everyone but a single
    buyer: its holder.  Items allowed to all are unsold.
    """
    n_buyers = len(rationing.allowed)
    pairs = []
    for a in range(1, n_items):
        holders = [i for i in range(1, n_buyers + 1) if a in rationing.allowed[i - 1]]
        if len(holders) == n_buyers:
            continue
        if len(holders) != 1:
            raise ValueError(f"item {a} is barred to some buyers but has no single holder")
        pairs.append((holders[0], a))
    return Matching(pairs)


def record_sale(rationing: RationingSystem, winner: int, item: int) -> RationingSystem:
    """Rationing after a sale: everyone but the winner loses the item."""
    rows = list(rationing.allowed)
    for j in range(len(rows)):
        if j == winner - 1:
            rows[j] = rows[j] | {item}
        else:
            rows[j] = rows[j] - {item}
    return RationingSystem(tuple(rows))


@dataclass(frozen=True)
class AllocationSituation:
    """State of the expected-value recursion: prices plus sale-encoding rationing."""

    prices: tuple[int, ...]
    rationing: RationingSystem

    def sold(self) -> Matching:
        return sold_matching_from_rationing(self.rationing, len(self.prices))

    @staticmethod
    def root(economy: Economy) -> "AllocationSituation":
        return AllocationSituation(
            economy.lower_bounds,
            RationingSystem.full(economy.n_buyers, economy.n_items),
        )


@dataclass(frozen=True)
class TreeStats:
    nodes: int
    leaves: int
    probability_mass: Fraction


@dataclass(frozen=True)
class ExpectationReport:
    expected_profit: dict[int, Fraction]
    expected_price: dict[int, Fraction]
    tree_stats: TreeStats


@dataclass(frozen=True)
class _NodeValue:
    profits: tuple[Fraction, ...]
    prices: tuple[Fraction, ...]
    nodes: int
    leaves: int
    mass: Fraction


def expected_values(
    economy: Economy, node_limit: int = DEFAULT_NODE_LIMIT
) -> ExpectationReport:
    """Expected profit per buyer and expected price per item, exactly.

    The search tree is capped at ``node_limit`` nodes (shared subtrees
    count each time they occur); :class:`TreeSizeExceeded` carries the
    count reached.  Deterministic choices (set search, capped-item pick)
    are the same functions the mechanism itself uses, so the tree is the
    mechanism's.
    """
    memo: dict = {}
    spent = [0]

    def charge(n: int):
        spent[0] += n
        if spent[0] > node_limit:
            raise TreeSizeExceeded(
                f"lottery tree exceeded {node_limit} nodes", nodes=spent[0]
            )

    def visit(prices, rationing) -> _NodeValue:
        chain = []
        while True:
            key = (prices, rationing)
            chain.append(key)
            hit = memo.get(key)
            if hit is not None:
                charge(hit.nodes)
                value = hit
                break
            charge(1)

            sold = sold_matching_from_rationing(rationing, economy.n_items)
            unsold = [i for i in economy.buyers if not sold.covers_buyer(i)]
            demands = {i: demand_set(economy, prices, rationing, i) for i in unsold}
            situation = DemandSituation(demands)
            matched = max_matching(situation)
            if len(matched) == len(situation.demanders()):
                profits = tuple(
                    Fraction(indirect_utility(economy, prices, rationing, i))
                    for i in economy.buyers
                )
                value = _NodeValue(
                    profits, tuple(Fraction(p) for p in prices), 1, 1, Fraction(1)
                )
                break

            x_min = mods(situation, matched)
            xbar = [a for a in sorted(x_min) if prices[a] == economy.upper_bounds[a]]
            if not xbar:
                prices = tuple(
                    p + 1 if a in x_min else p for a, p in enumerate(prices)
                )
                continue

            item = xbar[0]
            entrants = sorted(
                i for i in unsold if item in demands[i] and demands[i] <= x_min
            )
            k = len(entrants)
            prof = [Fraction(0)] * economy.n_buyers
            prix = [Fraction(0)] * economy.n_items
            nodes, leaves, mass = 1, 0, Fraction(0)
            for winner in entrants:
                child = visit(prices, record_sale(rationing, winner, item))
                for idx, x in enumerate(child.profits):
                    prof[idx] += x
                for idx, x in enumerate(child.prices):
                    prix[idx] += x
                nodes += child.nodes
                leaves += child.leaves
                mass += child.mass / k
            value = _NodeValue(
                tuple(x / k for x in prof),
                tuple(x / k for x in prix),
                nodes,
                leaves,
                mass,
            )
            break

        # Price-raise chains were walked iteratively; memoise every node
        # on the way back out, each one node bigger than its successor.
        for key in reversed(chain):
            memo[key] = value
            value = replace(value, nodes=value.nodes + 1)
        return memo[chain[0]]

    root = AllocationSituation.root(economy)
    result = visit(root.prices, root.rationing)
    if result.mass != 1:
        raise RuntimeError("leaf probabilities do not sum to one")  # unreachable
    return ExpectationReport(
        expected_profit={i: result.profits[i - 1] for i in economy.buyers},
        expected_price={a: result.prices[a] for a in economy.items},
        tree_stats=TreeStats(result.nodes, result.leaves, result.mass),
    )


@dataclass(frozen=True)
class HistoryLeaf:
    """One complete run: its probability and terminal tuple.

    ``winners`` is the lottery outcome sequence; replaying the mechanism
    with it scripted reproduces this history exactly.
    """

    probability: Fraction
    prices: tuple[int, ...]
    rationing: RationingSystem
    allocation: Allocation
    winners: tuple[int, ...]


def enumerate_histories(
    economy: Economy, max_leaves: Optional[int] = None
) -> tuple[HistoryLeaf, ...]:
    """Every terminal (prices, rationing, allocation) the mechanism can reach.

    Drives the actual mechanism engine, forking the state at each
    lottery; probabilities multiply ``1/k`` along the way and sum to one.
    """
    leaves: list[HistoryLeaf] = []

    def walk(state: MechanismState, probability: Fraction, winners: tuple[int, ...]):
        while True:
            state = refresh_demands(economy, state)
            x_min, xbar = gate(economy, state)
            if x_min is None:
                _, allocation = complete_run(economy, state)
                leaves.append(
                    HistoryLeaf(probability, state.prices, state.rationing, allocation, winners)
                )
                if max_leaves is not None and len(leaves) > max_leaves:
                    raise TreeSizeExceeded(
                        f"history enumeration exceeded {max_leaves} leaves",
                        leaves=len(leaves),
                    )
                return
            if not xbar:
                state = price_increase_step(economy, state, x_min)
                continue
            item = xbar[0]
            entrants = lottery_entrants(state, item, x_min)
            share = probability / len(entrants)
            for winner in entrants:
                walk(apply_sale(economy, state, item, winner), share, winners + (winner,))
            return

    walk(initial_state(economy), Fraction(1), ())
    return tuple(leaves)


def aggregate_histories(
    economy: Economy, leaves
) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
    """Probability-weighted profits and prices from an exhaustive leaf list."""
    profits = {i: Fraction(0) for i in economy.buyers}
    prices = {a: Fraction(0) for a in economy.items}
    for leaf in leaves:
        for i in economy.buyers:
            item = leaf.allocation.item_of(i)
            profits[i] += leaf.probability * (economy.value(i, item) - leaf.prices[item])
        for a in economy.items:
            prices[a] += leaf.probability * leaf.prices[a]
    return profits, prices
