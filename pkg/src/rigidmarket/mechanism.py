"""The ascending allocation mechanism with price rigidities and rationing.

One run proceeds in rounds.  Each round the seller announces current
prices, the still-active buyers report their demand sets, and buyers
whose demand touches an already-sold item strike it from their
permission set and report again until no reported demand touches a sold
item.  The seller then looks for a minimal over-demanded set among the
unsold buyers' demands:

* none - the run terminates; the completion step (:func:`rm`) matches
  the remaining buyers, making sure every unsold item priced above its
  lower bound finds a taker;
* some, with every member priced below its cap - those prices rise by
  one unit;
* some, with a member at its price cap - the eligible buyers draw lots
  for it, the winner takes it at the cap and leaves the market.

Prices only ever rise, items once sold never re-enter demand, and the
terminal (prices, rationing, allocation) tuple is a constrained
Walrasian equilibrium.

Lotteries are the only nondeterminism.  They are injected through small
policy objects so a run can be randomised (seeded), replayed exactly
(scripted winner list), or systematically explored (the expectation
module forks the state at each lottery instead).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Protocol, Sequence

from .errors import NoEntrants, ScriptError, UpperBoundViolation
from .matching import Matching, matching_to_allocation, max_matching, maximum_matching, build_graph
from .model import (
    DUMMY,
    Allocation,
    DemandSituation,
    Economy,
    RationingSystem,
    demand_set,
)
from .overdemand import mods


@dataclass(frozen=True)
class LotteryEvent:
    round: int
    item: int
    entrants: tuple[int, ...]
    winner: int


class LotteryPolicy(Protocol):
    def choose(self, round_t: int, item: int, entrants: Sequence[int]) -> int: ...


class SeededLottery:
    """Uniform fair draw from a seeded Mersenne Twister (`random.Random`).

    The generator is part of the interface: equal seeds give identical
    runs on any platform.
    """

    def __init__(self, seed: int = 0):
        self._rng = random.Random(seed)

    def choose(self, round_t, item, entrants):
        return self._rng.choice(list(entrants))

    def finish(self):
        pass


class ScriptedLottery:
    """Plays back a fixed winner list; used for replay and golden runs."""

    def __init__(self, winners: Sequence[int]):
        self._winners = list(winners)
        self._next = 0

    def choose(self, round_t, item, entrants):
        if self._next >= len(self._winners):
            raise ScriptError(f"no scripted winner left for the draw at round {round_t}")
        winner = self._winners[self._next]
        self._next += 1
        if winner not in entrants:
            raise ScriptError(
                f"scripted winner {winner} is not an entrant of the draw on item {item}"
            )
        return winner

    def finish(self):
        if self._next != len(self._winners):
            raise ScriptError(
                f"{len(self._winners) - self._next} scripted winner(s) were never used"
            )


@dataclass(frozen=True)
class MechanismState:
    """Snapshot between rounds: everything the seller and buyers remember."""

    t: int
    prices: tuple[int, ...]
    sold: Matching
    rationing: RationingSystem
    active: frozenset[int]
    demands: Mapping[int, frozenset[int]]

    def unsold_buyers(self, economy: Economy) -> tuple[int, ...]:
        return tuple(i for i in economy.buyers if not self.sold.covers_buyer(i))


def initial_state(economy: Economy) -> MechanismState:
    return MechanismState(
        t=0,
        prices=economy.lower_bounds,
        sold=Matching(),
        rationing=RationingSystem.full(economy.n_buyers, economy.n_items),
        active=frozenset(economy.buyers),
        demands={},
    )


def refresh_demands(economy: Economy, state: MechanismState) -> MechanismState:
    """Collect demand reports and strike sold items until none is demanded.

    Active buyers report at current prices; any of them demanding a sold
    item loses permission for exactly those items and reports again.
    Settles within one pass per sold item.
    """
    demands = dict(state.demands)
    rationing = state.rationing
    reporting = sorted(state.active)
    for i in reporting:
        demands[i] = demand_set(economy, state.prices, rationing, i)
    sold_items = state.sold.matched_items()

    for _ in range(economy.n_items + 1):
        confronted = [i for i in reporting if demands[i] & sold_items]
        if not confronted:
            break
        for i in confronted:
            rationing = rationing.forbid_many(i, demands[i] & sold_items)
            demands[i] = demand_set(economy, state.prices, rationing, i)
        reporting = confronted
    else:
        raise RuntimeError("demand refresh failed to settle")  # unreachable

    return replace(state, rationing=rationing, demands=demands)


def gate(economy: Economy, state: MechanismState):
    """Post-refresh seller computation: minimal over-demanded set, if any.

    Returns (x_min, xbar); x_min is None when every unsold buyer that
    insists on real items can be matched, i.e. the run may settle.
    """
    unsold = state.unsold_buyers(economy)
    situation = DemandSituation({i: state.demands[i] for i in unsold})
    matched = max_matching(situation)
    if len(matched) == len(situation.demanders()):
        return None, ()
    x_min = mods(situation, matched)
    xbar = tuple(a for a in sorted(x_min) if state.prices[a] == economy.upper_bounds[a])
    return x_min, xbar


def price_increase_step(
    economy: Economy, state: MechanismState, x_min: frozenset[int]
) -> MechanismState:
    """Raise every price in x_min by one unit and open the next round."""
    if not x_min:
        raise ValueError("price increase needs a nonempty item set")
    for a in x_min:
        if state.prices[a] >= economy.upper_bounds[a]:
            raise UpperBoundViolation(f"item {a} is already at its upper bound")
    prices = tuple(
        p + 1 if a in x_min else p for a, p in enumerate(state.prices)
    )
    return replace(
        state,
        t=state.t + 1,
        prices=prices,
        active=frozenset(state.unsold_buyers(economy)),
    )


def lottery_entrants(state: MechanismState, item: int, x_min: frozenset[int]) -> tuple[int, ...]:
    """Buyers eligible to draw: they demand the item and nothing outside x_min."""
    return tuple(
        sorted(
            i
            for i, d in state.demands.items()
            if not state.sold.covers_buyer(i) and item in d and d <= x_min
        )
    )


def apply_sale(
    economy: Economy, state: MechanismState, item: int, winner: int
) -> MechanismState:
    sold = Matching(state.sold.pairs() + ((winner, item),))
    active = frozenset(i for i in state.unsold_buyers(economy) if i != winner)
    return replace(state, t=state.t + 1, sold=sold, active=active)


def lottery_step(
    economy: Economy,
    state: MechanismState,
    item: int,
    x_min: frozenset[int],
    policy: LotteryPolicy,
) -> tuple[MechanismState, LotteryEvent]:
    """Draw lots for an item at its price cap; the winner buys and leaves.

    Losers are not rationed here: they discover the sale next round and
    strike the item then, exactly as with any other sold item.
    """
    entrants = lottery_entrants(state, item, x_min)
    if not entrants:
        raise NoEntrants(f"no eligible buyers for item {item}")
    winner = policy.choose(state.t, item, entrants)
    event = LotteryEvent(round=state.t, item=item, entrants=entrants, winner=winner)
    return apply_sale(economy, state, item, winner), event


def rm(
    demands: Mapping[int, frozenset[int]],
    sold: Matching,
    prices: Sequence[int],
    lower_bounds: Sequence[int],
) -> Matching:
    """Terminal completion: match remaining buyers, selling every marked-up item.

    ``demands`` covers the buyers that have not bought; the result is
    disjoint from ``sold``.  First the unsold items priced above their
    lower bound are matched on the demands restricted to them, pinning a
    taker for each; that matching is then re-grown to maximum on the full
    demand graph of the remaining buyers, and any pinned edge whose item
    would otherwise be dropped (its taker only liked it alongside the
    dummy) is added back.
    """
    n_items = len(prices)
    marked_up = frozenset(
        a
        for a in range(1, n_items)
        if not sold.covers_item(a) and prices[a] > lower_bounds[a]
    )
    touching = {i: d & marked_up for i, d in demands.items() if d & marked_up}
    pinned = max_matching(DemandSituation(touching))

    graph = build_graph(DemandSituation(dict(demands)))
    seed_pairs = [
        (i, a) for i, a in pinned.pairs() if i in graph.adj and a in graph.adj[i]
    ]
    grown = maximum_matching(graph, Matching(seed_pairs))

    extra = [
        (i, a)
        for i, a in pinned.pairs()
        if not grown.covers_buyer(i) and not grown.covers_item(a)
    ]
    return Matching(grown.pairs() + tuple(extra))


@dataclass(frozen=True)
class TraceRow:
    """One round as the seller saw it, after demand reports settled."""

    label: str
    t: int
    prices: tuple[int, ...]
    x_min: tuple[int, ...]
    u_sets: tuple[tuple[int, ...], ...]
    sold_buyers: tuple[int, ...]
    demands: tuple[Optional[tuple[int, ...]], ...]
    sold_items: tuple[int, ...]
    lottery: Optional[LotteryEvent] = None


@dataclass(frozen=True)
class Trace:
    item_names: tuple[str, ...]
    n_buyers: int
    rows: tuple[TraceRow, ...]
    events: tuple[LotteryEvent, ...]
    final_prices: tuple[int, ...]
    final_rationing_zeros: tuple[tuple[int, int], ...]
    final_allocation: tuple[int, ...]

    def _names(self, items) -> list[str]:
        return [self.item_names[a] for a in sorted(items)]

    def row_dict(self, row: TraceRow) -> dict:
        lottery = None
        if row.lottery is not None:
            lottery = {
                "item": self.item_names[row.lottery.item],
                "entrants": list(row.lottery.entrants),
                "winner": row.lottery.winner,
            }
        return {
            "t": row.label,
            "prices": list(row.prices),
            "x_min": self._names(row.x_min),
            "u_sets": [self._names(u) for u in row.u_sets],
            "sold_buyers": list(row.sold_buyers),
            "demands": [None if d is None else self._names(d) for d in row.demands],
            "sold_items": self._names(row.sold_items),
            "lottery": lottery,
        }

    def final_dict(self) -> dict:
        return {
            "prices": list(self.final_prices[1:]),
            "rationing_zeros": [[i, self.item_names[a]] for i, a in self.final_rationing_zeros],
            "allocation": [self.item_names[a] for a in self.final_allocation],
        }

    def to_json_lines(self) -> list[str]:
        lines = [json.dumps(self.row_dict(row)) for row in self.rows]
        lines.append(json.dumps({"final": self.final_dict()}))
        return lines

    def render_table(self) -> str:
        def fmt(items) -> str:
            names = self._names(items)
            return "{" + ",".join(names) + "}" if names else "-"

        headers = (
            ["t", "p", "X_min"]
            + [f"U_{i}" for i in range(1, self.n_buyers + 1)]
            + ["N'"]
            + [f"D_{i}" for i in range(1, self.n_buyers + 1)]
            + ["X'"]
        )
        table = [headers]
        for row in self.rows:
            cells = [row.label, "(" + ",".join(str(p) for p in row.prices) + ")", fmt(row.x_min)]
            cells += [fmt(u) for u in row.u_sets]
            cells.append("{" + ",".join(str(i) for i in row.sold_buyers) + "}" if row.sold_buyers else "-")
            cells += ["" if d is None else fmt(d) for d in row.demands]
            cells.append(fmt(row.sold_items))
            table.append(cells)
        widths = [max(len(r[k]) for r in table) for k in range(len(headers))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in table]
        for row in self.rows:
            if row.lottery is not None:
                entrants = ",".join(str(i) for i in row.lottery.entrants)
                lines.append(
                    f"lottery at t={row.label}: item {self.item_names[row.lottery.item]}"
                    f" among {{{entrants}}} -> buyer {row.lottery.winner}"
                )
        alloc = ", ".join(
            f"{i}->{self.item_names[a]}" for i, a in enumerate(self.final_allocation, start=1)
        )
        lines.append("final prices: (" + ",".join(str(p) for p in self.final_prices) + ")")
        lines.append("final allocation: " + alloc)
        return "\n".join(lines)


@dataclass(frozen=True)
class MaprOutcome:
    prices: tuple[int, ...]
    rationing: RationingSystem
    allocation: Allocation
    matching: Matching
    trace: Trace
    price_rounds: int
    lottery_rounds: int

    @property
    def winners(self) -> tuple[int, ...]:
        """The lottery outcomes; feed to a ScriptedLottery to replay the run."""
        return tuple(e.winner for e in self.trace.events)


def _make_row(
    economy: Economy,
    state: MechanismState,
    label: str,
    x_min,
    lottery: Optional[LotteryEvent],
) -> TraceRow:
    sold_buyers = tuple(sorted(state.sold.matched_buyers()))
    demands = tuple(
        None
        if state.sold.covers_buyer(i)
        else tuple(sorted(state.demands.get(i, frozenset())))
        for i in economy.buyers
    )
    return TraceRow(
        label=label,
        t=state.t,
        prices=state.prices,
        x_min=tuple(sorted(x_min)) if x_min else (),
        u_sets=tuple(
            tuple(sorted(state.rationing.forbidden(i, economy.n_items)))
            for i in economy.buyers
        ),
        sold_buyers=sold_buyers,
        demands=demands,
        sold_items=tuple(sorted(state.sold.matched_items())),
        lottery=lottery,
    )


def complete_run(economy: Economy, state: MechanismState) -> tuple[Matching, Allocation]:
    """Terminal step: run the completion matching and assemble the allocation."""
    unsold = state.unsold_buyers(economy)
    remaining = {i: state.demands[i] for i in unsold}
    completion = rm(remaining, state.sold, state.prices, economy.lower_bounds)
    final = Matching(state.sold.pairs() + completion.pairs())
    for i in unsold:
        if DUMMY not in remaining[i] and not final.covers_buyer(i):
            raise RuntimeError(f"completion left demander {i} unserved")  # unreachable
    return final, matching_to_allocation(final, economy.n_buyers)


def run_mapr(economy: Economy, policy: Optional[LotteryPolicy] = None) -> MaprOutcome:
    """Run the mechanism to termination and record a full trace.

    ``policy`` resolves lottery draws (default: seed-0 randomness).
    Terminates within ``economy.bound_spread()`` price-increase rounds
    plus one lottery per real item; the result tuple satisfies all five
    equilibrium conditions.
    """
    if policy is None:
        policy = SeededLottery(0)
    state = initial_state(economy)
    rows: list[TraceRow] = []
    events: list[LotteryEvent] = []
    branch: list[str] = []
    price_rounds = 0

    max_rounds = economy.bound_spread() + economy.n_items + 1
    for _ in range(max_rounds):
        state = refresh_demands(economy, state)
        x_min, xbar = gate(economy, state)
        label = ".".join([str(state.t)] + branch)
        if x_min is None:
            rows.append(_make_row(economy, state, label, (), None))
            break
        if not xbar:
            rows.append(_make_row(economy, state, label, x_min, None))
            state = price_increase_step(economy, state, x_min)
            price_rounds += 1
            continue
        item = xbar[0]
        next_state, event = lottery_step(economy, state, item, x_min, policy)
        rows.append(_make_row(economy, state, label, x_min, event))
        events.append(event)
        branch.append(str(event.entrants.index(event.winner) + 1))
        state = next_state
    else:
        raise RuntimeError("mechanism exceeded its round bound")  # unreachable

    finish = getattr(policy, "finish", None)
    if finish is not None:
        finish()

    final_matching, allocation = complete_run(economy, state)
    trace = Trace(
        item_names=economy.item_names,
        n_buyers=economy.n_buyers,
        rows=tuple(rows),
        events=tuple(events),
        final_prices=state.prices,
        final_rationing_zeros=state.rationing.zeros(economy.n_items),
        final_allocation=allocation.assignment,
    )
    return MaprOutcome(
        prices=state.prices,
        rationing=state.rationing,
        allocation=allocation,
        matching=final_matching,
        trace=trace,
        price_rounds=price_rounds,
        lottery_rounds=len(events),
    )
