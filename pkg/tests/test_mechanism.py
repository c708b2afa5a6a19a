import pytest
from hypothesis import given, settings

from rigidmarket import (
    DUMMY,
    Matching,
    MechanismState,
    NoEntrants,
    RationingSystem,
    ScriptError,
    ScriptedLottery,
    SeededLottery,
    UpperBoundViolation,
    check_cwe,
    initial_state,
    lottery_step,
    price_increase_step,
    refresh_demands,
    rm,
    run_mapr,
)
from rigidmarket.mechanism import gate, lottery_entrants

from strategies import economies, make_economy


def settled(economy, state):
    return refresh_demands(economy, state)


def test_initial_round_demands(market):
    state = settled(market, initial_state(market))
    assert state.prices == (0, 5, 4, 1, 5)
    assert state.demands == {
        1: frozenset({3}),
        2: frozenset({3}),
        3: frozenset({3}),
        4: frozenset({1}),
        5: frozenset({4}),
    }
    x_min, xbar = gate(market, state)
    assert x_min == frozenset({3})
    assert xbar == ()


def test_price_increase_step(market):
    state = settled(market, initial_state(market))
    bumped = price_increase_step(market, state, frozenset({3}))
    assert bumped.prices == (0, 5, 4, 2, 5)
    assert bumped.t == 1
    assert bumped.sold == state.sold

    capped = MechanismState(
        t=3,
        prices=(0, 5, 4, 4, 5),
        sold=Matching(),
        rationing=state.rationing,
        active=state.active,
        demands=state.demands,
    )
    with pytest.raises(UpperBoundViolation):
        price_increase_step(market, capped, frozenset({3}))


def test_lottery_step_entrants_and_determinism(market):
    state = initial_state(market)
    for _ in range(3):
        state = settled(market, state)
        x_min, _ = gate(market, state)
        state = price_increase_step(market, state, x_min)
    state = settled(market, state)
    x_min, xbar = gate(market, state)
    assert x_min == frozenset({3}) and xbar == (3,)
    assert lottery_entrants(state, 3, x_min) == (2, 3)

    next_state, event = lottery_step(market, state, 3, x_min, ScriptedLottery([2]))
    assert event.entrants == (2, 3) and event.winner == 2 and event.round == 3
    assert next_state.sold.pairs() == ((2, 3),)
    assert next_state.prices == state.prices
    assert 2 not in next_state.active

    # the same seed always picks the same winner
    picks = {lottery_step(market, state, 3, x_min, SeededLottery(9))[1].winner for _ in range(5)}
    assert len(picks) == 1

    lone = MechanismState(
        t=0,
        prices=state.prices,
        sold=state.sold,
        rationing=state.rationing,
        active=state.active,
        demands={2: frozenset({3})},
    )
    _, event = lottery_step(market, lone, 3, frozenset({3}), SeededLottery(1))
    assert event.winner == 2  # single entrant wins with certainty

    empty = MechanismState(
        t=0,
        prices=state.prices,
        sold=state.sold,
        rationing=state.rationing,
        active=state.active,
        demands={4: frozenset({1})},
    )
    with pytest.raises(NoEntrants):
        lottery_step(market, empty, 3, frozenset({3}), SeededLottery(1))


def test_refresh_strikes_sold_items(market):
    # after c is sold to buyer 2, buyer 3 must re-report and land on d
    state = MechanismState(
        t=4,
        prices=(0, 5, 4, 4, 5),
        sold=Matching([(2, 3)]),
        rationing=RationingSystem.full(5, 5),
        active=frozenset({1, 3, 4, 5}),
        demands={},
    )
    state = refresh_demands(market, state)
    assert state.rationing.forbidden(3, 5) == frozenset({3})
    assert state.demands[3] == frozenset({4})
    assert state.demands[1] == frozenset({4})


def test_refresh_without_sales_is_stationary(market):
    state = settled(market, initial_state(market))
    again = refresh_demands(market, state)
    assert again.demands == state.demands
    assert again.rationing == state.rationing


def test_refresh_chains_through_two_sold_items():
    economy = make_economy([[9, 8, 1], [9, 0, 0], [0, 8, 0]], [1, 1, 1], [2, 2, 2])
    state = MechanismState(
        t=1,
        prices=(0, 1, 1, 1),
        sold=Matching([(2, 1), (3, 2)]),
        rationing=RationingSystem.full(3, 4),
        active=frozenset({1}),
        demands={},
    )
    state = refresh_demands(economy, state)
    # first report hits sold a, the re-report hits sold b, then c and o tie
    assert state.rationing.forbidden(1, 4) == frozenset({1, 2})
    assert state.demands[1] == frozenset({0, 3})


def test_golden_run_reaches_published_outcome(market):
    outcome = run_mapr(market, ScriptedLottery([2]))
    assert outcome.prices == (0, 5, 4, 4, 7)
    assert outcome.allocation.assignment == (0, 3, 2, 1, 4)
    assert [row.label for row in outcome.trace.rows] == ["0", "1", "2", "3", "4.1", "5.1", "6.1"]
    assert outcome.price_rounds == 5 and outcome.lottery_rounds == 1

    other = run_mapr(market, ScriptedLottery([3]))
    assert other.prices == (0, 5, 4, 4, 7)
    assert other.allocation.assignment == (0, 2, 3, 1, 4)
    assert [row.label for row in other.trace.rows] == ["0", "1", "2", "3", "4.2", "5.2", "6.2"]


def test_no_contention_settles_at_opening_prices():
    economy = make_economy([[9, 1], [1, 9]], [2, 3], [5, 6])
    outcome = run_mapr(economy, SeededLottery(0))
    assert outcome.prices == (0, 2, 3)
    assert outcome.allocation.assignment == (1, 2)
    assert outcome.price_rounds == 0 and outcome.lottery_rounds == 0
    assert len(outcome.trace.rows) == 1


def test_script_errors():
    economy = make_economy([[5], [5]], [1], [3])
    with pytest.raises(ScriptError):
        run_mapr(economy, ScriptedLottery([]))
    with pytest.raises(ScriptError):
        run_mapr(economy, ScriptedLottery([7]))
    with pytest.raises(ScriptError):
        run_mapr(economy, ScriptedLottery([1, 1]))


def test_completion_sells_marked_up_items(market):
    # terminal state of the first golden branch, rebuilt by hand
    rationing = RationingSystem.full(5, 5).forbid(1, 3).forbid(3, 3)
    demands = {
        1: frozenset({0, 4}),
        3: frozenset({2}),
        4: frozenset({1}),
        5: frozenset({4}),
    }
    completion = rm(demands, Matching([(2, 3)]), (0, 5, 4, 4, 7), (0, 5, 4, 1, 5))
    assert completion == Matching([(3, 2), (4, 1), (5, 4)])
    # d is priced above its floor, so it may not stay unsold
    assert completion.covers_item(4)


def test_completion_contract_clauses():
    # nobody demands marked-up b except a buyer also happy with the dummy
    demands = {1: frozenset({0, 2}), 2: frozenset({1})}
    completion = rm(demands, Matching(), (0, 1, 5, 0), (0, 1, 2, 0))
    assert completion.covers_item(2)
    assert completion == Matching([(1, 2), (2, 1)])

    # vacuous third clause: nothing marked up, plain maximum matching
    completion = rm({1: frozenset({1})}, Matching(), (0, 1, 2, 0), (0, 1, 2, 0))
    assert completion == Matching([(1, 1)])


def test_replay_reproduces_trace_bit_for_bit(market):
    first = run_mapr(market, SeededLottery(5))
    second = run_mapr(market, ScriptedLottery(list(first.winners)))
    assert second.trace == first.trace
    assert second.allocation == first.allocation
    assert second.prices == first.prices


@settings(max_examples=50)
@given(economies())
def test_runs_are_monotone_admissible_and_clean(economy):
    outcome = run_mapr(economy, SeededLottery(3))
    previous = None
    for row in outcome.trace.rows:
        for a in economy.items:
            assert economy.lower_bounds[a] <= row.prices[a] <= economy.upper_bounds[a]
            if previous is not None:
                assert row.prices[a] >= previous[a]
        previous = row.prices
        sold = set(row.sold_items)
        for i in economy.buyers:
            if row.demands[i - 1] is not None:
                assert not sold & set(row.demands[i - 1])
    assert outcome.price_rounds <= economy.bound_spread()
    assert outcome.lottery_rounds <= economy.n_items - 1
    assert check_cwe(economy, outcome.prices, outcome.rationing, outcome.allocation).ok


@settings(max_examples=50)
@given(economies())
def test_completion_contracts_on_random_terminals(economy):
    state = initial_state(economy)
    policy = SeededLottery(11)
    for _ in range(economy.bound_spread() + economy.n_items + 1):
        state = refresh_demands(economy, state)
        x_min, xbar = gate(economy, state)
        if x_min is None:
            break
        if not xbar:
            state = price_increase_step(economy, state, x_min)
        else:
            state, _ = lottery_step(economy, state, xbar[0], x_min, policy)
    demands = {i: state.demands[i] for i in state.unsold_buyers(economy)}
    completion = rm(demands, state.sold, state.prices, economy.lower_bounds)
    # disjointness from the sold matching
    assert not completion.matched_buyers() & state.sold.matched_buyers()
    assert not completion.matched_items() & state.sold.matched_items()
    # every marked-up unsold item is taken
    for a in economy.real_items:
        if not state.sold.covers_item(a) and state.prices[a] > economy.lower_bounds[a]:
            assert completion.covers_item(a)
    # the union serves every buyer something she demands
    for i, d in demands.items():
        item = completion.buyer_to_item.get(i, DUMMY)
        if item == DUMMY:
            assert DUMMY in d
        else:
            assert item in d


def test_json_rows_carry_all_fields(market):
    outcome = run_mapr(market, ScriptedLottery([2]))
    lines = outcome.trace.to_json_lines()
    assert len(lines) == 8
    import json

    first = json.loads(lines[0])
    assert set(first) == {
        "t",
        "prices",
        "x_min",
        "u_sets",
        "sold_buyers",
        "demands",
        "sold_items",
        "lottery",
    }
    lottery_row = json.loads(lines[3])
    assert lottery_row["lottery"] == {"item": "c", "entrants": [2, 3], "winner": 2}
    final = json.loads(lines[-1])
    assert final["final"]["allocation"] == ["o", "c", "b", "a", "d"]
