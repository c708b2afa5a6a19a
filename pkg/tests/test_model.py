import json

import pytest
from hypothesis import given

from rigidmarket import (
    DUMMY,
    EconomyValidationError,
    RationingSystem,
    demand_set,
    demand_situation,
    economy_from_dict,
    indirect_utility,
    is_admissible,
    load_economy,
    validate_economy,
)

from strategies import make_economy, markets


def argmax_scan(economy, prices, rationing, buyer):
    """Independent oracle: exhaustive scan for the best-net-benefit set."""
    nets = {
        a: economy.value(buyer, a) - prices[a]
        for a in economy.items
        if rationing.is_allowed(buyer, a)
    }
    best = max(nets.values())
    return best, frozenset(a for a, v in nets.items() if v == best)


def test_running_example_is_valid(market):
    assert market.n_buyers == 5
    assert market.item_names == ("o", "a", "b", "c", "d")
    assert market.bound_spread() == 1 + 2 + 3 + 2
    assert is_admissible(market, (0, 5, 4, 4, 7))
    assert not is_admissible(market, (0, 5, 4, 5, 7))
    assert not is_admissible(market, (1, 5, 4, 4, 7))


def test_dummy_valuation_rejected():
    with pytest.raises(EconomyValidationError) as exc:
        validate_economy(("o", "a"), [(1, 3)], (0, 1), (0, 2))
    assert any("NonZeroDummyValuation" in e for e in exc.value.errors)


def test_crossed_bounds_rejected():
    with pytest.raises(EconomyValidationError) as exc:
        validate_economy(("o", "a"), [(0, 3)], (0, 7), (0, 6))
    assert any("BoundsCrossed" in e for e in exc.value.errors)


def test_all_violations_reported_at_once():
    with pytest.raises(EconomyValidationError) as exc:
        validate_economy(("o", "a"), [(2, -3)], (1, 7), (1, 6))
    codes = "\n".join(exc.value.errors)
    for expected in ("NonZeroDummyValuation", "NegativeEntry", "NonZeroDummyBounds", "BoundsCrossed"):
        assert expected in codes


def test_rationing_must_allow_dummy():
    with pytest.raises(ValueError):
        RationingSystem((frozenset({1}),))
    with pytest.raises(ValueError):
        RationingSystem.full(2, 3).forbid(1, DUMMY)


def test_indirect_utility_running_example(market):
    prices = (0, 5, 4, 4, 7)
    rationing = RationingSystem.full(5, 5).forbid(3, 3).forbid(1, 3)
    values = [indirect_utility(market, prices, rationing, i) for i in market.buyers]
    assert values == [0, 4, 1, 4, 3]


def test_demand_sets_running_example(market):
    prices = (0, 5, 4, 4, 7)
    rationing = RationingSystem.full(5, 5).forbid(3, 3).forbid(1, 3)
    names = market.item_names
    demands = {
        i: {names[a] for a in demand_set(market, prices, rationing, i)}
        for i in market.buyers
    }
    assert demands == {
        1: {"o", "d"},
        2: {"c"},
        3: {"b"},
        4: {"a"},
        5: {"d"},
    }


def test_tie_demand_at_mid_prices(market):
    # at (0,5,4,3,5) with no rationing, buyer 1 is torn between c and d
    prices = (0, 5, 4, 3, 5)
    rationing = RationingSystem.full(5, 5)
    assert demand_set(market, prices, rationing, 1) == frozenset({3, 4})
    situation = demand_situation(market, prices, rationing)
    assert situation.demands[2] == frozenset({3})
    assert situation.demands[3] == frozenset({3})
    assert situation.demands[4] == frozenset({1})
    assert situation.demands[5] == frozenset({4})


def test_indifferent_buyer_keeps_only_dummy():
    economy = make_economy([[0, 0]], [2, 3], [4, 5])
    rationing = RationingSystem.full(1, 3)
    assert indirect_utility(economy, economy.lower_bounds, rationing, 1) == 0
    assert demand_set(economy, economy.lower_bounds, rationing, 1) == frozenset({DUMMY})
    situation = demand_situation(economy, economy.lower_bounds, rationing)
    assert situation.demanders() == ()


@given(markets())
def test_demand_matches_exhaustive_scan(case):
    economy, prices, rationing = case
    for i in economy.buyers:
        best, argmax = argmax_scan(economy, prices, rationing, i)
        assert indirect_utility(economy, prices, rationing, i) == best
        assert demand_set(economy, prices, rationing, i) == argmax


@given(markets())
def test_dummy_demanded_iff_zero_utility(case):
    economy, prices, rationing = case
    for i in economy.buyers:
        in_demand = DUMMY in demand_set(economy, prices, rationing, i)
        assert in_demand == (indirect_utility(economy, prices, rationing, i) == 0)


@given(markets())
def test_forbidding_nondemanded_item_changes_nothing(case):
    economy, prices, rationing = case
    for i in economy.buyers:
        demand = demand_set(economy, prices, rationing, i)
        spare = [
            a
            for a in economy.real_items
            if a not in demand and rationing.is_allowed(i, a)
        ]
        if spare:
            shrunk = rationing.forbid(i, spare[0])
            assert demand_set(economy, prices, shrunk, i) == demand


@given(markets())
def test_forbidding_all_maximizers_changes_demand(case):
    economy, prices, rationing = case
    for i in economy.buyers:
        demand = demand_set(economy, prices, rationing, i)
        real = demand - {DUMMY}
        if not real:
            continue
        shrunk = rationing.forbid_many(i, real)
        if DUMMY in demand:
            assert demand_set(economy, prices, shrunk, i) != demand
        else:
            assert not (demand_set(economy, prices, shrunk, i) & demand)


@given(markets())
def test_utility_never_rises_with_prices(case):
    economy, prices, rationing = case
    for a in economy.real_items:
        if prices[a] >= economy.upper_bounds[a]:
            continue
        bumped = tuple(p + 1 if b == a else p for b, p in enumerate(prices))
        for i in economy.buyers:
            assert indirect_utility(economy, bumped, rationing, i) <= indirect_utility(
                economy, prices, rationing, i
            )


def test_json_schema_roundtrip(tmp_path, market, data_dir):
    loaded = load_economy(data_dir / "example_market.json")
    assert loaded == market

    bad = {
        "items": ["a", "o"],
        "buyers": 1,
        "valuations": [[1, 2]],
        "lower_bounds": [0, 0],
        "upper_bounds": [1, 1],
    }
    with pytest.raises(EconomyValidationError):
        economy_from_dict(bad)

    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"items": ["a"], "buyers": 2, "valuations": [[1]]}))
    with pytest.raises(EconomyValidationError):
        load_economy(path)
