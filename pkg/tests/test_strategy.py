import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from betrun.strategy import (
    BudgetTooSmall,
    InfeasibleStrategy,
    Schedule,
    Strategy,
    StrategyError,
    catalog,
    format_percent,
    luby,
    luby_prefix_sum,
    parse_percent,
    resolve_schedule,
)
from oracles import luby_recursive


def test_luby_prefix_of_sequence():
    assert [luby(i) for i in range(1, 16)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


@pytest.mark.parametrize("k", range(1, 21))
def test_luby_block_ends(k):
    assert luby(2**k - 1) == 2 ** (k - 1)


def test_luby_matches_recurrence():
    for i in range(1, 5000):
        assert luby(i) == luby_recursive(i)


def test_luby_self_similarity():
    for k in range(2, 18):
        lo, hi = 2 ** (k - 1), 2**k - 1
        for i in range(lo, min(hi, 100_001)):
            assert luby(i) == luby(i - 2 ** (k - 1) + 1)


def test_luby_rejects_zero():
    with pytest.raises(ValueError):
        luby(0)


@given(st.integers(1, 3000))
def test_prefix_sum_matches_direct_sum(k):
    assert luby_prefix_sum(k) == sum(luby(i) for i in range(1, k + 1))


def test_prefix_sums_of_catalog_lengths():
    assert luby_prefix_sum(4) == 5
    assert luby_prefix_sum(10) == 16
    assert luby_prefix_sum(15) == 32
    # the recurrence gives 94 for forty terms, not 96
    assert luby_prefix_sum(40) == 94
    assert luby_prefix_sum(40) != 96


@pytest.mark.parametrize("text,value", [
    ("100", Fraction(100)), ("2.5", Fraction(5, 2)), ("0.25", Fraction(1, 4)),
    ("0.1", Fraction(1, 10)), ("0.40", Fraction(2, 5)),
])
def test_parse_percent(text, value):
    assert parse_percent(text) == value


@pytest.mark.parametrize("bad", ["", "1e3", "-1", "1/4", ".5", "abc", "1."])
def test_parse_percent_rejects(bad):
    with pytest.raises(StrategyError):
        parse_percent(bad)


@given(st.integers(1, 10**6), st.integers(0, 6))
def test_percent_round_trip(num, digits):
    x = Fraction(num, 10**digits)
    assert parse_percent(format_percent(x)) == x


def test_format_percent_rejects_repeating():
    with pytest.raises(StrategyError):
        format_percent(Fraction(1, 3))


def test_strategy_parse_and_str():
    s = Strategy.parse("restarts:40:0.25")
    assert (s.variant, s.k, s.x) == ("fixed", 40, Fraction(1, 4))
    assert str(s) == "restarts:40:0.25"
    assert str(Strategy.parse("luby:10:1")) == "luby:10:1"


@pytest.mark.parametrize("bad", ["restarts:4", "restart:4:1", "restarts:x:1", "luby:0:1",
                                 "restarts:4:0", "restarts:4:-1"])
def test_strategy_parse_rejects(bad):
    with pytest.raises(StrategyError):
        Strategy.parse(bad)


def test_infeasible_strategies_rejected():
    with pytest.raises(InfeasibleStrategy):
        Strategy.parse("restarts:200:1")
    with pytest.raises(InfeasibleStrategy):
        Strategy.parse("luby:40:1.1")  # 94 units * 1.1% > 100%
    Strategy.parse("restarts:40:2.5")  # exactly 100% is fine


def test_catalog_order_and_size():
    names = list(catalog())
    assert len(names) == 14
    assert names[0] == "restarts:1:100"
    assert names[-3:] == ["luby:4:1", "luby:10:1", "luby:40:1"]
    assert all(str(s) == n for n, s in catalog().items())


def test_schedule_examples():
    s = resolve_schedule(Strategy.parse("restarts:4:10"), 1000)
    assert s.phase1 == (100, 100, 100, 100) and s.phase2 == 600
    s = resolve_schedule(Strategy.parse("luby:4:1"), 1000)
    assert s.phase1 == (10, 10, 20, 10) and s.phase2 == 950
    s = resolve_schedule(Strategy.parse("restarts:1:100"), 777)
    assert s.phase1 == (777,) and s.phase2 == 0


def test_schedule_truncation_goes_to_phase2():
    s = resolve_schedule(Strategy.parse("restarts:3:33.3"), 1001)
    assert s.phase1 == (333, 333, 333) and s.phase2 == 2


def test_budget_too_small():
    with pytest.raises(BudgetTooSmall):
        resolve_schedule(Strategy.parse("restarts:40:0.1"), 999)
    with pytest.raises(BudgetTooSmall):
        resolve_schedule(Strategy.parse("restarts:1:100"), 0)


def test_schedule_rejects_nonconserving():
    with pytest.raises(StrategyError):
        Schedule((1, 2), 3, 7)


def _random_strategy(rng):
    while True:
        variant = rng.choice(["fixed", "luby"])
        k = rng.randint(1, 60)
        x = Fraction(rng.randint(1, 10000), rng.choice([1, 10, 100, 1000]))
        try:
            return Strategy(variant, k, x)
        except InfeasibleStrategy:
            continue


def test_schedule_conservation_random():
    rng = random.Random(12345)
    checked = 0
    while checked < 10_000:
        s = _random_strategy(rng)
        total = rng.randint(1, 10**9)
        try:
            sch = resolve_schedule(s, total)
        except BudgetTooSmall:
            continue
        assert sum(sch.phase1) + sch.phase2 == total
        assert len(sch.phase1) == s.k
        if s.variant == "fixed":
            assert len(set(sch.phase1)) == 1
        else:
            unit = sch.phase1[0]
            assert list(sch.phase1) == [unit * luby(i) for i in range(1, s.k + 1)]
        checked += 1


@given(st.sampled_from(list(catalog().values())), st.integers(1000, 10**12))
def test_catalog_schedules_conserve(s, total):
    sch = resolve_schedule(s, total)
    assert sum(sch.phase1) + sch.phase2 == total
    assert sch.phase2 >= 0
