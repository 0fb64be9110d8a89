import io
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import naive_pool
from qskr.core import ChannelSpec, Grid, KeyPolicy, Link, rskr_per_link
from qskr.errors import EventExplosion, InconclusiveHorizon
from qskr.keypool import (
    SimConfig,
    SimResult,
    as_fraction,
    common_period,
    event_trace,
    simulate,
    threshold_check,
    underflow_bound,
    write_trace_csv,
)
from qskr.spectrum import C_BAND, Band

WIDE = Band(((1, 10_000_001),))


def flex_link(*policies):
    return Link(
        WIDE,
        tuple(ChannelSpec(f"ch{i}", 100, 50_000, p) for i, p in enumerate(policies)),
        Grid.FLEX,
    )


def test_exact_rate_never_underflows():
    result = simulate(SimConfig(flex_link(KeyPolicy(256, 1)), 256, 1000))
    assert result == SimResult(0.0, None, 0.0, 1000)


def test_empty_link_only_produces():
    result = simulate(SimConfig(Link(C_BAND), 100, 10))
    assert result == SimResult(0.0, None, 1000.0, 0)


def test_one_bit_short_underflows_at_first_refresh():
    result = simulate(SimConfig(flex_link(KeyPolicy(256, 1), KeyPolicy(256, 1)), 511, 1000))
    assert result.underflow_time_s == 1.0
    # deficit of 1 bit per second accumulates to the horizon
    assert result.min_pool_bits == -1000
    assert result.final_pool_bits == -1000
    assert result.events_processed == 2000


def test_initial_pool_postpones_underflow():
    link = flex_link(KeyPolicy(256, 1))
    result = simulate(SimConfig(link, 255, 100, initial_pool_bits=10))
    assert result.underflow_time_s == 11.0


def test_zero_rate_channel_never_fires():
    result = simulate(SimConfig(flex_link(KeyPolicy(256, 0)), 0, 50))
    assert result.events_processed == 0
    assert not result.underflow


def test_events_at_horizon_are_included():
    assert simulate(SimConfig(flex_link(KeyPolicy(8, Fraction(1, 3))), 0, 9)).events_processed == 3
    assert simulate(SimConfig(flex_link(KeyPolicy(8, 0.1)), 0, 10)).events_processed == 1


def test_event_cap():
    config = SimConfig(flex_link(KeyPolicy(256, 1000)), 256_000, 100, max_events=99_999)
    with pytest.raises(EventExplosion):
        simulate(config)
    assert simulate(SimConfig(config.link, 256_000, 100, max_events=100_000)).events_processed == 100_000


@pytest.mark.parametrize(
    "kwargs",
    [dict(skr_bps=-1, horizon_s=1), dict(skr_bps=1, horizon_s=0), dict(skr_bps=1, horizon_s=1, initial_pool_bits=-1)],
)
def test_sim_config_validation(kwargs):
    with pytest.raises(ValueError):
        SimConfig(Link(C_BAND), **kwargs)


def test_ties_break_by_channel_id():
    link = Link(
        WIDE,
        (ChannelSpec("b", 100, 50_000, KeyPolicy(100, 1)), ChannelSpec("a", 100, 50_000, KeyPolicy(50, 1))),
        Grid.FLEX,
    )
    rows = list(event_trace(SimConfig(link, 150, 1)))
    assert [r.channel_id for r in rows] == ["a", "b"]
    assert rows[0].pool_before == 150 and rows[0].pool_after == 100
    assert rows[1].pool_before == 100 and rows[1].pool_after == 0


def test_trace_csv():
    buf = io.StringIO()
    n = write_trace_csv(SimConfig(flex_link(KeyPolicy(256, 1)), 200, 2), buf)
    assert n == 2
    assert buf.getvalue() == (
        "time_s,channel_id,pool_before,pool_after\n"
        "1.0,ch0,200.0,-56.0\n"
        "2.0,ch0,144.0,-112.0\n"
    )


def test_common_period():
    link = flex_link(KeyPolicy(1, 1), KeyPolicy(1, Fraction(2, 5)))
    assert common_period(link) == 5
    assert common_period(flex_link(KeyPolicy(1, Fraction(3, 2)), KeyPolicy(1, Fraction(9, 4)))) == Fraction(4, 3)
    assert as_fraction(0.1) == Fraction(1, 10)
    with pytest.raises(ValueError):
        common_period(flex_link(KeyPolicy(1, 0)))


def test_threshold_full_c_band():
    link = Link.homogeneous(C_BAND, 95, 100, 50_000)
    assert threshold_check(link, 200) == (24_320, True)


def test_threshold_half_hertz():
    rskr, verified = threshold_check(flex_link(KeyPolicy(256, 0.5)), 10)
    assert (rskr, verified) == (128, True)


def test_threshold_needs_demand():
    with pytest.raises(ValueError):
        threshold_check(flex_link(KeyPolicy(256, 0)), 10)


def test_threshold_inconclusive_horizon():
    # periods 1 s and 2.5 s only realign every 5 s
    link = flex_link(KeyPolicy(256, 1), KeyPolicy(256, Fraction(2, 5)))
    with pytest.raises(InconclusiveHorizon):
        threshold_check(link, 4.9)
    assert threshold_check(link, 5).verified


def test_underflow_can_wait_for_the_common_period():
    link = flex_link(KeyPolicy(256, 1), KeyPolicy(256, Fraction(2, 5)))
    result = simulate(SimConfig(link, 0.99 * float(rskr_per_link(link)), 20))
    assert result.underflow_time_s == 5.0


def test_determinism():
    link = flex_link(KeyPolicy(256, Fraction(1, 3)), KeyPolicy(128, 0.7), KeyPolicy(64, 2))
    config = SimConfig(link, 300.5, 500, 17)
    assert simulate(config) == simulate(config)
    assert list(event_trace(config)) == list(event_trace(config))


rates = st.builds(Fraction, st.integers(0, 10), st.integers(1, 10))
channel_lists = st.lists(st.tuples(st.integers(1, 4096), rates), min_size=1, max_size=4)


def _link(channels):
    return flex_link(*(KeyPolicy(bits, rate) for bits, rate in channels))


def _oracle(link, skr, horizon, initial=0):
    return naive_pool(
        [(ch.id, ch.policy.key_length_bits, ch.policy.refresh_rate_hz) for ch in link.channels],
        skr,
        horizon,
        initial,
    )


@settings(max_examples=60, deadline=None)
@given(channel_lists, st.integers(0, 20_000), st.integers(1, 100), st.integers(0, 2_000))
def test_matches_naive_event_list(channels, skr, horizon, initial):
    link = _link(channels)
    got = simulate(SimConfig(link, skr, horizon, initial))
    min_pool, underflow, final, n = _oracle(link, skr, horizon, initial)
    assert got.events_processed == n
    assert got.min_pool_bits == pytest.approx(float(min_pool), abs=1e-6)
    assert got.final_pool_bits == pytest.approx(float(final), abs=1e-6)
    if underflow is None:
        assert got.underflow_time_s is None
    else:
        assert got.underflow_time_s == pytest.approx(float(underflow), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(1, 4096), rates), min_size=1, max_size=8),
    st.integers(0, 5_000),
    st.integers(0, 1000),
)
def test_no_underflow_at_or_above_rskr(channels, surplus, initial):
    link = _link(channels)
    skr = rskr_per_link(link) + surplus
    assert not simulate(SimConfig(link, skr, 60, initial)).underflow


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(1, 4096), rates.filter(lambda r: r > 0)), min_size=1, max_size=8),
    st.floats(0.5, 0.999),
    st.integers(0, 1000),
)
def test_underflow_below_rskr_within_bound(channels, fraction, initial):
    link = _link(channels)
    skr = float(rskr_per_link(link)) * fraction
    bound = underflow_bound(link, skr, initial)
    result = simulate(SimConfig(link, skr, bound, initial))
    assert result.underflow
    assert result.underflow_time_s <= float(bound)
