import pytest
from hypothesis import given
from hypothesis import strategies as st

from aggsim.errors import ConfigError, InvalidInput
from aggsim.phy_airtime import (
    PhyTimings,
    aggregation_savings,
    channel_efficiency,
    exchange_airtime,
    per_msdu_airtime,
    ppdu_duration,
)

T = PhyTimings()


def symbols_by_counting(bits, per_symbol):
    """Oracle: fill symbols one at a time until every bit is carried."""
    n = 0
    carried = 0
    while carried < bits:
        carried += per_symbol
        n += 1
    return max(n, 0)


@pytest.mark.parametrize("psdu,bps,expected", [(1538, 216, 252.0), (0, 216, 24.0), (14, 96, 28.0)])
def test_ppdu_duration_examples(psdu, bps, expected):
    assert ppdu_duration(psdu, bps, T) == expected


def test_ppdu_duration_rejects_zero_rate():
    with pytest.raises(ConfigError):
        ppdu_duration(100, 0, T)
    with pytest.raises(InvalidInput):
        ppdu_duration(-1, 216, T)


@pytest.mark.parametrize(
    "data,ack,model,expected",
    [(1538, 14, "expected", 397.5), (1538, 14, "none", 296.0), (3086, 32, "expected", 629.5)],
)
def test_exchange_airtime_examples(data, ack, model, expected):
    assert exchange_airtime(data, ack, T, model) == expected


def test_channel_efficiency_examples():
    assert channel_efficiency(12000, 397.5, 54) == pytest.approx(12000 / 21465)
    assert round(channel_efficiency(12000, 397.5, 54), 3) == 0.559
    assert round(channel_efficiency(24000, 629.5, 54), 3) == 0.706
    assert channel_efficiency(0, 123.0, 54) == 0
    with pytest.raises(InvalidInput):
        channel_efficiency(1, 0, 54)


def test_timings_validation():
    with pytest.raises(ConfigError):
        PhyTimings(sifs_us=0)
    with pytest.raises(ConfigError):
        PhyTimings(data_bits_per_symbol=24, ctrl_bits_per_symbol=96)
    assert T.data_rate_mbps == 54


@given(st.integers(0, 70000), st.integers(0, 70000), st.sampled_from([24, 96, 216, 1080]))
def test_ppdu_duration_monotone_and_on_symbol_grid(a, b, bps):
    lo, hi = sorted((a, b))
    assert ppdu_duration(lo, bps, T) <= ppdu_duration(hi, bps, T)
    body = ppdu_duration(a, bps, T) - T.preamble_us - T.phy_header_us
    assert body % T.symbol_us == 0
    assert body / T.symbol_us == symbols_by_counting(22 + 8 * a, bps)


@given(st.sampled_from([40, 200, 576, 1500, 2304]), st.sampled_from([96, 216, 432, 1080]))
def test_two_frame_aggregation_always_saves(payload, bps):
    t = PhyTimings(data_bits_per_symbol=bps)
    mpdu = 26 + 8 + payload + 4
    assert per_msdu_airtime(mpdu, 2, t) < per_msdu_airtime(mpdu, 1, t)


def test_savings_grow_with_rate():
    low = aggregation_savings(1538, 32, PhyTimings(data_bits_per_symbol=216))
    high = aggregation_savings(1538, 32, PhyTimings(data_bits_per_symbol=1080))
    assert high > low
