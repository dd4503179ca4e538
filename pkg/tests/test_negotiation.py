import itertools

import pytest

from aggsim.errors import ConfigError, InvalidInput, NegotiationError
from aggsim.negotiation import AMSDU_CAPS, SessionParams, StationCapabilities, negotiate


def caps(amsdu=7935, window=64, ampdu=65535, rates=(24, 96, 216)):
    return StationCapabilities(amsdu, ampdu, window, rates)


def test_examples():
    s = negotiate(caps(amsdu=7935), caps(amsdu=3839), tid=0)
    assert (s.amsdu_limit_bytes, s.ba_window) == (3839, 64)
    assert negotiate(caps(window=64), caps(window=32), tid=3).ba_window == 32
    off = negotiate(caps(amsdu=None), caps(amsdu=11454), tid=0)
    assert off.amsdu_limit_bytes is None and not off.amsdu_enabled


def test_rates():
    s = negotiate(caps(rates=(24, 96, 216, 1080)), caps(rates=(24, 48, 96, 216)), tid=0)
    assert (s.data_bits_per_symbol, s.ctrl_bits_per_symbol) == (216, 96)
    s = negotiate(caps(rates=(144, 216)), caps(rates=(144, 216)), tid=0)
    assert s.ctrl_bits_per_symbol == 144  # nothing at or below the basic rate
    with pytest.raises(NegotiationError):
        negotiate(caps(rates=(24,)), caps(rates=(48,)), tid=0)


def test_bad_inputs():
    with pytest.raises(InvalidInput):
        negotiate(caps(), caps(), tid=8)
    with pytest.raises(ConfigError):
        caps(amsdu=5000)
    with pytest.raises(ConfigError):
        caps(window=65)
    with pytest.raises(ConfigError):
        SessionParams(tid=9)


AMSDU = list(AMSDU_CAPS) + [None]
WINDOWS = [1, 8, 32, 64]
AMPDU = [8191, 65535]
RATES = [(24, 96), (24, 96, 216), (96, 216, 1080)]


def _le(a, b):
    if a is None:
        return True
    return b is not None and a <= b


@pytest.mark.parametrize("a_amsdu,b_amsdu", list(itertools.product(AMSDU, AMSDU)))
def test_commutative_and_dominated(a_amsdu, b_amsdu):
    for wa, wb, pa, pb, ra, rb in itertools.product(WINDOWS, WINDOWS, AMPDU, AMPDU, RATES, RATES):
        a, b = caps(a_amsdu, wa, pa, ra), caps(b_amsdu, wb, pb, rb)
        ab, ba = negotiate(a, b, 0), negotiate(b, a, 0)
        assert ab == ba
        for side in (a, b):
            assert _le(ab.amsdu_limit_bytes, side.max_amsdu_bytes)
            assert ab.ba_window <= side.max_ba_window
            assert ab.ampdu_limit_bytes <= side.max_ampdu_bytes
            assert ab.data_bits_per_symbol <= max(side.supported_rates)
            assert ab.data_bits_per_symbol in side.supported_rates
