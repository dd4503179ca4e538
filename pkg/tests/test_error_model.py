import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aggsim.error_model import ChannelModel, corrupt_mpdus, per_from_ber, rng_stream
from aggsim.errors import InvalidInput
from aggsim.frames import Ampdu, Mpdu

from conftest import make_msdus


def per_oracle(size, ber):
    mpmath.mp.dps = 50
    return float(1 - (1 - mpmath.mpf(ber)) ** (8 * size))


def ampdu_of(count, payload=1500):
    ms = make_msdus([payload] * count)
    return Ampdu(tuple(Mpdu.lone(m, i) for i, m in enumerate(ms)))


def test_per_examples():
    assert per_from_ber(1538, 0) == 0
    # High-precision value: 0.1157722512...
    assert per_from_ber(1538, 1e-5) == pytest.approx(0.115772, abs=1e-6)
    assert per_from_ber(1538, 1e-5) == pytest.approx(per_oracle(1538, "1e-5"), rel=1e-12)
    assert per_from_ber(7935, 1e-5) == pytest.approx(0.4700, abs=0.0005)
    assert per_from_ber(7935, 1e-5) == pytest.approx(per_oracle(7935, "1e-5"), rel=1e-12)
    assert per_from_ber(10, 1.0) == 1.0


def test_per_rejects_bad_input():
    with pytest.raises(InvalidInput):
        per_from_ber(0, 0.1)
    with pytest.raises(InvalidInput):
        per_from_ber(10, 1.5)


@given(st.integers(1, 20000), st.integers(1, 20000), st.floats(1e-9, 0.5))
def test_per_strictly_increasing_in_size(a, b, ber):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert per_from_ber(lo, ber) <= per_from_ber(hi, ber)
    if per_from_ber(hi, ber) < 1.0:
        assert per_from_ber(lo, ber) < per_from_ber(hi, ber)


@given(st.integers(1, 5000), st.floats(1e-9, 0.4), st.floats(1e-9, 0.4))
def test_per_strictly_increasing_in_ber(size, x, y):
    if x == y:
        return
    lo, hi = sorted((x, y))
    if per_from_ber(size, hi) < 1.0:
        assert per_from_ber(size, lo) < per_from_ber(size, hi)


def test_corrupt_extremes():
    amp = ampdu_of(10)
    assert corrupt_mpdus(amp, ChannelModel(0.0, 1)) == set()
    assert corrupt_mpdus(amp, ChannelModel(1.0, 1)) == set(range(10))


def test_corrupt_is_reproducible():
    amp = ampdu_of(64)
    a, b = ChannelModel(1e-5, 42), ChannelModel(1e-5, 42)
    seq_a = [corrupt_mpdus(amp, a) for _ in range(50)]
    seq_b = [corrupt_mpdus(amp, b) for _ in range(50)]
    assert seq_a == seq_b
    fresh = a.fresh()
    assert [corrupt_mpdus(amp, fresh) for _ in range(50)] == seq_a


def test_corrupt_mean_failures_over_1000_trials():
    amp = ampdu_of(64)
    ch = ChannelModel(1e-5, 7)
    counts = np.array([len(corrupt_mpdus(amp, ch)) for _ in range(1000)])
    p = per_oracle(1542, "1e-5")  # MPDU plus delimiter
    mean, sd = 64 * p, math.sqrt(64 * p * (1 - p))
    assert abs(counts.mean() - mean) < 3 * sd / math.sqrt(1000)
    # The 1538-byte anchor (without delimiter) is within the same band.
    assert 64 * per_oracle(1538, "1e-5") == pytest.approx(7.41, abs=0.01)


def test_streams_are_independent_and_seeded():
    a = rng_stream(5, 0).random(4)
    b = rng_stream(5, 1).random(4)
    assert not np.allclose(a, b)
    assert np.array_equal(a, rng_stream(5, 0).random(4))
