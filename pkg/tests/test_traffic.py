import numpy as np
import pytest

from aggsim.errors import ConfigError, InvalidInput
from aggsim.traffic import IMIX_SIZES, TrafficSpec, generate_arrivals


def test_cbr_exact_spacing():
    got = generate_arrivals(TrafficSpec("cbr", rate_pps=1000), 1e6, seed=1)
    assert len(got) == 1000
    t = np.array([m.arrival_time for m in got])
    assert np.allclose(np.diff(t), 1000.0)
    assert t[0] == 0.0


def test_poisson_count_within_three_sigma():
    got = generate_arrivals(TrafficSpec("poisson", rate_pps=1000), 100e6, seed=3)
    assert abs(len(got) - 1e5) < 3 * np.sqrt(1e5)
    t = [m.arrival_time for m in got]
    assert t == sorted(t) and t[-1] < 100e6


def test_imix_frequencies():
    n = 100_000
    got = generate_arrivals(TrafficSpec("imix"), 0, seed=5, count=n)
    sizes = np.array([m.payload_len for m in got])
    total = sum(w for _, w in IMIX_SIZES)
    for size, w in IMIX_SIZES:
        p = w / total
        sigma = np.sqrt(n * p * (1 - p))
        assert abs((sizes == size).sum() - n * p) < 3 * sigma


def test_same_seed_same_arrivals():
    spec = TrafficSpec("poisson", rate_pps=500, size_dist=((100, 1.0), (1000, 2.0)), endpoints=3)
    a = generate_arrivals(spec, 1e6, seed=9)
    b = generate_arrivals(spec, 1e6, seed=9)
    assert a == b
    assert a != generate_arrivals(spec, 1e6, seed=10)
    assert len({m.dest_addr for m in a}) == 3


def test_saturated_needs_count():
    with pytest.raises(InvalidInput):
        generate_arrivals(TrafficSpec(), 1e6, seed=1)


@pytest.mark.parametrize("kw", [{"model": "bursty"}, {"tid": 8}, {"size_dist": ((0, 1.0),)}, {"model": "cbr", "rate_pps": 0}])
def test_bad_specs(kw):
    with pytest.raises(ConfigError):
        TrafficSpec(**kw)
