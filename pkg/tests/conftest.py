import pytest

from aggsim.frames import Msdu


def make_msdus(sizes, tid=0, start_id=0, arrival=0.0):
    return [Msdu(id=start_id + i, payload_len=s, tid=tid, arrival_time=arrival) for i, s in enumerate(sizes)]


@pytest.fixture
def msdus():
    return make_msdus


def scenario_from(text, seed=1):
    """Scenario built from ``key = value`` lines on top of the defaults."""
    from aggsim.config import parse_config

    cfg = parse_config(text)
    return cfg.scenario({}, seed)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, name, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} {name} ({detail})")
