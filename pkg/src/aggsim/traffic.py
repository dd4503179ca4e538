"""Offered-load models: saturated backlog, CBR, Poisson, and the IMIX size preset."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, InvalidInput
from .error_model import TRAFFIC_STREAM, rng_stream
from .frames import MAX_MSDU_BYTES, Msdu

TRAFFIC_MODELS = ("saturated", "cbr", "poisson", "imix")
IMIX_SIZES = ((40, 7.0), (576, 4.0), (1500, 1.0))
_BATCH = 4096


@dataclass(frozen=True)
class TrafficSpec:
    """``imix`` is a saturated backlog whose sizes follow the IMIX preset."""

    model: str = "saturated"
    rate_pps: float = 1000.0
    size_dist: tuple[tuple[int, float], ...] = ((1500, 1.0),)
    tid: int = 0
    endpoints: int = 1  # distinct DA/SA pairs cycled through

    def __post_init__(self) -> None:
        if self.model not in TRAFFIC_MODELS:
            raise ConfigError(f"traffic model {self.model!r} not one of {TRAFFIC_MODELS}")
        if self.model == "imix":
            object.__setattr__(self, "size_dist", IMIX_SIZES)
        if not self.size_dist:
            raise ConfigError("size_dist must not be empty")
        for size, weight in self.size_dist:
            if not 1 <= size <= MAX_MSDU_BYTES:
                raise ConfigError(f"size {size} out of range 1..={MAX_MSDU_BYTES}")
            if weight <= 0:
                raise ConfigError("size weights must be positive")
        if self.model in ("cbr", "poisson") and self.rate_pps <= 0:
            raise ConfigError("rate_pps must be > 0")
        if not 0 <= self.tid <= 7:
            raise ConfigError(f"tid {self.tid} out of range 0..=7")
        if self.endpoints < 1:
            raise ConfigError("endpoints must be >= 1")

    @property
    def saturated(self) -> bool:
        return self.model in ("saturated", "imix")


class MsduFactory:
    """Draws MSDU sizes from one traffic stream and stamps ids and addresses."""

    def __init__(self, spec: TrafficSpec, rng: np.random.Generator) -> None:
        self.spec = spec
        self.rng = rng
        self._sizes = np.array([s for s, _ in spec.size_dist], dtype=np.int64)
        w = np.array([w for _, w in spec.size_dist], dtype=float)
        self._p = w / w.sum()
        self._buf: list[int] = []
        self.next_id = 0

    def _size(self) -> int:
        if len(self._sizes) == 1:
            return int(self._sizes[0])
        if not self._buf:
            idx = self.rng.choice(len(self._sizes), size=_BATCH, p=self._p)
            self._buf = self._sizes[idx][::-1].tolist()
        return self._buf.pop()

    def make(self, arrival_time: float) -> Msdu:
        i = self.next_id
        self.next_id += 1
        k = i % self.spec.endpoints
        return Msdu(
            id=i,
            payload_len=self._size(),
            tid=self.spec.tid,
            dest_addr=bytes((2, 0, 0, 0, 1, k % 256)),
            src_addr=bytes((2, 0, 0, 0, 2, k % 256)),
            arrival_time=arrival_time,
        )


class SaturatedSource:
    """Infinite backlog. MSDUs are looked at before they are taken, so a
    packer can see the one that would overflow without it counting as offered."""

    def __init__(self, factory: MsduFactory) -> None:
        self.factory = factory
        self._ahead: list[Msdu] = []

    def peek(self, n: int, now: float) -> list[Msdu]:
        while len(self._ahead) < n:
            self._ahead.append(self.factory.make(now))
        # Re-stamp: a looked-at MSDU only arrives when it is taken.
        self._ahead = [m if m.arrival_time == now else _restamp(m, now) for m in self._ahead]
        return self._ahead[:n]

    def take(self, k: int) -> list[Msdu]:
        out, self._ahead = self._ahead[:k], self._ahead[k:]
        return out


def _restamp(m: Msdu, now: float) -> Msdu:
    return Msdu(m.id, m.payload_len, m.tid, m.dest_addr, m.src_addr, now)


def arrival_times(spec: TrafficSpec, duration_us: float, rng: np.random.Generator) -> list[float]:
    """Arrival instants in [0, duration_us) for the open-loop models."""
    if spec.model == "cbr":
        gap = 1e6 / spec.rate_pps
        n = int(np.ceil(duration_us / gap))
        return [k * gap for k in range(n) if k * gap < duration_us]
    if spec.model == "poisson":
        mean_gap = 1e6 / spec.rate_pps
        times: list[float] = []
        t = 0.0
        while True:
            gaps = rng.exponential(mean_gap, size=_BATCH)
            for g in gaps:
                t += g
                if t >= duration_us:
                    return times
                times.append(t)
    raise InvalidInput(f"{spec.model} traffic has no arrival schedule")


def generate_arrivals(
    spec: TrafficSpec,
    duration_us: float,
    seed: int,
    count: Optional[int] = None,
) -> list[Msdu]:
    """Deterministic MSDU arrivals for ``seed``.

    Open-loop models return every arrival before ``duration_us``. Saturated
    models have no schedule of their own; they return the first ``count``
    MSDUs of the backlog, all stamped at time 0.
    """
    rng = rng_stream(seed, TRAFFIC_STREAM)
    factory = MsduFactory(spec, rng)
    if spec.saturated:
        if count is None:
            raise InvalidInput("saturated traffic needs an explicit count")
        return [factory.make(0.0) for _ in range(count)]
    return [factory.make(t) for t in arrival_times(spec, duration_us, rng)]
