"""Independent-bit-error channel: PER from BER and seeded per-MPDU CRC failures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .frames import Ampdu

GENERATOR_NAME = "numpy-PCG64-SeedSequence"

# Stream indices spawned from one run seed.
CHANNEL_STREAM, TRAFFIC_STREAM, BACKOFF_STREAM = range(3)


def rng_stream(seed: int, index: int) -> np.random.Generator:
    """Child generator ``index`` of the seed sequence rooted at ``seed``."""
    if seed < 0:
        raise InvalidInput("seed must be >= 0")
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    return np.random.Generator(np.random.PCG64(child))


def per_from_ber(size_bytes: int, ber: float) -> float:
    """Probability that at least one of ``8 * size_bytes`` i.i.d. bits is flipped."""
    if size_bytes < 1:
        raise InvalidInput("size_bytes must be >= 1")
    if not 0.0 <= ber <= 1.0:
        raise InvalidInput(f"ber {ber} out of range [0, 1]")
    if ber == 1.0:
        return 1.0
    return -math.expm1(8 * size_bytes * math.log1p(-ber))


@dataclass
class ChannelModel:
    """Memoryless channel owned by one simulation. Not safe to share."""

    ber: float = 0.0
    seed: int = 0
    rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.ber <= 1.0:
            raise InvalidInput(f"ber {self.ber} out of range [0, 1]")
        self.rng = rng_stream(self.seed, CHANNEL_STREAM)

    def fresh(self) -> "ChannelModel":
        """A copy rewound to the start of its random stream."""
        return ChannelModel(self.ber, self.seed)


def corrupt_mpdus(ampdu: Ampdu, channel: ChannelModel) -> set[int]:
    """Draw CRC outcomes for every MPDU of ``ampdu`` in order; return failed seq_nos.

    One uniform is consumed per MPDU regardless of the BER so that the stream
    position depends only on the sequence of PPDUs.
    """
    draws = channel.rng.random(len(ampdu.mpdus))
    failed = set()
    for u, mpdu in zip(draws, ampdu.mpdus):
        if u < per_from_ber(ampdu.framed_size(mpdu), channel.ber):
            failed.add(mpdu.seq_no)
    return failed
