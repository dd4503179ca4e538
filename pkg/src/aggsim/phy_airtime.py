"""OFDM PPDU durations, frame-exchange airtime and channel efficiency.

All durations are in microseconds. Preamble and PHY header cost the same
regardless of the data rate, since they are always sent at the base rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, InvalidInput
from .frames import ampdu_length_of_sizes

BACKOFF_MODELS = ("expected", "none")


@dataclass(frozen=True)
class PhyTimings:
    """802.11a/g OFDM defaults; every field can be overridden from the config file."""

    preamble_us: float = 16.0
    phy_header_us: float = 4.0
    symbol_us: float = 4.0
    sifs_us: float = 16.0
    difs_us: float = 34.0
    slot_us: float = 9.0
    cw_min: int = 15
    data_bits_per_symbol: int = 216
    ctrl_bits_per_symbol: int = 96
    service_tail_bits: int = 22
    ack_bytes: int = 14
    block_ack_bytes: int = 32

    def __post_init__(self) -> None:
        for name in ("preamble_us", "phy_header_us", "symbol_us", "sifs_us", "difs_us", "slot_us"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.cw_min < 1:
            raise ConfigError("cw_min must be >= 1")
        if self.service_tail_bits < 0:
            raise ConfigError("service_tail_bits must be >= 0")
        if not self.data_bits_per_symbol >= self.ctrl_bits_per_symbol >= 1:
            raise ConfigError("need data_bits_per_symbol >= ctrl_bits_per_symbol >= 1")
        if self.ack_bytes < 0 or self.block_ack_bytes < 0:
            raise ConfigError("ack sizes must be >= 0")

    @property
    def data_rate_mbps(self) -> float:
        return self.data_bits_per_symbol / self.symbol_us

    @property
    def expected_backoff_us(self) -> float:
        return self.cw_min / 2 * self.slot_us


def ppdu_duration(psdu_len: int, bits_per_symbol: int, timings: PhyTimings) -> float:
    if bits_per_symbol <= 0:
        raise ConfigError("bits_per_symbol must be > 0")
    if psdu_len < 0:
        raise InvalidInput("psdu_len must be >= 0")
    n_sym = math.ceil((timings.service_tail_bits + 8 * psdu_len) / bits_per_symbol)
    return timings.preamble_us + timings.phy_header_us + timings.symbol_us * n_sym


def response_duration(ack_psdu_len: int, timings: PhyTimings) -> float:
    """SIFS followed by the ACK or Block-Ack at the control rate."""
    return timings.sifs_us + ppdu_duration(ack_psdu_len, timings.ctrl_bits_per_symbol, timings)


def exchange_airtime(
    data_psdu_len: int,
    ack_psdu_len: int,
    timings: PhyTimings,
    backoff_model: str = "expected",
) -> float:
    """Channel time for one data PPDU plus its acknowledgement.

    ``expected`` charges DIFS and the mean backoff of ``cw_min / 2`` slots;
    ``none`` charges neither.
    """
    if backoff_model not in BACKOFF_MODELS:
        raise InvalidInput(f"backoff_model must be one of {BACKOFF_MODELS}")
    contention = timings.difs_us + timings.expected_backoff_us if backoff_model == "expected" else 0.0
    data = ppdu_duration(data_psdu_len, timings.data_bits_per_symbol, timings)
    return contention + data + response_duration(ack_psdu_len, timings)


def channel_efficiency(payload_bits: float, total_airtime: float, data_rate_mbps: float) -> float:
    if total_airtime <= 0:
        raise InvalidInput("total_airtime must be > 0")
    if payload_bits == 0:
        return 0.0
    return payload_bits / (data_rate_mbps * total_airtime)


def per_msdu_airtime(mpdu_len: int, count: int, timings: PhyTimings, backoff_model: str = "expected") -> float:
    """Airtime per MPDU when ``count`` equal MPDUs share one exchange.

    ``count == 1`` is a bare MPDU with a normal ACK; larger counts are an
    A-MPDU answered by a Block-Ack.
    """
    if count < 1:
        raise InvalidInput("count must be >= 1")
    if count == 1:
        return exchange_airtime(mpdu_len, timings.ack_bytes, timings, backoff_model)
    psdu = ampdu_length_of_sizes([mpdu_len] * count)
    return exchange_airtime(psdu, timings.block_ack_bytes, timings, backoff_model) / count


def aggregation_savings(mpdu_len: int, count: int, timings: PhyTimings, backoff_model: str = "expected") -> float:
    """Fractional airtime saved per MPDU by aggregating ``count`` MPDUs versus sending each alone."""
    single = per_msdu_airtime(mpdu_len, 1, timings, backoff_model)
    return 1.0 - per_msdu_airtime(mpdu_len, count, timings, backoff_model) / single
