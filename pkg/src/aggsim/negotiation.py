"""Per-link, per-TID session parameters from two stations' advertised capabilities.

Association settles the A-MSDU size limit; the ADDBA exchange settles the
Block-Ack window. Both are modelled as a pure function, established once at
session start.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError, InvalidInput, NegotiationError

# Advertised A-MSDU capability values (the "3.8K / 7.9K / 11K" classes).
AMSDU_CAPS = (3839, 7935, 11454)
DEFAULT_RATES = (24, 36, 48, 72, 96, 144, 192, 216)  # 6..54 Mb/s at 4 us symbols


@dataclass(frozen=True)
class StationCapabilities:
    max_amsdu_bytes: Optional[int] = 3839  # None = A-MSDU disabled
    max_ampdu_bytes: int = 65535
    max_ba_window: int = 64
    supported_rates: tuple[int, ...] = DEFAULT_RATES

    def __post_init__(self) -> None:
        if self.max_amsdu_bytes is not None and self.max_amsdu_bytes not in AMSDU_CAPS:
            raise ConfigError(f"max_amsdu_bytes must be one of {AMSDU_CAPS} or off")
        if self.max_ampdu_bytes < 1:
            raise ConfigError("max_ampdu_bytes must be >= 1")
        if not 1 <= self.max_ba_window <= 64:
            raise ConfigError(f"max_ba_window {self.max_ba_window} out of range 1..=64")
        if not self.supported_rates or min(self.supported_rates) < 1:
            raise ConfigError("supported_rates must be non-empty positive bits-per-symbol values")
        object.__setattr__(self, "supported_rates", tuple(sorted(set(self.supported_rates))))


@dataclass(frozen=True)
class SessionParams:
    amsdu_limit_bytes: Optional[int] = 3839
    ampdu_limit_bytes: int = 65535
    ba_window: int = 64
    tid: int = 0
    data_bits_per_symbol: int = 216
    ctrl_bits_per_symbol: int = 96

    def __post_init__(self) -> None:
        if not 0 <= self.tid <= 7:
            raise ConfigError(f"tid {self.tid} out of range 0..=7")
        if not 1 <= self.ba_window <= 64:
            raise ConfigError(f"ba_window {self.ba_window} out of range 1..=64")
        if self.ampdu_limit_bytes < 1:
            raise ConfigError("ampdu_limit_bytes must be >= 1")
        if not self.data_bits_per_symbol >= self.ctrl_bits_per_symbol >= 1:
            raise ConfigError("need data_bits_per_symbol >= ctrl_bits_per_symbol >= 1")

    @property
    def amsdu_enabled(self) -> bool:
        return self.amsdu_limit_bytes is not None


def _min_optional(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None or b is None:
        return None
    return min(a, b)


def negotiate(
    initiator: StationCapabilities,
    responder: StationCapabilities,
    tid: int,
    basic_rate: int = 96,
) -> SessionParams:
    """Element-wise minimum of both capability sets.

    Data frames use the highest common rate. Control responses use the
    highest common rate not above ``basic_rate``, or the lowest common rate
    if none qualifies.
    """
    if not 0 <= tid <= 7:
        raise InvalidInput(f"tid {tid} out of range 0..=7")
    common = sorted(set(initiator.supported_rates) & set(responder.supported_rates))
    if not common:
        raise NegotiationError("stations share no common rate")
    below = [r for r in common if r <= basic_rate]
    ctrl = below[-1] if below else common[0]
    return SessionParams(
        amsdu_limit_bytes=_min_optional(initiator.max_amsdu_bytes, responder.max_amsdu_bytes),
        ampdu_limit_bytes=min(initiator.max_ampdu_bytes, responder.max_ampdu_bytes),
        ba_window=min(initiator.max_ba_window, responder.max_ba_window),
        tid=tid,
        data_bits_per_symbol=common[-1],
        ctrl_bits_per_symbol=ctrl,
    )
