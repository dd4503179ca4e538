"""The two packers: MSDUs into A-MSDUs (size/timeout bounded) and MPDUs into A-MPDUs.

The A-MSDU size decision is static per policy. A simple head-of-line timeout
bounds how long an MSDU may wait for companions; finished MPDUs are handed to
the A-MPDU packer, which is bounded by the negotiated byte limit and the
Block-Ack window.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ConfigError
from .frames import DELIMITER_BYTES, Ampdu, Mpdu, Msdu, pad4, subframe_size
from .negotiation import SessionParams

MODES = ("none", "amsdu_only", "ampdu_only", "two_layer")
FRAMINGS = ("plain", "amsdu")


@dataclass(frozen=True)
class AggregationPolicy:
    mode: str = "two_layer"
    amsdu_timeout_us: float = 500.0
    ampdu_timeout_us: float = 0.0
    amsdu_target_bytes: Optional[int] = None  # None = the negotiated limit
    lone_msdu_framing: str = "plain"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode {self.mode!r} not one of {MODES}")
        if self.lone_msdu_framing not in FRAMINGS:
            raise ConfigError(f"lone_msdu_framing {self.lone_msdu_framing!r} not one of {FRAMINGS}")
        if self.amsdu_timeout_us < 0 or self.ampdu_timeout_us < 0:
            raise ConfigError("timeouts must be >= 0")
        if self.amsdu_target_bytes is not None and self.amsdu_target_bytes < 1:
            raise ConfigError("amsdu_target_bytes must be >= 1")

    @property
    def uses_amsdu(self) -> bool:
        return self.mode in ("amsdu_only", "two_layer")

    @property
    def uses_ampdu(self) -> bool:
        return self.mode in ("ampdu_only", "two_layer")

    def target_bytes(self, session: SessionParams) -> Optional[int]:
        """Effective A-MSDU body budget, or None when A-MSDU is not in use."""
        if not self.uses_amsdu or not session.amsdu_enabled:
            return None
        if self.amsdu_target_bytes is None:
            return session.amsdu_limit_bytes
        if self.amsdu_target_bytes > session.amsdu_limit_bytes:
            raise ConfigError(
                f"amsdu_target_bytes {self.amsdu_target_bytes} exceeds negotiated limit "
                f"{session.amsdu_limit_bytes}"
            )
        return self.amsdu_target_bytes

    def check(self, session: SessionParams) -> None:
        self.target_bytes(session)


def pack_amsdu(
    queue: deque[Msdu],
    now: float,
    policy: AggregationPolicy,
    session: SessionParams,
    seq_no: int = 0,
) -> Optional[Mpdu]:
    """Emit at most one MPDU from the head of ``queue``, consuming its MSDUs.

    Packing is greedy FIFO. An MPDU is emitted when the next queued MSDU would
    overflow the budget, when the head has waited ``amsdu_timeout_us``, or at
    once if A-MSDU is not in use. An MSDU too large for the budget on its own
    goes out as a plain MPDU.
    """
    if not queue:
        return None
    target = policy.target_bytes(session)
    if target is None:
        framing = "plain" if policy.mode == "none" else policy.lone_msdu_framing
        return Mpdu.lone(queue.popleft(), seq_no, framing)

    head = queue[0]
    if subframe_size(head.payload_len, is_last=True) > target:
        return Mpdu.lone(queue.popleft(), seq_no, "plain")

    taken = 0
    closed = 0  # padded size of all subframes taken so far
    overflow = False
    for m in queue:
        if closed + subframe_size(m.payload_len, is_last=True) > target:
            overflow = True
            break
        closed += subframe_size(m.payload_len, is_last=False)
        taken += 1

    if not overflow and now < head.arrival_time + policy.amsdu_timeout_us:
        return None
    msdus = [queue.popleft() for _ in range(taken)]
    if len(msdus) == 1:
        return Mpdu.lone(msdus[0], seq_no, policy.lone_msdu_framing)
    return Mpdu.amsdu(msdus, seq_no)


def pack_ampdu(
    ready: Sequence[Mpdu],
    session: SessionParams,
    in_flight_window_room: int,
    delimited: bool = True,
) -> Optional[Ampdu]:
    """Select the MPDUs for the next PPDU without mutating ``ready``.

    Retransmissions go first, then fresh MPDUs, both in their given order.
    Selection stops at the first MPDU that would break the byte limit or the
    window. The first MPDU is always taken so that nothing can stall.
    """
    if not ready or in_flight_window_room < 1:
        return None
    order = [m for m in ready if m.retry_count > 0] + [m for m in ready if m.retry_count == 0]
    if not delimited:
        return Ampdu((order[0],), delimited=False)
    max_count = min(session.ba_window, in_flight_window_room)
    taken = [order[0]]
    closed = pad4(DELIMITER_BYTES + order[0].size)
    for m in order[1:]:
        if len(taken) >= max_count:
            break
        if closed + DELIMITER_BYTES + m.size > session.ampdu_limit_bytes:
            break
        taken.append(m)
        closed += pad4(DELIMITER_BYTES + m.size)
    return Ampdu(tuple(taken))
