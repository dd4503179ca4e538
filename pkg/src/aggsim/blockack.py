"""Selective-repeat ARQ over MPDUs.

The sender keeps a scoreboard of MPDUs awaiting a Block-Ack and of MPDUs
waiting to be retransmitted. A failed MPDU is always resent whole: its
A-MSDU is never split. The receiver buffers out-of-order MPDUs and releases
MSDUs strictly in sequence order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import InvalidInput, ProtocolStateError
from .frames import SEQ_MODULO, Ampdu, Mpdu, Msdu

HALF_SEQ = SEQ_MODULO // 2


def seq_add(seq: int, n: int) -> int:
    return (seq + n) % SEQ_MODULO


def seq_offset(seq: int, start: int) -> int:
    """Distance from ``start`` forward to ``seq`` in the modulo-4096 space."""
    return (seq - start) % SEQ_MODULO


@dataclass(frozen=True)
class BaBitmap:
    start_seq: int
    bits: tuple[bool, ...]

    def acked(self, seq: int) -> bool:
        off = seq_offset(seq, self.start_seq)
        return off < len(self.bits) and self.bits[off]


def receiver_score(ampdu: Ampdu, failed: set[int], win_size: Optional[int] = None) -> BaBitmap:
    """Bitmap anchored at the A-MPDU's window start; True for each MPDU received CRC-clean."""
    seqs = {m.seq_no for m in ampdu.mpdus}
    if not failed <= seqs:
        raise InvalidInput("failed must be a subset of the A-MPDU's sequence numbers")
    start = ampdu.start_seq
    span = max(seq_offset(s, start) for s in seqs) + 1
    size = span if win_size is None else win_size
    if span > size:
        raise InvalidInput(f"A-MPDU spans {span} sequence numbers, window is {size}")
    bits = [False] * size
    for s in seqs - failed:
        bits[seq_offset(s, start)] = True
    return BaBitmap(start, tuple(bits))


class BaOutcome(NamedTuple):
    retransmit: list[Mpdu]
    released: int
    dropped: list[Mpdu]


@dataclass
class BaWindow:
    """Sender-side scoreboard for one (receiver, TID).

    ``sent_unacked`` holds MPDUs on the air awaiting a Block-Ack; ``pending``
    holds MPDUs that failed and wait to be resent. ``retry_limit=None`` means
    unlimited retries.
    """

    win_size: int
    retry_limit: Optional[int] = 7
    win_start: int = 0
    next_seq: int = 0
    sent_unacked: dict[int, Mpdu] = field(default_factory=dict)
    pending: dict[int, Mpdu] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 1 <= self.win_size <= 64:
            raise InvalidInput("win_size must be in 1..=64")
        if self.retry_limit is not None and self.retry_limit < 0:
            raise InvalidInput("retry_limit must be >= 0")
        self.next_seq = self.win_start

    def outstanding(self) -> list[int]:
        seqs = list(self.sent_unacked) + list(self.pending)
        return sorted(seqs, key=lambda s: seq_offset(s, self.win_start))

    def fresh_room(self) -> int:
        """How many new sequence numbers still fit in the window."""
        return self.win_size - seq_offset(self.next_seq, self.win_start)

    def fits(self, seq: int) -> bool:
        return seq_offset(seq, self.win_start) < self.win_size

    def retransmissions(self) -> list[Mpdu]:
        return [self.pending[s] for s in sorted(self.pending, key=lambda s: seq_offset(s, self.win_start))]

    def on_transmit(self, ampdu: Ampdu) -> None:
        if ampdu.start_seq != self.win_start:
            raise ProtocolStateError(f"A-MPDU start {ampdu.start_seq} != window start {self.win_start}")
        for m in ampdu.mpdus:
            if not self.fits(m.seq_no):
                raise ProtocolStateError(f"seq {m.seq_no} outside window at {self.win_start}")
            if m.seq_no in self.pending:
                del self.pending[m.seq_no]
            elif m.seq_no == self.next_seq:
                self.next_seq = seq_add(self.next_seq, 1)
            else:
                raise ProtocolStateError(f"seq {m.seq_no} is neither a retry nor the next fresh seq")
            self.sent_unacked[m.seq_no] = m

    def _advance(self) -> None:
        live = self.outstanding()
        self.win_start = live[0] if live else self.next_seq


def sender_process_ba(window: BaWindow, bitmap: BaBitmap) -> BaOutcome:
    """Apply a Block-Ack to the scoreboard.

    Acked MPDUs leave the window. Unacked ones are queued for retransmission
    with ``retry_count`` bumped, or dropped once that would exceed the retry
    limit. The window start moves to the lowest sequence number still owed.
    """
    if bitmap.start_seq != window.win_start:
        raise ProtocolStateError(f"bitmap start {bitmap.start_seq} != window start {window.win_start}")
    retransmit: list[Mpdu] = []
    dropped: list[Mpdu] = []
    released = 0
    for seq in sorted(window.sent_unacked, key=lambda s: seq_offset(s, window.win_start)):
        mpdu = window.sent_unacked.pop(seq)
        if bitmap.acked(seq):
            released += 1
        elif window.retry_limit is not None and mpdu.retry_count >= window.retry_limit:
            dropped.append(mpdu)
        else:
            again = mpdu.retried()
            window.pending[seq] = again
            retransmit.append(again)
    window._advance()
    return BaOutcome(retransmit, released, dropped)


@dataclass
class ReorderBuffer:
    """Receiver side: buffers CRC-clean MPDUs and releases MSDUs in order.

    When the sender's window start moves past a sequence number the receiver
    never got (a retry-exhausted drop), the gap is skipped and anything
    buffered behind it is released. The sender reports that move through
    ``advance`` or implicitly with the start of its next A-MPDU.
    """

    win_size: int
    expected: int = 0
    buffer: dict[int, Mpdu] = field(default_factory=dict)

    def receive(self, ampdu: Ampdu, failed: set[int]) -> tuple[BaBitmap, list[tuple[int, Msdu]]]:
        """Score one PPDU; return its Block-Ack and the (seq, MSDU) pairs released."""
        start = ampdu.start_seq
        released = self.advance(start)

        for m in ampdu.mpdus:
            if m.seq_no in failed:
                continue
            off = seq_offset(m.seq_no, self.expected)
            if off >= HALF_SEQ or m.seq_no in self.buffer:
                continue  # duplicate of something already held or released
            if off >= self.win_size:
                raise ProtocolStateError(f"seq {m.seq_no} beyond receive window at {self.expected}")
            self.buffer[m.seq_no] = m
        while self.expected in self.buffer:
            self._pop_expected(released)

        done = seq_offset(self.expected, start)
        bits = tuple(i < done or seq_add(start, i) in self.buffer for i in range(self.win_size))
        return BaBitmap(start, bits), released

    def advance(self, start: int) -> list[tuple[int, Msdu]]:
        """Move the window start up to ``start``, skipping holes the sender gave up on."""
        released: list[tuple[int, Msdu]] = []
        gap = seq_offset(start, self.expected)
        if gap >= HALF_SEQ:
            raise ProtocolStateError(f"window start {start} behind receiver at {self.expected}")
        for _ in range(gap):
            self._pop_expected(released)
        while self.expected in self.buffer:
            self._pop_expected(released)
        return released

    def _pop_expected(self, released: list[tuple[int, Msdu]]) -> None:
        mpdu = self.buffer.pop(self.expected, None)
        if mpdu is not None:
            released.extend((mpdu.seq_no, m) for m in mpdu.msdus)
        self.expected = seq_add(self.expected, 1)

    def held_msdus(self) -> int:
        return sum(len(m.subframes) for m in self.buffer.values())
