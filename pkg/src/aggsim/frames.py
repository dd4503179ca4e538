"""Frame hierarchy and byte accounting: MSDU -> A-MSDU subframe -> MPDU -> A-MPDU.

Frames carry sizes and metadata only; no payload bytes are ever built.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import InvalidInput

MAC_HEADER_BYTES = 26  # QoS Data header
FCS_BYTES = 4
LLC_SNAP_BYTES = 8
SUBFRAME_HEADER_BYTES = 14  # DA 6 + SA 6 + length 2
DELIMITER_BYTES = 4
MAX_MSDU_BYTES = 2304
SEQ_MODULO = 4096

ZERO_ADDR = bytes(6)


def pad4(n: int) -> int:
    """Round ``n`` up to the next multiple of 4."""
    return (n + 3) & ~3


def _check_payload(payload_len: int) -> None:
    if not 1 <= payload_len <= MAX_MSDU_BYTES:
        raise InvalidInput(f"payload_len {payload_len} out of range 1..={MAX_MSDU_BYTES}")


@dataclass(frozen=True)
class Msdu:
    id: int
    payload_len: int
    tid: int = 0
    dest_addr: bytes = ZERO_ADDR
    src_addr: bytes = ZERO_ADDR
    arrival_time: float = 0.0

    def __post_init__(self) -> None:
        _check_payload(self.payload_len)
        if not 0 <= self.tid <= 7:
            raise InvalidInput(f"tid {self.tid} out of range 0..=7")
        for name in ("dest_addr", "src_addr"):
            if len(getattr(self, name)) != 6:
                raise InvalidInput(f"{name} must be 6 bytes")


@dataclass(frozen=True)
class AmsduSubframe:
    """One A-MSDU subframe. DA/SA are the end-to-end addresses of the MSDU."""

    msdu: Msdu
    pad_len: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.pad_len <= 3:
            raise InvalidInput(f"pad_len {self.pad_len} out of range 0..=3")

    @property
    def dest_addr(self) -> bytes:
        return self.msdu.dest_addr

    @property
    def src_addr(self) -> bytes:
        return self.msdu.src_addr

    @property
    def length_field(self) -> int:
        return self.msdu.payload_len

    @property
    def size(self) -> int:
        return SUBFRAME_HEADER_BYTES + self.msdu.payload_len + self.pad_len


def subframe_size(payload_len: int, is_last: bool) -> int:
    """Size of an A-MSDU subframe; every subframe but the last is padded to 4 bytes."""
    _check_payload(payload_len)
    raw = SUBFRAME_HEADER_BYTES + payload_len
    return raw if is_last else pad4(raw)


def amsdu_body_size(payload_lens: Sequence[int]) -> int:
    """Sum of subframe sizes for an A-MSDU carrying ``payload_lens`` in order."""
    last = len(payload_lens) - 1
    return sum(subframe_size(p, i == last) for i, p in enumerate(payload_lens))


@dataclass(frozen=True)
class Mpdu:
    seq_no: int
    tid: int
    subframes: tuple[AmsduSubframe, ...]
    is_amsdu_aggregate: bool = True
    retry_count: int = 0

    def __post_init__(self) -> None:
        if not self.subframes:
            raise InvalidInput("an MPDU needs at least one subframe")
        if not self.is_amsdu_aggregate and len(self.subframes) != 1:
            raise InvalidInput("a non-aggregate MPDU carries exactly one MSDU")
        if any(sf.msdu.tid != self.tid for sf in self.subframes):
            raise InvalidInput("all subframes must share the MPDU tid")
        if not 0 <= self.seq_no < SEQ_MODULO:
            raise InvalidInput(f"seq_no {self.seq_no} out of range 0..{SEQ_MODULO - 1}")
        if self.retry_count < 0:
            raise InvalidInput("retry_count must be >= 0")

    @classmethod
    def lone(cls, msdu: Msdu, seq_no: int, framing: str = "plain") -> "Mpdu":
        """Wrap a single MSDU, either plainly (LLC/SNAP) or as a one-subframe A-MSDU."""
        if framing == "plain":
            return cls(seq_no, msdu.tid, (AmsduSubframe(msdu),), is_amsdu_aggregate=False)
        if framing == "amsdu":
            return cls.amsdu([msdu], seq_no)
        raise InvalidInput(f"unknown framing {framing!r}")

    @classmethod
    def amsdu(cls, msdus: Sequence[Msdu], seq_no: int) -> "Mpdu":
        if not msdus:
            raise InvalidInput("an A-MSDU needs at least one MSDU")
        last = len(msdus) - 1
        subframes = []
        for i, m in enumerate(msdus):
            pad = 0 if i == last else pad4(SUBFRAME_HEADER_BYTES + m.payload_len) - (
                SUBFRAME_HEADER_BYTES + m.payload_len
            )
            subframes.append(AmsduSubframe(m, pad))
        return cls(seq_no, msdus[0].tid, tuple(subframes), is_amsdu_aggregate=True)

    @property
    def msdus(self) -> tuple[Msdu, ...]:
        return tuple(sf.msdu for sf in self.subframes)

    @property
    def payload_bytes(self) -> int:
        return sum(sf.msdu.payload_len for sf in self.subframes)

    @property
    def size(self) -> int:
        return mpdu_size(self)

    def retried(self) -> "Mpdu":
        return replace(self, retry_count=self.retry_count + 1)


def mpdu_size(mpdu: Mpdu) -> int:
    """On-air MPDU size: MAC header + body + FCS."""
    if not mpdu.is_amsdu_aggregate:
        body = LLC_SNAP_BYTES + mpdu.subframes[0].msdu.payload_len
    else:
        body = sum(sf.size for sf in mpdu.subframes)
    return MAC_HEADER_BYTES + body + FCS_BYTES


def ampdu_length_of_sizes(sizes: Iterable[int]) -> int:
    """A-MPDU length for MPDUs of the given sizes: delimiter + MPDU, padded except the last."""
    sizes = list(sizes)
    if not sizes:
        raise InvalidInput("an A-MPDU needs at least one MPDU")
    total = sum(pad4(DELIMITER_BYTES + s) for s in sizes[:-1])
    return total + DELIMITER_BYTES + sizes[-1]


def ampdu_length(mpdus: Sequence[Mpdu]) -> int:
    return ampdu_length_of_sizes(m.size for m in mpdus)


@dataclass(frozen=True)
class Ampdu:
    """MPDUs sent in one PPDU.

    ``delimited=False`` models a bare single MPDU (no A-MPDU framing), which is
    how the ``none`` and ``amsdu_only`` modes transmit; such PPDUs are answered
    by a plain ACK.
    """

    mpdus: tuple[Mpdu, ...]
    delimited: bool = True
    start_seq: int | None = field(default=None)

    def __post_init__(self) -> None:
        if not self.mpdus:
            raise InvalidInput("an A-MPDU needs at least one MPDU")
        if not self.delimited and len(self.mpdus) != 1:
            raise InvalidInput("an undelimited PSDU carries exactly one MPDU")
        if len({m.tid for m in self.mpdus}) != 1:
            raise InvalidInput("all MPDUs in an A-MPDU must share one tid")
        if len({m.seq_no for m in self.mpdus}) != len(self.mpdus):
            raise InvalidInput("duplicate sequence numbers in A-MPDU")
        if self.start_seq is None:
            object.__setattr__(self, "start_seq", self.mpdus[0].seq_no)

    @property
    def tid(self) -> int:
        return self.mpdus[0].tid

    @property
    def total_len(self) -> int:
        if not self.delimited:
            return self.mpdus[0].size
        return ampdu_length(self.mpdus)

    def framed_size(self, mpdu: Mpdu) -> int:
        """Bytes whose corruption loses ``mpdu``: the MPDU plus its delimiter, if any."""
        return mpdu.size + (DELIMITER_BYTES if self.delimited else 0)
