"""Deterministic discrete-event simulation of one aggregating 802.11 link.

A single transmitter serves one (receiver, TID) session; there is no
contention from other stations. Events at equal timestamps run in insertion
order. Each exchange occupies the channel for DIFS + backoff, the data PPDU,
SIFS and the ACK or Block-Ack, whatever the CRC outcome; the Block-Ack is
always delivered.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field, fields
from typing import Any, NamedTuple, Optional

import numpy as np

from .aggregation import AggregationPolicy, pack_amsdu, pack_ampdu
from .blockack import BaWindow, ReorderBuffer, sender_process_ba
from .error_model import BACKOFF_STREAM, TRAFFIC_STREAM, ChannelModel, corrupt_mpdus, rng_stream
from .errors import ConfigError, ProtocolStateError
from .frames import DELIMITER_BYTES, SEQ_MODULO, Ampdu, Mpdu, Msdu, pad4, subframe_size
from .negotiation import SessionParams
from .phy_airtime import PhyTimings, ppdu_duration, response_duration
from .traffic import MsduFactory, SaturatedSource, TrafficSpec, generate_arrivals

SIM_BACKOFF_MODELS = ("uniform", "expected", "none")
_PEEK_CHUNK = 32


@dataclass
class Scenario:
    duration_us: float
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    policy: AggregationPolicy = field(default_factory=AggregationPolicy)
    session: SessionParams = field(default_factory=SessionParams)
    channel: ChannelModel = field(default_factory=ChannelModel)
    timings: PhyTimings = field(default_factory=PhyTimings)
    retry_limit: Optional[int] = 7
    backoff: str = "uniform"
    warmup_fraction: float = 0.05

    def validate(self) -> None:
        if not self.duration_us > 0:
            raise ConfigError("duration_us must be > 0")
        if self.backoff not in SIM_BACKOFF_MODELS:
            raise ConfigError(f"backoff {self.backoff!r} not one of {SIM_BACKOFF_MODELS}")
        if self.retry_limit is not None and self.retry_limit < 0:
            raise ConfigError("retry_limit must be >= 0")
        if not 0 <= self.warmup_fraction < 1:
            raise ConfigError("warmup_fraction must be in [0, 1)")
        if self.traffic.tid != self.session.tid:
            raise ConfigError(f"traffic tid {self.traffic.tid} has no session (session tid {self.session.tid})")
        if (self.timings.data_bits_per_symbol, self.timings.ctrl_bits_per_symbol) != (
            self.session.data_bits_per_symbol,
            self.session.ctrl_bits_per_symbol,
        ):
            raise ConfigError("timings rates disagree with the negotiated session rates")
        self.policy.check(self.session)


@dataclass(frozen=True)
class TxMetrics:
    goodput_mbps: float = 0.0
    efficiency: float = 0.0
    mean_delay_us: float = 0.0
    p99_delay_us: float = 0.0
    retransmitted_bytes: int = 0
    msdus_offered: int = 0
    msdus_delivered: int = 0
    msdus_dropped: int = 0
    msdus_queued: int = 0
    ppdu_count: int = 0

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


class TraceEvent(NamedTuple):
    time_us: float
    event_kind: str
    tid: int
    seq_no: Optional[int]
    size_bytes: int
    outcome: str

    def format(self) -> str:
        seq = "-" if self.seq_no is None else str(self.seq_no)
        return f"{self.time_us:.3f}\t{self.event_kind}\t{self.tid}\t{seq}\t{self.size_bytes}\t{self.outcome}"


@dataclass
class SimResult:
    metrics: TxMetrics
    trace: list[TraceEvent]
    measure_start_us: float
    measure_end_us: float


def _ids(mpdu: Mpdu) -> str:
    return ",".join(str(m.id) for m in mpdu.msdus)


class _Sim:
    def __init__(self, sc: Scenario, trace: bool) -> None:
        self.sc = sc
        self.tracing = trace
        self.log: list[TraceEvent] = []
        self.now = 0.0
        self._heap: list[tuple[float, int, str, Any]] = []
        self._counter = itertools.count()

        self.use_ampdu = sc.policy.uses_ampdu
        win = sc.session.ba_window if self.use_ampdu else 1
        self.window = BaWindow(win, sc.retry_limit)
        self.receiver = ReorderBuffer(win)
        self.channel = sc.channel.fresh()
        self.backoff_rng = rng_stream(sc.channel.seed, BACKOFF_STREAM)

        self.amsdu_q: deque[Msdu] = deque()
        self.ready: deque[Mpdu] = deque()
        self.ready_since: dict[int, float] = {}
        self.seq_alloc = 0
        self.amsdu_deadline: Optional[float] = None
        self.ampdu_deadline: Optional[float] = None
        self.busy = False
        self.source: Optional[SaturatedSource] = None
        self._pending_ba = None

        self.offered = self.delivered = self.dropped = 0
        self.retx_bytes = 0
        self.ppdus = 0
        self.last_end = 0.0
        self.warmup_cut = sc.duration_us * sc.warmup_fraction if sc.traffic.saturated else 0.0
        self.measure_start: Optional[float] = None if sc.traffic.saturated else 0.0
        self.window_bits = 0
        self.window_delays: list[float] = []

    # -- plumbing ---------------------------------------------------------

    def schedule(self, t: float, kind: str, data: Any = None) -> None:
        if t < self.now:
            raise ProtocolStateError(f"event {kind} scheduled in the past")
        heapq.heappush(self._heap, (t, next(self._counter), kind, data))

    def trace(self, kind: str, seq: Optional[int], size: int, outcome: str) -> None:
        if self.tracing:
            self.log.append(TraceEvent(self.now, kind, self.sc.session.tid, seq, size, outcome))

    # -- sender queues ----------------------------------------------------

    def arrive(self, msdu: Msdu) -> None:
        self.offered += 1
        self.trace("arrive", None, msdu.payload_len, f"msdu={msdu.id}")

    def enqueue(self, mpdu: Mpdu) -> None:
        self.seq_alloc = (self.seq_alloc + 1) % SEQ_MODULO
        self.ready.append(mpdu)
        self.ready_since[mpdu.seq_no] = self.now
        self.trace("enqueue", mpdu.seq_no, mpdu.size, f"msdus={_ids(mpdu)}")

    def drain_amsdu(self) -> None:
        pol, ses = self.sc.policy, self.sc.session
        while True:
            mpdu = pack_amsdu(self.amsdu_q, self.now, pol, ses, seq_no=self.seq_alloc)
            if mpdu is None:
                break
            self.enqueue(mpdu)
        if self.amsdu_q:
            deadline = self.amsdu_q[0].arrival_time + pol.amsdu_timeout_us
            if deadline != self.amsdu_deadline:
                self.amsdu_deadline = deadline
                self.schedule(deadline, "amsdu_timeout")

    def make_saturated_mpdu(self) -> Mpdu:
        pol, ses = self.sc.policy, self.sc.session
        target = pol.target_bytes(ses)
        n = 1
        if target is not None:
            # Look far enough ahead that the size rule can fire.
            n = _PEEK_CHUNK
            while True:
                sizes = [m.payload_len for m in self.source.peek(n, self.now)]
                if _overflows(sizes, target):
                    break
                n += _PEEK_CHUNK
        q = deque(self.source.peek(n, self.now))
        mpdu = pack_amsdu(q, self.now, pol, ses, seq_no=self.seq_alloc)
        for m in self.source.take(n - len(q)):
            self.arrive(m)
        self.enqueue(mpdu)
        return mpdu

    def candidates(self) -> tuple[list[Mpdu], list[Mpdu]]:
        retx = self.window.retransmissions()
        room = self.window.fresh_room()
        fresh = list(itertools.islice(self.ready, max(room, 0)))
        return retx, fresh

    def fill_saturated(self) -> None:
        """Top up fresh MPDUs until the next PPDU is bound by the window or byte limit."""
        retx, fresh = self.candidates()
        if not self.use_ampdu:
            if not (retx or fresh):
                self.make_saturated_mpdu()
            return
        cap, limit = self.window.win_size, self.sc.session.ampdu_limit_bytes
        count = closed = 0
        for m in retx + fresh:
            if count >= cap or (count and closed + DELIMITER_BYTES + m.size > limit):
                return
            closed += pad4(DELIMITER_BYTES + m.size)
            count += 1
        room = self.window.fresh_room()
        while len(fresh) < room:
            m = self.make_saturated_mpdu()
            fresh.append(m)
            if count >= cap or (count and closed + DELIMITER_BYTES + m.size > limit):
                return
            closed += pad4(DELIMITER_BYTES + m.size)
            count += 1

    # -- channel ----------------------------------------------------------

    def try_start(self) -> None:
        sc = self.sc
        if self.busy or self.now >= sc.duration_us:
            return
        if self.source is not None:
            self.fill_saturated()
        retx, fresh = self.candidates()
        pool = retx + fresh
        if not pool:
            return
        amp = pack_ampdu(pool, sc.session, self.window.win_size, delimited=self.use_ampdu)
        if self.use_ampdu and self.source is None and not retx:
            full = len(amp.mpdus) < len(pool) or len(fresh) >= self.window.fresh_room()
            deadline = self.ready_since[fresh[0].seq_no] + sc.policy.ampdu_timeout_us
            if not full and self.now < deadline:
                if deadline != self.ampdu_deadline:
                    self.ampdu_deadline = deadline
                    self.schedule(deadline, "ampdu_timeout")
                return
        self.start_exchange(Ampdu(amp.mpdus, amp.delimited, start_seq=self.window.win_start))

    def contention(self) -> float:
        t = self.sc.timings
        if self.sc.backoff == "none":
            return 0.0
        if self.sc.backoff == "expected":
            return t.difs_us + t.expected_backoff_us
        return t.difs_us + int(self.backoff_rng.integers(0, t.cw_min + 1)) * t.slot_us

    def start_exchange(self, amp: Ampdu) -> None:
        sc, t = self.sc, self.sc.timings
        if self.measure_start is None and self.now >= self.warmup_cut:
            self.measure_start = self.now
        self.window.on_transmit(amp)
        sent = {m.seq_no for m in amp.mpdus}
        while self.ready and self.ready[0].seq_no in sent:
            self.ready_since.pop(self.ready.popleft().seq_no)
        self.busy = True
        self.ppdus += 1

        data_end = self.now + self.contention() + ppdu_duration(amp.total_len, t.data_bits_per_symbol, t)
        ack = t.block_ack_bytes if amp.delimited else t.ack_bytes
        exchange_end = data_end + response_duration(ack, t)
        failed = corrupt_mpdus(amp, self.channel)
        self.trace("ppdu", amp.start_seq, amp.total_len, f"mpdus={len(amp.mpdus)}")
        for m in amp.mpdus:
            if m.retry_count:
                self.retx_bytes += m.size
            self.trace("tx", m.seq_no, m.size, f"retry={m.retry_count}")
        self.schedule(data_end, "ppdu_end", (amp, failed))
        self.schedule(exchange_end, "exchange_end")

    # -- event handlers ---------------------------------------------------

    def on_ppdu_end(self, data: tuple[Ampdu, set[int]]) -> None:
        amp, failed = data
        for m in amp.mpdus:
            self.trace("rx", m.seq_no, m.size, "crc_fail" if m.seq_no in failed else "ok")
        bitmap, released = self.receiver.receive(amp, failed)
        self.release(released)
        self._pending_ba = bitmap

    def release(self, released: list[tuple[int, Msdu]]) -> None:
        in_window = self.measure_start is not None
        for seq, msdu in released:
            self.delivered += 1
            self.trace("release", seq, msdu.payload_len, f"msdu={msdu.id}")
            if in_window:
                self.window_bits += 8 * msdu.payload_len
                self.window_delays.append(self.now - msdu.arrival_time)

    def on_exchange_end(self) -> None:
        outcome = sender_process_ba(self.window, self._pending_ba)
        for m in outcome.dropped:
            self.dropped += len(m.subframes)
            self.trace("drop", m.seq_no, m.size, f"msdus={_ids(m)}")
        if outcome.dropped:
            self.release(self.receiver.advance(self.window.win_start))
        self.busy = False
        self.last_end = self.now
        self.try_start()

    def run(self) -> SimResult:
        sc = self.sc
        if sc.traffic.saturated:
            factory = MsduFactory(sc.traffic, rng_stream(sc.channel.seed, TRAFFIC_STREAM))
            self.source = SaturatedSource(factory)
            self.schedule(0.0, "kick")
        else:
            for msdu in generate_arrivals(sc.traffic, sc.duration_us, sc.channel.seed):
                self.schedule(msdu.arrival_time, "arrival", msdu)

        while self._heap:
            t, _, kind, data = heapq.heappop(self._heap)
            self.now = t
            if kind == "arrival":
                self.arrive(data)
                self.amsdu_q.append(data)
                self.drain_amsdu()
                self.try_start()
            elif kind == "amsdu_timeout":
                if self.amsdu_deadline == t:
                    self.amsdu_deadline = None
                self.drain_amsdu()
                self.try_start()
            elif kind == "ampdu_timeout":
                if self.ampdu_deadline == t:
                    self.ampdu_deadline = None
                self.try_start()
            elif kind == "ppdu_end":
                self.on_ppdu_end(data)
            elif kind == "exchange_end":
                self.on_exchange_end()
            elif kind == "kick":
                self.try_start()
        return self.finish()

    def finish(self) -> SimResult:
        sc = self.sc
        queued = (
            len(self.amsdu_q)
            + sum(len(m.subframes) for m in self.ready)
            + sum(len(m.subframes) for m in self.window.sent_unacked.values())
            + sum(len(m.subframes) for m in self.window.pending.values())
            + self.receiver.held_msdus()
        )
        end = max(sc.duration_us, self.last_end)
        start = self.measure_start
        goodput = efficiency = mean_delay = p99 = 0.0
        if start is not None and end > start and self.window_bits:
            goodput = self.window_bits / (end - start)
            efficiency = goodput / sc.timings.data_rate_mbps
        if self.window_delays:
            d = np.asarray(self.window_delays)
            mean_delay = float(d.mean())
            p99 = float(np.percentile(d, 99))
        metrics = TxMetrics(
            goodput_mbps=goodput,
            efficiency=efficiency,
            mean_delay_us=mean_delay,
            p99_delay_us=p99,
            retransmitted_bytes=self.retx_bytes,
            msdus_offered=self.offered,
            msdus_delivered=self.delivered,
            msdus_dropped=self.dropped,
            msdus_queued=queued,
            ppdu_count=self.ppdus,
        )
        return SimResult(metrics, self.log, start if start is not None else end, end)


def _overflows(sizes: list[int], target: int) -> bool:
    closed = 0
    for p in sizes:
        if closed + subframe_size(p, is_last=True) > target:
            return True
        closed += subframe_size(p, is_last=False)
    return False


def simulate(scenario: Scenario, trace: bool = False) -> SimResult:
    """Run ``scenario`` and keep the event trace if asked."""
    scenario.validate()
    return _Sim(scenario, trace).run()


def run(scenario: Scenario) -> TxMetrics:
    return simulate(scenario).metrics
