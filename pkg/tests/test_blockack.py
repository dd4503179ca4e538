import pytest

from aggsim.blockack import BaBitmap, BaWindow, ReorderBuffer, receiver_score, sender_process_ba, seq_offset
from aggsim.errors import InvalidInput, ProtocolStateError
from aggsim.frames import Ampdu, Mpdu

from conftest import make_msdus
from linkharness import build_mpdus, oracle, run_rounds, subsets


def sent_window(n=64, retry_limit=7, retries=None):
    win = BaWindow(64, retry_limit)
    mpdus = build_mpdus(n, per_mpdu=1)
    if retries:
        mpdus = [Mpdu(m.seq_no, m.tid, m.subframes, m.is_amsdu_aggregate, retries.get(m.seq_no, 0)) for m in mpdus]
        win.pending = {m.seq_no: m for m in mpdus}
        win.next_seq = n
    amp = Ampdu(tuple(mpdus))
    win.on_transmit(amp)
    return win, amp


def test_receiver_score_examples():
    _, amp = sent_window()
    bm = receiver_score(amp, {3, 17})
    assert len(bm.bits) == 64 and bm.start_seq == 0
    assert [i for i, b in enumerate(bm.bits) if not b] == [3, 17]
    assert all(receiver_score(amp, set()).bits)
    assert not any(receiver_score(amp, set(range(64))).bits)
    with pytest.raises(InvalidInput):
        receiver_score(amp, {99})


def test_sender_selective_retransmit():
    win, amp = sent_window()
    out = sender_process_ba(win, receiver_score(amp, {3, 17}))
    assert [m.seq_no for m in out.retransmit] == [3, 17]
    assert all(m.retry_count == 1 for m in out.retransmit)
    assert out.released == 62 and out.dropped == []
    assert win.win_start == 3


def test_sender_all_acked_advances_window():
    win, amp = sent_window()
    out = sender_process_ba(win, receiver_score(amp, set()))
    assert out.retransmit == [] and out.released == 64
    assert win.win_start == 64 and win.fresh_room() == 64


def test_sender_drops_at_retry_limit():
    win, amp = sent_window(retry_limit=7, retries={3: 7})
    out = sender_process_ba(win, receiver_score(amp, {3, 17}))
    assert [m.seq_no for m in out.dropped] == [3]
    assert [m.seq_no for m in out.retransmit] == [17]
    assert win.win_start == 17


def test_start_mismatch_is_a_protocol_error():
    win, amp = sent_window()
    with pytest.raises(ProtocolStateError):
        sender_process_ba(win, BaBitmap(5, (True,) * 64))


def test_retry_keeps_whole_amsdu():
    _, _, _, retried = run_rounds(4, [frozenset({1, 2})])
    original = {m.seq_no: [x.id for x in m.msdus] for m in build_mpdus(4)}
    for m in retried:
        assert [x.id for x in m.msdus] == original[m.seq_no]
        assert len(m.msdus) == 2


def test_receiver_releases_in_order_and_skips_drops():
    released, dropped, per_round, _ = run_rounds(5, [frozenset({1}), frozenset({1})], retry_limit=1)
    assert dropped == [1]
    assert per_round[0] == [0, 1]  # seq 0 only; seqs 2..4 wait behind the hole
    assert released == [0, 1, 4, 5, 6, 7, 8, 9]


def test_sequence_wraparound():
    win = BaWindow(8, None, win_start=4090)
    rx = ReorderBuffer(8, expected=4090)
    ms = make_msdus([50] * 8)
    mpdus = [Mpdu.lone(m, (4090 + i) % 4096) for i, m in enumerate(ms)]
    amp = Ampdu(tuple(mpdus))
    win.on_transmit(amp)
    bm, rel = rx.receive(amp, {4095, 1})
    assert [m.id for _, m in rel] == [0, 1, 2, 3, 4]
    out = sender_process_ba(win, bm)
    assert [m.seq_no for m in out.retransmit] == [4095, 1]
    assert win.win_start == 4095 and seq_offset(win.next_seq, 4095) == 3


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("retry_limit", [None, 0])
def test_every_failure_subset(n, retry_limit):
    for fail in subsets(n):
        released, dropped, _, _ = run_rounds(n, [fail], retry_limit=retry_limit)
        exp_ids, exp_dead = oracle(n, [fail], retry_limit)
        assert released == exp_ids
        assert dropped == exp_dead


@pytest.mark.parametrize("n", range(1, 5))
def test_two_round_failure_patterns(n):
    for first in subsets(n):
        for second in subsets(n):
            second = second & first
            for limit in (None, 0, 1):
                released, dropped, _, _ = run_rounds(n, [first, second], retry_limit=limit)
                exp_ids, exp_dead = oracle(n, [first, second], limit)
                assert released == exp_ids
                assert dropped == exp_dead
                assert len(set(released)) == len(released)
