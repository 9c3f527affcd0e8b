"""Block-ack bitmap construction and retransmission-set computation."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aggsim.block_ack import WINDOW, SeqOutOfWindow, make_block_ack, missing_seqs
from aggsim.frames import SEQ_MODULO


def oracle_bitmap(received: set[int], start: int) -> int:
    """Direct enumeration over the 64 window positions."""
    bitmap = 0
    for i in range(WINDOW):
        if (start + i) % SEQ_MODULO in received:
            bitmap |= 1 << i
    return bitmap


def test_examples():
    ba = make_block_ack({100, 101, 103}, 100)
    assert ba.bitmap == 0x0B

    assert make_block_ack(set(), 0).bitmap == 0

    ba = make_block_ack({4090, 2}, 4090)
    assert ba.bitmap == (1 << 0) | (1 << 8)


def test_out_of_window_rejected():
    with pytest.raises(SeqOutOfWindow):
        make_block_ack({100, 164}, 100)
    with pytest.raises(SeqOutOfWindow):
        make_block_ack({99}, 100)  # behind the start wraps to offset 4095


def test_missing_examples():
    ba = make_block_ack({100, 101, 103}, 100)
    sent = list(range(100, 108))
    assert missing_seqs(ba, sent) == [102, 104, 105, 106, 107]

    full = make_block_ack(set(sent), 100)
    assert missing_seqs(full, sent) == []

    empty = make_block_ack(set(), 100)
    assert missing_seqs(empty, sent) == sent


def test_missing_out_of_window():
    ba = make_block_ack({10}, 10)
    with pytest.raises(SeqOutOfWindow):
        missing_seqs(ba, [10, 90])


@given(
    st.integers(min_value=0, max_value=SEQ_MODULO - 1),
    st.sets(st.integers(min_value=0, max_value=WINDOW - 1), max_size=WINDOW),
)
def test_bitmap_matches_enumeration_oracle(start, offsets):
    received = {(start + off) % SEQ_MODULO for off in offsets}
    ba = make_block_ack(received, start)
    assert ba.bitmap == oracle_bitmap(received, start)


@given(
    st.integers(min_value=0, max_value=SEQ_MODULO - 1),
    st.sets(st.integers(min_value=0, max_value=WINDOW - 1), max_size=WINDOW),
    st.lists(st.integers(min_value=0, max_value=WINDOW - 1), max_size=WINDOW, unique=True),
)
def test_partition_exact(start, acked_offsets, sent_offsets):
    """Every sent seq lands in exactly one of {acked, missing}."""
    received = {(start + off) % SEQ_MODULO for off in acked_offsets}
    sent = [(start + off) % SEQ_MODULO for off in sent_offsets]
    ba = make_block_ack(received, start)
    missing = missing_seqs(ba, sent)
    acked = [s for s in sent if s in received]
    assert sorted(missing + acked) == sorted(sent)
    assert all(s not in received for s in missing)
    # Order preservation
    assert missing == [s for s in sent if s not in received]
