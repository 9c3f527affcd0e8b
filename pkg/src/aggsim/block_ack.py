"""Compressed block acknowledgement over a 64-frame window.

A block ack carries a 12-bit starting sequence number and a 64-bit bitmap;
bit i acknowledges sequence number (starting_seq + i) mod 4096. One control
frame therefore confirms up to 64 MPDUs of a single transmission.
"""

from __future__ import annotations

from dataclasses import dataclass

from .frames import SEQ_MODULO, seq_distance

WINDOW = 64
BA_FRAME_BYTES = 32  # fixed-size control frame, sent at the basic rate


class SeqOutOfWindow(ValueError):
    """Sequence number more than 63 ahead of the window start."""


@dataclass(frozen=True)
class BlockAck:
    starting_seq: int
    bitmap: int  # 64 bits; bit i <=> seq (starting_seq + i) mod 4096 received

    def acks(self, seq: int) -> bool:
        off = seq_distance(seq, self.starting_seq)
        if off >= WINDOW:
            raise SeqOutOfWindow(f"seq {seq} outside window at {self.starting_seq}")
        return bool(self.bitmap >> off & 1)


def make_block_ack(received: set[int], starting_seq: int) -> BlockAck:
    """Build the bitmap acknowledging ``received`` relative to ``starting_seq``."""
    bitmap = 0
    for seq in received:
        off = seq_distance(seq % SEQ_MODULO, starting_seq)
        if off >= WINDOW:
            raise SeqOutOfWindow(f"seq {seq} outside window at {starting_seq}")
        bitmap |= 1 << off
    return BlockAck(starting_seq % SEQ_MODULO, bitmap)


def missing_seqs(ba: BlockAck, sent: list[int]) -> list[int]:
    """Sent sequence numbers the bitmap does not acknowledge, order preserved."""
    return [s for s in sent if not ba.acks(s)]
