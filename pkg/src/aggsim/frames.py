"""Frame domain types and the size/padding arithmetic shared by every layer.

All lengths are in bytes, all timestamps in integer microseconds. The types
here are plain values; none of them owns mutable shared state.

Size model:
  MSDU            upper-layer packet, 1..2304 payload bytes
  A-MSDU subframe DA(6) + SA(6) + LEN(2) + payload + 0-3 pad bytes
  MPDU            26-byte QoS data header + body + 4-byte FCS
  A-MPDU sub-unit 4-byte delimiter + MPDU + 0-3 pad bytes
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import total_ordering

SUBFRAME_HEADER_LEN = 14  # DA(6) + SA(6) + length(2)
MPDU_HEADER_LEN = 26      # fc(2) dur(2) addr1/2/3(18) seqctl(2) qosctl(2)
MPDU_FCS_LEN = 4
DELIMITER_LEN = 4
MSDU_MAX_PAYLOAD = 2304
SEQ_MODULO = 4096


class InvalidPayload(ValueError):
    """MSDU payload length outside 1..2304."""


class EmptyAggregate(ValueError):
    """Aggregate construction attempted with no members."""


class DelimiterOverflow(ValueError):
    """MPDU too long for the 12-bit delimiter length field."""


@total_ordering
class AccessCategory(Enum):
    """QoS access category; ordering is priority (VOICE highest)."""

    VOICE = "voice"
    VIDEO = "video"
    BEST_EFFORT = "best_effort"
    BACKGROUND = "background"

    @property
    def priority(self) -> int:
        return _AC_PRIORITY[self]

    def __lt__(self, other: "AccessCategory") -> bool:
        if not isinstance(other, AccessCategory):
            return NotImplemented
        return self.priority < other.priority


_AC_PRIORITY = {
    AccessCategory.VOICE: 3,
    AccessCategory.VIDEO: 2,
    AccessCategory.BEST_EFFORT: 1,
    AccessCategory.BACKGROUND: 0,
}

# Display / report ordering: highest priority first.
AC_ORDER = (
    AccessCategory.VOICE,
    AccessCategory.VIDEO,
    AccessCategory.BEST_EFFORT,
    AccessCategory.BACKGROUND,
)


class FrameKind(IntEnum):
    PLAIN_MSDU = 0
    AMSDU = 1
    AMPDU = 2


@dataclass(frozen=True)
class Msdu:
    """Upper-layer packet handed to the MAC."""

    id: int
    ac: AccessCategory
    dest_addr: int  # 48-bit
    src_addr: int   # 48-bit
    payload_len: int
    created_at: int  # microseconds
    flow_id: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.payload_len <= MSDU_MAX_PAYLOAD:
            raise InvalidPayload(
                f"payload_len {self.payload_len} outside 1..{MSDU_MAX_PAYLOAD}"
            )


@dataclass(frozen=True)
class AmsduSubframe:
    """One subframe of an aggregate MSDU body."""

    da: int
    sa: int
    length: int      # value of the 16-bit length field == payload_len
    payload_len: int
    pad_len: int


@dataclass
class Mpdu:
    """MAC frame as handed to the PHY; length = 26 + body_len + 4.

    ``retries`` and ``contained_msdu_ids`` are transmitter-side bookkeeping
    and never appear on the wire.
    """

    seq_no: int              # 12-bit, modulo 4096
    receiver_addr: int
    ac: AccessCategory
    body_len: int
    retries: int = 0
    contained_msdu_ids: list[int] = field(default_factory=list)

    header_len: int = MPDU_HEADER_LEN
    fcs_len: int = MPDU_FCS_LEN

    @property
    def total_len(self) -> int:
        return self.header_len + self.body_len + self.fcs_len


@dataclass(frozen=True)
class MpduDelimiter:
    """4-byte sub-unit delimiter: reserved(4b) length(12b) crc8(8b) sig(8b)."""

    reserved: int
    mpdu_length: int
    crc8: int
    signature: int = 0x4E


@dataclass(frozen=True)
class AggregateLimits:
    """Hard size caps for the two aggregate kinds."""

    amsdu_max: int = 3839          # or 7935
    ampdu_max_bytes: int = 65535
    ampdu_max_mpdus: int = 64

    def __post_init__(self) -> None:
        if self.amsdu_max not in (3839, 7935):
            raise ValueError(f"amsdu_max must be 3839 or 7935, got {self.amsdu_max}")


def subframe_pad_len(payload_len: int, is_last: bool) -> int:
    """Pad bytes appended to a subframe so the next one starts 4-aligned.

    The final subframe is never padded.
    """
    if payload_len == 0:
        raise InvalidPayload("subframe payload must be nonempty")
    if is_last:
        return 0
    return (4 - (SUBFRAME_HEADER_LEN + payload_len) % 4) % 4


def amsdu_total_len(payload_lens: list[int]) -> int:
    """Serialized length of an aggregate MSDU body with the given payloads."""
    if not payload_lens:
        raise EmptyAggregate("A-MSDU needs at least one subframe")
    last = len(payload_lens) - 1
    return sum(
        SUBFRAME_HEADER_LEN + p + subframe_pad_len(p, i == last)
        for i, p in enumerate(payload_lens)
    )


def ampdu_pad_len(mpdu_len: int, is_last: bool) -> int:
    if is_last:
        return 0
    return (4 - mpdu_len % 4) % 4


def ampdu_total_len(mpdu_lens: list[int]) -> int:
    """Serialized length of an aggregate of delimiter-prefixed MPDUs."""
    if not mpdu_lens:
        raise EmptyAggregate("A-MPDU needs at least one MPDU")
    last = len(mpdu_lens) - 1
    total = 0
    for i, n in enumerate(mpdu_lens):
        if n > 0x0FFF:
            raise DelimiterOverflow(f"MPDU length {n} exceeds 4095")
        total += DELIMITER_LEN + n + ampdu_pad_len(n, i == last)
    return total


def fits_in_amsdu(current_len: int, next_payload: int, limits: AggregateLimits) -> bool:
    """Whether one more subframe fits under the A-MSDU cap.

    ``current_len`` is the serialized length so far (last subframe unpadded).
    Appending re-pads the old last subframe to a 4-byte boundary, then adds
    a 14-byte header plus the new payload.
    """
    if current_len == 0:
        return SUBFRAME_HEADER_LEN + next_payload <= limits.amsdu_max
    repadded = current_len + (4 - current_len % 4) % 4
    return repadded + SUBFRAME_HEADER_LEN + next_payload <= limits.amsdu_max


def seq_distance(seq: int, base: int) -> int:
    """Forward distance from ``base`` to ``seq`` modulo 4096."""
    return (seq - base) % SEQ_MODULO
