"""Bit-exact aggregate frame codecs.

On-wire layouts (all offsets in bytes):

A-MSDU body (carried as one MPDU body)::

    | DA (6) | SA (6) | LEN (2, BE) | payload (LEN) | pad (0-3, zeros) |
    repeated; the final subframe carries no pad.

MPDU::

    | FC (2, LE) = 0x0088 | DUR (2) = 0 | addr1 (6) | addr2 (6) | addr3 (6) |
    | seq_ctl (2, LE) = seq_no << 4 | qos_ctl (2, LE) = TID | body | FCS (4, LE) |

A-MPDU::

    | delimiter (4) | MPDU | pad (0-3, zeros) | ... delimiter (4) | MPDU |
    delimiter = | reserved(4b) ++ mpdu_length(12b) (2, BE) | crc8 (1) | 0x4E (1) |

The delimiter CRC-8 uses polynomial 0x07, init 0x00, no reflection, no final
xor. The MPDU FCS is the usual reflected 32-bit CRC (poly 0x04C11DB7, init
and final xor all-ones). Corruption inside an A-MPDU is recoverable: the
decoder rescans in 4-byte steps until it finds the next valid delimiter,
which by construction sits on a 4-byte boundary.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

from .frames import (
    DELIMITER_LEN,
    MPDU_FCS_LEN,
    MPDU_HEADER_LEN,
    SUBFRAME_HEADER_LEN,
    AccessCategory,
    AggregateLimits,
    AmsduSubframe,
    EmptyAggregate,
    FrameKind,
    Mpdu,
    Msdu,
    ampdu_pad_len,
    ampdu_total_len,
    amsdu_total_len,
    subframe_pad_len,
)

DELIMITER_SIGNATURE = 0x4E
QOS_DATA_FC = 0x0088
DEFAULT_TRANSMITTER = 0x02_00_00_00_00_01

# AC -> TID (user priority) and back; TIDs 0..7 all map onto the four ACs.
AC_TO_TID = {
    AccessCategory.BEST_EFFORT: 0,
    AccessCategory.BACKGROUND: 1,
    AccessCategory.VIDEO: 4,
    AccessCategory.VOICE: 6,
}
TID_TO_AC = {
    0: AccessCategory.BEST_EFFORT,
    1: AccessCategory.BACKGROUND,
    2: AccessCategory.BACKGROUND,
    3: AccessCategory.BEST_EFFORT,
    4: AccessCategory.VIDEO,
    5: AccessCategory.VIDEO,
    6: AccessCategory.VOICE,
    7: AccessCategory.VOICE,
}


class CodecError(ValueError):
    pass


class MixedTid(CodecError):
    pass


class MixedDestination(CodecError):
    pass


class MixedReceiver(CodecError):
    pass


class LimitExceeded(CodecError):
    pass


class TooManyMpdus(CodecError):
    pass


class TruncatedSubframe(CodecError):
    pass


@dataclass(frozen=True)
class ByteFrame:
    kind: FrameKind
    data: bytes

    def __len__(self) -> int:
        return len(self.data)


@dataclass(frozen=True)
class DecodedSubframe:
    """Wire-visible content of one A-MSDU subframe."""

    da: int
    sa: int
    payload: bytes

    @property
    def payload_len(self) -> int:
        return len(self.payload)


@dataclass(frozen=True)
class DecodedMpdu:
    """One MPDU recovered from an A-MPDU: parsed header plus raw body."""

    mpdu: Mpdu
    body: bytes


@dataclass
class DecodeReport:
    """Outcome of scanning an A-MPDU buffer.

    ``recovered`` + ``skipped_regions`` + inter-unit padding tile the buffer
    without overlap; FCS-failed units land in ``skipped_regions`` and bump
    ``crc_failures``.
    """

    recovered: list[DecodedMpdu] = field(default_factory=list)
    skipped_regions: list[tuple[int, int]] = field(default_factory=list)
    crc_failures: int = 0


_CRC8_TABLE = []
for _v in range(256):
    for _ in range(8):
        _v = ((_v << 1) ^ 0x07) & 0xFF if _v & 0x80 else (_v << 1) & 0xFF
    _CRC8_TABLE.append(_v)


def crc8(data: bytes) -> int:
    """CRC-8, polynomial 0x07, init 0x00, unreflected, no final xor."""
    crc = 0
    for b in data:
        crc = _CRC8_TABLE[crc ^ b]
    return crc


def fcs32(data: bytes) -> int:
    """32-bit frame check sequence (standard reflected CRC-32)."""
    return zlib.crc32(data) & 0xFFFFFFFF


def synth_payload(key: int, length: int) -> bytes:
    """Deterministic filler payload keyed by an MSDU/MPDU identity.

    Byte 0x4E never occurs, so filler can never fake a delimiter signature.
    """
    out = bytearray(length)
    state = (key * 0x9E3779B1 + 0x7F4A7C15) & 0xFFFFFFFF
    for i in range(length):
        state = (state * 1103515245 + 12345) & 0xFFFFFFFF
        b = (state >> 16) & 0xFF
        out[i] = b if b != DELIMITER_SIGNATURE else 0x00
    return bytes(out)


def addr_to_bytes(addr: int) -> bytes:
    return addr.to_bytes(6, "big")


def addr_from_bytes(raw: bytes) -> int:
    return int.from_bytes(raw, "big")


# ---------------------------------------------------------------------------
# A-MSDU


def encode_amsdu(
    msdus: list[Msdu],
    limits: AggregateLimits,
    payload_of=None,
) -> ByteFrame:
    """Serialize MSDUs into one aggregate body (one MPDU payload).

    All members must share the access category and destination; the result
    must fit under ``limits.amsdu_max``. ``payload_of`` maps an Msdu to its
    payload octets (defaults to the deterministic filler keyed by id).
    """
    if not msdus:
        raise EmptyAggregate("A-MSDU needs at least one MSDU")
    if len({m.ac for m in msdus}) != 1:
        raise MixedTid("A-MSDU members must share one traffic identifier")
    if len({m.dest_addr for m in msdus}) != 1:
        raise MixedDestination("A-MSDU members must share one destination")
    total = amsdu_total_len([m.payload_len for m in msdus])
    if total > limits.amsdu_max:
        raise LimitExceeded(f"A-MSDU length {total} exceeds {limits.amsdu_max}")
    if payload_of is None:
        payload_of = lambda m: synth_payload(m.id, m.payload_len)

    out = bytearray()
    last = len(msdus) - 1
    for i, m in enumerate(msdus):
        payload = payload_of(m)
        if len(payload) != m.payload_len:
            raise CodecError("payload bytes disagree with payload_len")
        out += addr_to_bytes(m.dest_addr)
        out += addr_to_bytes(m.src_addr)
        out += struct.pack(">H", m.payload_len)
        out += payload
        out += b"\x00" * subframe_pad_len(m.payload_len, i == last)
    assert len(out) == total
    return ByteFrame(FrameKind.AMSDU, bytes(out))


def decode_amsdu(frame: ByteFrame) -> list[DecodedSubframe]:
    """Parse an aggregate MSDU body back into its subframes.

    Strict inverse of :func:`encode_amsdu`: trailing or mid-buffer garbage
    raises :class:`TruncatedSubframe`.
    """
    if frame.kind is not FrameKind.AMSDU:
        raise CodecError(f"expected AMSDU frame, got {frame.kind.name}")
    buf = frame.data
    out: list[DecodedSubframe] = []
    offset = 0
    n = len(buf)
    while offset < n:
        if n - offset < SUBFRAME_HEADER_LEN:
            raise TruncatedSubframe(f"subframe header truncated at offset {offset}")
        da = addr_from_bytes(buf[offset : offset + 6])
        sa = addr_from_bytes(buf[offset + 6 : offset + 12])
        (length,) = struct.unpack(">H", buf[offset + 12 : offset + 14])
        end = offset + SUBFRAME_HEADER_LEN + length
        if end > n:
            raise TruncatedSubframe(
                f"length field {length} exceeds remaining {n - offset - SUBFRAME_HEADER_LEN} bytes"
            )
        out.append(DecodedSubframe(da, sa, bytes(buf[offset + 14 : end])))
        offset = end
        if offset < n:
            offset += subframe_pad_len(length, is_last=False)
            if n - offset < SUBFRAME_HEADER_LEN:
                raise TruncatedSubframe(f"trailing bytes at offset {offset}")
    return out


def amsdu_subframes(msdus: list[Msdu]) -> list[AmsduSubframe]:
    """Subframe descriptors (header fields + pad) for a member list."""
    last = len(msdus) - 1
    return [
        AmsduSubframe(
            da=m.dest_addr,
            sa=m.src_addr,
            length=m.payload_len,
            payload_len=m.payload_len,
            pad_len=subframe_pad_len(m.payload_len, i == last),
        )
        for i, m in enumerate(msdus)
    ]


# ---------------------------------------------------------------------------
# MPDU


def encode_mpdu(mpdu: Mpdu, body: bytes, transmitter_addr: int = DEFAULT_TRANSMITTER) -> bytes:
    """Serialize one MPDU: 26-byte QoS data header, body, 4-byte FCS."""
    if len(body) != mpdu.body_len:
        raise CodecError(f"body is {len(body)} bytes, mpdu.body_len says {mpdu.body_len}")
    hdr = struct.pack("<HH", QOS_DATA_FC, 0)
    hdr += addr_to_bytes(mpdu.receiver_addr)
    hdr += addr_to_bytes(transmitter_addr)
    hdr += addr_to_bytes(transmitter_addr)
    hdr += struct.pack("<H", (mpdu.seq_no << 4) & 0xFFFF)
    hdr += struct.pack("<H", AC_TO_TID[mpdu.ac])
    raw = hdr + body
    return raw + struct.pack("<I", fcs32(raw))


def decode_mpdu(raw: bytes, check_fcs: bool = True) -> DecodedMpdu:
    """Parse one serialized MPDU; raises on FCS mismatch when checking."""
    if len(raw) < MPDU_HEADER_LEN + MPDU_FCS_LEN:
        raise TruncatedSubframe(f"MPDU of {len(raw)} bytes is shorter than header+FCS")
    if check_fcs:
        (got,) = struct.unpack("<I", raw[-4:])
        if fcs32(raw[:-4]) != got:
            raise CodecError("FCS mismatch")
    receiver = addr_from_bytes(raw[4:10])
    (seq_ctl,) = struct.unpack("<H", raw[22:24])
    (qos_ctl,) = struct.unpack("<H", raw[24:26])
    body = bytes(raw[MPDU_HEADER_LEN:-MPDU_FCS_LEN])
    mpdu = Mpdu(
        seq_no=(seq_ctl >> 4) & 0x0FFF,
        receiver_addr=receiver,
        ac=TID_TO_AC[qos_ctl & 0x0F],
        body_len=len(body),
    )
    return DecodedMpdu(mpdu, body)


# ---------------------------------------------------------------------------
# A-MPDU


def encode_delimiter(mpdu_length: int, reserved: int = 0) -> bytes:
    if mpdu_length > 0x0FFF:
        raise CodecError(f"delimiter length field overflow: {mpdu_length}")
    head = struct.pack(">H", ((reserved & 0xF) << 12) | mpdu_length)
    return head + bytes([crc8(head), DELIMITER_SIGNATURE])


def decode_delimiter(raw: bytes) -> tuple[int, int] | None:
    """(reserved, mpdu_length) when the 4 bytes form a valid delimiter."""
    if len(raw) != DELIMITER_LEN:
        return None
    if raw[3] != DELIMITER_SIGNATURE or crc8(raw[:2]) != raw[2]:
        return None
    (head,) = struct.unpack(">H", raw[:2])
    return head >> 12, head & 0x0FFF


def encode_ampdu(
    mpdus: list[Mpdu],
    limits: AggregateLimits,
    body_of=None,
    transmitter_addr: int = DEFAULT_TRANSMITTER,
) -> ByteFrame:
    """Serialize delimiter-prefixed MPDUs into one PHY transmission unit."""
    if not mpdus:
        raise EmptyAggregate("A-MPDU needs at least one MPDU")
    if len(mpdus) > limits.ampdu_max_mpdus:
        raise TooManyMpdus(f"{len(mpdus)} MPDUs exceeds {limits.ampdu_max_mpdus}")
    if len({m.receiver_addr for m in mpdus}) != 1:
        raise MixedReceiver("A-MPDU members must share one receiver address")
    total = ampdu_total_len([m.total_len for m in mpdus])
    if total > limits.ampdu_max_bytes:
        raise LimitExceeded(f"A-MPDU length {total} exceeds {limits.ampdu_max_bytes}")
    if body_of is None:
        body_of = lambda m: synth_payload(m.seq_no, m.body_len)

    out = bytearray()
    last = len(mpdus) - 1
    for i, m in enumerate(mpdus):
        raw = encode_mpdu(m, body_of(m), transmitter_addr)
        out += encode_delimiter(len(raw))
        out += raw
        out += b"\x00" * ampdu_pad_len(len(raw), i == last)
    assert len(out) == total
    return ByteFrame(FrameKind.AMPDU, bytes(out))


def decode_ampdu(frame: ByteFrame) -> DecodeReport:
    """Scan an A-MPDU buffer, resynchronizing across corrupted regions.

    At each 4-aligned offset the scanner reads a candidate delimiter. A valid
    delimiter yields an MPDU extraction (FCS-checked; failures are counted
    and the region skipped); an invalid one advances the scan by 4 bytes.
    Never reads past the buffer.
    """
    if frame.kind is not FrameKind.AMPDU:
        raise CodecError(f"expected AMPDU frame, got {frame.kind.name}")
    buf = frame.data
    n = len(buf)
    report = DecodeReport()
    skip_start: int | None = None
    offset = 0

    def close_skip(end: int) -> None:
        nonlocal skip_start
        if skip_start is not None:
            report.skipped_regions.append((skip_start, end - skip_start))
            skip_start = None

    while offset + DELIMITER_LEN <= n:
        parsed = decode_delimiter(buf[offset : offset + DELIMITER_LEN])
        mpdu_end = None if parsed is None else offset + DELIMITER_LEN + parsed[1]
        if parsed is None or mpdu_end > n:
            # Not a delimiter (or one that would overrun the buffer): step 4.
            if skip_start is None:
                skip_start = offset
            offset += 4
            continue
        region_end = mpdu_end + ampdu_pad_len(parsed[1], is_last=(mpdu_end >= n))
        region_end = min(region_end, n)
        raw = buf[offset + DELIMITER_LEN : mpdu_end]
        try:
            decoded = decode_mpdu(raw, check_fcs=True)
        except CodecError:
            # Delimiter fine, unit corrupt: count it, resume after the region.
            report.crc_failures += 1
            if skip_start is None:
                skip_start = offset
            close_skip(region_end)
            offset = region_end
            continue
        close_skip(offset)
        report.recovered.append(decoded)
        offset = region_end
    close_skip(n)
    return report
