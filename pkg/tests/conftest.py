import random

import pytest

from aggsim.frames import AccessCategory, AggregateLimits, Mpdu, Msdu

# Addresses chosen so no serialized byte equals the delimiter signature 0x4E.
RX_ADDR = 0x02_00_00_00_00_02
TX_ADDR = 0x02_00_00_00_00_01


def mk_msdu(
    msdu_id=0,
    ac=AccessCategory.VOICE,
    payload_len=100,
    dest=RX_ADDR,
    src=TX_ADDR,
    created_at=0,
    flow_id=0,
) -> Msdu:
    return Msdu(
        id=msdu_id,
        ac=ac,
        dest_addr=dest,
        src_addr=src,
        payload_len=payload_len,
        created_at=created_at,
        flow_id=flow_id,
    )


def mk_mpdu(seq=0, ac=AccessCategory.VIDEO, body_len=300, receiver=RX_ADDR, msdu_ids=None) -> Mpdu:
    return Mpdu(
        seq_no=seq,
        receiver_addr=receiver,
        ac=ac,
        body_len=body_len,
        contained_msdu_ids=list(msdu_ids) if msdu_ids else [],
    )


@pytest.fixture
def limits() -> AggregateLimits:
    return AggregateLimits()


@pytest.fixture
def rnd() -> random.Random:
    return random.Random(0xA6651)
