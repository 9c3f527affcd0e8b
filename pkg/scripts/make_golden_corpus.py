#!/usr/bin/env python3
"""Regenerate the frozen frame corpus under tests/golden/.

Each file is one encoded aggregate; manifest.txt lists, per line:
    <filename> <kind> <unit_count> <byte_length>

The files are committed so codec regressions against previously produced
bytes are caught even if encoder and decoder drift together.
"""

import argparse
from pathlib import Path

from aggsim.codec import encode_ampdu, encode_amsdu
from aggsim.frames import AccessCategory, AggregateLimits, Mpdu, Msdu

RX = 0x02_00_00_00_00_02
TX = 0x02_00_00_00_00_01

CASES = [
    # (name, kind, payload/body lengths, access category)
    ("amsdu_single_min", "amsdu", [1], AccessCategory.VOICE),
    ("amsdu_single_100", "amsdu", [100], AccessCategory.VOICE),
    ("amsdu_pair_aligned", "amsdu", [50, 50], AccessCategory.VOICE),
    ("amsdu_pair_padded", "amsdu", [51, 51], AccessCategory.VIDEO),
    ("amsdu_voice_burst", "amsdu", [160] * 12, AccessCategory.VOICE),
    ("amsdu_near_max", "amsdu", [2304, 1500], AccessCategory.VIDEO),
    ("ampdu_single_tiny", "ampdu", [1], AccessCategory.VIDEO),
    ("ampdu_pair", "ampdu", [70, 70], AccessCategory.VIDEO),
    ("ampdu_pad_variety", "ampdu", [1, 2, 3, 4, 500], AccessCategory.BEST_EFFORT),
    ("ampdu_video_16", "ampdu", [1300] * 16, AccessCategory.VIDEO),
    ("ampdu_full_64", "ampdu", [600] * 64, AccessCategory.BACKGROUND),
    ("ampdu_mixed_sizes", "ampdu", [33, 1500, 7, 2304, 900], AccessCategory.VIDEO),
]


def build(out_dir: Path) -> None:
    limits = AggregateLimits(amsdu_max=7935)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for name, kind, lens, ac in CASES:
        if kind == "amsdu":
            msdus = [
                Msdu(id=i, ac=ac, dest_addr=RX, src_addr=TX, payload_len=n, created_at=0)
                for i, n in enumerate(lens)
            ]
            frame = encode_amsdu(msdus, limits)
        else:
            mpdus = [Mpdu(seq_no=i, receiver_addr=RX, ac=ac, body_len=n) for i, n in enumerate(lens)]
            frame = encode_ampdu(mpdus, limits)
        path = out_dir / f"{name}.bin"
        path.write_bytes(frame.data)
        lines.append(f"{path.name} {kind} {len(lens)} {len(frame.data)}")
    (out_dir / "manifest.txt").write_text("\n".join(lines) + "\n")
    print(f"wrote {len(CASES)} frames to {out_dir}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=Path(__file__).parent.parent / "tests" / "golden",
        type=Path,
    )
    build(parser.parse_args().out)
