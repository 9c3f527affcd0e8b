"""Airtime accounting and the per-bit error channel.

Rates are in Mb/s, which equals bits per microsecond, so durations stay in
integer microseconds. MIMO and channel bonding are abstracted into the
single ``data_rate`` scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import block_ack
from .frames import FrameKind


@dataclass(frozen=True)
class PhyProfile:
    """Link-level constants for one simulation run.

    The defaults model a high-throughput station: 248 Mb/s is the peak bit
    rate of the 2.4/5 GHz HT row of the usual standards table (the matching
    sustained throughput figure there is 74 Mb/s); anything up to 600 Mb/s
    is accepted.
    """

    data_rate_mbps: float = 248.0
    basic_rate_mbps: float = 24.0
    preamble_us: int = 40
    sifs_us: int = 16
    difs_us: int = 34
    ber: float = 0.0

    def validate(self) -> None:
        if self.data_rate_mbps <= 0:
            raise ValueError("data_rate_mbps must be positive")
        if self.basic_rate_mbps <= 0:
            raise ValueError("basic_rate_mbps must be positive")
        if not 0.0 <= self.ber <= 1.0:
            raise ValueError("ber must be within [0, 1]")


def tx_duration(nbytes: int, profile: PhyProfile, rate_mbps: float | None = None) -> int:
    """Preamble plus payload airtime, rounded up to a whole microsecond."""
    if nbytes < 0:
        raise ValueError("nbytes must be nonnegative")
    rate = profile.data_rate_mbps if rate_mbps is None else rate_mbps
    if nbytes == 0:
        return profile.preamble_us
    return profile.preamble_us + math.ceil(8 * nbytes / rate)


def ba_duration(profile: PhyProfile) -> int:
    """Airtime of the fixed 32-byte block-ack frame at the basic rate."""
    return tx_duration(block_ack.BA_FRAME_BYTES, profile, profile.basic_rate_mbps)


def exchange_duration(aggregate_bytes: int, profile: PhyProfile) -> int:
    """Full channel occupancy of one exchange: DIFS + data + SIFS + BA."""
    return (
        profile.difs_us
        + tx_duration(aggregate_bytes, profile)
        + profile.sifs_us
        + ba_duration(profile)
    )


def unit_error_prob(len_bytes: int, ber: float) -> float:
    """Probability that at least one of 8*len_bytes bits is flipped."""
    if not 0.0 <= ber <= 1.0:
        raise ValueError("ber must be within [0, 1]")
    if ber == 0.0 or len_bytes == 0:
        return 0.0
    if ber == 1.0:
        return 1.0
    return -math.expm1(8 * len_bytes * math.log1p(-ber))


def apply_errors(desc, profile: PhyProfile, rng) -> list[bool]:
    """Per-unit corruption flags for one transmitted descriptor.

    A-MPDU units are independent Bernoulli trials over their own length
    (delimiter included), so one hit costs one MPDU. Plain and A-MSDU
    transmissions carry a single checksum: one Bernoulli over the whole
    MPDU, and any hit corrupts every contained MSDU.
    """
    if desc.kind is FrameKind.AMPDU:
        return [
            rng.random() < unit_error_prob(n, profile.ber)
            for n in desc.unit_air_lengths()
        ]
    (length,) = desc.unit_air_lengths()
    return [rng.random() < unit_error_prob(length, profile.ber)]
