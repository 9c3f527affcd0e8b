"""Closed-form oracles and focused experiments used by tests and scripts.

These bypass the event engine where the question is purely stochastic (how
much payload survives a lossy channel) so that tight confidence targets stay
cheap, while still drawing errors through the same probability model the
engine uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import DELIMITER_LEN, MPDU_FCS_LEN, MPDU_HEADER_LEN, ampdu_total_len
from .phy import PhyProfile, exchange_duration, unit_error_prob


@dataclass(frozen=True)
class AsymmetrySetup:
    """A batch of equal MPDUs sent either per-unit-checksummed or monolithic."""

    unit_count: int = 64
    payload_bytes: int = 1500
    ber: float = 1e-5
    profile: PhyProfile = PhyProfile(ber=1e-5)

    @property
    def mpdu_bytes(self) -> int:
        return MPDU_HEADER_LEN + self.payload_bytes + MPDU_FCS_LEN

    @property
    def aggregate_bytes(self) -> int:
        return ampdu_total_len([self.mpdu_bytes] * self.unit_count)

    @property
    def unit_air_bytes(self) -> int:
        return DELIMITER_LEN + self.mpdu_bytes

    @property
    def exchange_us(self) -> int:
        return exchange_duration(self.aggregate_bytes, self.profile)


def selective_goodput_expected(setup: AsymmetrySetup) -> float:
    """Mb/s when each unit carries its own checksum and retransmits alone.

    Under saturation every transmitted unit independently survives with
    probability (1-ber)^(8*len); slots always carry a unit, so the delivered
    payload rate is count * P(survive) * payload per exchange.
    """
    p_ok = 1.0 - unit_error_prob(setup.unit_air_bytes, setup.ber)
    bits = setup.unit_count * p_ok * setup.payload_bytes * 8
    return bits / setup.exchange_us


def monolithic_goodput_expected(setup: AsymmetrySetup, retry_limit: int = 7) -> float:
    """Mb/s when one checksum covers the whole aggregate (all-or-nothing).

    A fresh aggregate is attempted up to 1 + retry_limit times; expected
    attempts per aggregate and its delivery probability give the rate.
    """
    p_ok = 1.0 - unit_error_prob(setup.aggregate_bytes, setup.ber)
    tries = retry_limit + 1
    p_deliver = 1.0 - (1.0 - p_ok) ** tries
    expected_attempts = p_deliver / p_ok if p_ok > 0 else tries
    bits = setup.unit_count * setup.payload_bytes * 8
    return p_deliver * bits / (expected_attempts * setup.exchange_us)


def selective_goodput_measured(setup: AsymmetrySetup, seed: int, exchanges: int = 2000) -> float:
    """Monte-Carlo goodput of the per-unit-checksum path over full exchanges."""
    rng = np.random.Generator(np.random.PCG64(seed))
    p_err = unit_error_prob(setup.unit_air_bytes, setup.ber)
    delivered_units = 0
    for _ in range(exchanges):
        delivered_units += int(np.count_nonzero(rng.random(setup.unit_count) >= p_err))
    bits = delivered_units * setup.payload_bytes * 8
    return bits / (exchanges * setup.exchange_us)


def monolithic_goodput_measured(
    setup: AsymmetrySetup, seed: int, aggregates: int = 1_200_000, retry_limit: int = 7
) -> float:
    """Monte-Carlo goodput of the single-checksum path.

    Per fresh aggregate, attempts are Bernoulli trials with the
    whole-aggregate survival probability, capped at 1 + retry_limit tries.
    Sampled geometrically in bulk; distribution-identical to drawing one
    corruption flag per attempted exchange.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    p_ok = 1.0 - unit_error_prob(setup.aggregate_bytes, setup.ber)
    tries_cap = retry_limit + 1
    # Geometric sample = attempts until first success (may exceed the cap).
    raw_tries = rng.geometric(p_ok, size=aggregates)
    delivered = raw_tries <= tries_cap
    attempts = np.minimum(raw_tries, tries_cap)
    bits = int(np.count_nonzero(delivered)) * setup.unit_count * setup.payload_bytes * 8
    return bits / (int(attempts.sum()) * setup.exchange_us)


def saturation_ratio_expected(profile: PhyProfile, payload_bytes: int, target: int) -> float:
    """Aggregated-vs-single goodput ratio from the airtime formula alone."""
    mpdu = MPDU_HEADER_LEN + payload_bytes + MPDU_FCS_LEN
    t_single = exchange_duration(mpdu, profile)
    t_agg = exchange_duration(ampdu_total_len([mpdu] * target), profile)
    return (t_single * target) / t_agg
