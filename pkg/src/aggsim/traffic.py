"""Seedable per-access-category traffic sources.

Each flow owns a PCG64 substream spawned from the scenario's master seed,
so a (scenario, seed) pair always produces byte-identical arrival traces.
Saturated flows generate nothing here; the engine keeps them backlogged.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .frames import AccessCategory, Msdu

RNG_ALGORITHM = "PCG64"

# Single-link defaults: one transmitter, one receiver.
DEFAULT_DEST_ADDR = 0x02_00_00_00_00_02
DEFAULT_SRC_ADDR = 0x02_00_00_00_00_01


class FlowEnded(Exception):
    """Raised when the next arrival would land at or past the flow's stop time."""


@dataclass(frozen=True)
class Cbr:
    period_us: int
    payload_bytes: int


@dataclass(frozen=True)
class Poisson:
    rate_per_s: float
    payload_bytes: int


@dataclass(frozen=True)
class OnOff:
    on_us: int
    off_us: int
    period_us: int
    payload_bytes: int


TrafficModel = Union[Cbr, Poisson, OnOff]


@dataclass(frozen=True)
class FlowSpec:
    flow_id: int
    ac: AccessCategory
    model: TrafficModel
    start_us: int = 0
    stop_us: int = 2**62
    saturated: bool = False
    dest_addr: int = DEFAULT_DEST_ADDR
    src_addr: int = DEFAULT_SRC_ADDR

    def validate(self) -> None:
        if self.saturated:
            return
        if self.start_us >= self.stop_us:
            raise ValueError("flow start must precede stop")
        if isinstance(self.model, Cbr) and self.model.period_us <= 0:
            raise ValueError("CBR period must be positive")
        if isinstance(self.model, Poisson) and self.model.rate_per_s <= 0:
            raise ValueError("Poisson rate must be positive")
        if isinstance(self.model, OnOff):
            if self.model.period_us <= 0:
                raise ValueError("on/off period must be positive")
            if self.model.on_us <= 0 or self.model.off_us < 0:
                raise ValueError("on/off phase durations invalid")

    @property
    def payload_bytes(self) -> int:
        return self.model.payload_bytes


def flow_rng(master_seed: int, flow_id: int) -> np.random.Generator:
    """Independent substream for one flow, derived from the master seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, flow_id))))


def _in_on_phase(flow: FlowSpec, t: int) -> bool:
    model = flow.model
    cycle = model.on_us + model.off_us
    return (t - flow.start_us) % cycle < model.on_us


def next_arrival(
    flow: FlowSpec,
    rng: np.random.Generator,
    last_us: int,
    msdu_id: int = 0,
) -> tuple[int, Msdu]:
    """Time and MSDU of the arrival after ``last_us``.

    CBR arrivals sit on the grid start + k*period; Poisson draws an
    exponential gap from the flow's substream; on/off keeps the CBR grid but
    drops every instant that falls in an off phase.
    """
    if last_us >= flow.stop_us:
        raise FlowEnded(f"flow {flow.flow_id} stopped at {flow.stop_us}")
    model = flow.model
    if isinstance(model, Cbr):
        t = max(last_us, flow.start_us) + model.period_us
    elif isinstance(model, Poisson):
        gap_us = rng.exponential(1e6 / model.rate_per_s)
        t = max(last_us, flow.start_us) + max(1, int(round(gap_us)))
    else:
        t = max(last_us, flow.start_us) + model.period_us
        while not _in_on_phase(flow, t):
            cycle = model.on_us + model.off_us
            k = (t - flow.start_us) // cycle + 1
            next_on = flow.start_us + k * cycle
            # Re-align to the CBR grid at or after the next on-phase start.
            steps = -(-(next_on - flow.start_us) // model.period_us)
            t = flow.start_us + steps * model.period_us
            if t >= flow.stop_us:
                raise FlowEnded(f"flow {flow.flow_id} stopped at {flow.stop_us}")
    if t >= flow.stop_us:
        raise FlowEnded(f"flow {flow.flow_id} stopped at {flow.stop_us}")
    msdu = Msdu(
        id=msdu_id,
        ac=flow.ac,
        dest_addr=flow.dest_addr,
        src_addr=flow.src_addr,
        payload_len=model.payload_bytes,
        created_at=t,
        flow_id=flow.flow_id,
    )
    return t, msdu


def flow_arrivals(flow: FlowSpec, rng: np.random.Generator) -> Iterator[tuple[int, FlowSpec]]:
    """All (time, flow) arrival stamps of one non-saturated flow."""
    last = flow.start_us
    while True:
        try:
            last, _ = next_arrival(flow, rng, last)
        except FlowEnded:
            return
        yield last, flow


def build_trace(
    flows: list[FlowSpec],
    duration_us: int,
    master_seed: int,
) -> list[Msdu]:
    """Merged, id-stamped arrival trace of every non-saturated flow.

    The trace depends only on (flows, duration, seed), never on scheduler
    policy, so policy comparisons replay identical arrivals.
    """
    streams = []
    for idx, flow in enumerate(flows):
        if flow.saturated:
            continue
        bounded = FlowSpec(
            flow_id=flow.flow_id,
            ac=flow.ac,
            model=flow.model,
            start_us=flow.start_us,
            stop_us=min(flow.stop_us, duration_us),
            saturated=False,
            dest_addr=flow.dest_addr,
            src_addr=flow.src_addr,
        )
        rng = flow_rng(master_seed, flow.flow_id)
        streams.append(((t, idx, f) for t, f in flow_arrivals(bounded, rng)))
    merged = heapq.merge(*streams, key=lambda item: (item[0], item[1]))
    trace: list[Msdu] = []
    for next_id, (t, _idx, flow) in enumerate(merged):
        trace.append(
            Msdu(
                id=next_id,
                ac=flow.ac,
                dest_addr=flow.dest_addr,
                src_addr=flow.src_addr,
                payload_len=flow.payload_bytes,
                created_at=t,
                flow_id=flow.flow_id,
            )
        )
    return trace
