"""Deterministic discrete-event loop for one sender-receiver link.

One engine instance is single-threaded and strictly deterministic: events
are totally ordered by (time, kind priority, insertion counter), and all
randomness comes from substreams derived from the scenario seed. Identical
(scenario, seed) pairs therefore produce identical reports, byte for byte.

An exchange occupies the channel for DIFS + data airtime + SIFS + block-ack
airtime; at most one exchange is in flight. Arrivals stop at the scenario
duration; the in-flight exchange is allowed to complete (a 10 ms drain
grace bounds this) and whatever is still queued is reported as residual,
not as drops.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from . import block_ack, phy, traffic
from .block_ack import BlockAck, make_block_ack, missing_seqs
from .frames import AC_ORDER, AccessCategory, FrameKind, Msdu
from .scheduler import SchedulerBase, TxDescriptor, make_scheduler

DRAIN_GRACE_US = 10_000
DEFAULT_RETRY_LIMIT = 7
SATURATED_BACKLOG = 128
CHANNEL_STREAM_KEY = 1 << 40  # keeps the channel substream clear of flow ids


class SimInvariantError(RuntimeError):
    """An internal consistency check failed; the run is not trustworthy."""


class EventKind(IntEnum):
    # Value doubles as the tie-break priority at equal times.
    TX_COMPLETE = 0
    BA_RECEIVED = 1
    VOICE_EXPIRY = 2
    SHARED_EXPIRY = 3
    ARRIVAL = 4
    SIM_END = 5


@dataclass
class AcMetrics:
    generated: int = 0
    delivered: int = 0
    delivered_payload_bytes: int = 0
    goodput_mbps: float = 0.0
    lat_mean_us: float = 0.0
    lat_p95_us: float = 0.0
    lat_max_us: float = 0.0
    jitter_us: float = 0.0
    retransmitted_mpdus: int = 0
    dropped_overflow: int = 0
    dropped_retry: int = 0
    residual: int = 0

    @property
    def dropped(self) -> int:
        return self.dropped_overflow + self.dropped_retry


@dataclass
class MetricsReport:
    """Per-access-category and link-global counters for one finished run.

    Latency is measured from MSDU creation to block-ack confirmation.
    """

    policy: str
    seed: int
    duration_us: int
    per_ac: dict[AccessCategory, AcMetrics]
    airtime_busy: float
    aggregation_efficiency: float
    size_histogram: dict[int, int]
    rng_algorithm: str = traffic.RNG_ALGORITHM

    def ac(self, ac: AccessCategory) -> AcMetrics:
        return self.per_ac[ac]


@dataclass
class _InFlight:
    desc: TxDescriptor
    tx_start: int
    flags: list[bool] | None = None
    ba: BlockAck | None = None


def _percentile95(sorted_values: list[int]) -> float:
    idx = -(-95 * len(sorted_values) // 100) - 1  # nearest-rank
    return float(sorted_values[idx])


class Engine:
    def __init__(self, scenario, seed: int | None = None, policy=None, trace: list[Msdu] | None = None):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.profile = scenario.phy
        sched_config = scenario.scheduler
        if policy is not None and policy is not sched_config.policy:
            sched_config = replace(sched_config, policy=policy)
        self.policy = sched_config.policy
        self.sched: SchedulerBase = make_scheduler(sched_config)
        self.duration_us = scenario.duration_us
        self.retry_limit = getattr(scenario, "retry_limit", DEFAULT_RETRY_LIMIT)

        self.trace = (
            traffic.build_trace(scenario.flows, self.duration_us, self.seed)
            if trace is None
            else trace
        )
        self.saturated_flows = [f for f in scenario.flows if f.saturated]
        self._next_id = len(self.trace)
        self._chan_rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((self.seed, CHANNEL_STREAM_KEY)))
        )

        self._heap: list[tuple[int, int, int, EventKind, object]] = []
        self._tie = 0
        self._in_flight: _InFlight | None = None
        self._scheduled_timers: set[tuple[EventKind, int]] = set()
        self._live: dict[int, Msdu] = {}
        self._msdu_retries: dict[int, int] = {}

        self.metrics = {ac: AcMetrics() for ac in AC_ORDER}
        self._latencies: dict[AccessCategory, list[int]] = {ac: [] for ac in AC_ORDER}
        self._jitter_acc: dict[AccessCategory, list] = {ac: [0.0, 0] for ac in AC_ORDER}
        self._last_latency: dict[int, int] = {}
        self._busy_us = 0
        self._on_air_bytes = 0
        self._ba_count = 0
        self._histogram: dict[int, int] = {}
        self.event_log = self.sched.event_log  # timers logged by the scheduler

    # -- event plumbing -----------------------------------------------------
    def _push(self, time_us: int, kind: EventKind, payload=None) -> None:
        heapq.heappush(self._heap, (time_us, int(kind), self._tie, kind, payload))
        self._tie += 1

    def _sync_timers(self, now: int) -> None:
        for arm in self.sched.deadlines():
            kind = (
                EventKind.VOICE_EXPIRY
                if arm.kind.value == "voice"
                else EventKind.SHARED_EXPIRY
            )
            key = (kind, arm.deadline_us)
            if key not in self._scheduled_timers:
                self._scheduled_timers.add(key)
                self._push(arm.deadline_us, kind, arm.deadline_us)

    def _timer_live(self, kind: EventKind, deadline: int) -> bool:
        sched = self.sched
        current = getattr(sched, "voice_deadline", None) if kind is EventKind.VOICE_EXPIRY \
            else getattr(sched, "shared_deadline", None)
        return current == deadline

    # -- traffic ---------------------------------------------------------------
    def _top_up_saturated(self, now: int) -> None:
        watermark = min(SATURATED_BACKLOG, self.sched.config.queue_capacity)
        for flow in self.saturated_flows:
            while self.sched.backlog_for(flow.ac) < watermark:
                msdu = Msdu(
                    id=self._next_id,
                    ac=flow.ac,
                    dest_addr=flow.dest_addr,
                    src_addr=flow.src_addr,
                    payload_len=flow.payload_bytes,
                    created_at=now,
                    flow_id=flow.flow_id,
                )
                self._next_id += 1
                self._admit(msdu, now)

    def _admit(self, msdu: Msdu, now: int) -> None:
        self.metrics[msdu.ac].generated += 1
        before = self.sched.overflow_drops[msdu.ac]
        self.sched.enqueue(msdu, now)
        if self.sched.overflow_drops[msdu.ac] > before:
            self.metrics[msdu.ac].dropped_overflow += 1
        else:
            self._live[msdu.id] = msdu

    # -- transmission ------------------------------------------------------------
    def _poll(self, now: int) -> None:
        if self._in_flight is not None or now >= self.duration_us:
            return
        self._top_up_saturated(now)
        desc = self.sched.next_transmission(now, channel_idle=True)
        self._sync_timers(now)
        if desc is None:
            return
        self._in_flight = _InFlight(desc, now)
        data_end = now + self.profile.difs_us + phy.tx_duration(desc.total_bytes, self.profile)
        self._push(data_end, EventKind.TX_COMPLETE)
        self._on_air_bytes += desc.total_bytes + block_ack.BA_FRAME_BYTES
        self._ba_count += 1
        self._histogram[len(desc.units)] = self._histogram.get(len(desc.units), 0) + 1
        self.event_log.append(
            ("tx", now, desc.source, desc.kind, len(desc.units), [m.seq_no for m in desc.mpdus])
        )

    def _handle_tx_complete(self, now: int) -> None:
        fl = self._in_flight
        if fl is None:
            raise SimInvariantError("TX_COMPLETE with nothing in flight")
        fl.flags = phy.apply_errors(fl.desc, self.profile, self._chan_rng)
        mpdus = fl.desc.mpdus
        received = {m.seq_no for m, bad in zip(mpdus, fl.flags) if not bad}
        fl.ba = make_block_ack(received, starting_seq=mpdus[0].seq_no)
        self._push(now + self.profile.sifs_us + phy.ba_duration(self.profile), EventKind.BA_RECEIVED)

    def _deliver_msdu(self, msdu: Msdu, now: int) -> None:
        m = self.metrics[msdu.ac]
        m.delivered += 1
        m.delivered_payload_bytes += msdu.payload_len
        latency = now - msdu.created_at
        self._latencies[msdu.ac].append(latency)
        prev = self._last_latency.get(msdu.flow_id)
        if prev is not None:
            acc = self._jitter_acc[msdu.ac]
            acc[0] += abs(latency - prev)
            acc[1] += 1
        self._last_latency[msdu.flow_id] = latency

    def _fail_unit(self, unit, msdu_ids: list[int], retries: int, now: int) -> tuple[bool, int]:
        """Returns (requeue?, retries+1) and drops contained MSDUs at the limit."""
        if retries < self.retry_limit:
            return True, retries + 1
        for mid in msdu_ids:
            msdu = self._live.pop(mid)
            self.metrics[msdu.ac].dropped_retry += 1
        return False, retries

    def _handle_ba(self, now: int) -> None:
        fl = self._in_flight
        if fl is None or fl.ba is None:
            raise SimInvariantError("BA_RECEIVED with no completed transmission")
        desc = fl.desc
        missing = set(missing_seqs(fl.ba, [m.seq_no for m in desc.mpdus]))

        failed_units = []
        if desc.kind is FrameKind.AMPDU:
            for unit in desc.units:
                if unit.seq_no not in missing:
                    for mid in unit.contained_msdu_ids:
                        self._deliver_msdu(self._live.pop(mid), now)
                    continue
                ok, unit.retries = self._fail_unit(unit, unit.contained_msdu_ids, unit.retries, now)
                if ok:
                    failed_units.append(unit)
                    self.metrics[unit.ac].retransmitted_mpdus += 1
        else:
            if not missing:
                for msdu in desc.units:
                    self._deliver_msdu(self._live.pop(msdu.id), now)
            else:
                # Single checksum: the whole unit failed together.
                for msdu in desc.units:
                    retries = self._msdu_retries.get(msdu.id, 0)
                    ok, self._msdu_retries[msdu.id] = self._fail_unit(
                        msdu, [msdu.id], retries, now
                    )
                    if ok:
                        failed_units.append(msdu)
                if failed_units:
                    self.metrics[desc.wrapper.ac].retransmitted_mpdus += 1

        exchange = now - fl.tx_start
        expected = phy.exchange_duration(desc.total_bytes, self.profile)
        if exchange != expected:
            raise SimInvariantError(f"exchange airtime {exchange} != {expected}")
        self._busy_us += exchange
        self._in_flight = None

        if failed_units:
            self.sched.requeue(desc, failed_units, now)
        self._sync_timers(now)
        self._poll(now)

    # -- main loop ------------------------------------------------------------------
    def run(self) -> MetricsReport:
        for msdu in self.trace:
            self._push(msdu.created_at, EventKind.ARRIVAL, msdu)
        self._push(self.duration_us, EventKind.SIM_END)
        if self.saturated_flows:
            self._poll(0)

        while self._heap:
            now, _, _, kind, payload = heapq.heappop(self._heap)
            if kind is EventKind.ARRIVAL:
                self._admit(payload, now)
                self._sync_timers(now)
                if self._in_flight is None:
                    self._poll(now)
            elif kind is EventKind.TX_COMPLETE:
                self._handle_tx_complete(now)
            elif kind is EventKind.BA_RECEIVED:
                self._handle_ba(now)
            elif kind in (EventKind.VOICE_EXPIRY, EventKind.SHARED_EXPIRY):
                self._scheduled_timers.discard((kind, payload))
                if self._timer_live(kind, payload) and self._in_flight is None:
                    self._poll(now)
            elif kind is EventKind.SIM_END:
                pass  # arrivals are bounded already; drain continues

        return self._finalize()

    def _finalize(self) -> MetricsReport:
        queued = self.sched.queued_msdus()
        for ac in AC_ORDER:
            m = self.metrics[ac]
            m.goodput_mbps = 8 * m.delivered_payload_bytes / self.duration_us
            lats = self._latencies[ac]
            if lats:
                m.lat_mean_us = sum(lats) / len(lats)
                ordered = sorted(lats)
                m.lat_p95_us = _percentile95(ordered)
                m.lat_max_us = float(ordered[-1])
            acc = self._jitter_acc[ac]
            m.jitter_us = acc[0] / acc[1] if acc[1] else 0.0
            m.residual = m.generated - m.delivered - m.dropped
            if m.residual != queued[ac]:
                raise SimInvariantError(
                    f"{ac.value}: residual {m.residual} != queued {queued[ac]}"
                )
            if m.residual < 0:
                raise SimInvariantError(f"{ac.value}: negative residual")

        delivered_payload = sum(m.delivered_payload_bytes for m in self.metrics.values())
        efficiency = delivered_payload / self._on_air_bytes if self._on_air_bytes else 0.0
        return MetricsReport(
            policy=self.policy.value,
            seed=self.seed,
            duration_us=self.duration_us,
            per_ac=self.metrics,
            airtime_busy=self._busy_us / self.duration_us,
            aggregation_efficiency=efficiency,
            size_histogram=dict(sorted(self._histogram.items())),
        )


def run(scenario, seed: int | None = None, policy=None, trace: list[Msdu] | None = None) -> MetricsReport:
    """Run one scenario to completion and return its metrics."""
    return Engine(scenario, seed=seed, policy=policy, trace=trace).run()
