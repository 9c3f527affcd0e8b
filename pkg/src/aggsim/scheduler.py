"""Access-category-aware transmission schedulers.

The dual-stage scheduler splits traffic in two passes. An outer pass pulls
delay-sensitive voice MSDUs into their own queue, where a short timer bounds
how long they may wait to be batched into an aggregate MSDU (a lone frame
goes out unaggregated). Everything else lands in a staging buffer that an
inner pass sorts into a video queue and a bulk (best-effort/background)
queue, both feeding the aggregate-MPDU path: video transmits as soon as a
target MPDU count accumulates, and when the shared timer fires first, bulk
MPDUs backfill the shortfall so the aggregate still reaches the target size.
When several triggers are due at once the service order is fixed: voice
expiry, then video readiness, then the shared expiry.

Two reference policies frame the comparison: a FIFO that never aggregates,
and a greedy aggregator that holds all categories in one queue and refuses
to transmit until a full aggregate is queued (so it stalls under light
load).

Failed units re-enter the head of their source queue and make that queue
immediately serviceable, so a retransmit-only aggregate can leave at the
next idle instant without waiting for timers or size targets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .frames import (
    SEQ_MODULO,
    SUBFRAME_HEADER_LEN,
    AccessCategory,
    AggregateLimits,
    FrameKind,
    Mpdu,
    Msdu,
    ampdu_total_len,
    amsdu_total_len,
    seq_distance,
)

BA_WINDOW = 64


class Policy(Enum):
    """Scheduler selection; values double as the CLI tokens."""

    DUAL_STAGE = "bi"
    FIFO_NO_AGG = "fifo"
    GREEDY_AMPDU = "ampdu-greedy"


class SourceQueue(Enum):
    VOICE = "voice"
    VIDEO = "video"
    BULK = "bulk"
    VIDEO_BULK = "video+bulk"
    FIFO = "fifo"


class TimerKind(Enum):
    VOICE = "voice"
    SHARED = "shared"


@dataclass(frozen=True)
class TimerArm:
    kind: TimerKind
    deadline_us: int


class QueueOverflow(Exception):
    """Raised only internally; overflow is normally a counted tail drop."""


@dataclass
class SchedulerConfig:
    voice_timer_us: int = 500
    shared_timer_us: int = 2000
    voice_burst_bytes: int | None = None  # per-burst aggregate cap; None = amsdu_max
    ampdu_target: int = 16                # MPDU count that makes the video queue ready
    limits: AggregateLimits = field(default_factory=AggregateLimits)
    policy: Policy = Policy.DUAL_STAGE
    queue_capacity: int = 1024

    def validate(self) -> None:
        if self.voice_timer_us <= 0 or self.shared_timer_us <= 0:
            raise ValueError("timers must be positive")
        if not 1 <= self.ampdu_target <= 64:
            raise ValueError("ampdu_target must be within 1..64")
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be positive")

    @property
    def voice_cap(self) -> int:
        cap = self.limits.amsdu_max if self.voice_burst_bytes is None else self.voice_burst_bytes
        return min(cap, self.limits.amsdu_max)


@dataclass
class TxDescriptor:
    """One scheduled transmission: a plain MSDU, an A-MSDU, or an A-MPDU."""

    kind: FrameKind
    units: list          # Msdu list for PLAIN/AMSDU, Mpdu list for AMPDU
    source: SourceQueue
    total_bytes: int     # on-air bytes incl. headers, FCS, delimiters, padding
    wrapper: Mpdu | None = None  # the single carrying MPDU for PLAIN/AMSDU
    video_count: int = 0         # leading units that came from the video queue

    @property
    def mpdus(self) -> list[Mpdu]:
        if self.kind is FrameKind.AMPDU:
            return self.units
        return [self.wrapper]

    @property
    def msdu_count(self) -> int:
        if self.kind is FrameKind.AMPDU:
            return sum(len(m.contained_msdu_ids) for m in self.units)
        return len(self.units)

    @property
    def payload_bytes(self) -> int:
        if self.kind is FrameKind.AMPDU:
            return sum(m.body_len for m in self.units)
        return sum(m.payload_len for m in self.units)

    def unit_air_lengths(self) -> list[int]:
        """Per-unit lengths the channel error model draws over."""
        if self.kind is FrameKind.AMPDU:
            return [4 + m.total_len for m in self.units]
        return [self.wrapper.total_len]


def _plain_descriptor(msdu: Msdu, seq: int, source: SourceQueue) -> TxDescriptor:
    wrapper = Mpdu(
        seq_no=seq,
        receiver_addr=msdu.dest_addr,
        ac=msdu.ac,
        body_len=msdu.payload_len,
        contained_msdu_ids=[msdu.id],
    )
    return TxDescriptor(
        kind=FrameKind.PLAIN_MSDU,
        units=[msdu],
        source=source,
        total_bytes=wrapper.total_len,
        wrapper=wrapper,
    )


def _amsdu_descriptor(msdus: list[Msdu], seq: int, source: SourceQueue) -> TxDescriptor:
    body = amsdu_total_len([m.payload_len for m in msdus])
    wrapper = Mpdu(
        seq_no=seq,
        receiver_addr=msdus[0].dest_addr,
        ac=msdus[0].ac,
        body_len=body,
        contained_msdu_ids=[m.id for m in msdus],
    )
    return TxDescriptor(
        kind=FrameKind.AMSDU,
        units=list(msdus),
        source=source,
        total_bytes=wrapper.total_len,
        wrapper=wrapper,
    )


def _ampdu_descriptor(mpdus: list[Mpdu], source: SourceQueue, video_count: int = 0) -> TxDescriptor:
    return TxDescriptor(
        kind=FrameKind.AMPDU,
        units=list(mpdus),
        source=source,
        total_bytes=ampdu_total_len([m.total_len for m in mpdus]),
        wrapper=None,
        video_count=video_count,
    )


class SchedulerBase:
    """Interface the event engine drives."""

    def __init__(self, config: SchedulerConfig) -> None:
        config.validate()
        self.config = config
        self.limits = config.limits
        self.next_seq = 0
        self.overflow_drops: dict[AccessCategory, int] = {ac: 0 for ac in AccessCategory}
        self.event_log: list[tuple] = []

    def alloc_seq(self) -> int:
        seq = self.next_seq
        self.next_seq = (self.next_seq + 1) % SEQ_MODULO
        return seq

    def wrap_mpdu(self, msdu: Msdu) -> Mpdu:
        return Mpdu(
            seq_no=self.alloc_seq(),
            receiver_addr=msdu.dest_addr,
            ac=msdu.ac,
            body_len=msdu.payload_len,
            contained_msdu_ids=[msdu.id],
        )

    # Subclass responsibilities ------------------------------------------------
    def enqueue(self, msdu: Msdu, now: int) -> list[TimerArm]:
        raise NotImplementedError

    def next_transmission(self, now: int, channel_idle: bool) -> TxDescriptor | None:
        raise NotImplementedError

    def requeue(self, desc: TxDescriptor, failed_units: list, now: int) -> None:
        raise NotImplementedError

    def deadlines(self) -> list[TimerArm]:
        return []

    def backlog_for(self, ac: AccessCategory) -> int:
        raise NotImplementedError

    def queued_msdus(self) -> dict[AccessCategory, int]:
        raise NotImplementedError


class DualStageScheduler(SchedulerBase):
    """Voice queue + staging pass + video/bulk queues with timers and backfill."""

    def __init__(self, config: SchedulerConfig) -> None:
        super().__init__(config)
        self.voice_q: deque[Msdu] = deque()
        self.staging: list[Msdu] = []
        self.video_q: deque[Mpdu] = deque()
        self.bulk_q: deque[Mpdu] = deque()
        self.voice_deadline: int | None = None
        self.shared_deadline: int | None = None

    # -- timers ----------------------------------------------------------------
    def _set_voice_deadline(self, value: int | None, now: int) -> None:
        self.voice_deadline = value
        self.event_log.append(("timer", now, TimerKind.VOICE, value))

    def _set_shared_deadline(self, value: int | None, now: int) -> None:
        self.shared_deadline = value
        self.event_log.append(("timer", now, TimerKind.SHARED, value))

    def deadlines(self) -> list[TimerArm]:
        out = []
        if self.voice_deadline is not None:
            out.append(TimerArm(TimerKind.VOICE, self.voice_deadline))
        if self.shared_deadline is not None:
            out.append(TimerArm(TimerKind.SHARED, self.shared_deadline))
        return out

    # -- admission ---------------------------------------------------------------
    def classify(self, msdu: Msdu) -> SourceQueue:
        if msdu.ac is AccessCategory.VOICE:
            return SourceQueue.VOICE
        if msdu.ac is AccessCategory.VIDEO:
            return SourceQueue.VIDEO
        return SourceQueue.BULK

    def enqueue(self, msdu: Msdu, now: int) -> list[TimerArm]:
        arms: list[TimerArm] = []
        route = self.classify(msdu)
        if route is SourceQueue.VOICE:
            if len(self.voice_q) >= self.config.queue_capacity:
                self.overflow_drops[msdu.ac] += 1
                return arms
            self.voice_q.append(msdu)
            if self.voice_deadline is None:
                self._set_voice_deadline(now + self.config.voice_timer_us, now)
                arms.append(TimerArm(TimerKind.VOICE, self.voice_deadline))
            return arms

        # Inner pass: stage, then sort into the video or bulk queue.
        self.staging.append(msdu)
        group_was_empty = not self.video_q and not self.bulk_q
        while self.staging:
            staged = self.staging.pop(0)
            target_q = self.video_q if staged.ac is AccessCategory.VIDEO else self.bulk_q
            if len(target_q) >= self.config.queue_capacity:
                self.overflow_drops[staged.ac] += 1
                continue
            target_q.append(self.wrap_mpdu(staged))
        if group_was_empty and (self.video_q or self.bulk_q) and self.shared_deadline is None:
            self._set_shared_deadline(now + self.config.shared_timer_us, now)
            arms.append(TimerArm(TimerKind.SHARED, self.shared_deadline))
        return arms

    # -- emission ----------------------------------------------------------------
    def _select_voice(self) -> list[Msdu]:
        """Longest fitting prefix of the voice queue under the burst byte cap."""
        cap = self.config.voice_cap
        selected = [self.voice_q.popleft()]
        current = SUBFRAME_HEADER_LEN + selected[0].payload_len
        while self.voice_q:
            nxt = self.voice_q[0]
            repadded = current + (4 - current % 4) % 4
            candidate = repadded + SUBFRAME_HEADER_LEN + nxt.payload_len
            if candidate > cap:
                break
            selected.append(self.voice_q.popleft())
            current = candidate
        return selected

    def on_voice_expiry(self, now: int) -> TxDescriptor:
        """Send whatever voice accumulated, however little, when the timer fires."""
        assert self.voice_q, "voice expiry with empty queue"
        selected = self._select_voice()
        seq = self.alloc_seq()
        if len(selected) == 1:
            desc = _plain_descriptor(selected[0], seq, SourceQueue.VOICE)
        else:
            desc = _amsdu_descriptor(selected, seq, SourceQueue.VOICE)
        if self.voice_q:
            self._set_voice_deadline(now + self.config.voice_timer_us, now)
        else:
            self._set_voice_deadline(None, now)
        return desc

    def _take_mpdus(self, queue: deque[Mpdu], want: int, taken: list[Mpdu]) -> None:
        """Move up to ``want`` MPDUs under the aggregate byte/count/window caps."""
        while queue and want > 0:
            nxt = queue[0]
            candidate = taken + [nxt]
            if len(candidate) > self.limits.ampdu_max_mpdus:
                break
            if ampdu_total_len([m.total_len for m in candidate]) > self.limits.ampdu_max_bytes:
                break
            if seq_distance(nxt.seq_no, candidate[0].seq_no) >= BA_WINDOW:
                break  # would not fit one block-ack bitmap
            taken.append(queue.popleft())
            want -= 1

    def _rearm_shared(self, now: int) -> None:
        if self.video_q or self.bulk_q:
            self._set_shared_deadline(now + self.config.shared_timer_us, now)
        else:
            self._set_shared_deadline(None, now)

    def on_video_ready(self, now: int) -> TxDescriptor:
        """Video reached the target count before the shared timer fired."""
        assert len(self.video_q) >= self.config.ampdu_target
        taken: list[Mpdu] = []
        self._take_mpdus(self.video_q, self.config.ampdu_target, taken)
        self._rearm_shared(now)
        return _ampdu_descriptor(taken, SourceQueue.VIDEO, video_count=len(taken))

    def on_shared_expiry(self, now: int) -> TxDescriptor:
        """Timer fired first: send video short of target, backfilled from bulk."""
        assert self.video_q or self.bulk_q, "shared expiry with empty queues"
        taken: list[Mpdu] = []
        self._take_mpdus(self.video_q, self.config.ampdu_target, taken)
        video_count = len(taken)
        deficit = self.config.ampdu_target - video_count
        if deficit > 0:
            self._take_mpdus(self.bulk_q, deficit, taken)
        self._rearm_shared(now)
        if video_count == 0:
            source = SourceQueue.BULK
        elif len(taken) > video_count:
            source = SourceQueue.VIDEO_BULK
        else:
            source = SourceQueue.VIDEO
        return _ampdu_descriptor(taken, source, video_count=video_count)

    def next_transmission(self, now: int, channel_idle: bool) -> TxDescriptor | None:
        """Due triggers in fixed priority: voice expiry, video ready, shared expiry."""
        if not channel_idle:
            return None
        if self.voice_deadline is not None and self.voice_deadline <= now and self.voice_q:
            return self.on_voice_expiry(now)
        if len(self.video_q) >= self.config.ampdu_target:
            return self.on_video_ready(now)
        if (
            self.shared_deadline is not None
            and self.shared_deadline <= now
            and (self.video_q or self.bulk_q)
        ):
            return self.on_shared_expiry(now)
        return None

    # -- retransmission ------------------------------------------------------------
    def requeue(self, desc: TxDescriptor, failed_units: list, now: int) -> None:
        """Failed units re-enter their source queue head, immediately serviceable."""
        if desc.source is SourceQueue.VOICE:
            self.voice_q.extendleft(reversed(failed_units))
            self._set_voice_deadline(now, now)
            return
        index_of = {id(u): i for i, u in enumerate(desc.units)}
        video = [u for u in failed_units if index_of[id(u)] < desc.video_count]
        bulk = [u for u in failed_units if index_of[id(u)] >= desc.video_count]
        self.video_q.extendleft(reversed(video))
        self.bulk_q.extendleft(reversed(bulk))
        self._set_shared_deadline(now, now)

    # -- accounting ------------------------------------------------------------------
    def backlog_for(self, ac: AccessCategory) -> int:
        if ac is AccessCategory.VOICE:
            return len(self.voice_q)
        if ac is AccessCategory.VIDEO:
            return len(self.video_q)
        return len(self.bulk_q)

    def queued_msdus(self) -> dict[AccessCategory, int]:
        out = {ac: 0 for ac in AccessCategory}
        for m in self.voice_q:
            out[m.ac] += 1
        for q in (self.video_q, self.bulk_q):
            for mpdu in q:
                out[mpdu.ac] += len(mpdu.contained_msdu_ids)
        return out


class FifoScheduler(SchedulerBase):
    """Arrival-order FIFO, one plain MSDU per transmission, no aggregation."""

    def __init__(self, config: SchedulerConfig) -> None:
        super().__init__(config)
        self.queue: deque[Msdu] = deque()

    def enqueue(self, msdu: Msdu, now: int) -> list[TimerArm]:
        if len(self.queue) >= self.config.queue_capacity:
            self.overflow_drops[msdu.ac] += 1
            return []
        self.queue.append(msdu)
        return []

    def next_transmission(self, now: int, channel_idle: bool) -> TxDescriptor | None:
        if not channel_idle or not self.queue:
            return None
        msdu = self.queue.popleft()
        return _plain_descriptor(msdu, self.alloc_seq(), SourceQueue.FIFO)

    def requeue(self, desc: TxDescriptor, failed_units: list, now: int) -> None:
        self.queue.extendleft(reversed(failed_units))

    def backlog_for(self, ac: AccessCategory) -> int:
        return len(self.queue)

    def queued_msdus(self) -> dict[AccessCategory, int]:
        out = {ac: 0 for ac in AccessCategory}
        for m in self.queue:
            out[m.ac] += 1
        return out


class GreedyAmpduScheduler(SchedulerBase):
    """All categories in one FIFO; transmits only full-target aggregates.

    No timer exists, so under light load frames sit until enough arrive:
    the stall the dual-stage scheduler is built to avoid.
    """

    def __init__(self, config: SchedulerConfig) -> None:
        super().__init__(config)
        self.queue: deque[Mpdu] = deque()
        self.retx_pending = 0

    def enqueue(self, msdu: Msdu, now: int) -> list[TimerArm]:
        if len(self.queue) >= self.config.queue_capacity:
            self.overflow_drops[msdu.ac] += 1
            return []
        self.queue.append(self.wrap_mpdu(msdu))
        return []

    def next_transmission(self, now: int, channel_idle: bool) -> TxDescriptor | None:
        if not channel_idle or not self.queue:
            return None
        if len(self.queue) < self.config.ampdu_target and not self.retx_pending:
            return None
        taken: list[Mpdu] = []
        want = min(self.config.ampdu_target, len(self.queue))
        while self.queue and len(taken) < want:
            nxt = self.queue[0]
            candidate = taken + [nxt]
            if ampdu_total_len([m.total_len for m in candidate]) > self.limits.ampdu_max_bytes:
                break
            if seq_distance(nxt.seq_no, candidate[0].seq_no) >= BA_WINDOW:
                break
            taken.append(self.queue.popleft())
        self.retx_pending = 0
        return _ampdu_descriptor(taken, SourceQueue.FIFO)

    def requeue(self, desc: TxDescriptor, failed_units: list, now: int) -> None:
        self.queue.extendleft(reversed(failed_units))
        self.retx_pending += len(failed_units)

    def backlog_for(self, ac: AccessCategory) -> int:
        return len(self.queue)

    def queued_msdus(self) -> dict[AccessCategory, int]:
        out = {ac: 0 for ac in AccessCategory}
        for mpdu in self.queue:
            out[mpdu.ac] += len(mpdu.contained_msdu_ids)
        return out


def make_scheduler(config: SchedulerConfig) -> SchedulerBase:
    if config.policy is Policy.DUAL_STAGE:
        return DualStageScheduler(config)
    if config.policy is Policy.FIFO_NO_AGG:
        return FifoScheduler(config)
    return GreedyAmpduScheduler(config)
