"""Acceptance criteria, one test per criterion, each printing PASS or FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Tolerances are fixed here, not tuned elsewhere.
"""

import random
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from aggsim import report
from aggsim.codec import ByteFrame, decode_ampdu, decode_amsdu, encode_ampdu, encode_amsdu, synth_payload
from aggsim.config import Scenario, load_scenario
from aggsim.engine import Engine, run
from aggsim.experiments import (
    AsymmetrySetup,
    monolithic_goodput_expected,
    monolithic_goodput_measured,
    saturation_ratio_expected,
    selective_goodput_expected,
    selective_goodput_measured,
)
from aggsim.frames import (
    AC_ORDER,
    AggregateLimits,
    FrameKind,
    ampdu_total_len,
    amsdu_total_len,
)
from aggsim.phy import PhyProfile, ba_duration, tx_duration, unit_error_prob
from aggsim.scheduler import (
    DualStageScheduler,
    Policy,
    SchedulerConfig,
    SourceQueue,
    TimerKind,
)
from aggsim.traffic import Cbr, FlowSpec, OnOff, Poisson, flow_rng, next_arrival

from conftest import mk_mpdu, mk_msdu

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"
VO, VI, BE, BK = AC_ORDER


@contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        print(f"\n[FAIL] criterion {number}: {title}")
        raise
    print(f"\n[PASS] criterion {number}: {title}")


# -- 1 ------------------------------------------------------------------------


def test_criterion_1_codec_roundtrip():
    with criterion(1, "codec round-trip, 10,000 randomized aggregates"):
        rnd = random.Random(0xC0DEC)
        limits = AggregateLimits(amsdu_max=7935)
        for i in range(5000):
            count = rnd.randint(1, 8)
            lens = [rnd.randint(1, 280) for _ in range(count)]
            ac = rnd.choice(list(AC_ORDER))
            msdus = [
                mk_msdu(i * 16 + j, ac=ac, payload_len=n) for j, n in enumerate(lens)
            ]
            frame = encode_amsdu(msdus, limits)
            assert len(frame.data) == amsdu_total_len(lens)
            subs = decode_amsdu(frame)
            assert len(subs) == count
            for sub, msdu in zip(subs, msdus):
                assert sub.da == msdu.dest_addr and sub.sa == msdu.src_addr
                assert sub.payload == synth_payload(msdu.id, msdu.payload_len)

        for i in range(5000):
            count = rnd.randint(1, 10)
            mpdus = [
                mk_mpdu(seq=(i * 16 + j) % 4096, ac=rnd.choice(list(AC_ORDER)),
                        body_len=rnd.randint(1, 280))
                for j in range(count)
            ]
            frame = encode_ampdu(mpdus, limits)
            assert len(frame.data) == ampdu_total_len([m.total_len for m in mpdus])
            rep = decode_ampdu(frame)
            assert rep.crc_failures == 0 and not rep.skipped_regions
            assert len(rep.recovered) == count
            for got, want in zip(rep.recovered, mpdus):
                assert got.mpdu.seq_no == want.seq_no
                assert got.mpdu.body_len == want.body_len
                assert got.body == synth_payload(want.seq_no, want.body_len)


# -- 2 ------------------------------------------------------------------------


def test_criterion_2_delimiter_resync():
    with criterion(2, "delimiter resync recovers every intact MPDU"):
        rnd = random.Random(0x5CA11)
        limits = AggregateLimits()
        for _ in range(1000):
            count = rnd.randint(3, 64)
            mpdus = [
                mk_mpdu(seq=j, ac=VI, body_len=rnd.randint(1, 180)) for j in range(count)
            ]
            frame = encode_ampdu(mpdus, limits)
            # Locate delimiter offsets from the layout arithmetic.
            offsets, cursor = [], 0
            for j, m in enumerate(mpdus):
                offsets.append(cursor)
                cursor += 4 + m.total_len
                if j != count - 1:
                    cursor += (4 - m.total_len % 4) % 4
            victim = rnd.randrange(count)
            data = bytearray(frame.data)
            bit = rnd.randrange(32)
            data[offsets[victim] + bit // 8] ^= 1 << (bit % 8)
            rep = decode_ampdu(ByteFrame(FrameKind.AMPDU, bytes(data)))
            expected = [j for j in range(count) if j != victim]
            assert [d.mpdu.seq_no for d in rep.recovered] == expected
            assert rep.crc_failures == 0
            assert all(off % 4 == 0 for off, _ in rep.skipped_regions)


# -- 3 ------------------------------------------------------------------------


def test_criterion_3_retransmission_asymmetry():
    with criterion(3, "per-MPDU checksums beat one whole-aggregate checksum, 20 seeds"):
        setup = AsymmetrySetup(unit_count=64, payload_bytes=1500, ber=1e-5)
        exp_sel = selective_goodput_expected(setup)
        exp_mono = monolithic_goodput_expected(setup)
        assert exp_sel > exp_mono  # the analytical gap itself
        for seed in range(20):
            sel = selective_goodput_measured(setup, seed=seed, exchanges=2000)
            mono = monolithic_goodput_measured(setup, seed=seed, aggregates=2_000_000)
            assert sel > mono, f"seed {seed}: {sel} <= {mono}"
            assert abs(sel - exp_sel) / exp_sel < 0.05, f"seed {seed}"
            assert abs(mono - exp_mono) / exp_mono < 0.05, f"seed {seed}"


# -- 4 ------------------------------------------------------------------------


def test_criterion_4_saturation_throughput():
    with criterion(4, "saturated goodput: aggregation >= 1.5x FIFO, ratio within 3%"):
        scen = load_scenario(SCENARIO_DIR / "saturated_video.cfg")
        goodput = {}
        for policy in (Policy.DUAL_STAGE, Policy.GREEDY_AMPDU, Policy.FIFO_NO_AGG):
            goodput[policy] = run(scen, policy=policy).ac(VI).goodput_mbps
        fifo = goodput[Policy.FIFO_NO_AGG]
        assert goodput[Policy.DUAL_STAGE] >= 1.5 * fifo
        assert goodput[Policy.GREEDY_AMPDU] >= 1.5 * fifo
        expected_ratio = saturation_ratio_expected(
            scen.phy, payload_bytes=1500, target=scen.scheduler.ampdu_target
        )
        for policy in (Policy.DUAL_STAGE, Policy.GREEDY_AMPDU):
            measured_ratio = goodput[policy] / fifo
            assert abs(measured_ratio - expected_ratio) / expected_ratio < 0.03


# -- 5 ------------------------------------------------------------------------


def test_criterion_5_unsaturated_voice_latency():
    with criterion(5, "voice p95 bounded under light load and beats greedy, 20 seeds"):
        scen = load_scenario(SCENARIO_DIR / "unsaturated_mixed.cfg")
        prof = scen.phy
        max_mpdu = 26 + 1500 + 4
        max_aggregate = ampdu_total_len([max_mpdu] * scen.scheduler.ampdu_target)
        bound = (
            scen.scheduler.voice_timer_us
            + tx_duration(max_aggregate, prof)
            + prof.sifs_us
            + ba_duration(prof)
        )
        for seed in range(20):
            bi = run(scen, seed=seed, policy=Policy.DUAL_STAGE).ac(VO)
            greedy = run(scen, seed=seed, policy=Policy.GREEDY_AMPDU).ac(VO)
            assert bi.delivered >= 100
            assert bi.lat_p95_us <= bound, f"seed {seed}: {bi.lat_p95_us} > {bound}"
            assert bi.lat_p95_us < greedy.lat_p95_us, f"seed {seed}"


# -- 6 ------------------------------------------------------------------------


def test_criterion_6_backfill_exactness():
    with criterion(6, "backfill counts exactly min(target - video, bulk)"):
        cases = [
            (5, 10, 8, 5, 3),
            (5, 2, 8, 5, 2),
            (0, 3, 8, 0, 3),
            (8, 0, 8, 8, 0),
            (0, 0, 8, None, None),  # emits nothing
        ]
        for n_video, n_bulk, target, want_video, want_bulk in cases:
            sched = DualStageScheduler(SchedulerConfig(ampdu_target=target))
            for i in range(n_video):
                sched.enqueue(mk_msdu(i, ac=VI, payload_len=900), 0)
            for i in range(n_bulk):
                sched.enqueue(mk_msdu(100 + i, ac=BE, payload_len=900), 0)
            desc = sched.next_transmission(sched.config.shared_timer_us, True)
            if want_video is None:
                assert desc is None
                continue
            assert desc.video_count == want_video
            backfill = len(desc.units) - desc.video_count
            assert backfill == want_bulk == min(target - want_video, n_bulk)
            assert len(sched.bulk_q) == n_bulk - want_bulk


# -- 7 ------------------------------------------------------------------------


def test_criterion_7_simultaneity_rule():
    with criterion(7, "coincident voice expiry and video readiness: voice first"):
        # Scheduler level: both due at the same instant.
        sched = DualStageScheduler(SchedulerConfig(ampdu_target=4))
        sched.enqueue(mk_msdu(0, ac=VO, payload_len=160, created_at=0), 0)
        for i in range(4):
            sched.enqueue(mk_msdu(10 + i, ac=VI, created_at=0), 0)
        t = sched.voice_deadline
        first = sched.next_transmission(t, True)
        assert first.source is SourceQueue.VOICE
        reset_positions = [
            i for i, e in enumerate(sched.event_log)
            if e[0] == "timer" and e[2] is TimerKind.VOICE and e[1] == t
        ]
        assert reset_positions, "voice timer reset not logged"
        second = sched.next_transmission(t, True)
        assert second.source is SourceQueue.VIDEO
        assert len(second.units) == 4

        # Engine level: saturated video keeps the channel busy, so every voice
        # deadline defers to a poll instant where video is simultaneously ready.
        scen = Scenario(
            name="simultaneity",
            duration_us=200_000,
            seed=0,
            phy=PhyProfile(),
            scheduler=SchedulerConfig(ampdu_target=16),
            flows=[
                FlowSpec(flow_id=1, ac=VO, model=Cbr(20_000, 160)),
                FlowSpec(flow_id=2, ac=VI, model=Cbr(1, 1500), saturated=True),
            ],
        )
        eng = Engine(scen)
        eng.run()
        log = eng.event_log
        tx_indices = [i for i, e in enumerate(log) if e[0] == "tx"]
        voice_tx = [i for i in tx_indices if log[i][2] is SourceQueue.VOICE]
        assert len(voice_tx) >= 8
        for i in voice_tx:
            t = log[i][1]
            # The reset is logged during the same emission, before the tx entry.
            assert any(
                log[j][0] == "timer" and log[j][2] is TimerKind.VOICE and log[j][1] == t
                for j in range(i - 1, -1, -1)
            )
            later = [j for j in tx_indices if j > i]
            assert later, "voice transmission must be followed by the deferred video"
            assert log[later[0]][2] is SourceQueue.VIDEO


# -- 8 ------------------------------------------------------------------------


def _random_scenario(rnd: random.Random) -> Scenario:
    flows = []
    for flow_id in range(1, rnd.randint(2, 5)):
        ac = rnd.choice(list(AC_ORDER))
        kind = rnd.randrange(3)
        payload = rnd.randint(64, 1500)
        if kind == 0:
            model = Cbr(rnd.randint(500, 20_000), payload)
        elif kind == 1:
            model = Poisson(rnd.randint(50, 1500), payload)
        else:
            model = OnOff(
                on_us=rnd.randint(5_000, 30_000),
                off_us=rnd.randint(5_000, 30_000),
                period_us=rnd.randint(500, 5_000),
                payload_bytes=payload,
            )
        flows.append(FlowSpec(flow_id=flow_id, ac=ac, model=model,
                              saturated=(rnd.random() < 0.15)))
    return Scenario(
        name="fuzz",
        duration_us=rnd.randint(50, 120) * 1000,
        seed=rnd.getrandbits(32),
        phy=PhyProfile(ber=rnd.choice([0.0, 1e-5, 1e-4])),
        scheduler=SchedulerConfig(
            policy=rnd.choice(list(Policy)),
            ampdu_target=rnd.choice([4, 8, 16]),
        ),
        flows=flows,
    )


def test_criterion_8_conservation_and_determinism():
    with criterion(8, "conservation identity and re-run determinism, 100 scenarios"):
        rnd = random.Random(0xFADE)
        for _ in range(100):
            scen = _random_scenario(rnd)
            first = run(scen)
            for ac in AC_ORDER:
                m = first.ac(ac)
                assert m.generated == m.delivered + m.dropped + m.residual
                assert m.residual >= 0
            again = run(scen)
            assert report.render_csv([first]) == report.render_csv([again])


# -- 9 ------------------------------------------------------------------------


def test_criterion_9_statistical_sanity():
    with criterion(9, "Poisson mean within 5%; corruption rate within 2%"):
        rate = 1000.0
        flow = FlowSpec(flow_id=1, ac=BE, model=Poisson(rate, 100))
        rng = flow_rng(0xBEEF, 1)
        n = 100_000
        last = 0
        for _ in range(n):
            last, _ = next_arrival(flow, rng, last)
        assert abs(last / n - 1e6 / rate) / (1e6 / rate) < 0.05

        p = unit_error_prob(1534, 1e-5)
        chan = np.random.Generator(np.random.PCG64(0xD00D))
        trials = 200_000
        hits = int(np.count_nonzero(chan.random(trials) < p))
        assert abs(hits / trials - p) / p < 0.02
