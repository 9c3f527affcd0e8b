"""CSV and JSON emission for finished runs.

The CSV schema is frozen; downstream tooling parses it by header::

    policy,seed,ac,delivered,goodput_mbps,lat_mean_us,lat_p95_us,lat_max_us,
    jitter_us,retx,dropped,agg_efficiency

Rows are ordered policy first, then access category by priority. Counts are
integers; measured quantities are fixed-point with three decimals.
"""

from __future__ import annotations

import dataclasses
import json
import statistics
from enum import Enum
from typing import Iterable

from .config import Scenario
from .engine import MetricsReport
from .frames import AC_ORDER

CSV_HEADER = (
    "policy,seed,ac,delivered,goodput_mbps,lat_mean_us,lat_p95_us,lat_max_us,"
    "jitter_us,retx,dropped,agg_efficiency"
)


def csv_rows(report: MetricsReport) -> list[str]:
    rows = []
    for ac in AC_ORDER:
        m = report.ac(ac)
        rows.append(
            ",".join(
                [
                    report.policy,
                    str(report.seed),
                    ac.value,
                    str(m.delivered),
                    f"{m.goodput_mbps:.3f}",
                    f"{m.lat_mean_us:.3f}",
                    f"{m.lat_p95_us:.3f}",
                    f"{m.lat_max_us:.3f}",
                    f"{m.jitter_us:.3f}",
                    str(m.retransmitted_mpdus),
                    str(m.dropped),
                    f"{report.aggregation_efficiency:.3f}",
                ]
            )
        )
    return rows


def render_csv(reports: Iterable[MetricsReport]) -> str:
    lines = [CSV_HEADER]
    for report in reports:
        lines.extend(csv_rows(report))
    return "\n".join(lines) + "\n"


def _numeric_row(report: MetricsReport, ac) -> list[float]:
    m = report.ac(ac)
    return [
        float(m.delivered),
        m.goodput_mbps,
        m.lat_mean_us,
        m.lat_p95_us,
        m.lat_max_us,
        m.jitter_us,
        float(m.retransmitted_mpdus),
        float(m.dropped),
        report.aggregation_efficiency,
    ]


def render_sweep_csv(reports: list[MetricsReport]) -> str:
    """Per-seed rows plus mean/stddev summary rows per (policy, ac)."""
    lines = [CSV_HEADER]
    by_policy: dict[str, list[MetricsReport]] = {}
    for report in reports:
        by_policy.setdefault(report.policy, []).append(report)
    for policy, group in by_policy.items():
        for report in sorted(group, key=lambda r: r.seed):
            lines.extend(csv_rows(report))
        for label, fold in (("mean", statistics.fmean), ("stddev", statistics.pstdev)):
            for ac in AC_ORDER:
                columns = [_numeric_row(r, ac) for r in group]
                folded = [fold(values) for values in zip(*columns)]
                lines.append(
                    ",".join(
                        [policy, label, ac.value]
                        + [f"{v:.3f}" for v in folded]
                    )
                )
    return "\n".join(lines) + "\n"


def _plain(obj):
    if isinstance(obj, Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _plain(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {_plain(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def report_dict(report: MetricsReport, scenario: Scenario) -> dict:
    """Full machine-readable report, including the resolved scenario."""
    per_ac = {
        ac.value: {
            **_plain(report.ac(ac)),
            "dropped": report.ac(ac).dropped,
        }
        for ac in AC_ORDER
    }
    return {
        "policy": report.policy,
        "seed": report.seed,
        "duration_us": report.duration_us,
        "rng_algorithm": report.rng_algorithm,
        "per_ac": per_ac,
        "airtime_busy": report.airtime_busy,
        "aggregation_efficiency": report.aggregation_efficiency,
        "aggregate_size_histogram": {str(k): v for k, v in report.size_histogram.items()},
        "scenario": _plain(scenario),
    }


def render_json(reports: list[MetricsReport], scenario: Scenario) -> str:
    payload = [report_dict(r, scenario) for r in reports]
    return json.dumps(payload[0] if len(payload) == 1 else payload, indent=2, sort_keys=True) + "\n"
