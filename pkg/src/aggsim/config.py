"""Scenario files: a line-oriented ``key = value`` format with sections.

Grammar (documented in full in the README)::

    file      := line*
    line      := section | binding | blank | comment
    section   := "[" name "]"          # general | phy | scheduler | flow
    binding   := key "=" value
    comment   := "#" anything          # also allowed after a value

``[flow]`` may repeat; each occurrence opens a new flow block. Unknown
sections or keys are rejected so typos surface as errors, with locations
reported as ``section.key``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .frames import AccessCategory, AggregateLimits
from .phy import PhyProfile
from .scheduler import Policy, SchedulerConfig
from .traffic import Cbr, FlowSpec, OnOff, Poisson


class ParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.message = message


class ValidationError(ValueError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


@dataclass
class Scenario:
    name: str
    duration_us: int
    seed: int
    phy: PhyProfile
    scheduler: SchedulerConfig
    flows: list[FlowSpec]
    retry_limit: int = 7

    def validate(self) -> None:
        if self.duration_us <= 0:
            raise ValidationError("general.duration_ms", "must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("general.seed", "must fit in 64 bits")
        if self.retry_limit < 0:
            raise ValidationError("scheduler.retry_limit", "must be nonnegative")
        try:
            self.phy.validate()
        except ValueError as exc:
            raise ValidationError("phy", str(exc)) from exc
        try:
            self.scheduler.validate()
        except ValueError as exc:
            raise ValidationError("scheduler", str(exc)) from exc
        if not self.flows:
            raise ValidationError("flow", "at least one flow (or saturated source) required")
        seen_ids = set()
        for i, flow in enumerate(self.flows):
            loc = f"flow[{i}]"
            if flow.flow_id in seen_ids:
                raise ValidationError(f"{loc}.id", "duplicate flow id")
            seen_ids.add(flow.flow_id)
            try:
                flow.validate()
            except ValueError as exc:
                raise ValidationError(loc, str(exc)) from exc


_SECTIONS = ("general", "phy", "scheduler", "flow")

_AC_NAMES = {
    "voice": AccessCategory.VOICE,
    "video": AccessCategory.VIDEO,
    "best_effort": AccessCategory.BEST_EFFORT,
    "background": AccessCategory.BACKGROUND,
}

_POLICY_NAMES = {p.value: p for p in Policy}


def _parse_sections(text: str) -> tuple[dict, dict, dict, list[dict]]:
    general: dict = {}
    phy: dict = {}
    sched: dict = {}
    flows: list[dict] = []
    current: dict | None = None
    section_name = ""

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(line_no, f"malformed section header {line!r}")
            section_name = line[1:-1].strip().lower()
            if section_name not in _SECTIONS:
                raise ParseError(line_no, f"unknown section [{section_name}]")
            if section_name == "general":
                current = general
            elif section_name == "phy":
                current = phy
            elif section_name == "scheduler":
                current = sched
            else:
                flows.append({})
                current = flows[-1]
            continue
        if "=" not in line:
            raise ParseError(line_no, f"expected 'key = value', got {line!r}")
        if current is None:
            raise ParseError(line_no, "binding before any [section] header")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError(line_no, "empty key")
        if key in current:
            raise ParseError(line_no, f"duplicate key {key!r} in [{section_name}]")
        current[key] = value
    return general, phy, sched, flows


class _Block:
    """Typed access to one section's raw bindings with section.key errors."""

    def __init__(self, name: str, raw: dict):
        self.name = name
        self.raw = dict(raw)

    def _pop(self, key: str):
        return self.raw.pop(key, None)

    def get_int(self, key: str, default: int | None = None) -> int | None:
        value = self._pop(key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            raise ValidationError(f"{self.name}.{key}", f"not an integer: {value!r}") from None

    def get_float(self, key: str, default: float | None = None) -> float | None:
        value = self._pop(key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            raise ValidationError(f"{self.name}.{key}", f"not a number: {value!r}") from None

    def get_bool(self, key: str, default: bool = False) -> bool:
        value = self._pop(key)
        if value is None:
            return default
        lowered = value.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ValidationError(f"{self.name}.{key}", f"not a boolean: {value!r}")

    def get_str(self, key: str, default: str | None = None) -> str | None:
        value = self._pop(key)
        return default if value is None else value

    def get_choice(self, key: str, choices: dict, default):
        value = self._pop(key)
        if value is None:
            return default
        lowered = value.lower()
        if lowered not in choices:
            raise ValidationError(
                f"{self.name}.{key}", f"expected one of {sorted(choices)}, got {value!r}"
            )
        return choices[lowered]

    def finish(self) -> None:
        if self.raw:
            key = sorted(self.raw)[0]
            raise ValidationError(f"{self.name}.{key}", "unknown key")


def _build_flow(index: int, raw: dict) -> FlowSpec:
    block = _Block(f"flow[{index}]", raw)
    flow_id = block.get_int("id", index)
    ac = block.get_choice("ac", _AC_NAMES, None)
    if ac is None:
        raise ValidationError(f"flow[{index}].ac", "required")
    saturated = block.get_bool("saturated", False)
    payload = block.get_int("payload_bytes", 1500)
    model_name = (block.get_str("model", "cbr") or "cbr").lower()
    if model_name == "cbr":
        model = Cbr(period_us=block.get_int("period_us", 1000), payload_bytes=payload)
    elif model_name == "poisson":
        model = Poisson(rate_per_s=block.get_float("rate_per_s", 100.0), payload_bytes=payload)
    elif model_name == "onoff":
        model = OnOff(
            on_us=block.get_int("on_us", 10_000),
            off_us=block.get_int("off_us", 10_000),
            period_us=block.get_int("period_us", 1000),
            payload_bytes=payload,
        )
    else:
        raise ValidationError(f"flow[{index}].model", f"unknown model {model_name!r}")
    start_ms = block.get_int("start_ms", 0)
    stop_ms = block.get_int("stop_ms", None)
    block.finish()
    return FlowSpec(
        flow_id=flow_id,
        ac=ac,
        model=model,
        start_us=start_ms * 1000,
        stop_us=stop_ms * 1000 if stop_ms is not None else 2**62,
        saturated=saturated,
    )


def parse_scenario(text: str) -> Scenario:
    general_raw, phy_raw, sched_raw, flow_raws = _parse_sections(text)

    general = _Block("general", general_raw)
    name = general.get_str("name", "scenario") or "scenario"
    duration_ms = general.get_int("duration_ms", 1000)
    seed = general.get_int("seed", 0)
    general.finish()

    phy_block = _Block("phy", phy_raw)
    phy = PhyProfile(
        data_rate_mbps=phy_block.get_float("data_rate_mbps", 248.0),
        basic_rate_mbps=phy_block.get_float("basic_rate_mbps", 24.0),
        preamble_us=phy_block.get_int("preamble_us", 40),
        sifs_us=phy_block.get_int("sifs_us", 16),
        difs_us=phy_block.get_int("difs_us", 34),
        ber=phy_block.get_float("ber", 0.0),
    )
    if not 0.0 <= phy.ber <= 1.0:
        raise ValidationError("phy.ber", "out of range [0, 1]")
    phy_block.finish()

    sched_block = _Block("scheduler", sched_raw)
    amsdu_max = sched_block.get_int("amsdu_max_bytes", 3839)
    try:
        limits = AggregateLimits(amsdu_max=amsdu_max)
    except ValueError as exc:
        raise ValidationError("scheduler.amsdu_max_bytes", str(exc)) from exc
    retry_limit = sched_block.get_int("retry_limit", 7)
    scheduler = SchedulerConfig(
        voice_timer_us=sched_block.get_int("voice_timer_us", 500),
        shared_timer_us=sched_block.get_int("shared_timer_us", 2000),
        voice_burst_bytes=sched_block.get_int("voice_burst_bytes", None),
        ampdu_target=sched_block.get_int("ampdu_target_mpdus", 16),
        limits=limits,
        policy=sched_block.get_choice("policy", _POLICY_NAMES, Policy.DUAL_STAGE),
        queue_capacity=sched_block.get_int("queue_capacity", 1024),
    )
    sched_block.finish()

    flows = [_build_flow(i, raw) for i, raw in enumerate(flow_raws)]

    scenario = Scenario(
        name=name,
        duration_us=duration_ms * 1000,
        seed=seed,
        phy=phy,
        scheduler=scheduler,
        flows=flows,
        retry_limit=retry_limit,
    )
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file."""
    return parse_scenario(Path(path).read_text())
