"""Discrete-event simulator of an 802.11n-style link with AC-aware aggregation."""

from .block_ack import BlockAck, make_block_ack, missing_seqs
from .config import Scenario, load_scenario, parse_scenario
from .engine import Engine, MetricsReport, run
from .frames import AccessCategory, AggregateLimits, FrameKind, Mpdu, Msdu
from .phy import PhyProfile
from .scheduler import Policy, SchedulerConfig, TxDescriptor, make_scheduler
from .traffic import Cbr, FlowSpec, OnOff, Poisson

__version__ = "0.1.0"

__all__ = [
    "AccessCategory",
    "AggregateLimits",
    "BlockAck",
    "Cbr",
    "Engine",
    "FlowSpec",
    "FrameKind",
    "MetricsReport",
    "Mpdu",
    "Msdu",
    "OnOff",
    "PhyProfile",
    "Poisson",
    "Policy",
    "Scenario",
    "SchedulerConfig",
    "TxDescriptor",
    "load_scenario",
    "make_block_ack",
    "make_scheduler",
    "missing_seqs",
    "parse_scenario",
    "run",
]
