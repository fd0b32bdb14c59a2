"""确定性的 SCION 网络模拟器：拓扑、潜在状态、真值事件与 ProbeBackend 实现。"""

from .backend import SimNetBackend
from .models import EventPlan, GroundTruthEvent, SimSpec, check_spec, load_event_plan, load_simspec
from .net import LatentState, SimClock, SimNet, build, schedule_events, sim_as
from .planner import PlanRates, auto_plan, is_abrupt

__all__ = [
    "EventPlan",
    "GroundTruthEvent",
    "LatentState",
    "PlanRates",
    "SimClock",
    "SimNet",
    "SimNetBackend",
    "SimSpec",
    "auto_plan",
    "build",
    "check_spec",
    "is_abrupt",
    "load_event_plan",
    "load_simspec",
    "schedule_events",
    "sim_as",
]
