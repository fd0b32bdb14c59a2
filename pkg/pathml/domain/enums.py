from __future__ import annotations

from enum import IntEnum, StrEnum


class Category(StrEnum):
    SHOWPATHS = "showpaths"
    COMPARER = "comparer"
    BANDWIDTH = "bandwidth"
    MP_BANDWIDTH = "mp_bandwidth"
    PING = "ping"
    MP_PROBER = "mp_prober"
    TRACEROUTE = "traceroute"


CATEGORIES: tuple[Category, ...] = tuple(Category)


class PathStatus(StrEnum):
    ALIVE = "alive"
    TIMEOUT = "timeout"
    UNKNOWN = "unknown"


class EventKind(StrEnum):
    FAILURE = "failure"
    ANOMALY = "anomaly"
    BOTTLENECK = "bottleneck"


class ProbeAction(StrEnum):
    SHOWPATHS = "showpaths"
    PING = "ping"
    BWTEST = "bwtest"
    TRACEROUTE = "traceroute"


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    CONFIG = 2
    BACKEND = 3
    INSUFFICIENT_DATA = 4
