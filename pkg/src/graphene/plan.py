"""Physical planning: declared UDF vertex access, join plans, scan choice."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional


@dataclass(frozen=True)
class AccessSpec:
    """Which endpoint attributes a triplet UDF reads."""

    reads_src: bool = True
    reads_dst: bool = True

    @property
    def sides(self) -> frozenset:
        return frozenset(s for s, on in (("src", self.reads_src), ("dst", self.reads_dst)) if on)


BOTH = AccessSpec(True, True)
SRC_ONLY = AccessSpec(True, False)
DST_ONLY = AccessSpec(False, True)
NEITHER = AccessSpec(False, False)


def reads(src: bool = False, dst: bool = False):
    """Decorator declaring the endpoint attributes a triplet UDF reads.

    >>> @reads(src=True)
    ... def send(t):
    ...     return None, t.src_attr
    >>> access_of(send)
    AccessSpec(reads_src=True, reads_dst=False)
    """
    def mark(fn):
        fn.access_spec = AccessSpec(src, dst)
        return fn
    return mark


def access_of(fn: Callable, default: AccessSpec = BOTH) -> AccessSpec:
    return getattr(fn, "access_spec", default)


class JoinPlan(enum.Enum):
    THREE_WAY = "three-way"
    TWO_WAY_SRC = "two-way-src"
    TWO_WAY_DST = "two-way-dst"
    NO_JOIN = "no-join"

    @property
    def sides(self) -> frozenset:
        return {
            JoinPlan.THREE_WAY: frozenset({"src", "dst"}),
            JoinPlan.TWO_WAY_SRC: frozenset({"src"}),
            JoinPlan.TWO_WAY_DST: frozenset({"dst"}),
            JoinPlan.NO_JOIN: frozenset(),
        }[self]


def plan_join(spec: AccessSpec) -> JoinPlan:
    if spec.reads_src and spec.reads_dst:
        return JoinPlan.THREE_WAY
    if spec.reads_src:
        return JoinPlan.TWO_WAY_SRC
    if spec.reads_dst:
        return JoinPlan.TWO_WAY_DST
    return JoinPlan.NO_JOIN


class Direction(enum.Enum):
    """Which endpoint changes make an edge eligible under skipStale.

    ``OUT``: the source changed.  ``IN``: the target changed.  ``BOTH``: either
    endpoint changed (``"either"`` parses to it too).
    """

    OUT = "out"
    IN = "in"
    BOTH = "both"

    @property
    def sides(self) -> frozenset:
        if self is Direction.OUT:
            return frozenset({"src"})
        if self is Direction.IN:
            return frozenset({"dst"})
        return frozenset({"src", "dst"})


def parse_direction(value) -> Optional[Direction]:
    if value is None or isinstance(value, Direction):
        return value
    name = str(value).lower()
    if name == "none":
        return None
    if name == "either":
        return Direction.BOTH
    return Direction(name)


class ScanMode(enum.Enum):
    SEQUENTIAL = "seq"
    INDEX = "index"


@dataclass(frozen=True)
class ScanStrategy:
    mode: str = "auto"          # auto | seq | index
    threshold: float = 0.8


def choose_scan(active_fraction: float, strategy: ScanStrategy = ScanStrategy()) -> ScanMode:
    """Index scan on the vertex bitmask when fewer than ``threshold`` of vertices are active."""
    if strategy.mode == "seq":
        return ScanMode.SEQUENTIAL
    if strategy.mode == "index":
        return ScanMode.INDEX
    return ScanMode.INDEX if active_fraction < strategy.threshold else ScanMode.SEQUENTIAL
