"""Vector-clock lists: initialization, per-index increment, element-wise max,
and the derived happened-before order.

The comparison rule is the standard pointwise partial order; it is the unique
rule under which clock comparability coincides with causal precedence on
recorded traces (checked against a brute-force causal oracle in the tests).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ClockIndexError, ClockLengthMismatch
from .terms import Variable


class Ordering(enum.Enum):
    BEFORE = "before"
    AFTER = "after"
    CONCURRENT = "concurrent"
    EQUAL = "equal"


@dataclass(frozen=True)
class VectorClockList:
    """Per-identity event counters. Immutable; length fixed at initialization."""

    counters: tuple[int, ...]
    owner: Variable
    owner_index: int

    def __post_init__(self):
        if any(c < 0 for c in self.counters):
            raise ValueError("clock counters must be non-negative")
        if not (0 <= self.owner_index < len(self.counters)):
            raise ClockIndexError(
                f"owner index {self.owner_index} out of range for {len(self.counters)} clocks"
            )

    def __str__(self):
        return "[" + ",".join(str(c) for c in self.counters) + "]"


def init_clock(identity_count: int, owner: Variable, owner_index: int) -> VectorClockList:
    """All counters zero; one slot per authenticated clock in the SCIF."""
    if identity_count < 1:
        raise ClockIndexError("identity count must be >= 1")
    if not (0 <= owner_index < identity_count):
        raise ClockIndexError(f"owner index {owner_index} out of range for {identity_count} clocks")
    return VectorClockList((0,) * identity_count, owner, owner_index)


def inc_ele(v: VectorClockList, i: int) -> VectorClockList:
    """Increment the i-th counter; all other entries unchanged."""
    if not (0 <= i < len(v.counters)):
        raise ClockIndexError(f"index {i} out of range for {len(v.counters)} clocks")
    cs = list(v.counters)
    cs[i] += 1
    return VectorClockList(tuple(cs), v.owner, v.owner_index)


def max_vec(l: VectorClockList, r: VectorClockList) -> VectorClockList:
    """Element-wise maximum of two equal-length lists (owner kept from `l`)."""
    if len(l.counters) != len(r.counters):
        raise ClockLengthMismatch(f"{len(l.counters)} vs {len(r.counters)}")
    return VectorClockList(
        tuple(max(a, b) for a, b in zip(l.counters, r.counters)), l.owner, l.owner_index
    )


def happened_before(a: VectorClockList, b: VectorClockList) -> Ordering:
    """BEFORE iff a <= b pointwise and a != b; CONCURRENT iff incomparable."""
    if len(a.counters) != len(b.counters):
        raise ClockLengthMismatch(f"{len(a.counters)} vs {len(b.counters)}")
    less = greater = False
    for x, y in zip(a.counters, b.counters):
        if x < y:
            less = True
        elif x > y:
            greater = True
    if less and greater:
        return Ordering.CONCURRENT
    if less:
        return Ordering.BEFORE
    if greater:
        return Ordering.AFTER
    return Ordering.EQUAL


def parse_clock(text: str, owner: Variable, owner_index: int) -> VectorClockList:
    """Inverse of str(): bracketed integer list, e.g. `[3,2,0]`."""
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError(f"bad clock literal {text!r}")
    inner = body[1:-1].strip()
    counters = tuple(int(p) for p in inner.split(",")) if inner else ()
    return VectorClockList(counters, owner, owner_index)
