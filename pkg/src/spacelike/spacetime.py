"""Events in 1+1-dimensional Minkowski spacetime (c = 1).

Provides Lorentz boosts, interval classification, the causal partial
order on a set of events, the chronological ordering a moving frame
induces, and enumeration of all total orders compatible with the causal
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Event",
    "Frame",
    "IntervalKind",
    "TieReport",
    "boost",
    "causal_order",
    "classify",
    "frame_ordering",
    "linear_extensions",
]

TIE_TOLERANCE = 1e-12
MAX_EXTENSION_EVENTS = 8


@dataclass(frozen=True)
class Event:
    """A labeled point (t, x) in the reference frame."""

    id: str
    t: float
    x: float


@dataclass(frozen=True)
class Frame:
    """An inertial frame moving at velocity v (|v| < 1) relative to the reference frame."""

    v: float = 0.0

    def __post_init__(self):
        if not abs(self.v) < 1.0:
            raise ValueError(f"frame velocity must satisfy |v| < 1, got {self.v}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.v * self.v)


class IntervalKind(Enum):
    SPACELIKE = "spacelike"
    TIMELIKE_FUTURE = "timelike-future"
    TIMELIKE_PAST = "timelike-past"
    LIGHTLIKE_FUTURE = "lightlike-future"
    LIGHTLIKE_PAST = "lightlike-past"
    COINCIDENT = "coincident"


@dataclass(frozen=True)
class TieReport:
    """Events whose boosted times coincide within TIE_TOLERANCE.

    Returned by frame_ordering instead of an order; a tie is reported,
    never silently broken.
    """

    velocity: float
    pairs: tuple[tuple[str, str], ...]


def boost(e: Event, f: Frame) -> tuple[float, float]:
    """Coordinates (t', x') of the event in the boosted frame."""
    g = f.gamma
    return (g * (e.t - f.v * e.x), g * (e.x - f.v * e.t))


def classify(e1: Event, e2: Event) -> IntervalKind:
    """Interval type of e2 relative to e1.

    FUTURE means e2 lies in e1's causal future. Swapping the arguments
    time-reverses the answer.
    """
    dt = e2.t - e1.t
    dx = e2.x - e1.x
    s = dt * dt - dx * dx
    if s < 0.0:
        return IntervalKind.SPACELIKE
    if s > 0.0:
        return IntervalKind.TIMELIKE_FUTURE if dt > 0 else IntervalKind.TIMELIKE_PAST
    if dt > 0:
        return IntervalKind.LIGHTLIKE_FUTURE
    if dt < 0:
        return IntervalKind.LIGHTLIKE_PAST
    return IntervalKind.COINCIDENT


def causal_order(events: list[Event]) -> set[tuple[str, str]]:
    """Causal partial order as the set of pairs (a, b) with b in a's future.

    Transitively closed; acyclicity holds automatically in Minkowski
    geometry and is asserted anyway.
    """
    ids = [e.id for e in events]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate event ids: {dup}")
    order: set[tuple[str, str]] = set()
    for a in events:
        for b in events:
            if a.id == b.id:
                continue
            k = classify(a, b)
            if k in (IntervalKind.TIMELIKE_FUTURE, IntervalKind.LIGHTLIKE_FUTURE):
                order.add((a.id, b.id))
    # Transitive closure over at most a handful of events.
    changed = True
    while changed:
        changed = False
        for (a, b) in list(order):
            for (c, d) in list(order):
                if b == c and (a, d) not in order:
                    order.add((a, d))
                    changed = True
    for (a, b) in order:
        if (b, a) in order:
            raise AssertionError(f"causal cycle between {a!r} and {b!r}")
    return order


def frame_ordering(events: list[Event], f: Frame) -> list[Event] | TieReport:
    """Events sorted by boosted time t', or a TieReport when t' values collide."""
    times = {e.id: boost(e, f)[0] for e in events}
    ordered = sorted(events, key=lambda e: times[e.id])
    ties = []
    for first, second in zip(ordered, ordered[1:]):
        if abs(times[second.id] - times[first.id]) <= TIE_TOLERANCE:
            ties.append((first.id, second.id))
    if ties:
        return TieReport(velocity=f.v, pairs=tuple(ties))
    return ordered


def linear_extensions(
    order: set[tuple[str, str]], events: list[Event]
) -> list[tuple[str, ...]]:
    """All total orders of the events consistent with the partial order.

    Refuses more than MAX_EXTENSION_EVENTS events: the count of
    extensions grows factorially, so large sets should be explored by
    sampling frame velocities instead.
    """
    if len(events) > MAX_EXTENSION_EVENTS:
        raise ValueError(
            f"{len(events)} events exceed the limit of {MAX_EXTENSION_EVENTS} for "
            "exhaustive enumeration; sample frame velocities (frame_ordering) instead"
        )
    ids = [e.id for e in events]
    if len(set(ids)) != len(ids):
        raise ValueError("event ids must be unique")
    preds = {i: {a for (a, b) in order if b == i and a in ids} for i in ids}

    out: list[tuple[str, ...]] = []
    chosen: list[str] = []
    placed: set[str] = set()

    def backtrack():
        if len(chosen) == len(ids):
            out.append(tuple(chosen))
            return
        for i in ids:
            if i in placed or not preds[i] <= placed:
                continue
            chosen.append(i)
            placed.add(i)
            backtrack()
            chosen.pop()
            placed.remove(i)

    backtrack()
    return out
