"""Event-driven dynamics: next-collision search, advancing, full runs.

The scheduler scans adjacent site pairs only; the minimal positive meeting
delay is always realized by such a pair, a fact the test suite checks against
a brute-force all-pairs oracle.  All collision coordinates are exact scalars,
so simultaneous and multi-way collisions group by literal position equality
with no tie-breaking.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .model import InitialConfiguration, MetaSignal, SignalMachine, Site
from .scalars import Scalar

QUIESCENT = "quiescent"
TIME_LIMIT = "time_limit"
EVENT_LIMIT = "event_limit"
MISSING_RULE = "missing_rule"
CERTIFIED_ACCUMULATION = "certified_accumulation"


@dataclass(frozen=True)
class RunState:
    """Instantaneous content of the line: sorted nonempty sites at one time."""

    time: Scalar
    sites: tuple[Site, ...]
    event_count: int = 0

    def positions(self) -> tuple[Scalar, ...]:
        return tuple(p for p, _ in self.sites)

    def signal_count(self) -> int:
        return sum(len(sigs) for _, sigs in self.sites)


@dataclass(frozen=True)
class Event:
    index: int
    time: Scalar
    position: Scalar
    incoming: frozenset[MetaSignal]
    outgoing: frozenset[MetaSignal]

    def __repr__(self) -> str:
        ins = ",".join(sorted(m.name for m in self.incoming))
        outs = ",".join(sorted(m.name for m in self.outgoing))
        return f"E{self.index}@({self.position},{self.time}) {{{ins}}}->{{{outs}}}"


@dataclass
class Segment:
    """One straight piece of a signal's trace between two events."""

    signal: MetaSignal
    birth_position: Scalar
    birth_time: Scalar
    birth_event: Optional[int]  # None = present initially
    death_time: Optional[Scalar] = None
    death_event: Optional[int] = None

    def position_at(self, t: Scalar, speed: Scalar) -> Scalar:
        return self.birth_position + speed * (t - self.birth_time)


@dataclass(frozen=True)
class RunLimits:
    max_events: int = 10_000
    max_time: Optional[Scalar] = None

    def __post_init__(self) -> None:
        if self.max_events < 0:
            raise ValueError("max_events must be >= 0")


class MissingRuleError(RuntimeError):
    """A collision formed whose incoming set has no rule."""

    def __init__(self, position: Scalar, time: Scalar, incoming: frozenset[MetaSignal]):
        names = ",".join(sorted(m.name for m in incoming))
        super().__init__(f"no rule for {{{names}}} at x={position}, t={time}")
        self.position = position
        self.time = time
        self.incoming = incoming


class SpaceTimeDiagram:
    """Recorded run: exact event log, signal segments, state snapshots."""

    __slots__ = (
        "machine",
        "initial",
        "events",
        "segments",
        "snapshots",
        "final_state",
        "halt_reason",
        "halt_detail",
        "certificate",
    )

    def __init__(
        self,
        machine: SignalMachine,
        initial: InitialConfiguration,
        events: list[Event],
        segments: list[Segment],
        snapshots: list[RunState],
        final_state: RunState,
        halt_reason: str,
        halt_detail: Optional[MissingRuleError] = None,
        certificate: object | None = None,
    ) -> None:
        self.machine = machine
        self.initial = initial
        self.events = events
        self.segments = segments
        self.snapshots = snapshots
        self.final_state = final_state
        self.halt_reason = halt_reason
        self.halt_detail = halt_detail
        self.certificate = certificate

    @property
    def horizon(self) -> Optional[Scalar]:
        """Last time the diagram fully describes; None means unbounded."""
        if self.halt_reason == QUIESCENT:
            return None
        if self.halt_reason == MISSING_RULE and self.halt_detail is not None:
            return self.halt_detail.time
        return self.final_state.time

    def covers(self, t: Scalar) -> bool:
        if t.sign() < 0:
            return False
        h = self.horizon
        if h is None:
            return True
        if self.halt_reason == MISSING_RULE:
            return t < h
        return t <= h

    def event_times(self) -> list[Scalar]:
        out: list[Scalar] = []
        for e in self.events:
            if not out or out[-1] != e.time:
                out.append(e.time)
        return out

    def __repr__(self) -> str:
        return f"SpaceTimeDiagram({len(self.events)} events, halt={self.halt_reason})"


# -- next-collision search ----------------------------------------------------

_Member = tuple[MetaSignal, int]  # meta-signal and its open segment id (-1: untracked)
_LiveSite = tuple[Scalar, list[_Member]]


def next_collision_delta(
    machine: SignalMachine, state: RunState
) -> tuple[Optional[Scalar], list[tuple[Scalar, frozenset[MetaSignal]]]]:
    """Minimal positive delay until some signals meet, plus every meeting
    point realized at that delay.  (None, []) when nothing ever collides."""
    delta = _min_delta(machine, state.sites)
    if delta is None:
        return None, []
    sp = machine.speed_of
    landing: dict[Scalar, list[MetaSignal]] = {}
    for x, sigs in state.sites:
        for ms in sigs:
            landing.setdefault(x + sp(ms) * delta, []).append(ms)
    groups = [
        (p, frozenset(members))
        for p, members in landing.items()
        if len(members) >= 2
    ]
    groups.sort(key=lambda g: g[0])
    return delta, groups


def _min_delta(machine: SignalMachine, sites: Sequence[Site]) -> Optional[Scalar]:
    best: Optional[Scalar] = None
    sp = machine.speed_of
    for (x1, sigs1), (x2, sigs2) in zip(sites, sites[1:]):
        vmax = max(sp(m) for m in sigs1)
        vmin = min(sp(m) for m in sigs2)
        if vmax > vmin:
            d = (x2 - x1) / (vmax - vmin)
            if best is None or d < best:
                best = d
    return best


# -- run internals --------------------------------------------------------------
#
# Site members are kept sorted by speed.  Walking the sites in order then
# yields non-decreasing landing positions at the next collision time (two
# signals can only swap order by first meeting, and the minimal delay stops
# exactly at the meeting), so advancing needs a single linear grouping pass
# instead of a global sort.


class _Runner:
    """Mutable loop state shared by advance() and run()."""

    def __init__(
        self,
        machine: SignalMachine,
        live: list[_LiveSite],
        time: Scalar,
        event_count: int,
        track_segments: bool = False,
    ) -> None:
        self.machine = machine
        self.live = live
        self.time = time
        self.event_count = event_count
        self.new_events: list[Event] = []
        self.track_segments = track_segments
        self.segments: list[Segment] = []

    def open_segment(
        self, ms: MetaSignal, pos: Scalar, t: Scalar, ev: Optional[int]
    ) -> int:
        self.segments.append(Segment(ms, pos, t, ev))
        return len(self.segments) - 1

    def sort_members(self, members: list[_Member]) -> list[_Member]:
        sp = self.machine.speed_of
        return sorted(members, key=lambda m: _SpeedKey(sp(m[0])))

    def min_delta(self) -> Optional[Scalar]:
        best: Optional[Scalar] = None
        sp = self.machine.speed_of
        for (x1, m1), (x2, m2) in zip(self.live, self.live[1:]):
            vmax = sp(m1[-1][0])  # members are speed-sorted
            vmin = sp(m2[0][0])
            if vmax > vmin:
                d = (x2 - x1) / (vmax - vmin)
                if best is None or d < best:
                    best = d
        return best

    def _landings(self, delta: Scalar):
        sp = self.machine.speed_of
        for x, members in self.live:
            for ms, seg in members:
                yield x + sp(ms) * delta, ms, seg

    def drift_all(self, delta: Scalar) -> None:
        """Move every signal by delta*speed, no collisions resolved.  Only
        valid for delta below the next collision delay."""
        if delta.sign() == 0:
            return
        self.live = [(p, [(ms, seg)]) for p, ms, seg in self._landings(delta)]
        self.time = self.time + delta

    def step(self, delta: Scalar) -> None:
        """Advance to the next collision time and apply every rule there.
        Raises MissingRuleError before mutating anything."""
        if delta.sign() <= 0:
            raise AssertionError("collision delay must be strictly positive")
        t_new = self.time + delta
        groups: list[tuple[Scalar, list[_Member]]] = []
        for p, ms, seg in self._landings(delta):
            if groups and groups[-1][0] == p:
                groups[-1][1].append((ms, seg))
            else:
                groups.append((p, [(ms, seg)]))
        collisions: dict[int, frozenset[MetaSignal]] = {}
        for gi, (p, members) in enumerate(groups):
            if len(members) >= 2:
                incoming = frozenset(ms for ms, _ in members)
                outgoing = self.machine.rule_for(incoming)
                if outgoing is None:
                    raise MissingRuleError(p, t_new, incoming)
                collisions[gi] = outgoing
        if not collisions:
            raise AssertionError("step() called with no collision at delta")
        new_live: list[_LiveSite] = []
        for gi, (p, members) in enumerate(groups):
            if gi not in collisions:
                new_live.append((p, members))
                continue
            outgoing = collisions[gi]
            incoming = frozenset(ms for ms, _ in members)
            idx = self.event_count
            self.new_events.append(Event(idx, t_new, p, incoming, outgoing))
            self.event_count += 1
            if self.track_segments:
                for _, seg in members:
                    if seg >= 0:
                        self.segments[seg].death_time = t_new
                        self.segments[seg].death_event = idx
                fresh = [
                    (ms, self.open_segment(ms, p, t_new, idx)) for ms in outgoing
                ]
            else:
                fresh = [(ms, -1) for ms in outgoing]
            if fresh:
                new_live.append((p, self.sort_members(fresh)))
        self.live = new_live
        self.time = t_new

    def state(self) -> RunState:
        sites = tuple(
            (p, frozenset(ms for ms, _ in members)) for p, members in self.live
        )
        return RunState(self.time, sites, self.event_count)


class _SpeedKey:
    """Sort adapter over exact speeds."""

    __slots__ = ("v",)

    def __init__(self, v: Scalar) -> None:
        self.v = v

    def __lt__(self, other: "_SpeedKey") -> bool:
        return self.v < other.v


def advance(machine: SignalMachine, state: RunState) -> tuple[RunState, list[Event]]:
    """One dynamics step from an arbitrary state.  Raises MissingRuleError on
    an unruled collision and ValueError when no collision is ahead."""
    delta = _min_delta(machine, state.sites)
    if delta is None:
        raise ValueError("no further collision: delta is infinite")
    runner = _Runner(machine, _live_from_state(machine, state), state.time, state.event_count)
    runner.step(delta)
    return runner.state(), runner.new_events


def _live_from_state(machine: SignalMachine, state: RunState) -> list[_LiveSite]:
    runner_sites: list[_LiveSite] = []
    sp = machine.speed_of
    for p, sigs in state.sites:
        members = sorted(((ms, -1) for ms in sigs), key=lambda m: _SpeedKey(sp(m[0])))
        runner_sites.append((p, members))
    return runner_sites


# -- full runs ------------------------------------------------------------------

Certifier = Callable[[list[Event], list[RunState]], object]


def run(
    machine: SignalMachine,
    config: InitialConfiguration,
    limits: RunLimits | None = None,
    certifier: Certifier | None = None,
) -> SpaceTimeDiagram:
    """Iterate the dynamics until quiescence, a limit, a missing rule, or a
    certificate from the optional analysis callback."""
    limits = limits or RunLimits()
    zero = machine.ctx.zero()
    runner = _Runner(machine, [], zero, 0, track_segments=True)
    runner.live = [
        (
            p,
            runner.sort_members(
                [
                    (ms, runner.open_segment(ms, p, zero, None))
                    for ms in sorted(sigs, key=lambda m: m.index)
                ]
            ),
        )
        for p, sigs in config.sites
    ]

    events: list[Event] = []
    snapshots = [runner.state()]
    halt_reason = QUIESCENT
    halt_detail: Optional[MissingRuleError] = None
    certificate: object | None = None

    while True:
        if runner.event_count >= limits.max_events:
            halt_reason = EVENT_LIMIT
            break
        delta = runner.min_delta()
        if delta is None:
            halt_reason = QUIESCENT
            break
        if limits.max_time is not None and runner.time + delta > limits.max_time:
            runner.drift_all(limits.max_time - runner.time)
            halt_reason = TIME_LIMIT
            break
        runner.new_events = []
        try:
            runner.step(delta)
        except MissingRuleError as err:
            halt_reason = MISSING_RULE
            halt_detail = err
            break
        events.extend(runner.new_events)
        snapshots.append(runner.state())
        if certifier is not None:
            certificate = certifier(events, snapshots)
            if certificate is not None:
                halt_reason = CERTIFIED_ACCUMULATION
                break

    return SpaceTimeDiagram(
        machine,
        config,
        events,
        runner.segments,
        snapshots,
        runner.state(),
        halt_reason,
        halt_detail,
        certificate,
    )


def configuration_at(diagram: SpaceTimeDiagram, t: Scalar) -> RunState:
    """Exact configuration at time t, right-continuous at event instants
    (a collision reports its outgoing signals)."""
    if not diagram.covers(t):
        raise ValueError(f"time {t} is beyond the recorded horizon")
    snaps = diagram.snapshots
    times = [s.time for s in snaps]
    i = bisect.bisect_right(times, t) - 1
    if i < 0:
        raise ValueError(f"time {t} precedes the initial configuration")
    base = snaps[i]
    if base.time == t:
        return base
    delta = t - base.time
    sp = diagram.machine.speed_of
    sites: list[Site] = []
    for x, sigs in base.sites:  # strictly before the next event: no co-location
        for ms in sorted(sigs, key=lambda m: _SpeedKey(sp(m))):
            sites.append((x + sp(ms) * delta, frozenset((ms,))))
    return RunState(t, tuple(sites), base.event_count)
