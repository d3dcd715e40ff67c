"""Strips and meshes: the regular 3-speed diagrams that bound every
rational-like 3-speed run.

A strip is the diagram of the 3-signal support machine with speeds -1, 0 and
p/q started from two walls a width apart, with stationary signals on all
p+q equal subdivisions.  A mesh glues k strips side by side.  Any finite
configuration whose gaps are pairwise commensurate embeds into a mesh via
the gcd of its gaps, and meshes are eventually periodic, which is the whole
desk-scale argument that such runs cannot accumulate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .analysis import (
    PeriodicityCertificate,
    detect_contraction,
    detect_periodicity,
    diagram_included,
)
from .engine import RunLimits, SpaceTimeDiagram, run
from .model import (
    InitialConfiguration,
    MachineError,
    SignalMachine,
    normalize_speeds,
    support_configuration,
)
from .scalars import (
    FieldContext,
    IncommensurateError,
    Scalar,
    as_scalar,
    rational_gcd,
)

LEFT, STILL, RIGHT = "L", "S", "R"


@dataclass(frozen=True)
class StripSpec:
    """Strip of width w starting at x0 for the support machine of speed p/q;
    p and q are reduced to lowest terms on construction."""

    p: int
    q: int
    x0: Scalar
    w: Scalar

    def __post_init__(self) -> None:
        p, q = int(self.p), int(self.q)
        if p <= 0 or q <= 0:
            raise ValueError("p and q must be positive")
        g = math.gcd(p, q)
        object.__setattr__(self, "p", p // g)
        object.__setattr__(self, "q", q // g)
        if self.w.sign() <= 0:
            raise ValueError("strip width must be positive")

    @property
    def nu(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def subdivisions(self) -> int:
        return self.p + self.q

    @property
    def transient_time(self) -> Scalar:
        return self.w * Fraction(self.q, self.p + self.q)

    @property
    def period_candidate(self) -> Scalar:
        """w/p, the back-and-forth time over one subdivision."""
        return self.w / self.p

    @classmethod
    def make(cls, p: int, q: int, x0, w, ctx: FieldContext | None = None) -> "StripSpec":
        ctx = ctx or FieldContext(0)
        return cls(p, q, as_scalar(x0, ctx), as_scalar(w, ctx))


@dataclass(frozen=True)
class MeshSpec:
    strip: StripSpec
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("a mesh needs at least one strip copy")

    @property
    def span(self) -> tuple[Scalar, Scalar]:
        s = self.strip
        return s.x0, s.x0 + s.w * self.k


def support_machine_nu(p: int, q: int, ctx: FieldContext | None = None) -> SignalMachine:
    """The 3-signal support machine with speeds -1, 0 and p/q: every eligible
    collision re-emits all three signals."""
    ctx = ctx or FieldContext(0)
    p, q = int(p), int(q)
    g = math.gcd(p, q)
    nu = Fraction(p // g, q // g)
    machine = SignalMachine.build(
        [(LEFT, -1), (STILL, 0), (RIGHT, nu)],
        [
            ((LEFT, STILL), (LEFT, STILL, RIGHT)),
            ((LEFT, RIGHT), (LEFT, STILL, RIGHT)),
            ((STILL, RIGHT), (LEFT, STILL, RIGHT)),
            ((LEFT, STILL, RIGHT), (LEFT, STILL, RIGHT)),
        ],
        ctx=ctx,
    )
    return machine


def strip_configuration(
    spec: StripSpec, machine: SignalMachine
) -> InitialConfiguration:
    """Stationary signals at x0 + i*w/(p+q) for 0 <= i <= p+q, with the
    left- and right-moving signals co-located at both walls."""
    n = spec.subdivisions
    placements: list[tuple[str, Scalar]] = []
    for i in range(n + 1):
        placements.append((STILL, spec.x0 + spec.w * Fraction(i, n)))
    for edge in (spec.x0, spec.x0 + spec.w):
        placements.append((LEFT, edge))
        placements.append((RIGHT, edge))
    return InitialConfiguration.build(machine, placements)


def mesh_configuration(spec: MeshSpec, machine: SignalMachine) -> InitialConfiguration:
    """k juxtaposed strips sharing junction walls: [L,S,R] at every multiple
    of w, plain S at the interior subdivision points."""
    s = spec.strip
    n = s.subdivisions
    placements: list[tuple[str, Scalar]] = []
    for l in range(spec.k + 1):
        wall = s.x0 + s.w * l
        placements += [(LEFT, wall), (STILL, wall), (RIGHT, wall)]
    for j in range(spec.k):
        for i in range(1, n):
            placements.append((STILL, s.x0 + s.w * (Fraction(i, n) + j)))
    return InitialConfiguration.build(machine, placements)


def central_collision(spec: StripSpec) -> tuple[Scalar, Scalar]:
    """First meeting of the two extremal moving signals: lands exactly on a
    subdivision point, at x = x0 + w*p/(p+q), t = w*q/(p+q)."""
    n = spec.subdivisions
    x = spec.x0 + spec.w * Fraction(spec.p, n)
    t = spec.w * Fraction(spec.q, n)
    return x, t


def embed_in_mesh(config: InitialConfiguration, p: int, q: int) -> MeshSpec:
    """Mesh whose initial configuration contains every site of `config`:
    width = gcd of consecutive gaps, k = span/width.  Raises
    IncommensurateError when the gaps have no common divisor."""
    positions = config.positions()
    if len(positions) < 2:
        raise MachineError("embedding needs at least two sites")
    gaps = [b - a for a, b in zip(positions, positions[1:])]
    w = gaps[0]
    for g in gaps[1:]:
        w = rational_gcd(w, g)
    span = positions[-1] - positions[0]
    ratio = span / w
    if ratio.b != 0 or ratio.a.denominator != 1:
        raise AssertionError("gcd of gaps does not divide the span")
    k = int(ratio.a)
    return MeshSpec(StripSpec(p, q, positions[0], w), k)


@dataclass
class MeshReport:
    """Outcome of the three mesh assertions for one machine/configuration."""

    spec: MeshSpec
    support_diagram: SpaceTimeDiagram
    mesh_diagram: SpaceTimeDiagram
    included: bool
    events_inside: bool
    periodicity: Optional[PeriodicityCertificate]
    mesh_contraction_free: bool

    @property
    def ok(self) -> bool:
        return (
            self.included
            and self.events_inside
            and self.periodicity is not None
            and self.mesh_contraction_free
        )


def verify_mesh_inclusion(
    machine: SignalMachine,
    config: InitialConfiguration,
    horizon: Optional[Scalar] = None,
    max_events: int = 100_000,
) -> MeshReport:
    """Normalize a 3-speed rational-like machine, project its configuration
    onto the 3-signal support machine, embed that into a mesh, run both, and
    check: the support run is included in the mesh run, no mesh event leaves
    the walls, and the mesh run is certified periodic."""
    normalized, config, _ = normalize_speeds(machine, config)
    speeds = normalized.distinct_speeds()
    if len(speeds) != 3:
        raise MachineError("mesh verification needs a 3-speed machine")
    nu = speeds[-1]
    if nu.b != 0:
        raise IncommensurateError("speed ratios are irrational: no mesh exists")
    p, q = int(nu.a.numerator), int(nu.a.denominator)

    smnu = support_machine_nu(p, q, machine.ctx)
    by_speed = {smnu.speed_of(ms): ms for ms in smnu.signals}
    # project by speed class straight onto the shared L/S/R machine so the
    # support and mesh runs use identical meta-signal objects
    proj = {ms: by_speed[normalized.speed_of(ms)] for ms in normalized.signals}
    supp_config = support_configuration(config, proj)

    spec = embed_in_mesh(supp_config, p, q)
    if horizon is None:
        horizon = spec.strip.transient_time + 3 * spec.strip.period_candidate

    limits = RunLimits(max_events=max_events, max_time=horizon)
    supp_run = run(smnu, supp_config, limits)
    mesh_run = run(smnu, mesh_configuration(spec, smnu), limits)

    lo, hi = spec.span
    inside = all(lo <= e.position <= hi for e in mesh_run.events)
    included = diagram_included(supp_run, mesh_run)
    periodicity = detect_periodicity(mesh_run, spec.span, horizon)
    contraction_free = detect_contraction(mesh_run) is None

    return MeshReport(
        spec=spec,
        support_diagram=supp_run,
        mesh_diagram=mesh_run,
        included=included,
        events_inside=inside,
        periodicity=periodicity,
        mesh_contraction_free=contraction_free,
    )
