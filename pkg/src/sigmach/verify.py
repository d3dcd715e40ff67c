"""Seeded property suites: randomized cross-checks of the scheduler, the
2-speed collision bound, the arithmetic machines, affine covariance,
support-diagram inclusion, and mesh non-accumulation at desk scale.

Each suite is deterministic for a given seed and returns one result per
case; the CLI prints them and exits nonzero on any failure.  The oracles
here (all-pairs collision search, integer arithmetic) are deliberately
independent of the implementations they check.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .analysis import detect_contraction, two_speed_bound_check
from .engine import (
    RunLimits,
    RunState,
    next_collision_delta,
    run,
)
from .model import (
    AffineMap,
    InitialConfiguration,
    MetaSignal,
    SignalMachine,
    apply_affine_to_machine,
    normalize_speeds,
    support_configuration,
    support_machine,
)
from .presets import build_sm2_support, geometric_result
from .scalars import FieldContext, Scalar, floor_div_mod, rational_gcd
from .mesh import embed_in_mesh, verify_mesh_inclusion


@dataclass(frozen=True)
class CaseResult:
    index: int
    ok: bool
    detail: str = ""


def all_ok(results: Sequence[CaseResult]) -> bool:
    return all(r.ok for r in results)


# -- brute-force scheduler oracle -------------------------------------------------


def brute_force_next_collision(
    machine: SignalMachine, state: RunState
) -> tuple[Optional[Scalar], list[tuple[Scalar, frozenset[MetaSignal]]]]:
    """All-pairs minimization of the meeting delay, then grouping by landing
    position; the oracle against which the adjacent-pair scan is checked."""
    flat = [(p, ms) for p, sigs in state.sites for ms in sigs]
    sp = machine.speed_of
    best: Optional[Scalar] = None
    for (x1, m1), (x2, m2) in itertools.combinations(flat, 2):
        v1, v2 = sp(m1), sp(m2)
        if v1 == v2:
            continue
        d = (x2 - x1) / (v1 - v2)
        if d.sign() > 0 and (best is None or d < best):
            best = d
    if best is None:
        return None, []
    landing: dict[Scalar, list[MetaSignal]] = {}
    for x, ms in flat:
        landing.setdefault(x + sp(ms) * best, []).append(ms)
    groups = [
        (p, frozenset(members)) for p, members in landing.items() if len(members) >= 2
    ]
    groups.sort(key=lambda g: g[0])
    return best, groups


# -- random generators --------------------------------------------------------------


def _fraction(rng: random.Random, lo: int = -6, hi: int = 6, dens=(1, 2, 3)) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.choice(dens))


def _distinct_fractions(rng: random.Random, n: int, **kw) -> list[Fraction]:
    got: list[Fraction] = []
    while len(got) < n:
        f = _fraction(rng, **kw)
        if f not in got:
            got.append(f)
    return got


def random_state(
    rng: random.Random, max_signals: int = 12
) -> tuple[SignalMachine, RunState]:
    """A machine with one meta-signal per instance and a sorted random state;
    co-located instances always get distinct speeds."""
    ctx = FieldContext(0)
    n = rng.randint(2, max_signals)
    speeds = [_fraction(rng, -5, 5) for _ in range(n)]
    machine = SignalMachine.build([(f"g{i}", s) for i, s in enumerate(speeds)], ctx=ctx)
    by_pos: dict[Fraction, set[MetaSignal]] = {}
    for ms in machine.signals:
        for _ in range(50):
            pos = _fraction(rng, -8, 8, dens=(1, 2))
            here = by_pos.setdefault(pos, set())
            if all(machine.speed_of(o) != machine.speed_of(ms) for o in here):
                here.add(ms)
                break
        else:  # no free slot found, place alone far away
            by_pos[Fraction(100 + ms.index)] = {ms}
    sites = tuple(
        (ctx.scalar(p), frozenset(by_pos[p])) for p in sorted(by_pos) if by_pos[p]
    )
    return machine, RunState(ctx.zero(), sites)


def random_machine(
    rng: random.Random,
    n_speeds: int,
    extra_signals: int = 2,
    speed_pool: Callable[[random.Random], Fraction] | None = None,
) -> SignalMachine:
    """Random machine with a total rule table over every eligible input set."""
    ctx = FieldContext(0)
    draw = speed_pool or (lambda r: _fraction(r, -4, 4, dens=(1, 2)))
    speeds: list[Fraction] = []
    while len(speeds) < n_speeds:
        f = draw(rng)
        if f not in speeds:
            speeds.append(f)
    n_signals = n_speeds + rng.randint(0, extra_signals)
    assignment = list(speeds) + [rng.choice(speeds) for _ in range(n_signals - n_speeds)]
    rng.shuffle(assignment)
    names = [(f"m{i}", s) for i, s in enumerate(assignment)]

    classes: dict[Fraction, list[str]] = {}
    for (name, s) in names:
        classes.setdefault(s, []).append(name)
    class_lists = list(classes.values())

    def eligible_sets():
        for picks in itertools.product(*[[None, *members] for members in class_lists]):
            chosen = tuple(p for p in picks if p is not None)
            if len(chosen) >= 2:
                yield chosen

    rules = []
    for ins in eligible_sets():
        outs = tuple(
            rng.choice(members)
            for members in class_lists
            if rng.random() < 0.65
        )
        rules.append((ins, outs))
    return SignalMachine.build(names, rules, ctx=ctx)


def random_configuration(
    rng: random.Random,
    machine: SignalMachine,
    max_sites: int = 6,
    dens=(1, 2, 3),
) -> InitialConfiguration:
    ctx = machine.ctx
    n_sites = rng.randint(2, max_sites)
    positions: list[Fraction] = []
    while len(positions) < n_sites:
        p = _fraction(rng, -6, 6, dens=dens)
        if p not in positions:
            positions.append(p)
    placements = []
    for p in positions:
        k = rng.randint(1, 2)
        chosen: list[MetaSignal] = []
        for ms in rng.sample(list(machine.signals), len(machine.signals)):
            if len(chosen) >= k:
                break
            if all(machine.speed_of(c) != machine.speed_of(ms) for c in chosen):
                chosen.append(ms)
        for ms in chosen:
            placements.append((ms, ctx.scalar(p)))
    return InitialConfiguration.build(machine, placements)


# -- suites ---------------------------------------------------------------------------


def suite_scheduler(seed: int = 0, count: int = 200) -> list[CaseResult]:
    """Adjacent-pair scan vs all-pairs oracle, including simultaneous groups."""
    rng = random.Random(seed)
    results = []
    for i in range(count):
        machine, state = random_state(rng)
        got = next_collision_delta(machine, state)
        want = brute_force_next_collision(machine, state)
        ok = got[0] == want[0] and got[1] == want[1]
        results.append(CaseResult(i, ok, "" if ok else f"{got} != {want}"))
    return results


def suite_2speed(seed: int = 0, count: int = 100) -> list[CaseResult]:
    """Random interleavings never exceed the i*j collision bound and always
    halt; the event count equals the number of (mover left of blocker) pairs."""
    rng = random.Random(seed)
    results = []
    for case in range(count):
        i, j = rng.randint(0, 5), rng.randint(0, 5)
        positions = _distinct_fractions(rng, i + j, lo=-9, hi=9, dens=(1, 2))
        kinds = ["R"] * i + ["S"] * j
        rng.shuffle(kinds)
        arrangement = list(zip(kinds, positions))
        machine, config = build_sm2_support(i, j, arrangement)
        report = two_speed_bound_check(machine, config)
        crossings = sum(
            1
            for (ka, pa), (kb, pb) in itertools.combinations(arrangement, 2)
            if ((ka, kb) == ("R", "S") and pa < pb)
            or ((ka, kb) == ("S", "R") and pb < pa)
        )
        ok = report.halted and report.count == crossings and report.count <= report.bound
        results.append(
            CaseResult(
                case,
                ok,
                "" if ok else f"count={report.count} crossings={crossings} bound={report.bound}",
            )
        )
    return results


def suite_2speed_exhaustive(max_n: int = 5) -> list[CaseResult]:
    """Sorted arrangements (every mover left of every blocker) reach the
    bound exactly, for all i, j up to max_n."""
    results = []
    case = 0
    for i in range(max_n + 1):
        for j in range(max_n + 1):
            machine, config = build_sm2_support(i, j, "sorted")
            report = two_speed_bound_check(machine, config)
            ok = report.halted and report.count == i * j
            results.append(
                CaseResult(case, ok, "" if ok else f"i={i} j={j} count={report.count}")
            )
            case += 1
    return results


def _random_operands(rng: random.Random) -> tuple[Fraction, Fraction]:
    b = Fraction(rng.randint(1, 12), rng.randint(1, 6))
    q = rng.randint(1, 5)
    r = Fraction(rng.randint(0, 11), rng.choice((1, 2, 3, 4, 6, 12)))
    a = b * q + r
    if a == b:
        a = b * 2
    return a, b


def suite_gcd(seed: int = 0, count: int = 200) -> list[CaseResult]:
    """Geometric subtraction/modulo/gcd against the integer-arithmetic
    oracles; every run must halt."""
    rng = random.Random(seed)
    ctx = FieldContext(0)
    results = []
    ops = ["sub", "mod", "gcd"]
    for i in range(count):
        kind = ops[i % 3]
        a, b = _random_operands(rng)
        sa, sb = ctx.scalar(a), ctx.scalar(b)
        if kind == "sub":
            want = sa - sb
        elif kind == "mod":
            want = floor_div_mod(sa, sb)[1]
        else:
            want = rational_gcd(sa, sb)
        try:
            got = geometric_result(kind, a, b)
            ok = got == want
            detail = "" if ok else f"{kind}({a},{b}) = {got}, want {want}"
        except Exception as e:  # non-halting or readout failure
            ok, detail = False, f"{kind}({a},{b}) raised {e}"
        results.append(CaseResult(i, ok, detail))
    return results


def suite_affine(seed: int = 0, count: int = 50) -> list[CaseResult]:
    """Transformed-machine runs match the original under
    h(x, t) = (x - offset*t, ratio*t) applied to the transformed log."""
    rng = random.Random(seed)
    ctx = FieldContext(0)
    results = []
    ratios = [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 2), 2, 3]
    for i in range(count):
        machine = random_machine(rng, 3)
        config = random_configuration(rng, machine)
        amap = AffineMap(
            ctx.scalar(rng.choice(ratios)), ctx.scalar(_fraction(rng, -3, 3, dens=(1, 2)))
        )
        mapped = apply_affine_to_machine(machine, amap)
        limits = RunLimits(max_events=120)
        d0 = run(machine, config, limits)
        d1 = run(mapped, config, limits)
        sig0 = sorted(
            (e.time, e.position, tuple(sorted(m.name for m in e.incoming)),
             tuple(sorted(m.name for m in e.outgoing)))
            for e in d0.events
        )
        sig1 = sorted(
            (amap.ratio * e.time, e.position - amap.offset * e.time,
             tuple(sorted(m.name for m in e.incoming)),
             tuple(sorted(m.name for m in e.outgoing)))
            for e in d1.events
        )
        ok = d0.halt_reason == d1.halt_reason and sig0 == sig1
        results.append(
            CaseResult(i, ok, "" if ok else f"halt {d0.halt_reason}/{d1.halt_reason}, "
                                            f"{len(d0.events)}/{len(d1.events)} events")
        )
    return results


def suite_support(seed: int = 0, count: int = 50) -> list[CaseResult]:
    """Every event of a run reappears at identical coordinates in the run of
    the support machine on the projected configuration."""
    rng = random.Random(seed)
    results = []
    for i in range(count):
        machine = random_machine(
            rng,
            rng.randint(2, 4),
            speed_pool=lambda r: Fraction(r.randint(-3, 3)),
        )
        config = random_configuration(rng, machine, dens=(1, 2))
        original = run(machine, config, RunLimits(max_events=80))
        supp_m, projection = support_machine(machine)
        supp_c = support_configuration(config, projection)
        supp = run(
            supp_m, supp_c, RunLimits(max_events=350, max_time=original.horizon)
        )
        bounds = [h for h in (original.horizon, supp.horizon) if h is not None]
        cap = min(bounds) if bounds else None
        index: dict[tuple[Scalar, Scalar], frozenset] = {}
        for e in supp.events:
            index[(e.position, e.time)] = e.incoming
        ok, detail = True, ""
        for e in original.events:
            if cap is not None and e.time > cap:
                continue
            supp_in = index.get((e.position, e.time))
            if supp_in is None:
                ok, detail = False, f"event {e!r} missing from support run"
                break
            if not {projection[m].name for m in e.incoming} <= {
                m.name for m in supp_in
            }:
                ok, detail = False, f"incoming mismatch at {e!r}"
                break
        results.append(CaseResult(i, ok, detail))
    return results


def suite_mesh(
    seed: int = 0,
    count: int = 20,
    horizon: Optional[Scalar] = None,
    max_cells: int = 60,
) -> list[CaseResult]:
    """Random rational 3-speed systems: support run embeds in its mesh, no
    event escapes the walls, the mesh is periodic, and neither the mesh nor
    the support run admits a contraction certificate."""
    rng = random.Random(seed)
    results = []
    for i in range(count):
        machine, config = _desk_scale_mesh_case(rng, max_cells)
        try:
            report = verify_mesh_inclusion(machine, config, horizon=horizon)
            supp_free = detect_contraction(report.support_diagram) is None
            ok = report.ok and supp_free
            detail = "" if ok else (
                f"included={report.included} inside={report.events_inside} "
                f"periodic={report.periodicity is not None} "
                f"mesh_free={report.mesh_contraction_free} supp_free={supp_free}"
            )
        except Exception as e:
            ok, detail = False, f"raised {e}"
        results.append(CaseResult(i, ok, detail))
    return results


def _desk_scale_mesh_case(
    rng: random.Random, max_cells: int
) -> tuple[SignalMachine, InitialConfiguration]:
    """Resample until the embedding mesh stays small enough to run quickly."""
    while True:
        machine = random_machine(
            rng, 3, speed_pool=lambda r: Fraction(r.randint(-4, 4), r.choice((1, 2)))
        )
        config = random_configuration(rng, machine, dens=(1, 2))
        normalized, _, _ = normalize_speeds(machine, config)
        nu = normalized.distinct_speeds()[-1]
        p, q = int(nu.a.numerator), int(nu.a.denominator)
        try:
            spec = embed_in_mesh(config, p, q)
        except Exception:
            continue
        if spec.k * spec.strip.subdivisions <= max_cells:
            return machine, config


SUITES: dict[str, Callable[..., list[CaseResult]]] = {
    "scheduler": suite_scheduler,
    "2speed": suite_2speed,
    "gcd": suite_gcd,
    "affine": suite_affine,
    "mesh": suite_mesh,
}
