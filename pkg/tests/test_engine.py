import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigmach.engine import (
    EVENT_LIMIT,
    MISSING_RULE,
    QUIESCENT,
    TIME_LIMIT,
    MissingRuleError,
    RunLimits,
    RunState,
    advance,
    configuration_at,
    next_collision_delta,
    run,
)
from sigmach.model import InitialConfiguration, SignalMachine
from sigmach.presets import (
    build_gcd,
    build_gcd_phi,
    build_modulo,
    build_sm2_support,
    build_sm4,
)
from sigmach.scalars import FieldContext
from sigmach.verify import brute_force_next_collision, random_state

Q = FieldContext(0)


def initial_state(machine, config):
    return RunState(machine.ctx.zero(), config.sites, 0)


class TestNextCollisionDelta:
    def test_shuttle_reaches_the_far_guard_first(self):
        machine, config = build_sm4()
        delta, groups = next_collision_delta(machine, initial_state(machine, config))
        assert delta == Q.scalar(Fraction(4, 9))
        assert len(groups) == 1
        pos, signals = groups[0]
        assert pos == Q.scalar(Fraction(7, 9))
        assert {m.name for m in signals} == {"zig", "right"}

    def test_single_signal_never_collides(self):
        machine = SignalMachine.build([("a", 1)])
        config = InitialConfiguration.build(machine, [("a", 0)])
        delta, groups = next_collision_delta(machine, initial_state(machine, config))
        assert delta is None and groups == []

    def test_parallel_signals_never_collide(self):
        machine = SignalMachine.build([("a", 1), ("b", 1)])
        config = InitialConfiguration.build(machine, [("a", 0), ("b", 5)])
        delta, _ = next_collision_delta(machine, initial_state(machine, config))
        assert delta is None

    def test_mirror_symmetric_simultaneous_groups(self):
        machine = SignalMachine.build([("r", 1), ("s", 0), ("l", -1)])
        config = InitialConfiguration.build(
            machine, [("r", -2), ("s", -1), ("s", 1), ("l", 2)]
        )
        delta, groups = next_collision_delta(machine, initial_state(machine, config))
        assert delta == Q.one()
        assert [str(p) for p, _ in groups] == ["-1", "1"]

    def test_colocated_signals_separate_without_event(self):
        machine = SignalMachine.build([("r", 1), ("s", 0)])
        config = InitialConfiguration.build(machine, [("r", 0), ("s", 0)])
        delta, _ = next_collision_delta(machine, initial_state(machine, config))
        assert delta is None


class TestAdvance:
    def test_sm4_first_step(self):
        machine, config = build_sm4()
        state, events = advance(machine, initial_state(machine, config))
        assert state.time == Q.scalar(Fraction(4, 9))
        assert len(events) == 1
        by_pos = {str(p): sorted(m.name for m in sigs) for p, sigs in state.sites}
        assert by_pos == {"-7/9": ["left"], "7/9": ["right", "zag"]}

    def test_annihilation_empties_the_line(self):
        machine = SignalMachine.build(
            [("r", 1), ("l", -1)], [(("r", "l"), ())]
        )
        config = InitialConfiguration.build(machine, [("r", 0), ("l", 2)])
        state, events = advance(machine, initial_state(machine, config))
        assert state.sites == ()
        assert events[0].outgoing == frozenset()
        diagram = run(machine, config)
        assert diagram.halt_reason == QUIESCENT
        assert len(diagram.events) == 1

    def test_triple_collision_in_gcd(self):
        machine, config = build_gcd(4, 2)
        diagram = run(machine, config)
        triples = [e for e in diagram.events if len(e.incoming) == 3]
        assert len(triples) == 1
        e = triples[0]
        assert {m.name for m in e.incoming} == {"zig", "wall_b", "ZAG"}
        assert {m.name for m in e.outgoing} == {"ZAG", "wall0"}

    def test_missing_rule_is_reported(self):
        machine = SignalMachine.build([("r", 1), ("s", 0)])  # no rules at all
        config = InitialConfiguration.build(machine, [("r", 0), ("s", 1)])
        with pytest.raises(MissingRuleError) as err:
            advance(machine, initial_state(machine, config))
        assert err.value.position == Q.one()
        assert err.value.time == Q.one()
        assert {m.name for m in err.value.incoming} == {"r", "s"}


class TestRun:
    def test_modulo_walls_at_0_and_2(self):
        machine, config = build_modulo(11, 3)
        diagram = run(machine, config)
        assert diagram.halt_reason == QUIESCENT
        finals = {
            str(p): sorted(m.name for m in sigs)
            for p, sigs in diagram.final_state.sites
        }
        assert finals == {"0": ["wall0"], "2": ["wall_r"]}

    def test_sm2_sorted_arrangement_event_count(self):
        machine, config = build_sm2_support(2, 3, "sorted")
        diagram = run(machine, config)
        assert diagram.halt_reason == QUIESCENT
        assert len(diagram.events) == 6

    def test_empty_configuration(self):
        machine, _ = build_sm4()
        diagram = run(machine, InitialConfiguration([]))
        assert diagram.halt_reason == QUIESCENT
        assert diagram.events == []

    def test_missing_rule_halt(self):
        machine = SignalMachine.build([("r", 1), ("s", 0)])
        config = InitialConfiguration.build(machine, [("r", 0), ("s", 1)])
        diagram = run(machine, config)
        assert diagram.halt_reason == MISSING_RULE
        assert diagram.halt_detail.time == Q.one()
        assert diagram.events == []

    def test_event_budget(self):
        machine, config = build_sm4()
        diagram = run(machine, config, RunLimits(max_events=7))
        assert diagram.halt_reason == EVENT_LIMIT
        assert len(diagram.events) == 7

    def test_zero_event_budget(self):
        machine, config = build_sm4()
        diagram = run(machine, config, RunLimits(max_events=0))
        assert diagram.halt_reason == EVENT_LIMIT
        assert diagram.events == []
        assert diagram.final_state.time == Q.zero()
        with pytest.raises(ValueError):
            RunLimits(max_events=-1)

    def test_time_budget_drifts_to_the_boundary(self):
        machine, config = build_sm4()
        diagram = run(machine, config, RunLimits(max_time=Q.scalar(Fraction(1, 2))))
        assert diagram.halt_reason == TIME_LIMIT
        assert diagram.final_state.time == Q.scalar(Fraction(1, 2))
        assert all(e.time <= Q.scalar(Fraction(1, 2)) for e in diagram.events)

    def test_event_times_non_decreasing_and_positive(self):
        machine, config = build_modulo(11, 3)
        diagram = run(machine, config)
        times = [e.time for e in diagram.events]
        assert all(t.sign() > 0 for t in times)
        assert all(a <= b for a, b in zip(times, times[1:]))

    def test_rational_machine_has_rational_event_coordinates(self):
        # run a rational machine inside Q(sqrt5): nothing irrational appears
        ctx = FieldContext(5)
        machine, config = build_gcd(8, 3, ctx=ctx)
        diagram = run(machine, config)
        assert diagram.halt_reason == QUIESCENT
        for e in diagram.events:
            assert e.position.b == 0 and e.time.b == 0

    def test_irrational_machine_produces_irrational_coordinates(self):
        machine, config = build_gcd_phi()
        diagram = run(machine, config, RunLimits(max_events=10))
        assert any(e.position.b != 0 for e in diagram.events)


class TestConfigurationAt:
    def test_time_zero_is_the_initial_configuration(self):
        machine, config = build_sm4()
        diagram = run(machine, config, RunLimits(max_events=5))
        state = configuration_at(diagram, Q.zero())
        assert state.sites == config.sites

    def test_gcd_phi_at_time_one(self):
        machine, config = build_gcd_phi()
        diagram = run(machine, config, RunLimits(max_events=30))
        state = configuration_at(diagram, machine.ctx.one())
        shape = {str(p): sorted(m.name for m in sigs) for p, sigs in state.sites}
        assert shape == {
            "0": ["wall0", "zig"],
            "-1/2+1/2*sqrt(5)": ["wall_b"],
            "1": ["wall_a"],
        }

    def test_between_events_positions_move_linearly(self):
        machine, config = build_sm4()
        diagram = run(machine, config, RunLimits(max_events=3))
        state = configuration_at(diagram, Q.scalar(Fraction(2, 9)))
        shape = {str(p) for p, _ in state.sites}
        # zig at -1 + 4*(2/9), left at -1 + (1/2)(2/9), right at 1 - (1/2)(2/9)
        assert shape == {"-1/9", "-8/9", "8/9"}

    def test_beyond_horizon_rejected(self):
        machine, config = build_sm4()
        diagram = run(machine, config, RunLimits(max_events=3))
        with pytest.raises(ValueError):
            configuration_at(diagram, diagram.final_state.time + 1)

    def test_quiescent_diagram_extends_forever(self):
        machine, config = build_modulo(11, 3)
        diagram = run(machine, config)
        state = configuration_at(diagram, Q.scalar(1000))
        assert {str(p) for p, _ in state.sites} == {"0", "2"}


class TestSchedulerOracle:
    def test_neighbor_scan_matches_brute_force(self):
        rng = random.Random(20260810)
        for _ in range(120):
            machine, state = random_state(rng)
            assert next_collision_delta(machine, state) == brute_force_next_collision(
                machine, state
            )

    @given(
        st.lists(
            st.tuples(
                st.fractions(min_value=-9, max_value=9, max_denominator=4),
                st.fractions(min_value=-5, max_value=5, max_denominator=3),
            ),
            min_size=2,
            max_size=10,
        )
    )
    @settings(max_examples=150, deadline=None)
    def test_neighbor_scan_matches_brute_force_hypothesis(self, placed):
        machine = SignalMachine.build(
            [(f"h{i}", speed) for i, (_, speed) in enumerate(placed)]
        )
        by_pos = {}
        for ms, (pos, _) in zip(machine.signals, placed):
            group = by_pos.setdefault(Q.scalar(pos), set())
            if any(
                machine.speed_of(o) == machine.speed_of(ms) for o in group
            ):
                continue  # same-speed co-location is not a valid state
            group.add(ms)
        sites = tuple(
            (p, frozenset(by_pos[p])) for p in sorted(by_pos) if by_pos[p]
        )
        state = RunState(Q.zero(), sites, 0)
        assert next_collision_delta(machine, state) == brute_force_next_collision(
            machine, state
        )

    def test_simultaneous_batch_shares_one_time(self):
        machine, config = build_modulo(9, 3)  # has simultaneous distinct groups
        diagram = run(machine, config)
        by_index = {}
        for snap_prev, snap in zip(diagram.snapshots, diagram.snapshots[1:]):
            batch = [e for e in diagram.events if snap_prev.event_count <= e.index < snap.event_count]
            assert len({e.time for e in batch}) == 1
            by_index.setdefault(len(batch), 0)
            by_index[len(batch)] += 1
        assert any(k >= 2 for k in by_index)  # at least one true simultaneous batch
