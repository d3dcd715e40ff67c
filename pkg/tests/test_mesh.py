import random
from fractions import Fraction

import pytest

from sigmach.engine import RunLimits, run
from sigmach.mesh import (
    MeshSpec,
    StripSpec,
    central_collision,
    embed_in_mesh,
    mesh_configuration,
    strip_configuration,
    support_machine_nu,
    verify_mesh_inclusion,
)
from sigmach.model import InitialConfiguration, MachineError
from sigmach.presets import PHI_CONTEXT, build_gcd, phi
from sigmach.scalars import FieldContext, IncommensurateError

Q = FieldContext(0)


class TestSpecs:
    def test_fraction_reduces(self):
        spec = StripSpec.make(4, 6, 0, 1)
        assert (spec.p, spec.q) == (2, 3)
        assert spec.subdivisions == 5

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            StripSpec.make(0, 3, 0, 1)
        with pytest.raises(ValueError):
            StripSpec.make(2, 3, 0, 0)
        with pytest.raises(ValueError):
            MeshSpec(StripSpec.make(1, 1, 0, 1), 0)

    def test_derived_quantities(self):
        spec = StripSpec.make(2, 3, 0, 1)
        assert spec.transient_time == Q.scalar(Fraction(3, 5))
        assert spec.period_candidate == Q.scalar(Fraction(1, 2))


class TestConfigurations:
    def test_strip_2_3(self):
        machine = support_machine_nu(2, 3)
        config = strip_configuration(StripSpec.make(2, 3, 0, 1), machine)
        shape = {str(p): sorted(m.name for m in sigs) for p, sigs in config.sites}
        assert shape == {
            "0": ["L", "R", "S"],
            "1/5": ["S"],
            "2/5": ["S"],
            "3/5": ["S"],
            "4/5": ["S"],
            "1": ["L", "R", "S"],
        }

    def test_strip_1_1(self):
        machine = support_machine_nu(1, 1)
        config = strip_configuration(StripSpec.make(1, 1, 0, 1), machine)
        assert [str(p) for p in config.positions()] == ["0", "1/2", "1"]

    def test_strip_shifted_scaled(self):
        machine = support_machine_nu(2, 3)
        config = strip_configuration(StripSpec.make(2, 3, 5, 10), machine)
        assert [str(p) for p in config.positions()] == [
            "5", "7", "9", "11", "13", "15",
        ]

    def test_mesh_k1_equals_strip(self):
        machine = support_machine_nu(2, 3)
        spec = StripSpec.make(2, 3, 0, 1)
        assert mesh_configuration(MeshSpec(spec, 1), machine) == strip_configuration(
            spec, machine
        )

    def test_mesh_site_count(self):
        machine = support_machine_nu(1, 2)
        config = mesh_configuration(MeshSpec(StripSpec.make(1, 2, 0, 1), 2), machine)
        assert len(config) == 7  # k(p+q) + 1
        junctions = [p for p, sigs in config.sites if len(sigs) == 3]
        assert [str(p) for p in junctions] == ["0", "1", "2"]

    def test_mesh_figure_2_3_k3(self):
        machine = support_machine_nu(2, 3)
        config = mesh_configuration(MeshSpec(StripSpec.make(2, 3, 0, 1), 3), machine)
        assert len(config) == 16
        assert [str(p) for p, s in config.sites if len(s) == 3] == ["0", "1", "2", "3"]


class TestCentralCollision:
    def test_formula_2_3(self):
        x, t = central_collision(StripSpec.make(2, 3, 0, 1))
        assert (x, t) == (Q.scalar(Fraction(2, 5)), Q.scalar(Fraction(3, 5)))

    def test_formula_symmetric(self):
        x, t = central_collision(StripSpec.make(1, 1, 0, 1))
        assert (x, t) == (Q.scalar(Fraction(1, 2)), Q.scalar(Fraction(1, 2)))

    def test_simulation_has_the_triple(self):
        machine = support_machine_nu(2, 3)
        spec = StripSpec.make(2, 3, 0, 1)
        diagram = run(
            machine,
            strip_configuration(spec, machine),
            RunLimits(max_time=Q.scalar(1)),
        )
        x, t = central_collision(spec)
        hits = [e for e in diagram.events if e.position == x and e.time == t]
        assert len(hits) == 1
        assert {m.name for m in hits[0].incoming} == {"L", "S", "R"}


class TestEmbedding:
    def test_gcd_of_gaps(self):
        machine = support_machine_nu(1, 1)
        config = InitialConfiguration.build(
            machine, [("S", 0), ("S", Fraction(1, 2)), ("S", 2)]
        )
        spec = embed_in_mesh(config, 1, 1)
        assert spec.strip.w == Q.scalar(Fraction(1, 2))
        assert spec.k == 4
        assert spec.strip.x0 == Q.zero()

    def test_two_sites(self):
        machine = support_machine_nu(2, 3)
        config = InitialConfiguration.build(machine, [("L", 0), ("R", 1)])
        spec = embed_in_mesh(config, 2, 3)
        assert spec.strip.w == Q.one() and spec.k == 1

    def test_irrational_gap_rejected(self):
        machine = support_machine_nu(1, 1, PHI_CONTEXT)
        config = InitialConfiguration.build(
            machine, [("S", 0), ("S", 1), ("S", phi())]
        )
        with pytest.raises(IncommensurateError):
            embed_in_mesh(config, 1, 1)

    def test_single_site_rejected(self):
        machine = support_machine_nu(1, 1)
        config = InitialConfiguration.build(machine, [("S", 0)])
        with pytest.raises(MachineError):
            embed_in_mesh(config, 1, 1)

    def test_every_position_lands_on_the_grid(self):
        rng = random.Random(23)
        machine = support_machine_nu(2, 1)
        for _ in range(40):
            positions = sorted(
                {Fraction(rng.randint(-12, 12), rng.choice((1, 2, 3))) for _ in range(4)}
            )
            if len(positions) < 2:
                continue
            config = InitialConfiguration.build(
                machine, [("S", p) for p in positions]
            )
            spec = embed_in_mesh(config, 2, 1)
            for p in config.positions():
                ratio = (p - spec.strip.x0) / spec.strip.w
                assert ratio.b == 0 and ratio.a.denominator == 1
                assert 0 <= int(ratio.a) <= spec.k


class TestMeshVerification:
    def test_gcd_8_3_horizon_30(self):
        machine, config = build_gcd(8, 3)
        report = verify_mesh_inclusion(machine, config, horizon=Q.scalar(30))
        assert report.included
        assert report.events_inside
        assert report.periodicity is not None
        assert report.mesh_contraction_free
        assert report.ok

    def test_gcd_phi_reports_embedding_error(self):
        machine, _ = build_gcd(phi(), 1, ctx=PHI_CONTEXT)
        config = InitialConfiguration.build(
            machine, [("wall0", 0), ("zig", 0), ("wall_b", 1), ("wall_a", phi())]
        )
        with pytest.raises(IncommensurateError):
            verify_mesh_inclusion(machine, config)

    def test_mesh_event_structure_after_transient(self):
        machine, config = build_gcd(8, 3)
        report = verify_mesh_inclusion(machine, config)
        spec = report.spec
        lo, hi = spec.span
        t_T = spec.strip.transient_time
        for e in report.mesh_diagram.events:
            assert lo <= e.position <= hi
            if e.time >= t_T:
                names = {m.name for m in e.incoming}
                assert "S" in names  # no pure L/R meeting after the transient
                if lo < e.position < hi:
                    assert names == {"L", "S", "R"}

    def test_mesh_periodicity_repeats_three_periods(self):
        machine, config = build_gcd(8, 3)
        report = verify_mesh_inclusion(machine, config)
        cert = report.periodicity
        assert cert is not None
        horizon = report.mesh_diagram.horizon
        assert cert.transient + 3 * cert.period <= horizon
