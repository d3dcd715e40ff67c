"""Command-line front end.

Exit codes: 0 success (quiescent halt or certified result), 1 wrong usage or
input, 2 missing collision rule, 3 budget exhausted without a certificate,
so CI can tell "inconclusive" from "wrong".
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .analysis import detect_contraction
from .engine import (
    EVENT_LIMIT,
    MISSING_RULE,
    QUIESCENT,
    TIME_LIMIT,
    RunLimits,
    SpaceTimeDiagram,
    run,
)
from .mesh import MeshSpec, StripSpec, mesh_configuration, support_machine_nu
from .presets import (
    ReadoutError,
    build_gcd,
    build_gcd_phi,
    build_modulo,
    build_sm4,
    build_subtraction,
    read_encoded_value,
)
from .scalars import FieldContext, format_scalar
from .svg import RenderOptions, render_diagram
from .textio import MachineParseError, event_log_lines, parse_machine_file
from .verify import SUITES, suite_2speed_exhaustive

PRESETS = ("sm4", "sub", "mod", "gcd", "gcd-phi")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit 1, not 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="sigmach", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="simulate a machine file or preset")
    src = runp.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--file", help="machine-definition file")
    runp.add_argument("--a", default="11", help="first operand for arithmetic presets")
    runp.add_argument("--b", default="3", help="second operand for arithmetic presets")
    runp.add_argument("--max-events", type=int, default=10_000)
    runp.add_argument("--max-time", default=None, help="exact scalar time bound")
    runp.add_argument("--detect-accumulation", action="store_true")
    runp.add_argument("--svg", metavar="PATH", help="write an SVG rendering")
    runp.add_argument("--log", metavar="PATH", help="write the exact event log")

    verp = sub.add_parser("verify", help="run a seeded property suite")
    verp.add_argument("suite", choices=sorted(SUITES) + ["2speed-exhaustive"])
    verp.add_argument("--seed", type=int, default=0)
    verp.add_argument("--count", type=int, default=None)
    verp.add_argument("--horizon", default=None, help="exact scalar horizon (mesh suite)")

    meshp = sub.add_parser("mesh", help="emit a mesh initial configuration")
    meshp.add_argument("--p", type=int, required=True)
    meshp.add_argument("--q", type=int, required=True)
    meshp.add_argument("--x0", default="0")
    meshp.add_argument("--w", default="1")
    meshp.add_argument("--k", type=int, default=1)
    return p


def _load_system(args):
    if args.file:
        with open(args.file, "r", encoding="utf-8") as fh:
            return parse_machine_file(fh.read()), None
    if args.preset == "sm4":
        return build_sm4(), None
    builders = {"sub": build_subtraction, "mod": build_modulo, "gcd": build_gcd}
    if args.preset in builders:
        ctx = FieldContext(0)
        a, b = ctx.parse(args.a), ctx.parse(args.b)
        return builders[args.preset](a, b), args.preset
    return build_gcd_phi(), None


def _cmd_run(args) -> int:
    try:
        (machine, config), arith = _load_system(args)
    except MachineParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    max_time = machine.ctx.parse(args.max_time) if args.max_time else None
    limits = RunLimits(max_events=args.max_events, max_time=max_time)

    certifier = None
    if args.detect_accumulation:
        probe = {"next": 4}

        def certifier(events, snapshots):
            if len(events) < probe["next"]:
                return None
            probe["next"] = len(events) * 2
            view = SpaceTimeDiagram(
                machine, config, events, [], snapshots, snapshots[-1], EVENT_LIMIT
            )
            return detect_contraction(view)

    diagram = run(machine, config, limits, certifier)
    print(f"halt: {diagram.halt_reason} after {len(diagram.events)} events")

    certificate = diagram.certificate
    if args.detect_accumulation and certificate is None:
        certificate = detect_contraction(diagram)
    accum_point = None
    if certificate is not None:
        print(certificate.serialize())
        print(
            f"  (decimal: center={float(certificate.center_x):.9g} "
            f"time={float(certificate.limit_time):.9g} "
            f"ratio={float(certificate.ratio):.9g})"
        )
        accum_point = (certificate.center_x, certificate.limit_time)

    if arith is not None and diagram.halt_reason == QUIESCENT:
        try:
            if arith == "gcd":
                value = read_encoded_value(diagram.final_state, machine).value
            else:
                try:
                    value = read_encoded_value(
                        diagram.final_state, machine, "wall0", "wall_r"
                    ).value
                except ReadoutError:
                    if arith != "mod":
                        raise
                    value = machine.ctx.zero()
            print(f"result = {format_scalar(value)}")
        except ReadoutError as e:
            print(f"readout failed: {e}", file=sys.stderr)
            return 1

    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write("\n".join(event_log_lines(diagram)) + "\n")
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(render_diagram(diagram, RenderOptions(), accum_point))

    if diagram.halt_reason == MISSING_RULE:
        print(f"missing rule: {diagram.halt_detail}", file=sys.stderr)
        return 2
    if diagram.halt_reason in (EVENT_LIMIT, TIME_LIMIT) and certificate is None:
        return 3
    return 0


def _cmd_verify(args) -> int:
    if args.suite == "2speed-exhaustive":
        results = suite_2speed_exhaustive()
    else:
        suite = SUITES[args.suite]
        kwargs = {"seed": args.seed}
        if args.count is not None:
            kwargs["count"] = args.count
        if args.suite == "mesh" and args.horizon is not None:
            kwargs["horizon"] = FieldContext(0).parse(args.horizon)
        results = suite(**kwargs)
    failures = 0
    for r in results:
        status = "pass" if r.ok else "FAIL"
        tail = f"  {r.detail}" if r.detail else ""
        print(f"case {r.index:4d}: {status}{tail}")
        failures += 0 if r.ok else 1
    print(f"{args.suite}: {len(results) - failures}/{len(results)} passed")
    return 0 if failures == 0 else 1


def _cmd_mesh(args) -> int:
    ctx = FieldContext(0)
    try:
        spec = MeshSpec(
            StripSpec(args.p, args.q, ctx.parse(args.x0), ctx.parse(args.w)), args.k
        )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    machine = support_machine_nu(spec.strip.p, spec.strip.q, ctx)
    config = mesh_configuration(spec, machine)
    for pos, sigs in config.sites:
        for ms in sorted(sigs, key=lambda m: m.index):
            print(f"init {ms.name}@{format_scalar(pos)}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify(args)
    return _cmd_mesh(args)


if __name__ == "__main__":
    sys.exit(main())
