"""Machine-definition text format and exact event logs.

One directive per line, `#` starts a comment:

    field sqrt <d>                       optional, must precede signals
    signal <name> <speed-scalar>
    rule <name>,<name>[,...] -> [<name>[,...]]
    init <name>@<position-scalar>

Scalars print exactly (``p/q`` or ``a+b*sqrt(d)``), so parse(print(x)) is
bit-exact and logs diff cleanly across platforms.
"""

from __future__ import annotations

import re

from .engine import SpaceTimeDiagram
from .model import InitialConfiguration, MachineError, SignalMachine
from .scalars import FieldContext, format_scalar

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


class MachineParseError(ValueError):
    def __init__(self, line_no: int, reason: str) -> None:
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


def parse_machine_file(text: str) -> tuple[SignalMachine, InitialConfiguration]:
    """Parse a machine definition plus its initial configuration."""
    ctx = FieldContext(0)
    field_set = False
    speeds: list[tuple[str, str]] = []
    rules: list[tuple[tuple[str, ...], tuple[str, ...]]] = []
    inits: list[tuple[str, str]] = []
    names: set[str] = set()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "field":
            if speeds or inits:
                raise MachineParseError(line_no, "field directive must precede signals")
            if field_set:
                raise MachineParseError(line_no, "duplicate field directive")
            m = re.fullmatch(r"sqrt\s+(\d+)", rest)
            if not m:
                raise MachineParseError(line_no, f"expected 'field sqrt <d>', got {rest!r}")
            ctx = FieldContext(int(m.group(1)))
            field_set = True
        elif head == "signal":
            parts = rest.split(None, 1)
            if len(parts) != 2:
                raise MachineParseError(line_no, "expected 'signal <name> <speed>'")
            name, speed_txt = parts
            if not _NAME.match(name):
                raise MachineParseError(line_no, f"bad meta-signal name {name!r}")
            if name in names:
                raise MachineParseError(line_no, f"duplicate meta-signal {name!r}")
            try:
                ctx.parse(speed_txt)
            except ValueError as e:
                raise MachineParseError(line_no, f"bad speed for {name!r}: {e}")
            names.add(name)
            speeds.append((name, speed_txt))
        elif head == "rule":
            if "->" not in rest:
                raise MachineParseError(line_no, "expected 'rule in[,in...] -> out[,out...]'")
            left, right = rest.split("->", 1)
            ins = tuple(s.strip() for s in left.split(",") if s.strip())
            outs = tuple(s.strip() for s in right.split(",") if s.strip())
            if len(ins) < 2:
                raise MachineParseError(line_no, "rule needs at least two incoming signals")
            for n in ins + outs:
                if n not in names:
                    raise MachineParseError(line_no, f"unknown meta-signal {n!r}")
            if any(frozenset(ins) == frozenset(i) for i, _ in rules):
                raise MachineParseError(line_no, f"duplicate rule for {sorted(set(ins))}")
            rules.append((ins, outs))
        elif head == "init":
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_\-]*)@(\S+)", rest)
            if not m:
                raise MachineParseError(line_no, "expected 'init <name>@<position>'")
            name, pos_txt = m.group(1), m.group(2)
            if name not in names:
                raise MachineParseError(line_no, f"unknown meta-signal {name!r}")
            try:
                ctx.parse(pos_txt)
            except ValueError as e:
                raise MachineParseError(line_no, f"bad position: {e}")
            inits.append((name, pos_txt))
        else:
            raise MachineParseError(line_no, f"unknown directive {head!r}")

    try:
        machine = SignalMachine.build(speeds, rules, ctx=ctx)
        config = InitialConfiguration.build(machine, inits)
    except MachineError as e:
        raise MachineParseError(0, str(e))
    return machine, config


def serialize_machine(machine: SignalMachine, config: InitialConfiguration) -> str:
    """Inverse of parse_machine_file up to comments and ordering."""
    lines: list[str] = []
    if machine.ctx.d:
        lines.append(f"field sqrt {machine.ctx.d}")
    for ms in machine.signals:
        lines.append(f"signal {ms.name} {format_scalar(machine.speed_of(ms))}")
    for key in sorted(machine.rules, key=lambda k: sorted(m.name for m in k)):
        ins = ",".join(sorted(m.name for m in key))
        outs = ",".join(sorted(m.name for m in machine.rules[key]))
        lines.append(f"rule {ins} -> {outs}")
    for pos, sigs in config.sites:
        for ms in sorted(sigs, key=lambda m: m.index):
            lines.append(f"init {ms.name}@{format_scalar(pos)}")
    return "\n".join(lines) + "\n"


def event_log_lines(diagram: SpaceTimeDiagram) -> list[str]:
    """Line-oriented exact event log:
    ``E <index> <time> <position> <in-set> -> <out-set>``."""
    lines = []
    for e in diagram.events:
        ins = ",".join(sorted(m.name for m in e.incoming))
        outs = ",".join(sorted(m.name for m in e.outgoing)) or "-"
        lines.append(
            f"E {e.index} {format_scalar(e.time)} {format_scalar(e.position)} "
            f"{ins} -> {outs}"
        )
    return lines
