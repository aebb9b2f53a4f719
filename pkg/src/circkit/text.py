"""Line-oriented text format for circuits.

One item per line::

    Inputs: 0:Qbit
    QGate["H"](0)
    QInit0(1)
    QGate["not"](0) with controls=[+1]
    QTerm0(1)
    Outputs: 0:Qbit

Subroutine tables follow the main body, each entry introduced by
``Subroutine: "<name>"`` and followed by its body in the same format.
"""

from __future__ import annotations

import re

from .circuit import (
    C, Q, Call, Circuit, Control, Discard, Gate, Init, Kind, Measure, SubroutineDef, Term, Unitary,
    WireKind, validate,
)
from .errors import CircuitSyntaxError, ValidationError

_NAME_TO_KIND = {
    "not": Kind("X"), "Y": Kind("Y"), "Z": Kind("Z"), "H": Kind("H"), "S": Kind("S"),
    "S*": Kind("Sdg"), "T": Kind("T"), "T*": Kind("Tdg"), "swap": Kind("Swap"),
}
_PHASE_RE = re.compile(r"R\(2\^(\d+)\)(\*?)\Z")
_RZ_RE = re.compile(r"Rz\(([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\)\Z")


def _wires(items) -> str:
    return ", ".join(f"{w}:{k.value}" for w, k in items) or "none"


def _check_name(name: str) -> str:
    if '"' in name or "\n" in name:
        raise ValueError(f"subroutine name {name!r} cannot be serialized")
    return name


def gate_line(g: Gate) -> str:
    if isinstance(g, Init):
        return f"QInit{g.value}({g.wire})"
    if isinstance(g, Term):
        return f"QTerm{g.value}({g.wire})"
    if isinstance(g, Unitary):
        s = f'QGate["{g.kind.print_name}"]({",".join(map(str, g.targets))})'
        if g.controls:
            s += f" with controls=[{','.join(map(str, g.controls))}]"
        return s
    if isinstance(g, Measure):
        return f"QMeas({g.qubit}->{g.result})"
    if isinstance(g, Discard):
        return f"CDiscard({g.wire})"
    if isinstance(g, Call):
        return f'Call["{_check_name(g.name)}"]x{g.repetitions}({",".join(map(str, g.binding))})'
    raise TypeError(f"not a gate: {g!r}")


def _body_lines(c: Circuit) -> list[str]:
    return [f"Inputs: {_wires(c.inputs)}", *map(gate_line, c.gates), f"Outputs: {_wires(c.outputs)}"]


def serialize(c: Circuit) -> str:
    lines = _body_lines(c)
    for name, sd in c.subs.items():
        lines.append(f'Subroutine: "{_check_name(name)}"')
        lines.extend(_body_lines(sd.body))
    return "\n".join(lines) + "\n"


class _Cursor:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def fail(self, expected: str):
        raise CircuitSyntaxError(self.lineno, self.pos + 1, expected)

    def peek(self, lit: str) -> bool:
        return self.text.startswith(lit, self.pos)

    def accept(self, lit: str) -> bool:
        if self.peek(lit):
            self.pos += len(lit)
            return True
        return False

    def expect(self, lit: str) -> None:
        if not self.accept(lit):
            self.fail(repr(lit))

    def spaces(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] == " ":
            self.pos += 1

    def integer(self) -> int:
        m = re.compile(r"\d+").match(self.text, self.pos)
        if not m:
            self.fail("integer")
        self.pos = m.end()
        return int(m.group())

    def quoted(self) -> str:
        self.expect('"')
        end = self.text.find('"', self.pos)
        if end < 0:
            self.fail('closing \'"\'')
        s = self.text[self.pos:end]
        self.pos = end + 1
        return s

    def end(self) -> None:
        if self.pos != len(self.text):
            self.fail("end of line")

    def int_list(self, close: str) -> list[int]:
        out = [self.integer()]
        while not self.peek(close):
            self.expect(",")
            self.spaces()
            out.append(self.integer())
        self.expect(close)
        return out


def _parse_wires(cur: _Cursor, header: str) -> list[tuple[int, WireKind]]:
    cur.expect(header)
    if cur.accept("none"):
        cur.end()
        return []
    items = []
    while True:
        w = cur.integer()
        cur.expect(":")
        if cur.accept("Qbit"):
            items.append((w, Q))
        elif cur.accept("Cbit"):
            items.append((w, C))
        else:
            cur.fail("'Qbit' or 'Cbit'")
        if cur.pos == len(cur.text):
            return items
        cur.expect(",")
        cur.spaces()


def _parse_kind(cur: _Cursor, name: str, col: int) -> Kind:
    if name in _NAME_TO_KIND:
        return _NAME_TO_KIND[name]
    m = _PHASE_RE.match(name)
    if m and int(m.group(1)) >= 1:
        return Kind("PhaseDg" if m.group(2) else "Phase", int(m.group(1)))
    m = _RZ_RE.match(name)
    if m:
        return Kind("Rz", float(m.group(1)))
    raise CircuitSyntaxError(cur.lineno, col, "gate name")


def _parse_gate(cur: _Cursor) -> Gate:
    for prefix, cls in (("QInit", Init), ("QTerm", Term)):
        if cur.accept(prefix):
            if cur.accept("0"):
                value = 0
            elif cur.accept("1"):
                value = 1
            else:
                cur.fail("'0' or '1'")
            cur.expect("(")
            w = cur.integer()
            cur.expect(")")
            cur.end()
            return cls(w, value)
    if cur.accept("QGate["):
        col = cur.pos + 1
        kind = _parse_kind(cur, cur.quoted(), col)
        cur.expect("](")
        targets = cur.int_list(")")
        controls = []
        if cur.accept(" with controls=["):
            while True:
                if cur.accept("+"):
                    pos = True
                elif cur.accept("-"):
                    pos = False
                else:
                    cur.fail("'+' or '-'")
                controls.append(Control(cur.integer(), pos))
                if cur.accept("]"):
                    break
                cur.expect(",")
                cur.spaces()
        cur.end()
        return Unitary(kind, tuple(targets), tuple(controls))
    if cur.accept("QMeas("):
        q = cur.integer()
        cur.expect("->")
        r = cur.integer()
        cur.expect(")")
        cur.end()
        return Measure(q, r)
    if cur.accept("CDiscard("):
        w = cur.integer()
        cur.expect(")")
        cur.end()
        return Discard(w)
    if cur.accept("Call["):
        name = cur.quoted()
        cur.expect("]x")
        reps = cur.integer()
        cur.expect("(")
        binding = [] if cur.accept(")") else cur.int_list(")")
        cur.end()
        return Call(name, reps, tuple(binding))
    cur.fail("gate or 'Outputs:'")


def parse(text: str) -> Circuit:
    """Inverse of :func:`serialize`. Raises CircuitSyntaxError on malformed
    text and ValidationError when the parsed circuit is ill-formed."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    i = 0

    def cursor() -> _Cursor:
        if i >= len(lines):
            raise CircuitSyntaxError(i + 1, 1, "more input (file truncated)")
        return _Cursor(lines[i], i + 1)

    def body() -> Circuit:
        nonlocal i
        inputs = _parse_wires(cursor(), "Inputs: ")
        i += 1
        gates = []
        while True:
            cur = cursor()
            if cur.peek("Outputs: "):
                outputs = _parse_wires(cur, "Outputs: ")
                i += 1
                return Circuit(inputs, gates, outputs)
            gates.append(_parse_gate(cur))
            i += 1

    main = body()
    subs = {}
    while i < len(lines):
        cur = cursor()
        cur.expect("Subroutine: ")
        name = cur.quoted()
        cur.end()
        if name in subs:
            raise CircuitSyntaxError(i + 1, 13, f"a new subroutine name ({name!r} repeats)")
        i += 1
        b = body()
        subs[name] = SubroutineDef(name, b.shape_in, b)
    c = Circuit(main.inputs, main.gates, main.outputs, subs)
    violations = validate(c)
    if violations:
        raise ValidationError(violations)
    return c
