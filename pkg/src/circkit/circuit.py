"""Hierarchical circuit IR: wires, gates, boxed subroutines, validation and flattening.

A circuit is a linear sequence of instructions over numbered wires. Wires are
allocated by being circuit inputs, by ``Init`` (quantum) or by ``Measure``
(classical), and are deallocated by ``Term``, ``Measure``, ``Discard`` or by
surviving to the outputs. Subroutines live in one table shared by the whole
hierarchy; a ``Call`` runs a subroutine body ``repetitions`` times on the bound
wires.

Circuit values are immutable once built.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Optional, Sequence, Union

from .errors import CyclicSubroutines, NotReversible


class WireKind(enum.Enum):
    QUANTUM = "Qbit"
    CLASSICAL = "Cbit"


Q = WireKind.QUANTUM
C = WireKind.CLASSICAL


# Canonical kind order; used for sorting report rows.
KIND_NAMES = ("X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "Swap", "Phase", "PhaseDg", "Rz")

_PRINT_NAMES = {
    "X": "not", "Y": "Y", "Z": "Z", "H": "H",
    "S": "S", "Sdg": "S*", "T": "T", "Tdg": "T*", "Swap": "swap",
}
_INVERSES = {"S": "Sdg", "Sdg": "S", "T": "Tdg", "Tdg": "T", "Phase": "PhaseDg", "PhaseDg": "Phase"}


@dataclass(frozen=True)
class Kind:
    """A unitary gate kind.

    ``Phase`` with argument ``k`` is diag(1, exp(2*pi*i / 2**k)); ``PhaseDg`` is
    its inverse. ``Rz`` with argument ``theta`` is diag(exp(-i*theta/2),
    exp(i*theta/2)).
    """

    name: str
    arg: Union[int, float, None] = None

    def __post_init__(self):
        if self.name not in KIND_NAMES:
            raise ValueError(f"unknown gate kind {self.name!r}")
        if self.name in ("Phase", "PhaseDg"):
            if not isinstance(self.arg, int) or isinstance(self.arg, bool) or self.arg < 1:
                raise ValueError(f"{self.name} needs a positive integer exponent, got {self.arg!r}")
        elif self.name == "Rz":
            if isinstance(self.arg, bool) or not isinstance(self.arg, (int, float)) or not math.isfinite(self.arg):
                raise ValueError(f"Rz needs a finite angle, got {self.arg!r}")
            object.__setattr__(self, "arg", float(self.arg))
        elif self.arg is not None:
            raise ValueError(f"{self.name} takes no argument")

    @property
    def arity(self) -> int:
        return 2 if self.name == "Swap" else 1

    def inverse(self) -> Kind:
        if self.name == "Rz":
            return Kind("Rz", -self.arg)
        return Kind(_INVERSES.get(self.name, self.name), self.arg)

    @property
    def label(self) -> str:
        """Counting label: rotations are pooled regardless of angle."""
        if self.name in ("Phase", "PhaseDg"):
            return f"{self.name}({self.arg})"
        return self.name

    @property
    def print_name(self) -> str:
        if self.name == "Phase":
            return f"R(2^{self.arg})"
        if self.name == "PhaseDg":
            return f"R(2^{self.arg})*"
        if self.name == "Rz":
            return f"Rz({self.arg:.17g})"
        return _PRINT_NAMES[self.name]

    def sort_key(self) -> tuple:
        return (KIND_NAMES.index(self.name), 0 if self.arg is None else self.arg)

    def __repr__(self) -> str:
        return self.name if self.arg is None else f"{self.name}({self.arg!r})"


X = Kind("X")
Y = Kind("Y")
Z = Kind("Z")
H = Kind("H")
S = Kind("S")
SDG = Kind("Sdg")
T = Kind("T")
TDG = Kind("Tdg")
SWAP = Kind("Swap")


def phase(k: int) -> Kind:
    return Kind("Phase", k)


def phase_dg(k: int) -> Kind:
    return Kind("PhaseDg", k)


def rz(theta: float) -> Kind:
    return Kind("Rz", theta)


@dataclass(frozen=True)
class Control:
    wire: int
    positive: bool = True

    def __str__(self) -> str:
        return f"{'+' if self.positive else '-'}{self.wire}"


def neg(wire: int) -> Control:
    """Negative-polarity control on ``wire``."""
    return Control(wire, False)


def as_control(c: Union[int, Control]) -> Control:
    return c if isinstance(c, Control) else Control(c)


@dataclass(frozen=True)
class Init:
    wire: int
    value: int = 0


@dataclass(frozen=True)
class Term:
    wire: int
    value: int = 0


@dataclass(frozen=True)
class Unitary:
    kind: Kind
    targets: tuple[int, ...]
    controls: tuple[Control, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "controls", tuple(as_control(c) for c in self.controls))


@dataclass(frozen=True)
class Measure:
    qubit: int
    result: int


@dataclass(frozen=True)
class Discard:
    wire: int


@dataclass(frozen=True)
class Call:
    name: str
    repetitions: int
    binding: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "binding", tuple(self.binding))


Gate = Union[Init, Term, Unitary, Measure, Discard, Call]


def gate_wires(g: Gate) -> tuple[int, ...]:
    """All wire ids a gate mentions."""
    if isinstance(g, Unitary):
        return g.targets + tuple(c.wire for c in g.controls)
    if isinstance(g, Measure):
        return (g.qubit, g.result)
    if isinstance(g, Call):
        return g.binding
    return (g.wire,)


@dataclass(frozen=True)
class SubroutineDef:
    name: str
    shape: tuple[WireKind, ...]
    body: Circuit

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(self.shape))


@dataclass(frozen=True)
class Circuit:
    """Inputs and outputs are ordered ``(wire, kind)`` pairs; ``subs`` must be
    treated as read-only. Subroutine bodies carry an empty ``subs`` and resolve
    calls against the top-level table."""

    inputs: tuple[tuple[int, WireKind], ...] = ()
    gates: tuple[Gate, ...] = ()
    outputs: tuple[tuple[int, WireKind], ...] = ()
    subs: Mapping[str, SubroutineDef] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple((w, k) for w, k in self.inputs))
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "outputs", tuple((w, k) for w, k in self.outputs))
        object.__setattr__(self, "subs", dict(self.subs))

    __hash__ = None  # type: ignore[assignment]

    @property
    def shape_in(self) -> tuple[WireKind, ...]:
        return tuple(k for _, k in self.inputs)

    @property
    def shape_out(self) -> tuple[WireKind, ...]:
        return tuple(k for _, k in self.outputs)

    def max_wire(self) -> int:
        """Largest wire id mentioned in this body, or -1."""
        ids = [w for w, _ in self.inputs] + [w for w, _ in self.outputs]
        for g in self.gates:
            ids.extend(gate_wires(g))
        return max(ids, default=-1)

    def __len__(self) -> int:
        return len(self.gates)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True, order=True)
class Violation:
    index: int
    rule: str
    message: str
    where: Optional[str] = None  # subroutine name, None for the main body

    def __str__(self) -> str:
        loc = f"sub {self.where!r} " if self.where is not None else ""
        return f"{loc}gate {self.index} [{self.rule}] {self.message}"


def _check_body(body: Circuit, subs: Mapping[str, SubroutineDef], where, shape=None) -> list[Violation]:
    found: list[Violation] = []

    def bad(i, rule, msg):
        found.append(Violation(i, rule, msg, where))

    live: dict[int, WireKind] = {}
    seen: set[int] = set()

    def allocate(i, w, kind):
        if not isinstance(w, int) or w < 0:
            bad(i, "allocation", f"invalid wire id {w!r}")
        elif w in seen:
            bad(i, "allocation", f"wire {w} allocated twice")
        seen.add(w)
        live[w] = kind

    def use(i, w, kind):
        if w not in live:
            bad(i, "liveness", f"wire {w} is not live")
            return False
        if kind is not None and live[w] is not kind:
            bad(i, "kind", f"wire {w} is {live[w].value}, expected {kind.value}")
            return False
        return True

    for w, k in body.inputs:
        allocate(-1, w, k)
    if shape is not None and body.shape_in != tuple(shape):
        bad(-1, "shape", "body inputs do not match subroutine shape")

    for i, g in enumerate(body.gates):
        if isinstance(g, Init):
            if g.value not in (0, 1):
                bad(i, "value", f"init value {g.value!r} is not a bit")
            allocate(i, g.wire, Q)
        elif isinstance(g, Term):
            if g.value not in (0, 1):
                bad(i, "value", f"term value {g.value!r} is not a bit")
            use(i, g.wire, Q)
            live.pop(g.wire, None)
        elif isinstance(g, Unitary):
            if len(g.targets) != g.kind.arity:
                bad(i, "arity", f"{g.kind!r} takes {g.kind.arity} target(s), got {len(g.targets)}")
            if len(set(g.targets)) != len(g.targets):
                bad(i, "distinct", "repeated target wire")
            cwires = [c.wire for c in g.controls]
            if len(set(cwires)) != len(cwires):
                bad(i, "distinct", "repeated control wire")
            if set(cwires) & set(g.targets):
                bad(i, "disjoint", "control wire is also a target")
            for t in g.targets:
                use(i, t, Q)
            for cw in cwires:
                use(i, cw, None)
        elif isinstance(g, Measure):
            ok = use(i, g.qubit, Q)
            if ok:
                del live[g.qubit]
            allocate(i, g.result, C)
        elif isinstance(g, Discard):
            if use(i, g.wire, C):
                del live[g.wire]
        elif isinstance(g, Call):
            if not isinstance(g.repetitions, int) or g.repetitions < 1:
                bad(i, "repetitions", f"repetition count {g.repetitions!r} is not positive")
            if len(set(g.binding)) != len(g.binding):
                bad(i, "distinct", "repeated binding wire")
            sd = subs.get(g.name)
            if sd is None:
                bad(i, "call", f"unknown subroutine {g.name!r}")
                for w in g.binding:
                    use(i, w, None)
            elif len(sd.shape) != len(g.binding):
                bad(i, "call", f"{g.name!r} expects {len(sd.shape)} wire(s), got {len(g.binding)}")
            else:
                for w, k in zip(g.binding, sd.shape):
                    if w in live and live[w] is not k:
                        bad(i, "call", f"binding wire {w} is {live[w].value}, shape wants {k.value}")
                    else:
                        use(i, w, k)
        else:
            bad(i, "gate", f"unknown instruction {g!r}")

    end = len(body.gates)
    out_ids = [w for w, _ in body.outputs]
    if len(set(out_ids)) != len(out_ids):
        bad(end, "outputs", "repeated output wire")
    if set(out_ids) != set(live):
        bad(end, "outputs", f"outputs {sorted(set(out_ids))} differ from live wires {sorted(live)}")
    for w, k in body.outputs:
        if w in live and live[w] is not k:
            bad(end, "outputs", f"output wire {w} declared {k.value}, is {live[w].value}")
    if shape is not None and body.shape_out != tuple(shape):
        bad(end, "shape", "body outputs do not match subroutine shape")
    found.sort(key=lambda v: (v.index, v.rule))
    return found


def _callees(body: Circuit) -> list[str]:
    return list(dict.fromkeys(g.name for g in body.gates if isinstance(g, Call)))


def _find_cycle(subs: Mapping[str, SubroutineDef], roots: Sequence[str]) -> Optional[list[str]]:
    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(n):
        state[n] = 1
        stack.append(n)
        for m in _callees(subs[n].body):
            if m not in subs:
                continue
            if state.get(m) == 1:
                return stack[stack.index(m):] + [m]
            if m not in state:
                cyc = visit(m)
                if cyc:
                    return cyc
        stack.pop()
        state[n] = 2
        return None

    for r in roots:
        if r in subs and r not in state:
            cyc = visit(r)
            if cyc:
                return cyc
    return None


def dependency_order(subs: Mapping[str, SubroutineDef]) -> list[str]:
    """Subroutine names with every callee before its callers."""
    cyc = _find_cycle(subs, list(subs))
    if cyc:
        raise CyclicSubroutines(" -> ".join(cyc))
    order: list[str] = []
    done: set[str] = set()

    def visit(n):
        done.add(n)
        for m in _callees(subs[n].body):
            if m in subs and m not in done:
                visit(m)
        order.append(n)

    for n in subs:
        if n not in done:
            visit(n)
    return order


def validate(c: Circuit) -> list[Violation]:
    """Every well-formedness violation of ``c``; empty means well-formed."""
    found = _check_body(c, c.subs, None)
    for name in sorted(c.subs):
        sd = c.subs[name]
        local: list[Violation] = []
        if sd.name != name:
            local.append(Violation(-1, "call", f"table key {name!r} holds subroutine named {sd.name!r}", name))
        if sd.body.subs:
            local.append(Violation(-1, "call", "subroutine bodies must not carry their own table", name))
        local.extend(_check_body(sd.body, c.subs, name, sd.shape))
        local.sort(key=lambda v: (v.index, v.rule))
        found.extend(local)
    cyc = _find_cycle(c.subs, sorted(c.subs))
    if cyc:
        found.append(Violation(-1, "cycle", "cyclic subroutine calls: " + " -> ".join(cyc), cyc[0]))
    return found


# --------------------------------------------------------------------------
# flattening


class WireEnv:
    """Renaming from one body's wire ids to ids in the flattened namespace.

    The top-level environment is the identity; a subroutine frame maps its
    inputs to the bound caller wires and sends each new allocation to
    ``fresh()``.
    """

    def __init__(self, fresh: Callable[[], int], mapping: Optional[dict] = None):
        self.fresh = fresh
        self.top = mapping is None
        self.map: dict[int, int] = {} if mapping is None else mapping

    def __getitem__(self, w: int) -> int:
        if self.top:
            return self.map.get(w, w)
        return self.map[w]

    def __setitem__(self, w: int, v: int) -> None:
        self.map[w] = v

    def allocate(self, w: int) -> int:
        v = w if self.top else self.fresh()
        self.map[w] = v
        return v


def rename_gate(g: Gate, env: WireEnv) -> Gate:
    if isinstance(g, Init):
        return Init(env.allocate(g.wire), g.value)
    if isinstance(g, Term):
        return Term(env[g.wire], g.value)
    if isinstance(g, Unitary):
        return Unitary(g.kind, tuple(env[t] for t in g.targets),
                       tuple(Control(env[c.wire], c.positive) for c in g.controls))
    if isinstance(g, Measure):
        q = env[g.qubit]
        return Measure(q, env.allocate(g.result))
    if isinstance(g, Discard):
        return Discard(env[g.wire])
    if isinstance(g, Call):
        return Call(g.name, g.repetitions, tuple(env[w] for w in g.binding))
    raise TypeError(f"not a gate: {g!r}")


def expand(gates: Sequence[Gate], subs: Mapping[str, SubroutineDef], env: WireEnv,
           max_depth: Optional[int] = None, depth: int = 1) -> Iterator[Gate]:
    """Yield ``gates`` renamed through ``env`` with calls expanded in place.

    Calls nested deeper than ``max_depth`` are yielded (renamed) instead of
    expanded. ``env`` is updated so that it stays valid after each call.
    """
    for g in gates:
        if isinstance(g, Call) and (max_depth is None or depth <= max_depth):
            sd = subs[g.name]
            for _ in range(g.repetitions):
                inner = WireEnv(env.fresh, {w: env[b] for (w, _), b in zip(sd.body.inputs, g.binding)})
                yield from expand(sd.body.gates, subs, inner, max_depth, depth + 1)
                for (w, _), b in zip(sd.body.outputs, g.binding):
                    env[b] = inner[w]
        else:
            yield rename_gate(g, env)


def counter(start: int) -> Callable[[], int]:
    nxt = [start]

    def fresh() -> int:
        v = nxt[0]
        nxt[0] += 1
        return v

    return fresh


def inline(c: Circuit, max_depth: Optional[int] = None) -> Circuit:
    """Replace calls (up to ``max_depth`` levels; all when None) by copies of
    their bodies, giving each copy's internal wires fresh ids."""
    if max_depth is not None and max_depth < 1:
        raise ValueError("max_depth must be positive or None")
    dependency_order(c.subs)
    env = WireEnv(counter(c.max_wire() + 1))
    gates = list(expand(c.gates, c.subs, env, max_depth))
    outputs = tuple((env[w], k) for w, k in c.outputs)
    kept = reachable(c.subs, [g.name for g in gates if isinstance(g, Call)])
    return Circuit(c.inputs, gates, outputs, {n: c.subs[n] for n in c.subs if n in kept})


def reachable(subs: Mapping[str, SubroutineDef], roots) -> set[str]:
    seen: set[str] = set()
    todo = list(roots)
    while todo:
        n = todo.pop()
        if n in seen or n not in subs:
            continue
        seen.add(n)
        todo.extend(_callees(subs[n].body))
    return seen


# --------------------------------------------------------------------------
# reversal


def dagger_name(name: str) -> str:
    return name[:-1] if name.endswith("*") else name + "*"


def _reverse_body(body: Circuit) -> Circuit:
    gates = []
    for g in reversed(body.gates):
        if isinstance(g, Unitary):
            gates.append(Unitary(g.kind.inverse(), g.targets, g.controls))
        else:  # Call; bodies are checked unitary beforehand
            gates.append(Call(dagger_name(g.name), g.repetitions, g.binding))
    return Circuit(body.outputs, gates, body.inputs)


def reverse(c: Circuit) -> Circuit:
    """The inverse circuit. Calls refer to reversed subroutines whose names
    gain (or lose) a trailing ``*``."""
    dependency_order(c.subs)
    unitary: dict[str, bool] = {}

    def is_unitary(name):
        if name not in unitary:
            unitary[name] = False
            body = c.subs[name].body
            unitary[name] = all(
                isinstance(g, Unitary) or (isinstance(g, Call) and is_unitary(g.name)) for g in body.gates
            )
        return unitary[name]

    for i, g in enumerate(c.gates):
        if isinstance(g, Call):
            if not is_unitary(g.name):
                raise NotReversible(i, f"subroutine {g.name!r} is not purely unitary")
        elif not isinstance(g, Unitary):
            raise NotReversible(i, type(g).__name__)
    subs = {}
    for name in reachable(c.subs, _callees(c)):
        sd = c.subs[name]
        rn = dagger_name(name)
        subs[rn] = SubroutineDef(rn, sd.shape, _reverse_body(sd.body))
    subs = {n: subs[n] for n in sorted(subs)}
    rev = _reverse_body(c)
    return Circuit(rev.inputs, rev.gates, rev.outputs, subs)
