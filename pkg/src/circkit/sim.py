"""Statevector execution of circuits.

Basis ordering: the wire at position 0 is the least significant bit of a
basis index. For ``unitary_of`` positions are the circuit's input (column)
and output (row) orders; for run results they are the quantum outputs.

Measurement outcomes come from ``numpy.random.default_rng(seed)`` (PCG64):
each measurement draws one ``rng.random()`` value ``r`` and reports 1 iff
``r < P(1)``. Transcripts are therefore reproducible across platforms for a
given numpy bit-generator version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .builder import BuildContext, drive
from .circuit import (
    C, Q, Circuit, Discard, Gate, Init, Kind, Measure, SubroutineDef, Term, Unitary, Violation, WireEnv,
    WireKind, counter, dependency_order, expand, validate,
)
from .errors import (
    ArityMismatch, AssertionFailed, CapacityExceeded, NonTerminating, NotUnitaryCircuit, ValidationError,
)

TERM_TOLERANCE = 1e-9
DEFAULT_CAP = 24

_S2 = 1 / math.sqrt(2)
_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "Sdg": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "Tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "Swap": np.eye(4, dtype=complex)[[0, 2, 1, 3]].reshape(2, 2, 2, 2),
}


def kind_matrix(kind: Kind) -> np.ndarray:
    """Matrix of ``kind``; Swap is returned as a (2, 2, 2, 2) tensor
    indexed [out_a, out_b, in_a, in_b]."""
    if kind.name in _FIXED:
        return _FIXED[kind.name]
    if kind.name == "Phase":
        return np.diag([1, np.exp(2j * math.pi / 2 ** kind.arg)])
    if kind.name == "PhaseDg":
        return np.diag([1, np.exp(-2j * math.pi / 2 ** kind.arg)])
    half = kind.arg / 2
    return np.diag([np.exp(-1j * half), np.exp(1j * half)])


@dataclass
class StateVector:
    """``amplitudes[i]`` is the amplitude of the basis state whose bit j
    (least significant first) is the value of ``wires[j]``."""

    amplitudes: np.ndarray
    wires: tuple[int, ...]
    classical: dict[int, int] = field(default_factory=dict)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def dump(self) -> list[str]:
        lines = ["wires: " + (" ".join(str(w) for w in reversed(self.wires)) or "none")]
        n = len(self.wires)
        for i, a in enumerate(self.amplitudes):
            if abs(a) > 1e-12:
                bits = format(i, f"0{n}b") if n else "-"
                lines.append(f"{bits} {a.real:.17g} {a.imag:.17g}")
        for w in sorted(self.classical):
            lines.append(f"c {w} = {self.classical[w]}")
        return lines


@dataclass
class RunResult:
    state: StateVector
    transcript: list[tuple[int, int]]
    seed: int
    circuit: Optional[Circuit] = None

    def transcript_lines(self) -> list[str]:
        return [f"m {w} -> {b}" for w, b in self.transcript]


def _structural(index: int, rule: str, msg: str) -> ValidationError:
    return ValidationError([Violation(index, rule, msg)])


class Machine:
    """Executes a stream of top-level gates against a (batched) statevector.

    With ``batch > 1`` every column evolves independently; measurement is only
    available for a single column.
    """

    def __init__(self, subs: Mapping[str, SubroutineDef], fresh: Callable[[], int], *, seed: int = 0,
                 cap: int = DEFAULT_CAP, batch: int = 1, allow_measure: bool = True,
                 check_norm: bool = False, max_instructions: Optional[int] = None):
        self.subs = subs
        self.env = WireEnv(fresh)
        self.rng = np.random.default_rng(seed)
        self.cap = cap
        self.batch = batch
        self.allow_measure = allow_measure
        self.check_norm = check_norm
        self.max_instructions = max_instructions
        self.executed = 0
        self.index = -1
        self.psi = np.ones((batch,), dtype=complex)
        self.order: list[int] = []
        self.kinds: dict[int, WireKind] = {}
        self.classical: dict[int, int] = {}
        self.transcript: list[tuple[int, int]] = []

    # -- state manipulation

    def _axis(self, w: int) -> int:
        return 1 + self.order.index(w)

    def add_qubit(self, w: int, value: int = 0) -> None:
        if len(self.order) >= self.cap:
            raise CapacityExceeded(f"more than {self.cap} live qubits")
        new = np.zeros(self.psi.shape + (2,), dtype=complex)
        new[..., value] = self.psi
        self.psi = new
        self.order.append(w)
        self.kinds[w] = Q

    def load(self, wires: Sequence[int], amplitudes) -> None:
        """Place ``amplitudes`` (basis ordering as in StateVector) on fresh ``wires``."""
        amps = np.asarray(amplitudes, dtype=complex)
        n = len(wires)
        if amps.shape != (2 ** n,):
            raise ValueError(f"state for {n} qubit(s) needs {2 ** n} amplitudes")
        if len(self.order) + n > self.cap:
            raise CapacityExceeded(f"more than {self.cap} live qubits")
        if abs(np.linalg.norm(amps) - 1) > 1e-9:
            raise ValueError("initial state is not normalized")
        block = amps.reshape((2,) * n).transpose(tuple(reversed(range(n)))) if n else amps.reshape(())
        self.psi = np.multiply.outer(self.psi, block)
        for w in wires:
            self.order.append(w)
            self.kinds[w] = Q

    def _weights(self, axis: int, value: int) -> np.ndarray:
        part = np.take(self.psi, value, axis=axis)
        return np.sum(np.abs(part.reshape(self.batch, -1)) ** 2, axis=1)

    def _drop(self, w: int, value: int, weight: np.ndarray) -> None:
        axis = self._axis(w)
        part = np.take(self.psi, value, axis=axis)
        scale = 1 / np.sqrt(weight)
        self.psi = part * scale.reshape((self.batch,) + (1,) * (part.ndim - 1))
        self.order.remove(w)
        del self.kinds[w]

    def _apply(self, kind: Kind, targets: tuple[int, ...], qcontrols: list[tuple[int, int]]) -> None:
        idx = [slice(None)] * self.psi.ndim
        caxes = []
        for w, v in qcontrols:
            a = self._axis(w)
            idx[a] = v
            caxes.append(a)
        sub = self.psi[tuple(idx)]
        taxes = [a - sum(1 for c in caxes if c < a) for a in map(self._axis, targets)]
        m = kind_matrix(kind)
        if len(targets) == 1:
            out = np.moveaxis(np.tensordot(m, sub, axes=([1], [taxes[0]])), 0, taxes[0])
        else:
            out = np.moveaxis(np.tensordot(m, sub, axes=([2, 3], taxes)), [0, 1], taxes)
        if caxes:
            self.psi[tuple(idx)] = out
        else:
            self.psi = out

    # -- instruction stream

    def _need(self, w: int, kind: Optional[WireKind]) -> None:
        if w not in self.kinds:
            raise _structural(self.index, "liveness", f"wire {w} is not live")
        if kind is not None and self.kinds[w] is not kind:
            raise _structural(self.index, "kind", f"wire {w} is not {kind.value}")

    def feed(self, g: Gate) -> None:
        """Execute one top-level gate (calls expanded on the fly)."""
        self.index += 1
        for fg in expand([g], self.subs, self.env):
            self.execute(fg)

    def execute(self, g: Gate) -> None:
        self.executed += 1
        if self.max_instructions is not None and self.executed > self.max_instructions:
            raise NonTerminating(f"exceeded {self.max_instructions} instructions")
        if isinstance(g, Unitary):
            if len(g.targets) != g.kind.arity or len(set(g.targets)) != len(g.targets):
                raise _structural(self.index, "arity", f"bad targets for {g.kind!r}")
            for t in g.targets:
                self._need(t, Q)
            qcontrols = []
            fire = True
            for c in g.controls:
                self._need(c.wire, None)
                if c.wire in g.targets:
                    raise _structural(self.index, "disjoint", "control wire is also a target")
                if self.kinds[c.wire] is C:
                    fire = fire and (self.classical[c.wire] == int(c.positive))
                else:
                    qcontrols.append((c.wire, int(c.positive)))
            if len({w for w, _ in qcontrols}) != len(qcontrols):
                raise _structural(self.index, "distinct", "repeated control wire")
            if fire:
                self._apply(g.kind, g.targets, qcontrols)
                if self.check_norm:
                    norms = np.sqrt(self._weights_all())
                    if np.max(np.abs(norms - 1)) > 1e-9:
                        raise RuntimeError(f"norm drift {norms} after gate {self.index}")
        elif isinstance(g, Init):
            if g.wire in self.kinds:
                raise _structural(self.index, "allocation", f"wire {g.wire} allocated twice")
            self.add_qubit(g.wire, g.value)
        elif isinstance(g, Term):
            self._need(g.wire, Q)
            weight = self._weights(self._axis(g.wire), g.value)
            if np.min(weight) < 1 - TERM_TOLERANCE:
                raise AssertionFailed(self.index, float(np.min(weight)))
            self._drop(g.wire, g.value, weight)
        elif isinstance(g, Measure):
            if not self.allow_measure:
                raise NotUnitaryCircuit(f"measurement at gate {self.index}")
            self._need(g.qubit, Q)
            if g.result in self.kinds:
                raise _structural(self.index, "allocation", f"wire {g.result} allocated twice")
            p1 = min(max(float(self._weights(self._axis(g.qubit), 1)[0]), 0.0), 1.0)
            bit = 1 if self.rng.random() < p1 else 0
            self._drop(g.qubit, bit, np.array([p1 if bit else 1 - p1]))
            self.kinds[g.result] = C
            self.classical[g.result] = bit
            self.transcript.append((g.qubit, bit))
        elif isinstance(g, Discard):
            if not self.allow_measure:
                raise NotUnitaryCircuit(f"discard at gate {self.index}")
            self._need(g.wire, C)
            del self.kinds[g.wire]
            del self.classical[g.wire]
        else:
            raise _structural(self.index, "gate", f"cannot execute {g!r}")

    def _weights_all(self) -> np.ndarray:
        return np.sum(np.abs(self.psi.reshape(self.batch, -1)) ** 2, axis=1)

    def columns(self, wires: Sequence[int]) -> np.ndarray:
        """Final amplitudes as a (2**len(wires), batch) array in ``wires`` order."""
        positions = [self.order.index(w) for w in wires]
        axes = [0] + [1 + p for p in reversed(positions)]
        return self.psi.transpose(axes).reshape(self.batch, -1).T

    def close(self, outputs: Iterable[tuple[int, WireKind]]) -> StateVector:
        outputs = [(self.env[w], k) for w, k in outputs]
        if {w for w, _ in outputs} != set(self.kinds) or any(self.kinds[w] is not k for w, k in outputs):
            raise _structural(self.index + 1, "outputs", "outputs differ from live wires")
        qwires = [w for w, k in outputs if k is Q]
        classical = {w: self.classical[w] for w, k in outputs if k is C}
        return StateVector(self.columns(qwires)[:, 0].copy(), tuple(qwires), classical)


def _start(m: Machine, inputs, initial, state) -> None:
    qin = [w for w, k in inputs if k is Q]
    if initial is None:
        initial = [0] * len(inputs)
    initial = list(initial)
    if len(initial) != len(inputs):
        raise ValueError(f"need {len(inputs)} initial bit(s), got {len(initial)}")
    if state is not None:
        m.load(qin, state)
    for (w, k), b in zip(inputs, initial):
        if b not in (0, 1):
            raise ValueError(f"initial value {b!r} is not a bit")
        if k is C:
            m.kinds[w] = C
            m.classical[w] = int(b)
        elif state is None:
            m.add_qubit(w, int(b))


def run(c: Circuit, initial: Optional[Sequence[int]] = None, seed: int = 0, *, state=None,
        cap: int = DEFAULT_CAP, check_norm: bool = False) -> RunResult:
    """Execute ``c`` from basis state ``initial`` (one bit per input wire).

    ``state`` optionally replaces the quantum part of ``initial`` with an
    amplitude vector over the quantum inputs.
    """
    violations = validate(c)
    if violations:
        raise ValidationError(violations)
    dependency_order(c.subs)
    m = Machine(c.subs, counter(c.max_wire() + 1), seed=seed, cap=cap, check_norm=check_norm)
    _start(m, c.inputs, initial, state)
    for g in c.gates:
        m.feed(g)
    return RunResult(m.close(c.outputs), m.transcript, seed, c)


def run_interactive(program: Callable, seed: int = 0, input_kinds: Sequence[WireKind] = (),
                    initial: Optional[Sequence[int]] = None, *, state=None, cap: int = DEFAULT_CAP,
                    max_instructions: int = 10 ** 7, check_norm: bool = False) -> RunResult:
    """Generate and execute ``program`` together; each lift is answered with
    the measured value of its classical wire."""
    kinds = [WireKind(k) for k in input_kinds]
    m = Machine({}, lambda: 0, seed=seed, cap=cap, check_norm=check_norm, max_instructions=max_instructions)
    ctx = BuildContext(kinds, listener=m.feed)
    m.subs = ctx.subs
    m.env = WireEnv(ctx.fresh_id)
    _start(m, list(zip(ctx.inputs, kinds)), initial, state)
    drive(program, ctx, ctx.inputs, lambda req: m.classical[req.wire])
    circuit = ctx.finish()
    return RunResult(m.close(circuit.outputs), m.transcript, seed, circuit)


def unitary_of(c: Circuit) -> np.ndarray:
    """The matrix of a measurement-free circuit; ancilla Init/Term pairs are
    allowed and their assertions are checked on every column."""
    if any(k is C for _, k in c.inputs + c.outputs):
        raise NotUnitaryCircuit("circuit has classical inputs or outputs")
    n = len(c.inputs)
    if n > 10:
        raise CapacityExceeded(f"unitary_of supports at most 10 wires, got {n}")
    if len(c.outputs) != n:
        raise NotUnitaryCircuit("input and output arity differ")
    violations = validate(c)
    if violations:
        raise ValidationError(violations)
    dim = 2 ** n
    m = Machine(c.subs, counter(c.max_wire() + 1), batch=dim, allow_measure=False,
                cap=max(0, 24 - n))
    m.psi = np.eye(dim, dtype=complex).reshape((dim,) + (2,) * n)
    # eye rows are C-ordered with the first axis most significant; flip so position 0 is the LSB
    if n:
        m.psi = m.psi.transpose([0] + list(range(n, 0, -1)))
    for w, _ in c.inputs:
        m.order.append(w)
        m.kinds[w] = Q
    for g in c.gates:
        m.feed(g)
    return m.columns([m.env[w] for w, _ in c.outputs]).copy()


def phase_align(u1: np.ndarray, u2: np.ndarray) -> complex:
    """Unit scalar ``lam`` making ``lam * u2`` closest to ``u1`` on the
    largest-magnitude entry of ``u2``'s first column."""
    i = int(np.argmax(np.abs(u2[:, 0])))
    if abs(u2[i, 0]) == 0 or abs(u1[i, 0]) == 0:
        return 1.0
    lam = u1[i, 0] / u2[i, 0]
    return lam / abs(lam)


def equiv_up_to_phase(c1: Circuit, c2: Circuit, tol: float = 1e-9) -> bool:
    if len(c1.inputs) != len(c2.inputs):
        raise ArityMismatch(f"circuits have {len(c1.inputs)} and {len(c2.inputs)} inputs")
    u1, u2 = unitary_of(c1), unitary_of(c2)
    return bool(np.max(np.abs(u1 - phase_align(u1, u2) * u2)) <= tol)
