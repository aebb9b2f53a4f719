"""Gate-by-gate circuit rewriting and lowering to a base gate set.

A rewriter is a callable ``rewriter(gate, ctx)`` returning a replacement gate
sequence, or None to keep the gate. ``ctx.fresh()`` hands out unused wire ids
for scoped ancillas and ``ctx.kind_of(w)`` tells quantum from classical
wires. Replacements must leave the live-wire set exactly as the original gate
would. Rewriters must be pure: each subroutine body is rewritten once, not per
call site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .circuit import (
    C, H, Q, S, SDG, T, TDG, X, Y, Z, Call, Circuit, Control, Discard, Gate, Init, KIND_NAMES, Kind,
    Measure, SubroutineDef, Term, Unitary, WireKind, counter, phase, phase_dg, rz, validate,
)
from .errors import InsufficientBaseSet, NotLowerable, ShapeViolation


class RewriteContext:
    def __init__(self, fresh: Callable[[], int], live: dict[int, WireKind]):
        self.fresh = fresh
        self._live = live

    def kind_of(self, w: int) -> WireKind:
        return self._live[w]

    def split_controls(self, g: Unitary) -> tuple[list[Control], list[Control]]:
        """(quantum controls, classical controls) of ``g``."""
        qc = [c for c in g.controls if self._live[c.wire] is Q]
        cc = [c for c in g.controls if self._live[c.wire] is C]
        return qc, cc


Rewriter = Callable[[Gate, RewriteContext], Optional[Sequence[Gate]]]


def _step(live: dict[int, WireKind], seen: set[int], g: Gate, subs: Mapping[str, SubroutineDef]) -> Optional[str]:
    """Apply ``g``'s liveness effect in place; return an error message or None."""

    def need(w, kind=None):
        return w in live and (kind is None or live[w] is kind)

    if isinstance(g, Init):
        if g.wire in seen:
            return f"wire {g.wire} allocated twice"
        seen.add(g.wire)
        live[g.wire] = Q
    elif isinstance(g, Term):
        if not need(g.wire, Q):
            return f"terminating non-live wire {g.wire}"
        del live[g.wire]
    elif isinstance(g, Unitary):
        cw = [c.wire for c in g.controls]
        if len(g.targets) != g.kind.arity or len(set(g.targets)) != len(g.targets):
            return "bad targets"
        if len(set(cw)) != len(cw) or set(cw) & set(g.targets):
            return "bad controls"
        if not all(need(t, Q) for t in g.targets) or not all(need(w) for w in cw):
            return "gate on non-live wire"
    elif isinstance(g, Measure):
        if not need(g.qubit, Q) or g.result in seen:
            return "bad measurement"
        del live[g.qubit]
        seen.add(g.result)
        live[g.result] = C
    elif isinstance(g, Discard):
        if not need(g.wire, C):
            return f"discarding non-live wire {g.wire}"
        del live[g.wire]
    elif isinstance(g, Call):
        sd = subs.get(g.name)
        if sd is None or len(sd.shape) != len(g.binding):
            return f"bad call to {g.name!r}"
        if not all(need(w, k) for w, k in zip(g.binding, sd.shape)):
            return "call binding not live"
    else:
        return f"unknown instruction {g!r}"
    return None


def _rewrite_body(body: Circuit, rewriter: Rewriter, subs: Mapping[str, SubroutineDef]) -> Circuit:
    live = dict(body.inputs)
    seen = set(live)
    for g in body.gates:
        if isinstance(g, Init):
            seen.add(g.wire)
        elif isinstance(g, Measure):
            seen.add(g.result)
    ctx = RewriteContext(counter(body.max_wire() + 1), live)
    out: list[Gate] = []
    for i, g in enumerate(body.gates):
        expected = dict(live)
        _step(expected, set(), g, subs)
        rep = rewriter(g, ctx)
        rep = [g] if rep is None else list(rep)
        trial = dict(live)
        trial_seen = seen - {w for w in expected if w not in live}
        for r in rep:
            err = _step(trial, trial_seen, r, subs)
            if err:
                raise ShapeViolation(i, err)
        if trial != expected:
            raise ShapeViolation(i, f"live wires {sorted(trial)} instead of {sorted(expected)}")
        seen |= trial_seen
        live.clear()
        live.update(expected)
        out.extend(rep)
    return Circuit(body.inputs, out, body.outputs)


def transform(c: Circuit, rewriter: Rewriter) -> Circuit:
    """Apply ``rewriter`` to every gate of the main body and, once, to every
    subroutine body. Calls are offered to the rewriter like any other gate."""
    main = _rewrite_body(c, rewriter, c.subs)
    subs = {name: SubroutineDef(name, sd.shape, _rewrite_body(sd.body, rewriter, c.subs))
            for name, sd in c.subs.items()}
    result = Circuit(main.inputs, main.gates, main.outputs, subs)
    bad = validate(result)
    if bad:
        raise ShapeViolation(bad[0].index, str(bad[0]))
    return result


# --------------------------------------------------------------------------
# control lowering


def _cx(target: int, control: int, cc: Sequence[Control] = ()) -> Unitary:
    return Unitary(X, (target,), (Control(control), *cc))


def _u(kind: Kind, target: int, cc: Sequence[Control] = ()) -> Unitary:
    return Unitary(kind, (target,), tuple(cc))


def toffoli_network(a: int, b: int, t: int, cc: Sequence[Control] = ()) -> list[Gate]:
    """Doubly controlled X as the 15-gate {H, T, T*, CNOT} network (7 T gates)."""
    return [
        _u(H, t, cc), _cx(t, b, cc), _u(TDG, t, cc), _cx(t, a, cc), _u(T, t, cc),
        _cx(t, b, cc), _u(TDG, t, cc), _cx(t, a, cc), _u(T, b, cc), _u(T, t, cc),
        _u(H, t, cc), _cx(b, a, cc), _u(T, a, cc), _u(TDG, b, cc), _cx(b, a, cc),
    ]


def _singly_controlled(kind: Kind, t: int, c: int, cc: Sequence[Control]) -> list[Gate]:
    name = kind.name
    if name == "X":
        return [_cx(t, c, cc)]
    if name == "Y":
        return [_u(SDG, t, cc), _cx(t, c, cc), _u(S, t, cc)]
    if name == "Z":
        return [_u(H, t, cc), _cx(t, c, cc), _u(H, t, cc)]
    if name == "H":
        return [_u(S, t, cc), _u(H, t, cc), _u(T, t, cc), _cx(t, c, cc), _u(TDG, t, cc), _u(H, t, cc), _u(SDG, t, cc)]
    if name in ("S", "Sdg", "T", "Tdg"):
        k = 2 if name[0] == "S" else 3
        return _singly_controlled(phase(k) if len(name) == 1 else phase_dg(k), t, c, cc)
    if name in ("Phase", "PhaseDg"):
        half, undo = (phase(kind.arg + 1), phase_dg(kind.arg + 1))
        if name == "PhaseDg":
            half, undo = undo, half
        return [_u(half, c, cc), _u(half, t, cc), _cx(t, c, cc), _u(undo, t, cc), _cx(t, c, cc)]
    if name == "Rz":
        return [_u(rz(kind.arg / 2), t, cc), _cx(t, c, cc), _u(rz(-kind.arg / 2), t, cc), _cx(t, c, cc)]
    raise NotLowerable(f"no controlled form for {kind!r}")


def lower_gate(kind: Kind, targets: tuple[int, ...], qc: Sequence[Control], cc: Sequence[Control],
               fresh: Callable[[], int], max_controls: int = 1) -> list[Gate]:
    """Lower one gate with quantum controls ``qc`` and classical controls ``cc``.

    With ``max_controls=1`` the result uses only uncontrolled gates and CNOTs
    (plus ``cc`` decorations); multiply controlled gates borrow k-1 scoped
    ancillas, except that a plain Toffoli uses the direct network.
    """
    if any(not c.positive for c in qc):
        flips = [Unitary(X, (c.wire,)) for c in qc if not c.positive]
        pos = [Control(c.wire) for c in qc]
        return flips + lower_gate(kind, targets, pos, cc, fresh, max_controls) + flips
    if not qc:
        return [Unitary(kind, targets, tuple(cc))]
    if max_controls < 1:
        raise NotLowerable(f"{kind!r} with {len(qc)} quantum control(s) cannot be lowered to 0 controls")
    if kind.name == "Swap":
        a, b = targets
        return (lower_gate(X, (b,), [Control(a)], cc, fresh, max_controls)
                + lower_gate(X, (a,), [Control(b), *qc], cc, fresh, max_controls)
                + lower_gate(X, (b,), [Control(a)], cc, fresh, max_controls))
    if len(qc) == 1:
        return _singly_controlled(kind, targets[0], qc[0].wire, cc)
    if len(qc) == 2 and kind.name == "X":
        return toffoli_network(qc[0].wire, qc[1].wire, targets[0], cc)
    ladder = []
    prev = qc[0].wire
    for c in qc[1:]:
        a = fresh()
        ladder.append((prev, c.wire, a))
        prev = a
    out: list[Gate] = []
    for x, y, a in ladder:
        out.append(Init(a, 0))
        out.extend(toffoli_network(x, y, a))
    out.extend(lower_gate(kind, targets, [Control(prev)], cc, fresh, max_controls))
    for x, y, a in reversed(ladder):
        out.extend(toffoli_network(x, y, a))
        out.append(Term(a, 0))
    return out


def lower_controls(c: Circuit, max_controls: int = 1) -> Circuit:
    """Rewrite every unitary to at most ``max_controls`` positive quantum
    controls. Classical controls are carried over unchanged."""
    if max_controls not in (0, 1):
        raise ValueError("max_controls must be 0 or 1")

    def rewriter(g, ctx):
        if not isinstance(g, Unitary):
            return None
        qc, cc = ctx.split_controls(g)
        if all(q.positive for q in qc) and (not qc or (len(qc) <= max_controls and g.kind.name == "X")):
            return None
        return lower_gate(g.kind, g.targets, qc, cc, ctx.fresh, max_controls)

    return transform(c, rewriter)


# --------------------------------------------------------------------------
# base gate sets


@dataclass(frozen=True)
class BaseSet:
    """Allowed unitary kind names plus the control bound. Only X may carry
    quantum controls; classical controls are not bounded."""

    kinds: frozenset[str]
    max_controls: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kinds", frozenset(self.kinds))
        unknown = self.kinds - set(KIND_NAMES)
        if unknown:
            raise ValueError(f"unknown kind names {sorted(unknown)}")
        if not ({"X", "H"} <= self.kinds and self.max_controls >= 1 and ({"T", "Rz"} & self.kinds)):
            raise InsufficientBaseSet("a base set needs X with a control, H, and T or Rz")

    def allows(self, g: Unitary, n_quantum_controls: int) -> bool:
        if g.kind.name not in self.kinds:
            return False
        return n_quantum_controls == 0 or (g.kind.name == "X" and n_quantum_controls <= self.max_controls)


PRESETS = {
    "clifford+t": BaseSet(frozenset({"X", "Z", "H", "S", "Sdg", "T", "Tdg", "Rz"})),
    "ct-strict": BaseSet(frozenset({"X", "H", "T", "Tdg"})),
    "cnot+1q": BaseSet(frozenset(set(KIND_NAMES) - {"Swap"})),
}


def _lattice(theta: float) -> Optional[int]:
    m = theta / (math.pi / 4)
    r = round(m)
    return r % 8 if abs(m - r) < 1e-12 else None


def _dyadic(theta: float) -> Optional[Kind]:
    if theta == 0:
        return None
    k = math.log2(2 * math.pi / abs(theta))
    r = round(k)
    if r >= 1 and abs(k - r) < 1e-12:
        return phase(r) if theta > 0 else phase_dg(r)
    return None


def _candidates(kind: Kind) -> list[list[Kind]]:
    """Replacement kind sequences (circuit order), each equal to ``kind`` up
    to global phase, in order of preference."""
    n = kind.name
    if n == "Z":
        return [[S, S], [phase(1)], [rz(math.pi)], [H, X, H]]
    if n == "S":
        return [[T, T], [phase(2)], [rz(math.pi / 2)]]
    if n == "Sdg":
        return [[TDG, TDG], [S, S, S], [phase_dg(2)], [rz(-math.pi / 2)]]
    if n == "T":
        return [[phase(3)], [rz(math.pi / 4)], [TDG] * 7]
    if n == "Tdg":
        return [[phase_dg(3)], [rz(-math.pi / 4)], [T] * 7]
    if n == "Y":
        return [[SDG, X, S], [Z, X]]
    if n == "X":
        return [[H, Z, H]]
    if n in ("Phase", "PhaseDg"):
        sign = 1 if n == "Phase" else -1
        small = {1: [Z], 2: [S if sign > 0 else SDG], 3: [T if sign > 0 else TDG]}
        out = [small[kind.arg]] if kind.arg in small else []
        return out + [[rz(sign * 2 * math.pi / 2 ** kind.arg)]]
    if n == "Rz":
        out = []
        m = _lattice(kind.arg)
        if m is not None:
            out.append([T] * m)
        d = _dyadic(kind.arg)
        if d is not None:
            out.append([d])
        return out
    return []


def _expand_kind(kind: Kind, base: BaseSet, visiting: frozenset = frozenset()) -> Optional[list[Kind]]:
    if kind.name in base.kinds:
        return [kind]
    if kind in visiting:
        return None
    for seq in _candidates(kind):
        parts = [_expand_kind(k, base, visiting | {kind}) for k in seq]
        if all(p is not None for p in parts):
            return [k for p in parts for k in p]
    return None


def decompose_to_base(c: Circuit, base: BaseSet) -> Circuit:
    """Lower controls and rewrite kinds until every gate lies in ``base``;
    the result equals ``c`` up to global phase."""
    lowered = lower_controls(c, 1)
    memo: dict[Kind, list[Kind]] = {}

    def rewriter(g, ctx):
        if not isinstance(g, Unitary):
            return None
        qc, cc = ctx.split_controls(g)
        if base.allows(g, len(qc)):
            return None
        if g.kind.name == "Swap" and not qc:
            a, b = g.targets
            cnots = [_cx(b, a, cc), _cx(a, b, cc), _cx(b, a, cc)]
            return [r for x in cnots for r in rewriter(x, ctx) or [x]]
        if qc:
            # only CNOT survives lowering; its kind must be allowed
            raise InsufficientBaseSet(f"base cannot express controlled {g.kind!r}")
        if g.kind not in memo:
            seq = _expand_kind(g.kind, base)
            if seq is None:
                raise InsufficientBaseSet(f"base {sorted(base.kinds)} cannot express {g.kind!r}")
            memo[g.kind] = seq
        return [Unitary(k, g.targets, tuple(cc)) for k in memo[g.kind]]

    return transform(lowered, rewriter)


def in_base(c: Circuit, base: BaseSet) -> bool:
    """True iff every unitary in ``c`` and its subroutines lies in ``base``."""
    for body in [c, *(sd.body for sd in c.subs.values())]:
        live = dict(body.inputs)
        for g in body.gates:
            if isinstance(g, Unitary):
                nq = sum(1 for x in g.controls if live.get(x.wire) is Q)
                if not base.allows(g, nq) or any(not x.positive for x in g.controls if live.get(x.wire) is Q):
                    return False
            _step(live, set(), g, c.subs)
    return True
