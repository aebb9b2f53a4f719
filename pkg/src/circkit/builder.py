"""Circuit generation front end.

A generation procedure is a Python callable ``program(ctx, *wires)`` that
emits gates through a :class:`BuildContext`. Ordinary Python values passed to
or computed inside the procedure are generation-time parameters; wires are
circuit-execution-time data. The two only meet through dynamic lifting: a
procedure written as a generator does ``bit = yield ctx.dynamic_lift(w)`` and
is resumed with the measured value of classical wire ``w``.

Example::

    def circ(ctx, x):
        ctx.hadamard(x)
        with ctx.ancilla() as y:
            ctx.qnot(y)
            ctx.qnot(x, controls=[y])
            ctx.qnot(y)
        ctx.hadamard(x)

    circuit = build(circ, [Q])
"""

from __future__ import annotations

import inspect
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from .circuit import (
    C, Q, Call, Circuit, Control, Discard, Gate, Init, Kind, Measure, SubroutineDef, Term, Unitary,
    WireKind, as_control, H, X,
)
from .errors import (
    AncillaEscape, ArityMismatch, BodyNotShapePreserving, CircuitError, CyclicSubroutines, DeadWire,
    NotControllable, OpenScope, OverlapError, PendingLift, ShapeMismatch, WrongKind,
)

ControlLike = Union[int, Control]


@dataclass(eq=False)
class LiftRequest:
    """Request to turn classical wire ``wire`` into a generation-time bit.

    Inside a procedure this is the token yielded to the driver. In a
    :class:`Suspended` outcome it also carries ``continuation``, which resumes
    generation with a chosen bit.
    """

    wire: int
    continuation: Optional[Callable[[int], "GenerationOutcome"]] = None


@dataclass
class Finished:
    circuit: Circuit


@dataclass
class Suspended:
    """Generation stopped at a lift; ``circuit`` is everything emitted so far,
    closed with the live wires as outputs."""

    circuit: Circuit
    request: LiftRequest

    def resume(self, bit: int) -> "GenerationOutcome":
        return self.request.continuation(bit)


GenerationOutcome = Union[Finished, Suspended]


class BuildContext:
    """Append-only emission context.

    Wire ids are allocated densely in order. ``listener``, when given, sees
    every top-level gate as it is emitted (the interactive simulator uses it).
    """

    def __init__(self, input_kinds: Iterable[WireKind] = (), *, listener: Optional[Callable[[Gate], None]] = None,
                 _shared: Optional[tuple[dict, dict, set]] = None):
        self._next = 0
        self._live: dict[int, WireKind] = {}
        self._inputs: list[tuple[int, WireKind]] = []
        self._gates: list[Gate] = []
        self._frames: list[tuple[Control, ...]] = []
        self._ancillas: list[int] = []
        self._pending: Optional[LiftRequest] = None
        self._listener = listener
        self._subs, self._memo, self._building = _shared if _shared is not None else ({}, {}, set())
        for k in input_kinds:
            w = self._alloc(WireKind(k))
            self._inputs.append((w, WireKind(k)))

    # -- bookkeeping

    @property
    def inputs(self) -> list[int]:
        return [w for w, _ in self._inputs]

    @property
    def gates(self) -> tuple[Gate, ...]:
        return tuple(self._gates)

    @property
    def subs(self) -> dict[str, SubroutineDef]:
        return self._subs

    def live(self) -> dict[int, WireKind]:
        return dict(self._live)

    def kind_of(self, w: int) -> WireKind:
        self._need(w)
        return self._live[w]

    def fresh_id(self) -> int:
        """Reserve a wire id without allocating a wire."""
        w = self._next
        self._next += 1
        return w

    def _alloc(self, kind: WireKind) -> int:
        w = self.fresh_id()
        self._live[w] = kind
        return w

    def _need(self, w: int, kind: Optional[WireKind] = None) -> None:
        if w not in self._live:
            raise DeadWire(f"wire {w} is not live")
        if kind is not None and self._live[w] is not kind:
            raise WrongKind(f"wire {w} is {self._live[w].value}, expected {kind.value}")

    def _emit(self, g: Gate) -> None:
        if self._pending is not None:
            raise PendingLift(f"lift of wire {self._pending.wire} was requested but not yielded")
        self._gates.append(g)
        if self._listener is not None:
            self._listener(g)

    def _uncontrolled(self, what: str) -> None:
        if self._frames:
            raise NotControllable(f"{what} cannot be emitted under a control frame")

    # -- gates

    def apply(self, kind: Kind, *targets: int, controls: Sequence[ControlLike] = ()) -> None:
        """Emit ``kind`` on ``targets``, decorated with ``controls`` and every
        active control frame."""
        if len(targets) != kind.arity:
            raise ArityMismatch(f"{kind!r} takes {kind.arity} target(s), got {len(targets)}")
        if len(set(targets)) != len(targets):
            raise OverlapError("repeated target wire")
        for t in targets:
            self._need(t, Q)
        merged: dict[int, Control] = {}
        for frame in [tuple(as_control(c) for c in controls), *self._frames]:
            for c in frame:
                prev = merged.get(c.wire)
                if prev is not None and prev.positive != c.positive:
                    raise OverlapError(f"wire {c.wire} controls with both polarities")
                merged[c.wire] = c
        for w in merged:
            if w in targets:
                raise OverlapError(f"wire {w} is both control and target")
            self._need(w)
        self._emit(Unitary(kind, tuple(targets), tuple(merged.values())))

    def qnot(self, target: int, controls: Sequence[ControlLike] = ()) -> None:
        self.apply(X, target, controls=controls)

    def hadamard(self, target: int, controls: Sequence[ControlLike] = ()) -> None:
        self.apply(H, target, controls=controls)

    def cnot(self, target: int, control: ControlLike) -> None:
        self.apply(X, target, controls=[control])

    def qinit(self, value: int = 0) -> int:
        self._uncontrolled("initialization")
        w = self._alloc(Q)
        self._emit(Init(w, int(value)))
        return w

    def qterm(self, w: int, value: int = 0) -> None:
        self._uncontrolled("termination")
        self._need(w, Q)
        del self._live[w]
        self._emit(Term(w, int(value)))

    def measure(self, q: int) -> int:
        self._uncontrolled("measurement")
        self._need(q, Q)
        del self._live[q]
        r = self._alloc(C)
        self._emit(Measure(q, r))
        return r

    def discard(self, w: int) -> None:
        self._uncontrolled("discard")
        self._need(w, C)
        del self._live[w]
        self._emit(Discard(w))

    # -- scopes

    @contextmanager
    def ancilla(self) -> Iterator[int]:
        """Scoped ``|0>`` ancilla; the body must hand it back in ``|0>``.

        The Init/Term pair is emitted outside the active control frames; gates
        inside the body still receive them.
        """
        frames, self._frames = self._frames, []
        try:
            w = self.qinit(0)
        finally:
            self._frames = frames
        self._ancillas.append(w)
        try:
            yield w
        except BaseException:
            self._ancillas.remove(w)
            raise
        if self._ancillas[-1] != w:
            raise OpenScope("ancilla scopes closed out of order")
        self._ancillas.pop()
        if self._live.get(w) is not Q:
            raise AncillaEscape(f"ancilla {w} was consumed inside its scope")
        frames, self._frames = self._frames, []
        try:
            self.qterm(w, 0)
        finally:
            self._frames = frames

    def with_ancilla(self, body: Callable[[int], object]):
        with self.ancilla() as a:
            result = body(a)
            if _mentions(result, a):
                raise AncillaEscape(f"ancilla {a} returned from its scope")
        return result

    @contextmanager
    def controls(self, *controls: ControlLike) -> Iterator[None]:
        frame = tuple(as_control(c) for c in controls)
        for c in frame:
            self._need(c.wire)
        self._frames.append(frame)
        try:
            yield
        finally:
            self._frames.pop()

    def controlled(self, body: Callable[[], object], controls: Sequence[ControlLike]):
        with self.controls(*controls):
            return body()

    # -- boxing

    def box(self, name: str, shape: Sequence[WireKind], body: Callable, binding: Sequence[int],
            repetitions: int = 1) -> list[int]:
        """Emit a call to subroutine ``name``, generating its body on first use.

        ``body(ctx, *wires)`` runs once per ``(name, shape)`` in a fresh
        context; it may return its output wires (default: its inputs).
        """
        self._uncontrolled("a subroutine call")
        shape = tuple(WireKind(k) for k in shape)
        binding = list(binding)
        if len(binding) != len(shape):
            raise ShapeMismatch(f"{name!r} has shape of {len(shape)} wire(s), bound {len(binding)}")
        if len(set(binding)) != len(binding):
            raise OverlapError("repeated binding wire")
        for w, k in zip(binding, shape):
            if w not in self._live:
                raise DeadWire(f"wire {w} is not live")
            if self._live[w] is not k:
                raise ShapeMismatch(f"wire {w} is {self._live[w].value}, shape wants {k.value}")
        if not isinstance(repetitions, int) or repetitions < 1:
            raise ValueError("repetitions must be a positive integer")
        key = (name, shape)
        if key in self._building:
            raise CyclicSubroutines(f"subroutine {name!r} calls itself")
        if key not in self._memo:
            self._building.add(key)
            try:
                sub_id = name if name not in self._subs else f"{name}[{''.join(k.value[0] for k in shape)}]"
                self._subs[sub_id] = _define(sub_id, shape, body, (self._subs, self._memo, self._building))
                self._memo[key] = sub_id
            finally:
                self._building.discard(key)
        self._emit(Call(self._memo[key], repetitions, tuple(binding)))
        return binding

    # -- lifting and closing

    def dynamic_lift(self, w: int) -> LiftRequest:
        """Ask for the runtime value of classical wire ``w``; yield the result."""
        self._need(w, C)
        if self._pending is not None:
            raise PendingLift("a lift is already pending")
        self._pending = LiftRequest(w)
        return self._pending

    def snapshot(self) -> Circuit:
        outputs = sorted(self._live.items())
        return Circuit(self._inputs, self._gates, outputs, dict(self._subs))

    def finish(self) -> Circuit:
        if self._ancillas:
            raise OpenScope(f"ancilla scope(s) still open: {self._ancillas}")
        if self._frames:
            raise OpenScope("control frame still open")
        if self._pending is not None:
            raise PendingLift(f"lift of wire {self._pending.wire} was never resolved")
        return self.snapshot()


def _mentions(value, w: int) -> bool:
    if isinstance(value, bool):
        return False
    if isinstance(value, int):
        return value == w
    if isinstance(value, (list, tuple, set, frozenset)):
        return any(_mentions(v, w) for v in value)
    if isinstance(value, dict):
        return any(_mentions(v, w) for v in value.values())
    return False


def _define(sub_id: str, shape: tuple[WireKind, ...], body: Callable, shared) -> SubroutineDef:
    ctx = BuildContext(shape, _shared=shared)
    wires = ctx.inputs
    result = body(ctx, *wires)
    if inspect.isgenerator(result):
        result.close()
        raise CircuitError(f"subroutine {sub_id!r}: dynamic lifting is not allowed inside a boxed body")
    if ctx._ancillas or ctx._frames or ctx._pending is not None:
        raise OpenScope(f"subroutine {sub_id!r} left a scope open")
    if result is None:
        outs = wires
    elif isinstance(result, int):
        outs = [result]
    else:
        outs = list(result)
    if len(set(outs)) != len(outs) or set(outs) != set(ctx._live):
        raise BodyNotShapePreserving(f"subroutine {sub_id!r}: outputs {outs} differ from live wires {sorted(ctx._live)}")
    if tuple(ctx._live[w] for w in outs) != shape:
        raise BodyNotShapePreserving(f"subroutine {sub_id!r}: output kinds differ from its shape")
    return SubroutineDef(sub_id, shape, Circuit(ctx._inputs, ctx._gates, [(w, ctx._live[w]) for w in outs]))


def new_context(input_kinds: Iterable[WireKind] = ()) -> tuple[BuildContext, list[int]]:
    ctx = BuildContext(input_kinds)
    return ctx, ctx.inputs


def drive(program: Callable, ctx: BuildContext, wires: Sequence[int],
          supply: Callable[[LiftRequest], Optional[int]]) -> Optional[LiftRequest]:
    """Run ``program`` in ``ctx``, answering lifts with ``supply``.

    Returns the outstanding request when ``supply`` returns None, else None
    once the program has finished.
    """
    gen = program(ctx, *wires)
    if not inspect.isgenerator(gen):
        return None
    try:
        req = next(gen)
        while True:
            if not isinstance(req, LiftRequest) or req is not ctx._pending:
                raise TypeError(f"generation procedures may only yield dynamic_lift requests, got {req!r}")
            bit = supply(req)
            if bit is None:
                gen.close()
                return req
            ctx._pending = None
            req = gen.send(int(bit))
    except StopIteration:
        return None


def generate(program: Callable, input_kinds: Iterable[WireKind] = (), _bits: tuple[int, ...] = ()) -> GenerationOutcome:
    """Run a generation procedure until it finishes or requests a lift.

    A suspended outcome's continuation replays the procedure from the start
    with the extended list of lifted bits, so procedures must be
    deterministic functions of their parameters and lifted bits.
    """
    kinds = tuple(WireKind(k) for k in input_kinds)
    ctx, wires = new_context(kinds)
    it = iter(_bits)
    req = drive(program, ctx, wires, lambda r: next(it, None))
    if req is None:
        return Finished(ctx.finish())
    snap = Circuit(ctx._inputs, ctx._gates, sorted(ctx._live.items()), dict(ctx._subs))

    def resume(bit: int) -> GenerationOutcome:
        if bit not in (0, 1):
            raise ValueError("lifted value must be 0 or 1")
        return generate(program, kinds, _bits + (bit,))

    return Suspended(snap, LiftRequest(req.wire, resume))


def build(program: Callable, input_kinds: Iterable[WireKind] = ()) -> Circuit:
    """Generate a circuit from a procedure that does not lift."""
    out = generate(program, input_kinds)
    if isinstance(out, Suspended):
        raise PendingLift("procedure requested a dynamic lift; use generate() or run_interactive()")
    return out.circuit
