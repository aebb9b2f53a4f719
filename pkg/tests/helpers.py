"""Shared test utilities: the ancilla example program, random circuit generation and
independent oracles (naive counting over flattened circuits)."""

from __future__ import annotations

import random
from collections import Counter

import numpy as np

from circkit import Q, build
from circkit.circuit import (
    C, H, S, SDG, SWAP, T, TDG, X, Y, Z, Call, Circuit, Control, Discard, Init, Measure, Term, Unitary,
    inline, phase, phase_dg, rz,
)

GOLDEN_TEXT = (
    "Inputs: 0:Qbit\n"
    'QGate["H"](0)\n'
    "QInit0(1)\n"
    'QGate["not"](1)\n'
    'QGate["not"](0) with controls=[+1]\n'
    'QGate["not"](1)\n'
    "QTerm0(1)\n"
    'QGate["H"](0)\n'
    "Outputs: 0:Qbit\n"
)


def ancilla_example(ctx, x):
    ctx.hadamard(x)

    def body(y):
        ctx.qnot(y)
        ctx.controlled(lambda: ctx.qnot(x), [y])
        ctx.qnot(y)

    ctx.with_ancilla(body)
    ctx.hadamard(x)


def golden() -> Circuit:
    return build(ancilla_example, [Q])


KINDS = [X, Y, Z, H, S, SDG, T, TDG, phase(2), phase(3), phase_dg(4)]


def _random_kind(rng: random.Random):
    r = rng.random()
    if r < 0.08:
        return SWAP
    if r < 0.15:
        return rz(rng.uniform(-3.2, 3.2))
    return rng.choice(KINDS)


def random_program(rng: random.Random, *, budget: int = 4, max_level: int = 2, measure: bool = False,
                   max_controls: int = 2, negative: bool = True, p_box: float = 0.0):
    """Random generation procedure. Every ancilla is computed from and
    uncomputed against a wire that stays frozen meanwhile, so assertive
    terminations always hold."""
    counter = [0]

    def gate(ctx, movable, controls_pool):
        kind = _random_kind(rng)
        if len(movable) < kind.arity:
            return
        targets = rng.sample(movable, kind.arity)
        pool = [w for w in controls_pool if w not in targets]
        nc = rng.randint(0, min(max_controls, len(pool)))
        ctrls = [Control(w, rng.random() < 0.75 or not negative) for w in rng.sample(pool, nc)]
        ctx.apply(kind, *targets, controls=ctrls)

    def body(ctx, movable, frozen, level, budget_left):
        for _ in range(rng.randint(0, budget_left)):
            movable = [w for w in movable if ctx.live().get(w) is Q]
            qlive = [w for w, k in ctx.live().items() if k is Q]
            clive = [w for w, k in ctx.live().items() if k is C]
            move = rng.random()
            if movable and level < max_level and rng.random() < p_box:
                move = 0.8
            if move < 0.5 or not movable:
                gate(ctx, movable, qlive + clive)
            elif move < 0.65 and budget_left > 1:
                src = rng.choice(qlive)
                value = rng.randint(0, 1)
                if value:
                    w = ctx.qinit(1)
                    body(ctx, [m for m in movable if m != src], frozen | {src, w}, level, budget_left - 1)
                    ctx.qterm(w, 1)
                else:
                    with ctx.ancilla() as a:
                        ctx.cnot(a, src)
                        body(ctx, [m for m in movable if m != src], frozen | {src, a}, level, budget_left - 1)
                        ctx.cnot(a, src)
            elif move < 0.75 and budget_left > 1:
                f = rng.choice(qlive)
                with ctx.controls(Control(f, rng.random() < 0.7)):
                    for _ in range(rng.randint(1, 2)):
                        gate(ctx, [m for m in movable if m != f], [w for w in qlive if w != f])
            elif move < 0.9 and level < max_level:
                size = rng.randint(1, min(3, len(movable)))
                bind = rng.sample(movable, size)
                counter[0] += 1
                name = f"s{level}_{rng.randint(0, 1)}"

                def sub(sctx, *ws, _lvl=level + 1):
                    body(sctx, list(ws), set(), _lvl, max(1, budget_left - 1))

                ctx.box(name, [Q] * size, sub, bind, repetitions=rng.randint(1, 3))
            elif measure and level == 0:
                q = rng.choice(movable)
                r = ctx.measure(q)
                if rng.random() < 0.5:
                    others = [m for m in movable if m != q]
                    if others:
                        ctx.qnot(rng.choice(others), controls=[Control(r, rng.random() < 0.5)])
                if rng.random() < 0.5:
                    ctx.discard(r)
            else:
                gate(ctx, movable, qlive + clive)

    def program(ctx, *wires):
        body(ctx, list(wires), set(), 0, budget)

    return program


def random_circuit(rng: random.Random, n_inputs: int | None = None, **kw) -> Circuit:
    n = rng.randint(1, 4) if n_inputs is None else n_inputs
    return build(random_program(rng, **kw), [Q] * n)


def naive_count(c: Circuit) -> dict:
    """Field-by-field counts from a gate-by-gate walk of the flattened circuit."""
    flat = inline(c)
    gates = Counter()
    out = dict(init=0, term=0, measure=0, discard=0)
    live = sum(1 for _, k in flat.inputs if k is Q)
    allocs = peak = live
    for g in flat.gates:
        assert not isinstance(g, Call)
        if isinstance(g, Unitary):
            gates[(g.kind.label, len(g.controls))] += 1
        elif isinstance(g, Init):
            out["init"] += 1
            live += 1
            allocs += 1
        elif isinstance(g, Term):
            out["term"] += 1
            live -= 1
        elif isinstance(g, Measure):
            out["measure"] += 1
            live -= 1
        elif isinstance(g, Discard):
            out["discard"] += 1
        peak = max(peak, live)
    out.update(gates=dict(gates), peak_width=peak, total_allocations=allocs)
    return out


def count_fields(v) -> dict:
    return dict(gates=dict(v.gates), init=v.init, term=v.term, measure=v.measure, discard=v.discard,
                peak_width=v.peak_width, total_allocations=v.total_allocations)


def dft(n: int) -> np.ndarray:
    d = 2 ** n
    j, k = np.meshgrid(np.arange(d), np.arange(d))
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)


def bit_reversal(n: int) -> np.ndarray:
    d = 2 ** n
    p = np.zeros((d, d))
    for i in range(d):
        r = int(format(i, f"0{n}b")[::-1], 2) if n else 0
        p[r, i] = 1
    return p


def basis(n: int, index: int) -> np.ndarray:
    v = np.zeros(2 ** n, dtype=complex)
    v[index] = 1
    return v


def expressions_by_truth_table(n: int = 3, depth: int = 3) -> dict:
    """One representative BoolExpr per truth table reachable within ``depth``
    connectives over ``n`` variables. Tables are bitmasks over the 2^n
    assignments (bit i set iff the function is 1 on assignment i)."""
    from circkit.oracle import And, Const, Not, Or, Var, Xor

    full = (1 << (1 << n)) - 1
    var_table = [sum(1 << i for i in range(1 << n) if (i >> v) & 1) for v in range(n)]
    reps = {}
    for v in range(n):
        reps.setdefault(var_table[v], Var(v))
    reps.setdefault(0, Const(0))
    reps.setdefault(full, Const(1))
    for _ in range(depth):
        layer = list(reps.items())
        new = {}

        def offer(t, e):
            if t not in reps and t not in new:
                new[t] = e

        for t, e in layer:
            offer(full ^ t, Not(e))
        for t1, e1 in layer:
            for t2, e2 in layer:
                offer(t1 & t2, And(e1, e2))
                offer(t1 | t2, Or(e1, e2))
                offer(t1 ^ t2, Xor(e1, e2))
        reps.update(new)
    return reps


def oracle_action_errors(e, oc) -> list:
    """Basis states |x, b> whose image differs from |x, b xor f(x)>."""
    from circkit import unitary_of
    from circkit.oracle import evaluate

    n = oc.arity
    u = unitary_of(oc.circuit)
    bad = []
    for x in range(1 << n):
        fx = evaluate(e, [(x >> i) & 1 for i in range(n)], n)
        for b in (0, 1):
            expected = np.zeros(u.shape[0])
            expected[x | ((b ^ fx) << n)] = 1
            if np.abs(u[:, x | (b << n)] - expected).max() > 1e-12:
                bad.append((x, b))
    return bad
