"""Reference circuit families: QFT, ripple-carry adder, multi-controlled NOT,
teleportation, and a synthetic deep hierarchy for counting benchmarks."""

from __future__ import annotations

from .builder import BuildContext, build
from .circuit import Circuit, Q, Z, H, T, phase


def qft(n: int) -> Circuit:
    """Quantum Fourier transform on wires 0..n-1 (wire 0 least significant).

    No final swap layer: output bit order is reversed, so the matrix is the
    DFT followed by a bit-reversal permutation.
    """
    if n < 1:
        raise ValueError("qft needs n >= 1")

    def program(ctx: BuildContext, *q):
        for t in reversed(range(n)):
            ctx.hadamard(q[t])
            for c in reversed(range(t)):
                ctx.apply(phase(t - c + 1), q[t], controls=[q[c]])

    return build(program, [Q] * n)


def adder(n: int) -> Circuit:
    """In-place |a>|b> -> |a>|a+b mod 2^n> with n-1 carry ancillas.

    Wires 0..n-1 hold ``a`` and n..2n-1 hold ``b``, least significant first.
    """
    if n < 1:
        raise ValueError("adder needs n >= 1")

    def program(ctx: BuildContext, *w):
        a, b = w[:n], w[n:]

        def carry(c, i, nxt):
            ctx.qnot(nxt, [a[i], b[i]])
            ctx.cnot(b[i], a[i])
            if c is not None:
                ctx.qnot(nxt, [c, b[i]])

        def uncarry(c, i, nxt):
            if c is not None:
                ctx.qnot(nxt, [c, b[i]])
            ctx.cnot(b[i], a[i])
            ctx.qnot(nxt, [a[i], b[i]])

        def stage(i, c):
            if i == n - 1:
                ctx.cnot(b[i], a[i])
            else:
                with ctx.ancilla() as nxt:
                    carry(c, i, nxt)
                    stage(i + 1, nxt)
                    uncarry(c, i, nxt)
                ctx.cnot(b[i], a[i])
            if c is not None:
                ctx.cnot(b[i], c)

        stage(0, None)

    return build(program, [Q] * (2 * n))


def mcx(k: int) -> Circuit:
    """X on wire k controlled by wires 0..k-1, as one decorated gate."""
    if k < 0:
        raise ValueError("mcx needs k >= 0")

    def program(ctx: BuildContext, *w):
        ctx.qnot(w[k], controls=list(w[:k]))

    return build(program, [Q] * (k + 1))


def teleport():
    """Generation procedure teleporting its input qubit to a fresh wire.

    The X and Z corrections depend on lifted measurement results, so the
    procedure must be run with ``generate`` or ``run_interactive``.
    """

    def program(ctx: BuildContext, q):
        a = ctx.qinit(0)
        b = ctx.qinit(0)
        ctx.hadamard(a)
        ctx.cnot(b, a)
        ctx.cnot(a, q)
        ctx.hadamard(q)
        mq = ctx.measure(q)
        ma = ctx.measure(a)
        flip = yield ctx.dynamic_lift(ma)
        sign = yield ctx.dynamic_lift(mq)
        ctx.discard(mq)
        ctx.discard(ma)
        if flip:
            ctx.qnot(b)
        if sign:
            ctx.apply(Z, b)

    return program


def teleport_circuit() -> Circuit:
    """Static teleportation with classically controlled corrections."""

    def program(ctx: BuildContext, q):
        a = ctx.qinit(0)
        b = ctx.qinit(0)
        ctx.hadamard(a)
        ctx.cnot(b, a)
        ctx.cnot(a, q)
        ctx.hadamard(q)
        mq = ctx.measure(q)
        ma = ctx.measure(a)
        ctx.qnot(b, controls=[ma])
        ctx.apply(Z, b, controls=[mq])
        ctx.discard(mq)
        ctx.discard(ma)

    return build(program, [Q])


def hierarchy(levels: int = 10, reps: int = 30) -> Circuit:
    """``levels`` nested boxes, each repeating the next ``reps`` times around
    a 5-gate one-qubit core: 5 * reps**levels gates when flattened."""
    if levels < 1 or reps < 1:
        raise ValueError("hierarchy needs levels >= 1 and reps >= 1")

    def core(ctx, q):
        for kind in (H, T, H, T, H):
            ctx.apply(kind, q)

    def level(i):
        if i == 0:
            return core

        def body(ctx, q):
            ctx.box(f"level{i - 1}", [Q], level(i - 1), [q], repetitions=reps)

        return body

    def program(ctx, q):
        ctx.box(f"level{levels - 1}", [Q], level(levels - 1), [q], repetitions=reps)

    return build(program, [Q])
