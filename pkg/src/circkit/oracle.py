"""Compilation of boolean expressions to reversible oracle circuits.

The compiled circuit acts as ``|x, b> -> |x, b XOR f(x)>``: every internal
node of the expression is computed into its own ancilla, the root is copied
onto the output wire, and the computation is undone in reverse so all
ancillas return to ``|0>``.

Text syntax: ``x<i>``, ``0``, ``1``, ``~e``, ``(e & e)``, ``(e | e)``,
``(e ^ e)``. Parentheses may be dropped; precedence is ``~`` then ``&``
then ``^`` then ``|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .builder import new_context
from .circuit import Circuit, Q, X, neg
from .errors import ArityMismatch
from .resources import CountVector, count


@dataclass(frozen=True)
class Var:
    index: int

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Not:
    arg: "BoolExpr"

    def __str__(self):
        return f"~{self.arg}"


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Xor:
    left: "BoolExpr"
    right: "BoolExpr"

    def __str__(self):
        return f"({self.left} ^ {self.right})"


BoolExpr = Union[Var, Const, Not, And, Or, Xor]


def arity(e: BoolExpr) -> int:
    """One more than the largest variable index (0 for closed expressions)."""
    if isinstance(e, Var):
        return e.index + 1
    if isinstance(e, Const):
        return 0
    if isinstance(e, Not):
        return arity(e.arg)
    return max(arity(e.left), arity(e.right))


def evaluate(e: BoolExpr, assignment: Sequence[int], n: int | None = None) -> int:
    """Truth value of ``e``; ``assignment`` must have exactly ``n`` bits
    (default: ``arity(e)``)."""
    n = arity(e) if n is None else n
    if len(assignment) != n or arity(e) > n:
        raise ArityMismatch(f"expression over {arity(e)} variable(s) given {len(assignment)} bit(s)")
    return _ev(e, assignment)


def _ev(e, a) -> int:
    if isinstance(e, Var):
        return int(a[e.index])
    if isinstance(e, Const):
        return int(e.value)
    if isinstance(e, Not):
        return 1 - _ev(e.arg, a)
    l, r = _ev(e.left, a), _ev(e.right, a)
    if isinstance(e, And):
        return l & r
    if isinstance(e, Or):
        return l | r
    return l ^ r


@dataclass(frozen=True)
class OracleCircuit:
    """Wires ``0..arity-1`` are the inputs, wire ``arity`` the output."""

    circuit: Circuit
    arity: int

    @property
    def out(self) -> int:
        return self.arity


def compile_oracle(e: BoolExpr, n: int | None = None, *, lower_or: bool = False) -> OracleCircuit:
    """Compute-copy-uncompute oracle for ``e`` over ``n`` inputs.

    ``Or`` nodes use a negatively controlled Toffoli; with ``lower_or`` the
    negative controls are replaced by X conjugation.
    """
    n = arity(e) if n is None else n
    if arity(e) > n:
        raise ArityMismatch(f"expression uses {arity(e)} variable(s), oracle has {n}")
    ctx, wires = new_context([Q] * (n + 1))
    xs, out = wires[:n], wires[n]

    if isinstance(e, Var):
        ctx.cnot(out, xs[e.index])
    elif isinstance(e, Const):
        if e.value:
            ctx.qnot(out)
    else:
        tape: list = []

        def gate(target, controls=()):
            ctx.qnot(target, controls)
            tape.append((target, tuple(controls)))

        def fresh():
            a = ctx.qinit(0)
            tape.append(a)
            return a

        def comp(node) -> int:
            if isinstance(node, Var):
                return xs[node.index]
            if isinstance(node, Const):
                a = fresh()
                if node.value:
                    gate(a)
                return a
            if isinstance(node, Not):
                w = comp(node.arg)
                a = fresh()
                gate(a, [w])
                gate(a)
                return a
            wl, wr = comp(node.left), comp(node.right)
            a = fresh()
            if isinstance(node, Xor):
                if wl != wr:
                    gate(a, [wl])
                    gate(a, [wr])
            elif wl == wr:
                gate(a, [wl])
            elif isinstance(node, And):
                gate(a, [wl, wr])
            elif lower_or:
                gate(wl)
                gate(wr)
                gate(a, [wl, wr])
                gate(wl)
                gate(wr)
                gate(a)
            else:
                gate(a, [neg(wl), neg(wr)])
                gate(a)
            return a

        root = comp(e)
        ctx.cnot(out, root)
        for step in reversed(tape):
            if isinstance(step, int):
                ctx.qterm(step, 0)
            else:
                ctx.qnot(step[0], step[1])
    return OracleCircuit(ctx.finish(), n)


def oracle_cost(e: BoolExpr, n: int | None = None) -> CountVector:
    return count(compile_oracle(e, n).circuit)


class ExprSyntaxError(ValueError):
    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"position {position}: expected {expected}")


def parse_expr(text: str) -> BoolExpr:
    pos = 0

    def skip():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def peek():
        skip()
        return text[pos] if pos < len(text) else ""

    def binary(ops, sub):
        nonlocal pos
        left = sub()
        while peek() in ops and peek():
            op = text[pos]
            pos += 1
            left = {"|": Or, "^": Xor, "&": And}[op](left, sub())
        return left

    def atom():
        nonlocal pos
        ch = peek()
        if ch == "~":
            pos += 1
            return Not(atom())
        if ch == "(":
            pos += 1
            e = disj()
            if peek() != ")":
                raise ExprSyntaxError(pos, "')'")
            pos += 1
            return e
        if ch in ("0", "1"):
            pos += 1
            return Const(int(ch))
        if ch == "x":
            start = pos = pos + 1
            while pos < len(text) and text[pos].isdigit():
                pos += 1
            if pos == start:
                raise ExprSyntaxError(pos, "variable index")
            return Var(int(text[start:pos]))
        raise ExprSyntaxError(pos, "'x<i>', '0', '1', '~' or '('")

    def conj():
        return binary("&", atom)

    def xor():
        return binary("^", conj)

    def disj():
        return binary("|", xor)

    e = disj()
    if peek():
        raise ExprSyntaxError(pos, "end of expression")
    return e
