import random

import pytest
from hypothesis import given, settings, strategies as st

from circkit import CountVector, build, count, inline, peak_width, report
from circkit.circuit import H, Q, T, X, Z, Call, Circuit, SubroutineDef, Unitary, phase, rz
from circkit.resources import from_report, parse_report
from circkit.stdlib import hierarchy
from helpers import count_fields, golden, naive_count, random_circuit


def test_empty():
    v = count(Circuit((), (), ()))
    assert count_fields(v) == dict(gates={}, init=0, term=0, measure=0, discard=0, peak_width=0,
                                   total_allocations=0)


def test_golden():
    v = count(golden())
    assert v.gates == {("H", 0): 2, ("X", 0): 2, ("X", 1): 1}
    assert (v.init, v.term, v.peak_width, v.total_allocations) == (1, 1, 2, 2)


def test_hierarchy_closed_form():
    v = count(hierarchy(10, 30))
    assert v.total_gates == 5 * 30 ** 10 == 2_952_450_000_000_000
    assert v.get("H") == 3 * 30 ** 10 and v.get("T") == 2 * 30 ** 10
    assert v.peak_width == 1


def test_hierarchy_small_case_by_inlining():
    c = hierarchy(3, 4)
    assert count(c) == count(inline(c))
    assert len(inline(c).gates) == 5 * 4 ** 3


def test_identity_width():
    assert peak_width(build(lambda ctx, *q: None, [Q] * 3)) == 3


def test_sequential_vs_nested_ancillas():
    def seq(ctx, q):
        ctx.with_ancilla(lambda a: None)
        ctx.with_ancilla(lambda a: None)

    def nested(ctx, q):
        ctx.with_ancilla(lambda a: ctx.with_ancilla(lambda b: None))

    assert peak_width(build(seq, [Q])) == 2
    assert peak_width(build(nested, [Q])) == 3
    assert count(build(seq, [Q])).total_allocations == 3


def _nest(ctx, rng, depth, budget):
    """Random properly nested ancilla scopes; returns the max depth used."""
    deepest = depth
    for _ in range(rng.randint(0, budget)):
        if rng.random() < 0.5:
            with ctx.ancilla():
                deepest = max(deepest, _nest(ctx, rng, depth + 1, budget - 1))
        else:
            ctx.hadamard(ctx.inputs[0])
    return deepest


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 4))
def test_nesting_depth_law(seed, n):
    rng = random.Random(seed)
    depth = []
    c = build(lambda ctx, *q: depth.append(_nest(ctx, rng, 0, 4)), [Q] * n)
    assert peak_width(c) == n + depth[0]


def test_peak_inside_subroutine():
    def body(ctx, q):
        ctx.with_ancilla(lambda a: ctx.with_ancilla(lambda b: None))

    def prog(ctx, x, y):
        ctx.box("deep", [Q], body, [x], repetitions=7)
        ctx.with_ancilla(lambda a: None)

    c = build(prog, [Q, Q])
    v = count(c)
    assert v.peak_width == 4
    assert v.total_allocations == 2 + 7 * 2 + 1
    assert count_fields(v) == naive_count(c)


def test_measure_frees_width():
    def prog(ctx, q):
        ctx.discard(ctx.measure(q))
        ctx.with_ancilla(lambda a: None)

    v = count(build(prog, [Q]))
    assert v.peak_width == 1 and v.measure == 1 and v.discard == 1
    assert v.total_gates == 1


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_oracle_equivalence(seed):
    rng = random.Random(seed)
    c = random_circuit(rng, max_level=3, measure=rng.random() < 0.4)
    assert count_fields(count(c)) == naive_count(c)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(0, 10 ** 9))
def test_linearity_concatenation(s1, s2):
    a = random_circuit(random.Random(s1), n_inputs=2, max_level=2)
    b = random_circuit(random.Random(s2), n_inputs=2, max_level=2)
    # rename b's internal wires past a's so the two bodies compose
    shift = a.max_wire() + 1
    from circkit.circuit import WireEnv, counter, expand

    env = WireEnv(counter(shift + b.max_wire() + 1), {0: 0, 1: 1})
    gates = a.gates + tuple(expand(b.gates, b.subs, env, max_depth=0))
    subs = dict(a.subs)
    for k, v in b.subs.items():
        if k in subs and subs[k] != v:
            return
        subs[k] = v
    joined = Circuit(a.inputs, gates, a.outputs, subs)
    va, vb, vj = count(a), count(b), count(joined)
    s = va + vb
    assert vj.gates == s.gates
    assert (vj.init, vj.term, vj.measure) == (s.init, s.term, s.measure)
    assert vj.total_allocations == va.total_allocations + vb.total_allocations - 2


@pytest.mark.parametrize("r", [1, 2, 3, 1000, 2 ** 40 + 1, 2 ** 41 + 12345, 10 ** 15])
def test_call_scaling(r):
    body = Circuit(((0, Q),), (Unitary(H, (0,)), Unitary(rz(0.1), (0,)), Unitary(X, (0,))), ((0, Q),))
    c = Circuit(((0, Q),), (Call("s", r, (0,)),), ((0, Q),), {"s": SubroutineDef("s", (Q,), body)})
    v = count(c)
    assert v.gates == count(Circuit(body.inputs, body.gates, body.outputs)).scaled(r).gates
    assert v.total_gates == 3 * r
    assert (v.peak_width, v.total_allocations) == (1, 1)


def test_no_overflow():
    v = count(hierarchy(14, 97))
    assert v.total_gates == 5 * 97 ** 14
    assert v.total_gates > 2 ** 64


class TestReport:
    def test_zero(self):
        text = report(CountVector())
        assert "Total gates: 0" in text.splitlines()

    def test_golden_table(self):
        lines = report(count(golden())).splitlines()
        assert "Total gates: 5" in lines
        assert "Qubits (peak): 2" in lines
        assert "Qubits (total): 2" in lines
        assert "Init: 1" in lines and "Term: 1" in lines
        rows = [l.split() for l in lines[1:4]]
        assert rows == [["X", "0", "2"], ["X", "1", "1"], ["H", "0", "2"]]

    def test_exact_decimal(self):
        v = CountVector({("T", 0): 30189977982990})
        assert "30189977982990" in report(v)
        assert "e+" not in report(v)
        assert "gate.T.0: 30189977982990" in report(v, "machine")

    def test_machine_round_trip(self):
        c = build(lambda ctx, a, b: (ctx.apply(phase(3), a, controls=[b]), ctx.apply(Z, b), ctx.apply(T, a)),
                  [Q, Q])
        v = count(c)
        fields = parse_report(report(v, "machine"))
        assert fields["gate.Phase(3).1"] == 1
        assert fields["total_gates"] == 3
        assert from_report(fields).gates == v.gates

    def test_parser_rejects(self):
        with pytest.raises(ValueError):
            parse_report("total_gates: 1.5\n")
        with pytest.raises(ValueError):
            parse_report("init: 1\ninit: 2\n")

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            report(CountVector(), "xml")
