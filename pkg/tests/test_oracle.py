import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circkit import count, run, unitary_of
from circkit.circuit import X, Control, Unitary
from circkit.errors import ArityMismatch
from circkit.oracle import (
    And, Const, ExprSyntaxError, Not, Or, Var, Xor, arity, compile_oracle, evaluate, oracle_cost, parse_expr,
)
from helpers import expressions_by_truth_table, oracle_action_errors


def exprs(n, depth):
    leaves = st.one_of(st.builds(Var, st.integers(0, n - 1)), st.builds(Const, st.integers(0, 1)))
    if depth == 0:
        return leaves
    sub = exprs(n, depth - 1)
    return st.one_of(leaves, st.builds(Not, sub), st.builds(And, sub, sub), st.builds(Or, sub, sub),
                     st.builds(Xor, sub, sub))


class TestEvaluate:
    def test_examples(self):
        assert evaluate(Const(1), []) == 1
        assert evaluate(Xor(Var(0), Var(1)), [1, 1]) == 0
        assert evaluate(And(Var(0), Not(Var(1))), [1, 0]) == 1

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            evaluate(Var(2), [0, 1])


class TestCompile:
    def test_var_is_one_cnot(self):
        oc = compile_oracle(Var(0))
        assert oc.circuit.gates == (Unitary(X, (1,), (Control(0),)),)
        v = count(oc.circuit)
        assert v.gates == {("X", 1): 1} and v.init == 0

    def test_and(self):
        e = And(Var(0), Var(1))
        oc = compile_oracle(e)
        v = oracle_cost(e)
        assert v.gates == {("X", 2): 2, ("X", 1): 1}
        assert v.init == 1 and v.peak_width == 2 + 2
        assert oracle_action_errors(e, oc) == []

    def test_balanced_and_tree(self):
        e = And(And(Var(0), Var(1)), And(Var(2), Var(3)))
        v = oracle_cost(e)
        assert v.get("X", 2) == 6 and v.get("X", 1) == 1 and v.init == 3

    @pytest.mark.parametrize("lower_or", [False, True])
    def test_or_modes(self, lower_or):
        e = Or(Var(0), Not(Var(1)))
        oc = compile_oracle(e, lower_or=lower_or)
        assert oracle_action_errors(e, oc) == []
        negs = any(not c.positive for g in oc.circuit.gates if isinstance(g, Unitary) for c in g.controls)
        assert negs is not lower_or

    @pytest.mark.parametrize("e", [Xor(Var(0), Var(0)), And(Var(1), Var(1)), Or(Var(0), Var(0)), Const(1),
                                   Const(0), Not(Const(0)), Xor(Const(1), Var(0))])
    def test_degenerate(self, e):
        oc = compile_oracle(e, 2)
        assert oracle_action_errors(e, oc) == []

    def test_extra_inputs_preserved(self):
        e = Var(0)
        assert oracle_action_errors(e, compile_oracle(e, 3)) == []

    @settings(max_examples=150, deadline=None)
    @given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), exprs(n, 3))))
    def test_random_expressions(self, case):
        n, e = case
        oc = compile_oracle(e, n)
        assert oracle_action_errors(e, oc) == []

    @settings(max_examples=60, deadline=None)
    @given(exprs(3, 3))
    def test_self_inverse_and_restoration(self, e):
        oc = compile_oracle(e, 3)
        u = unitary_of(oc.circuit)
        assert np.abs(u @ u - np.eye(16)).max() < 1e-12
        for x in range(16):
            bits = [(x >> i) & 1 for i in range(4)]
            r = run(oc.circuit, bits)  # assertive Term0 must not fire
            assert r.state.probabilities().max() > 1 - 1e-12

    def test_enumeration_covers_all_functions(self):
        reps = expressions_by_truth_table(3, 3)
        assert len(reps) == 256
        for table, e in list(reps.items())[::17]:
            assert all(evaluate(e, [(i >> v) & 1 for v in range(3)], 3) == (table >> i) & 1 for i in range(8))


class TestParse:
    @pytest.mark.parametrize("text, expected", [
        ("x0", Var(0)),
        ("(x0 & x1)", And(Var(0), Var(1))),
        ("~x2", Not(Var(2))),
        (" ( x0|  (x1 ^ 1) ) ", Or(Var(0), Xor(Var(1), Const(1)))),
        ("x0 & x1 | x2", Or(And(Var(0), Var(1)), Var(2))),
    ])
    def test_parse(self, text, expected):
        assert parse_expr(text) == expected

    @pytest.mark.parametrize("text, pos", [("(x0 &", 5), ("x", 1), ("x0 x1", 3), ("", 0)])
    def test_errors(self, text, pos):
        with pytest.raises(ExprSyntaxError) as err:
            parse_expr(text)
        assert err.value.position == pos

    @settings(max_examples=100, deadline=None)
    @given(exprs(4, 3))
    def test_str_round_trip(self, e):
        assert parse_expr(str(e)) == e
        assert arity(parse_expr(str(e))) == arity(e)
