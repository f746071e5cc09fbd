"""Terms, sorts, substitution and equations."""

import pytest
from hypothesis import given, strategies as st

from catq import (
    App,
    Equation,
    INT,
    STRING,
    SortMismatch,
    UnboundVariable,
    Var,
    ground_eq,
    int_literal,
    string_literal,
)
from catq.terms import free_vars, is_ground, render_term, substitute, term_depth, term_key

from conftest import N1, N2, ap, attr, fkey

f = fkey("f", N1, N2)
age = attr("age", N2, INT)
name = attr("name", N1, STRING)
x = Var("x", N1)


def test_application_is_sort_checked():
    with pytest.raises(SortMismatch):
        App(f, (Var("y", N2),))
    with pytest.raises(SortMismatch):
        App(f, ())


def test_free_vars_in_occurrence_order():
    t = App(age, (App(f, (x,)),))
    assert free_vars(t) == [x]
    assert not is_ground(t)
    assert is_ground(int_literal(3))


def test_substitute_checks_bindings():
    t = App(f, (x,))
    assert substitute(t, {"x": x}) == t
    with pytest.raises(UnboundVariable):
        substitute(t, {})
    with pytest.raises(SortMismatch):
        substitute(t, {"x": int_literal(1)})


def test_term_key_orders_constants_before_applications():
    deep = App(age, (App(f, (x,)),))
    assert term_key(int_literal(0)) < term_key(deep)
    assert term_depth(deep) == 3
    assert render_term(deep) == "age(f(x))"


def test_equation_requires_matching_sorts_and_quantifiers():
    with pytest.raises(SortMismatch):
        ground_eq(int_literal(1), string_literal("one"))
    with pytest.raises(UnboundVariable):
        Equation((), App(f, (x,)), App(f, (x,)))
    eq = Equation((x,), App(age, (App(f, (x,)),)), int_literal(30))
    from catq import generator
    g = generator("e", N1)
    inst = eq.instantiate(App(g))
    assert inst.is_ground and inst.rhs == eq.rhs


def test_literals_round_trip():
    assert int_literal(-5).sym.name == "-5"
    assert string_literal("Alice").sort == STRING
    assert int_literal(7).sort == INT


@given(st.text(alphabet="ab", max_size=4), st.text(alphabet="ab", max_size=4))
def test_string_literals_equal_iff_text_equal(a, b):
    assert (string_literal(a) == string_literal(b)) == (a == b)


@given(st.integers(-50, 50))
def test_term_key_total_order_on_literals(n):
    k1, k2 = term_key(int_literal(n)), term_key(int_literal(n + 1))
    assert k1 != k2
