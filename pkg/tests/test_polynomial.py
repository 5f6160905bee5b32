import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import low_degree_polynomials, polynomials, shifts
from polyinvar.monomials import IndexSet, downward_closure
from polyinvar.polynomial import (
    Polynomial,
    evaluate,
    evaluate_rows,
    greatest_monomials_of_poly,
    prune,
    translate,
)


def test_evaluate_examples():
    assert evaluate(Polynomial(2, {(1, 1): 1, (0, 0): 2}), [3, 4]) == 14.0
    assert evaluate(Polynomial(3), [1, 2, 3]) == 0.0
    assert evaluate(Polynomial(1, {(2,): 1}), [0]) == 0.0
    assert evaluate(Polynomial(1, {(0,): 2.5}), [0]) == 2.5


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(Polynomial(2, {(1, 0): 1}), [1.0])
    with pytest.raises(ValueError):
        evaluate(Polynomial(1, {(1,): 1}), [np.nan])


def test_polynomial_rejects_bad_terms():
    with pytest.raises(ValueError):
        Polynomial(2, {(1,): 1.0})
    with pytest.raises(ValueError):
        Polynomial(1, {(1,): np.inf})


@given(polynomials(), st.data())
def test_evaluate_rows_matches_evaluate(f, data):
    X = np.array(data.draw(st.lists(shifts(f.arity, 3.0), min_size=1, max_size=5)))
    rows = evaluate_rows(f, X)
    for x, v in zip(X, rows):
        assert v == pytest.approx(evaluate(f, x), rel=1e-12, abs=1e-9)


def test_translate_univariate_square():
    g = translate(Polynomial(1, {(2,): 1.0}), [1.0])
    assert g == Polynomial(1, {(2,): 1.0, (1,): 2.0, (0,): 1.0})


def test_translate_bilinear():
    g = translate(Polynomial(2, {(1, 1): 1.0}), [2.0, 3.0])
    assert g.terms == {(0, 0): 6.0, (0, 1): 2.0, (1, 0): 3.0, (1, 1): 1.0}


def test_translate_no_implicit_pruning():
    # (x + 1)^2 - 2x - 1 -> shifting by -1 gives explicit zeros in lower terms
    f = Polynomial(1, {(2,): 1.0, (1,): 2.0, (0,): 1.0})
    g = translate(f, [-1.0])
    assert set(g.terms) == {(0,), (1,), (2,)}
    assert prune(g) == Polynomial(1, {(2,): 1.0})


@given(low_degree_polynomials(), st.data())
def test_translate_pointwise(f, data):
    P = np.array(data.draw(shifts(f.arity)))
    x = np.array(data.draw(shifts(f.arity, 3.0)))
    expected = evaluate(f, x + P)
    assert abs(evaluate(translate(f, P), x) - expected) <= 1e-9 * (1 + abs(expected))


@given(polynomials(), st.data())
def test_translate_round_trip(f, data):
    P = np.array(data.draw(shifts(f.arity)))
    back = prune(translate(translate(f, P), -P), 1e-12)
    for m in set(back.terms) | set(f.terms):
        assert abs(back.coef(m) - f.coef(m)) <= 1e-9 * max(1.0, *(abs(c) for c in f.terms.values()))


@given(polynomials(), st.data())
def test_translate_keeps_greatest_coefficients_exactly(f, data):
    if all(c == 0 for c in f.terms.values()):
        return
    P = np.array(data.draw(shifts(f.arity)))
    g = translate(f, P)
    for m in greatest_monomials_of_poly(f):
        assert g.coef(m) == f.coef(m)


@given(polynomials(), st.data())
def test_translate_support_in_closure(f, data):
    P = np.array(data.draw(shifts(f.arity)))
    closure = downward_closure(f.support())
    assert all(m in closure for m in translate(f, P).terms)


@pytest.mark.parametrize("terms, expected", [
    ({(2, 2): 3.0, (1, 2): 1.0, (0, 0): 5.0}, [(2, 2)]),
    ({(2, 0): 1.0, (0, 2): 1.0}, [(2, 0), (0, 2)]),
    ({(2, 2): 1.0, (3, 3): 0.0}, [(2, 2)]),
])
def test_greatest_monomials_of_poly(terms, expected):
    assert greatest_monomials_of_poly(Polynomial(2, terms)) == IndexSet(expected)


def test_greatest_of_zero_polynomial():
    with pytest.raises(ValueError):
        greatest_monomials_of_poly(Polynomial(1, {(1,): 0.0}))


def test_prune():
    assert prune(Polynomial(1, {(2,): 1.0, (1,): 0.0})) == Polynomial(1, {(2,): 1.0})
    f = Polynomial(1, {(2,): 1.0, (1,): 1e-15})
    assert prune(f, 1e-12) == Polynomial(1, {(2,): 1.0})
    assert prune(prune(f, 1e-12), 1e-12) == prune(f, 1e-12)
    with pytest.raises(ValueError):
        prune(f, -1.0)


def test_json_round_trip():
    f = Polynomial(2, {(1, 1): 3.0, (0, 0): -0.1})
    obj = f.to_json()
    assert obj == {"arity": 2, "terms": [{"exp": [0, 0], "coef": -0.1}, {"exp": [1, 1], "coef": 3.0}]}
    assert Polynomial.from_json(obj) == f
    with pytest.raises(ValueError):
        Polynomial.from_json({"arity": 2})


@given(polynomials())
def test_translate_by_zero_is_identity(f):
    assert translate(f, [0.0] * f.arity) == f
