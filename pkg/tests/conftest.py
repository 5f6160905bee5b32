import os
import sys

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from polyinvar.monomials import IndexSet  # noqa: E402
from polyinvar.polynomial import Polynomial  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def monomials(arity, max_exp=3):
    return st.tuples(*[st.integers(0, max_exp)] * arity)


@st.composite
def index_sets(draw, arity=None, max_exp=3, max_size=12):
    p = draw(st.integers(1, 3)) if arity is None else arity
    ms = draw(st.lists(monomials(p, max_exp), min_size=1, max_size=max_size))
    return IndexSet(ms, arity=p)


coefs = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def polynomials(draw, arity=None, max_exp=3, max_terms=8):
    p = draw(st.integers(1, 3)) if arity is None else arity
    terms = draw(st.dictionaries(monomials(p, max_exp), coefs, min_size=1, max_size=max_terms))
    return Polynomial(p, terms)


@st.composite
def low_degree_polynomials(draw, max_degree=3):
    """Polynomials in 1-3 variables with total degree at most ``max_degree``."""
    p = draw(st.integers(1, 3))
    m = st.tuples(*[st.integers(0, max_degree)] * p).filter(lambda e: sum(e) <= max_degree)
    terms = draw(st.dictionaries(m, coefs, min_size=1, max_size=8))
    return Polynomial(p, terms)


def shifts(arity, bound=5.0):
    return st.lists(st.floats(-bound, bound, allow_nan=False), min_size=arity, max_size=arity)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line(request):
    """Record one PASS/FAIL summary line for an acceptance criterion."""
    state = {}

    def record(text):
        state["text"] = text

    yield record
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    ACCEPTANCE_LINES.append(f"{status}  {request.node.name}: {state.get('text', '')}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
