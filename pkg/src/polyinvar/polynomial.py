"""
Sparse multivariate polynomials with real coefficients.

Terms are held in a ``{exponent tuple: coefficient}`` dict.  Explicit zero
coefficients are kept until :func:`prune` removes them, because whether a
monomial is present with coefficient 0 matters when reasoning about which
monomials are greatest.
"""
from __future__ import annotations

import itertools
import math
from typing import Mapping, Sequence

import numpy as np

from .monomials import IndexSet, Monomial, grlex_key, maximal_elements, monomial

_FLOAT_EXACT_INT = 2 ** 53


class Polynomial:
    """
    Immutable sparse polynomial in ``arity`` variables.

    >>> f = Polynomial(2, {(1, 1): 1.0, (0, 0): 2.0})
    >>> evaluate(f, [3.0, 4.0])
    14.0
    """

    __slots__ = ("_arity", "_terms")

    def __init__(self, arity: int, terms: Mapping[Sequence[int], float] | None = None):
        if arity < 1:
            raise ValueError("arity must be a positive integer")
        clean = {}
        for exp, coef in (terms or {}).items():
            m = monomial(exp)
            if len(m) != arity:
                raise ValueError(f"monomial {m} does not have arity {arity}")
            c = float(coef)
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient {coef!r} for {m}")
            clean[m] = clean.get(m, 0.0) + c
        self._arity = arity
        self._terms = {m: clean[m] for m in sorted(clean, key=grlex_key)}

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def terms(self) -> dict:
        """Copy of the term map in canonical order."""
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coef(self, m: Sequence[int]) -> float:
        return self._terms.get(tuple(m), 0.0)

    def support(self) -> IndexSet:
        """All stored monomials, zero coefficients included."""
        return IndexSet(self._terms, arity=self._arity)

    def nonzero_support(self) -> IndexSet:
        return IndexSet((m for m, c in self._terms.items() if c != 0.0), arity=self._arity)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._arity == other._arity and self._terms == other._terms

    def __repr__(self) -> str:
        body = ", ".join(f"{m}: {c!r}" for m, c in self._terms.items())
        return f"Polynomial({self._arity}, {{{body}}})"

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def to_json(self) -> dict:
        return {
            "arity": self._arity,
            "terms": [{"exp": list(m), "coef": c} for m, c in self._terms.items()],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Polynomial":
        try:
            arity = int(obj["arity"])
            terms: dict = {}
            for term in obj["terms"]:
                m = tuple(term["exp"])
                if m in terms:
                    raise ValueError(f"duplicate term {list(m)}")
                terms[m] = term["coef"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial JSON: {exc}") from None
        return cls(arity, terms)


def _check_point(f: Polynomial, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != f.arity:
        raise ValueError(f"point of shape {x.shape} does not match arity {f.arity}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite entries")
    return x


def evaluate(f: Polynomial, x) -> float:
    """Value of ``f`` at the point ``x`` (``0**0`` counts as 1)."""
    x = [float(v) for v in _check_point(f, x)]
    total = 0.0
    for m, c in f.items():
        term = c
        for xl, e in zip(x, m):
            term *= xl ** e
        total += term
    return total


def evaluate_rows(f: Polynomial, X) -> np.ndarray:
    """Evaluate ``f`` at every row of the ``n x p`` array ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != f.arity:
        raise ValueError(f"matrix of shape {X.shape} does not match arity {f.arity}")
    out = np.zeros(X.shape[0])
    for m, c in f.items():
        out += c * np.prod(X ** np.asarray(m, dtype=float), axis=1)
    return out


def _binomial_weight(i: Monomial, k: Monomial) -> float:
    w = 1
    for a, b in zip(i, k):
        w *= math.comb(a, b)
    if w > _FLOAT_EXACT_INT:
        raise OverflowError(f"binomial weight for {i} -> {k} is not exactly representable")
    return float(w)


def translate(f: Polynomial, shift) -> Polynomial:
    """
    Re-expand ``f`` about a shifted origin: ``g(x) = f(x + shift)``.

    Each term ``a_i x**i`` expands by the binomial theorem into

        a_i * prod_l C(i_l, k_l) * shift_l**(i_l - k_l) * x**k      for all k <= i,

    so the result is supported on the divisors of ``f``'s support.  Binomial
    weights are exact integers turned into floats only when multiplied in.
    The output is not pruned; cancellations may leave explicit zeros.  Terms
    whose weight vanishes because a shift component is exactly zero are not
    created, so a zero shift returns ``f`` unchanged.
    """
    shift = [float(v) for v in _check_point(f, shift)]
    out: dict = {}
    for i, a in f.items():
        # a zero shift component contributes nothing once that exponent drops
        box = [range(e + 1) if s != 0.0 else (e,) for s, e in zip(shift, i)]
        for k in itertools.product(*box):
            power = 1.0
            for s, il, kl in zip(shift, i, k):
                power *= s ** (il - kl)
            out[k] = out.get(k, 0.0) + a * _binomial_weight(i, k) * power
    return Polynomial(f.arity, out)


def greatest_monomials_of_poly(f: Polynomial) -> IndexSet:
    """Maximal monomials among those with a non-zero coefficient."""
    nz = [m for m, c in f.items() if c != 0.0]
    if not nz:
        raise ValueError("zero polynomial has no greatest monomials")
    return IndexSet(maximal_elements(nz), arity=f.arity)


def prune(f: Polynomial, eps: float = 0.0) -> Polynomial:
    """Drop terms with ``|coefficient| <= eps``."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    return Polynomial(f.arity, {m: c for m, c in f.items() if abs(c) > eps})


def from_coefficients(index_set: IndexSet, coefs) -> Polynomial:
    """Build a polynomial from a coefficient vector ordered like ``index_set``."""
    coefs = np.asarray(coefs, dtype=float)
    if coefs.shape != (len(index_set),):
        raise ValueError(f"expected {len(index_set)} coefficients, got shape {coefs.shape}")
    return Polynomial(index_set.arity, dict(zip(index_set, coefs.tolist())))


def coefficient_vector(f: Polynomial, index_set: IndexSet) -> np.ndarray:
    """Coefficients of ``f`` in the order of ``index_set``; raises if ``f`` leaves it."""
    outside = [m for m, c in f.items() if c != 0.0 and m not in index_set]
    if outside:
        raise ValueError(f"polynomial has terms outside the index set: {outside}")
    return np.array([f.coef(m) for m in index_set])
