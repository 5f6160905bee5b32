"""
Exponent-tuple combinatorics for polynomial models.

A monomial ``x1**i1 * ... * xp**ip`` is stored as the plain tuple
``(i1, ..., ip)``.  An :class:`IndexSet` is an immutable, canonically ordered
collection of such tuples sharing one arity; it is the set of monomials a
regression model is allowed to use.

Monomials are compared by componentwise dominance, which is only a partial
order: ``(2, 0)`` and ``(0, 2)`` are incomparable.
"""
from __future__ import annotations

import enum
import itertools
import math
import operator
from typing import Iterable, Iterator, Sequence, Tuple

Monomial = Tuple[int, ...]

# per-variable exponent and total degree; keeps C(i, k) far below 2**53
MAX_EXPONENT = 16
MAX_TOTAL_DEGREE = 32
SIZE_CAP = 100_000


class CapacityError(ValueError):
    """Raised when an index set would exceed :data:`SIZE_CAP` members."""


class PartialOrdering(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"


def monomial(exponents: Iterable[int]) -> Monomial:
    """Validate ``exponents`` and return them as a monomial tuple."""
    try:
        m = tuple(operator.index(e) for e in exponents)
    except TypeError:
        raise TypeError(f"exponents {exponents!r} must be integers") from None
    if not m:
        raise ValueError("monomial must have arity >= 1")
    for e in m:
        if e < 0:
            raise ValueError(f"negative exponent in {m}")
        if e > MAX_EXPONENT:
            raise ValueError(f"exponent {e} in {m} exceeds MAX_EXPONENT={MAX_EXPONENT}")
    if sum(m) > MAX_TOTAL_DEGREE:
        raise ValueError(f"total degree of {m} exceeds MAX_TOTAL_DEGREE={MAX_TOTAL_DEGREE}")
    return m


def total_degree(m: Monomial) -> int:
    return sum(m)


def grlex_key(m: Monomial) -> tuple:
    """Sort key for the canonical graded-lexicographic order."""
    return (sum(m), m)


def dominates(big: Monomial, small: Monomial) -> bool:
    """True when ``big >= small`` componentwise (``big`` is divisible by ``small``)."""
    return all(b >= s for b, s in zip(big, small))


def compare(m1: Sequence[int], m2: Sequence[int]) -> PartialOrdering:
    """
    Compare two monomials under componentwise dominance.

    The result describes ``m1`` relative to ``m2``: ``LESS`` means every
    exponent of ``m1`` is at most the matching exponent of ``m2`` and the two
    differ, so ``m2`` is the greater monomial.

    Raises
    ------
    ValueError
        If the arities differ.
    """
    if len(m1) != len(m2):
        raise ValueError(f"arity mismatch: {len(m1)} vs {len(m2)}")
    le = all(a <= b for a, b in zip(m1, m2))
    ge = all(a >= b for a, b in zip(m1, m2))
    if le and ge:
        return PartialOrdering.EQUAL
    if le:
        return PartialOrdering.LESS
    if ge:
        return PartialOrdering.GREATER
    return PartialOrdering.INCOMPARABLE


class IndexSet:
    """
    Finite set of monomials of a common arity, iterated in graded-lex order.

    Parameters
    ----------
    members : iterable of sequences of int
        Exponent tuples.  Duplicates are merged.
    arity : int, optional
        Required when ``members`` is empty; otherwise checked against it.
    """

    __slots__ = ("_arity", "_members", "_lookup")

    def __init__(self, members: Iterable[Sequence[int]], arity: int | None = None):
        ms = {monomial(m) for m in members}
        arities = {len(m) for m in ms}
        if len(arities) > 1:
            raise ValueError(f"monomials of mixed arity {sorted(arities)}")
        if arities:
            (found,) = arities
            if arity is not None and arity != found:
                raise ValueError(f"declared arity {arity} but monomials have arity {found}")
            arity = found
        if arity is None or arity < 1:
            raise ValueError("arity must be a positive integer")
        if len(ms) > SIZE_CAP:
            raise CapacityError(f"{len(ms)} monomials exceeds SIZE_CAP={SIZE_CAP}")
        self._arity = arity
        self._members = tuple(sorted(ms, key=grlex_key))
        self._lookup = frozenset(ms)

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def members(self) -> tuple:
        return self._members

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, m) -> bool:
        return tuple(m) in self._lookup

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self._arity == other._arity and self._lookup == other._lookup

    def __hash__(self) -> int:
        return hash((self._arity, self._lookup))

    def __le__(self, other: "IndexSet") -> bool:
        return self._arity == other._arity and self._lookup <= other._lookup

    def __repr__(self) -> str:
        return f"IndexSet({[list(m) for m in self._members]})"

    def index(self, m: Sequence[int]) -> int:
        """Column position of ``m`` in the canonical order."""
        return self._members.index(tuple(m))

    def to_json(self) -> list:
        return [list(m) for m in self._members]

    @classmethod
    def from_json(cls, obj, arity: int | None = None) -> "IndexSet":
        return cls(obj, arity=arity)


def _require_nonempty(index_set: IndexSet) -> None:
    if len(index_set) == 0:
        raise ValueError("index set is empty")


def maximal_elements(monomials: Iterable[Monomial]) -> list:
    """Monomials not strictly dominated by any other in the collection."""
    ms = sorted(set(monomials), key=grlex_key, reverse=True)
    result = []
    # a dominator has strictly larger total degree, so it was visited earlier
    for m in ms:
        if not any(dominates(g, m) for g in result):
            result.append(m)
    return result


def greatest_monomials(index_set: IndexSet) -> IndexSet:
    """Maximal elements of ``index_set`` under componentwise dominance."""
    _require_nonempty(index_set)
    return IndexSet(maximal_elements(index_set), arity=index_set.arity)


def _predecessors(m: Monomial) -> Iterator[Monomial]:
    for pos, e in enumerate(m):
        if e > 0:
            yield m[:pos] + (e - 1,) + m[pos + 1:]


def is_downward_closed(index_set: IndexSet) -> bool:
    """
    True when every componentwise divisor of every member is also a member.

    Checking the immediate predecessors (one exponent lowered by one) of each
    member is enough, since every divisor is reached by a chain of them.
    """
    _require_nonempty(index_set)
    return all(q in index_set for m in index_set for q in _predecessors(m))


def divisors(m: Monomial) -> Iterator[Monomial]:
    """All ``k`` with ``k <= m`` componentwise, ``m`` included."""
    return itertools.product(*(range(e + 1) for e in m))


def downward_closure(index_set: IndexSet) -> IndexSet:
    """Smallest downward-closed index set containing ``index_set``."""
    _require_nonempty(index_set)
    closed: set = set()
    # walk from the largest members so boxes already covered are skipped
    for m in sorted(index_set, key=grlex_key, reverse=True):
        if m in closed:
            continue
        if math.prod(e + 1 for e in m) > SIZE_CAP:
            raise CapacityError(f"divisors of {m} alone exceed SIZE_CAP={SIZE_CAP}")
        closed.update(divisors(m))
        if len(closed) > SIZE_CAP:
            raise CapacityError(f"downward closure exceeds SIZE_CAP={SIZE_CAP}")
    return IndexSet(closed, arity=index_set.arity)


def highest_total_degree_monomials(index_set: IndexSet) -> IndexSet:
    _require_nonempty(index_set)
    top = max(sum(m) for m in index_set)
    return IndexSet([m for m in index_set if sum(m) == top], arity=index_set.arity)


def total_degree_set(arity: int, degree: int) -> IndexSet:
    """All monomials in ``arity`` variables with total degree at most ``degree``."""
    return IndexSet(
        (m for m in itertools.product(range(degree + 1), repeat=arity) if sum(m) <= degree),
        arity=arity,
    )
