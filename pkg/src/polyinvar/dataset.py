"""
Predictor/response data, design matrices and residual sums of squares.

Nothing here centers or rescales predictors: the coding of ``X`` is exactly
what the caller passes in.

Synthetic data uses numpy's PCG64 bit generator.  A trial stream is derived
with ``numpy.random.SeedSequence(seed).spawn(k)``, so parallel trials stay
reproducible from a single master seed.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .monomials import IndexSet
from .polynomial import Polynomial, evaluate_rows

DEFAULT_X_RANGE = (-2.0, 2.0)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Predictor matrix ``X`` (n x p) and response ``y`` (length n)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"X must be a non-empty n x p matrix, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("data contain non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def translated(self, shift) -> "Dataset":
        return Dataset(translate_data(self.X, shift), self.y)


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")


def translate_data(X, shift) -> np.ndarray:
    """Add ``shift`` to every row of ``X``."""
    X = np.asarray(X, dtype=float)
    shift = np.asarray(shift, dtype=float)
    if X.ndim != 2 or shift.shape != (X.shape[1],):
        raise ValueError(f"shift of shape {shift.shape} does not fit X of shape {X.shape}")
    return X + shift[None, :]


def design_matrix(X, index_set: IndexSet) -> np.ndarray:
    """
    Regressor matrix ``Z`` with ``Z[j, c] = prod_l X[j, l] ** m_l``.

    Columns follow the canonical order of ``index_set``; the all-zero
    monomial, when present, yields the intercept column of ones.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != index_set.arity:
        raise ValueError(f"X of shape {X.shape} does not match arity {index_set.arity}")
    Z = np.empty((X.shape[0], len(index_set)))
    for c, m in enumerate(index_set):
        with np.errstate(over="ignore", invalid="ignore"):
            col = np.prod(X ** np.asarray(m, dtype=float), axis=1)
        if not np.all(np.isfinite(col)):
            raise OverflowError(f"column for monomial {list(m)} overflows to non-finite values")
        Z[:, c] = col
    return Z


def ssr(f: Polynomial, data: Dataset) -> float:
    """Sum of squared residuals of ``f`` on ``data``."""
    if f.arity != data.p:
        raise ValueError(f"polynomial arity {f.arity} does not match {data.p} predictors")
    r = data.y - evaluate_rows(f, data.X)
    return float(r @ r)


def generate_synthetic(
    index_set: IndexSet,
    truth: Polynomial,
    n: int,
    x_range: Sequence[float] = DEFAULT_X_RANGE,
    noise: NoiseSpec = NoiseSpec(),
) -> Dataset:
    """
    Draw ``X`` uniformly on ``x_range`` and set ``y = truth(X) + N(0, sigma**2)``.

    The same ``noise.seed`` always produces the same dataset.
    """
    if truth.arity != index_set.arity:
        raise ValueError("truth and index set disagree on arity")
    outside = [m for m, c in truth.items() if c != 0.0 and m not in index_set]
    if outside:
        raise ValueError(f"truth has terms outside the model: {outside}")
    if n < 1:
        raise ValueError("n must be at least 1")
    lo, hi = (float(v) for v in x_range)
    if not hi > lo:
        raise ValueError(f"empty predictor interval [{lo}, {hi}]")
    rng = np.random.default_rng(noise.seed)
    X = rng.uniform(lo, hi, size=(n, index_set.arity))
    y = evaluate_rows(truth, X) + noise.sigma * rng.standard_normal(n)
    return Dataset(X, y)


def _csv_error(msg: str) -> ValueError:
    return ValueError(f"CSV: {msg}")


def read_csv(source, arity: int | None = None) -> Dataset:
    """
    Parse a CSV with header ``x1,...,xp,y`` (any column order).

    ``source`` is a path or an open text stream.  Missing or non-numeric
    cells are rejected.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_csv(fh, arity)
    rows = list(csv.reader(source))
    if not rows:
        raise _csv_error("empty file")
    header = [h.strip() for h in rows[0]]
    if "y" not in header:
        raise _csv_error("missing response column 'y'")
    xcols = [h for h in header if h != "y"]
    p = len(xcols)
    if p == 0 or sorted(xcols) != sorted(f"x{k}" for k in range(1, p + 1)) or len(set(header)) != len(header):
        raise _csv_error(f"predictor columns must be x1..xp, got {xcols}")
    if arity is not None and p != arity:
        raise _csv_error(f"{p} predictor columns but the model has arity {arity}")
    order = [header.index(f"x{k}") for k in range(1, p + 1)]
    yi = header.index("y")
    X, y = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise _csv_error(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            vals = [float(v) if v.strip() else float("nan") for v in row]
        except ValueError:
            raise _csv_error(f"line {lineno}: non-numeric value") from None
        if not all(np.isfinite(vals)):
            raise _csv_error(f"line {lineno}: missing or non-finite value")
        X.append([vals[i] for i in order])
        y.append(vals[yi])
    if not X:
        raise _csv_error("no data rows")
    return Dataset(np.array(X), np.array(y))


def write_csv(data: Dataset, dest=None) -> str | None:
    """Write ``data`` in the format :func:`read_csv` accepts; return text if ``dest`` is None."""
    buf = io.StringIO() if dest is None else dest
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{k}" for k in range(1, data.p + 1)] + ["y"])
    for row, yj in zip(data.X.tolist(), data.y.tolist()):
        w.writerow([repr(v) for v in row] + [repr(yj)])
    return buf.getvalue() if dest is None else None
