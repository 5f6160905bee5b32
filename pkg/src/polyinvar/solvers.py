"""
Penalized least-squares fits of polynomial models.

Every fitter minimizes

    ||y - Z a||**2 + PEN(a)

over coefficient vectors ``a`` indexed by the model's monomials, where
``PEN`` is zero (OLS), ``sum lambda_m * a_m**2`` (ridge) or
``sum lambda_m * |a_m|`` (lasso) over a chosen subset of monomials.  There is
no ``1/(2n)`` factor on the squared error; rescale ``lambda`` when comparing
with libraries that use one.

:func:`loss` additionally accepts an outer transform ``g`` of the SSR
(identity, sqrt or log1p).  Only ``g = identity`` is fitted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.linalg import solve_triangular

from .dataset import Dataset, design_matrix, ssr
from .monomials import IndexSet, Monomial, monomial
from .polynomial import Polynomial, coefficient_vector, from_coefficients

FAMILIES = ("none", "ridge", "lasso")

G_FUNCTIONS = {
    "identity": lambda s: s,
    "sqrt": math.sqrt,
    "log1p": math.log1p,
}

RANK_RTOL = 1e-10
COND_WARN = 1e8
LASSO_TOL = 1e-10
LASSO_MAX_ITER = 100_000
TOL_KKT = 1e-7


class NoUniqueSolution(ValueError):
    """The (augmented) design is numerically rank deficient."""

    def __init__(self, detail: str = ""):
        msg = "no unique solution"
        super().__init__(f"{msg}: {detail}" if detail else msg)


@dataclass(frozen=True)
class PenaltySpec:
    """
    Which coefficients are penalized, how, and how strongly.

    ``weights`` maps each penalized monomial to its strictly positive
    ``lambda``.  ``family == "none"`` goes with an empty map.
    """

    family: str
    weights: Mapping[Monomial, float]
    arity: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown penalty family {self.family!r}")
        clean = {}
        for m, lam in self.weights.items():
            m = monomial(m)
            if len(m) != self.arity:
                raise ValueError(f"penalized monomial {m} does not have arity {self.arity}")
            lam = float(lam)
            if not (lam > 0 and math.isfinite(lam)):
                raise ValueError(f"penalty weight for {m} must be positive and finite, got {lam}")
            clean[m] = lam
        if (self.family == "none") != (not clean):
            raise ValueError("family 'none' goes with an empty penalized set and only then")
        object.__setattr__(self, "weights", clean)

    @classmethod
    def none(cls, arity: int) -> "PenaltySpec":
        return cls("none", {}, arity)

    @classmethod
    def uniform(cls, family: str, monomials, lam: float, arity: int | None = None) -> "PenaltySpec":
        """Same ``lam`` on every monomial in ``monomials``; empty means no penalty."""
        ms = [monomial(m) for m in monomials]
        if arity is None:
            if isinstance(monomials, IndexSet):
                arity = monomials.arity
            elif ms:
                arity = len(ms[0])
            else:
                raise ValueError("arity needed for an empty penalized set")
        if not ms:
            return cls.none(arity)
        return cls(family, {m: lam for m in ms}, arity)

    @property
    def penalized(self) -> IndexSet:
        return IndexSet(self.weights, arity=self.arity)

    def value(self, f: Polynomial) -> float:
        """Penalty of the coefficients of ``f``."""
        if self.family == "ridge":
            return sum(lam * f.coef(m) ** 2 for m, lam in self.weights.items())
        if self.family == "lasso":
            return sum(lam * abs(f.coef(m)) for m, lam in self.weights.items())
        return 0.0

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "terms": [{"exp": list(m), "lambda": lam} for m, lam in
                      ((m, self.weights[m]) for m in self.penalized)],
        }

    @classmethod
    def from_json(cls, obj: Mapping, arity: int) -> "PenaltySpec":
        try:
            family = obj.get("family", "none")
            weights: dict = {}
            for t in obj.get("terms", []):
                m = tuple(t["exp"])
                if m in weights:
                    raise ValueError(f"duplicate penalized term {list(m)}")
                weights[m] = t["lambda"]
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"malformed penalty JSON: {exc}") from None
        return cls(family, weights, arity)


@dataclass(frozen=True)
class LossSpec:
    penalty: PenaltySpec
    g: str = "identity"

    def __post_init__(self):
        if self.g not in G_FUNCTIONS:
            raise ValueError(f"unknown g {self.g!r}; choose from {sorted(G_FUNCTIONS)}")

    def to_json(self) -> dict:
        return {"g": self.g, "penalty": self.penalty.to_json()}

    @classmethod
    def from_json(cls, obj: Mapping, arity: int) -> "LossSpec":
        if not isinstance(obj, Mapping):
            raise ValueError("loss spec must be a JSON object")
        return cls(PenaltySpec.from_json(obj.get("penalty", {}), arity), obj.get("g", "identity"))


@dataclass(frozen=True)
class FitResult:
    model: Polynomial
    ssr: float
    loss: float
    iterations: int = 0
    converged: bool = True
    condition_warning: str | None = None
    objective_trace: tuple = field(default=(), repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "arity": self.model.arity,
            "coefficients": self.model.to_json()["terms"],
            "ssr": self.ssr,
            "loss": self.loss,
            "iterations": self.iterations,
            "converged": self.converged,
            "condition_warning": self.condition_warning,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "FitResult":
        model = Polynomial.from_json({"arity": obj["arity"], "terms": obj["coefficients"]})
        return cls(model, float(obj["ssr"]), float(obj["loss"]), int(obj["iterations"]),
                   bool(obj["converged"]), obj.get("condition_warning"))


def loss(f: Polynomial, data: Dataset, spec: LossSpec) -> float:
    """``g(SSR) + PEN`` for the polynomial ``f`` on ``data``."""
    if f.arity != spec.penalty.arity:
        raise ValueError(f"polynomial arity {f.arity} does not match penalty arity {spec.penalty.arity}")
    return G_FUNCTIONS[spec.g](ssr(f, data)) + spec.penalty.value(f)


# -- linear algebra helpers ---------------------------------------------------

def _condition(A: np.ndarray) -> tuple:
    s = np.linalg.svd(A, compute_uv=False)
    return s[0], s[-1]


def _check_rank(A: np.ndarray, what: str) -> str | None:
    """Raise when ``A`` is numerically column-rank deficient; return a warning text if ill conditioned."""
    if A.shape[1] == 0:
        return None
    if A.shape[0] < A.shape[1]:
        raise NoUniqueSolution(f"{what} has {A.shape[0]} rows for {A.shape[1]} unknowns")
    smax, smin = _condition(A)
    if smax == 0 or smin <= RANK_RTOL * smax:
        raise NoUniqueSolution(f"{what} is rank deficient (sigma_min/sigma_max = {smin / smax if smax else 0:.3g})")
    cond = smax / smin
    if cond > COND_WARN:
        return f"{what} condition number {cond:.3g} exceeds {COND_WARN:.0e}"
    return None


def _qr_lstsq(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(A, mode="reduced")
    return solve_triangular(R, Q.T @ b)


def _penalty_columns(index_set: IndexSet, penalty: PenaltySpec) -> tuple:
    if penalty.arity != index_set.arity:
        raise ValueError("penalty and model disagree on arity")
    missing = [m for m in penalty.weights if m not in index_set]
    if missing:
        raise ValueError(f"penalized monomials not in the model: {missing}")
    cols = [index_set.index(m) for m in penalty.penalized]
    lams = np.array([penalty.weights[m] for m in penalty.penalized])
    return np.array(cols, dtype=int), lams


def _result(data, index_set, coefs, spec, **kw) -> FitResult:
    f = from_coefficients(index_set, coefs)
    s = ssr(f, data)
    return FitResult(f, s, G_FUNCTIONS[spec.g](s) + spec.penalty.value(f), **kw)


# -- fitters -------------------------------------------------------------------

def fit_ols(data: Dataset, index_set: IndexSet) -> FitResult:
    """Ordinary least squares over the monomials of ``index_set``."""
    Z = design_matrix(data.X, index_set)
    warning = _check_rank(Z, "design matrix")
    a = _qr_lstsq(Z, data.y)
    return _result(data, index_set, a, LossSpec(PenaltySpec.none(index_set.arity)),
                   condition_warning=warning)


def fit_ridge_selective(data: Dataset, index_set: IndexSet, penalty: PenaltySpec) -> FitResult:
    """
    Ridge regression penalizing only the monomials in ``penalty``.

    Solved as the stacked least-squares problem ``[Z; sqrt(Lambda)] a ~ [y; 0]``
    by QR, which has the same minimizer as ``(Z'Z + Lambda) a = Z'y`` without
    squaring the condition number.
    """
    if penalty.family == "none":
        return fit_ols(data, index_set)
    if penalty.family != "ridge":
        raise ValueError(f"ridge fitter got a {penalty.family!r} penalty")
    cols, lams = _penalty_columns(index_set, penalty)
    Z = design_matrix(data.X, index_set)
    aug = np.zeros((len(cols), Z.shape[1]))
    aug[np.arange(len(cols)), cols] = np.sqrt(lams)
    A = np.vstack([Z, aug])
    b = np.concatenate([data.y, np.zeros(len(cols))])
    warning = _check_rank(A, "augmented ridge system")
    a = _qr_lstsq(A, b)
    return _result(data, index_set, a, LossSpec(penalty), condition_warning=warning)


def soft_threshold(x: float, t: float) -> float:
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


def fit_lasso_selective(
    data: Dataset,
    index_set: IndexSet,
    penalty: PenaltySpec,
    tol: float = LASSO_TOL,
    max_iter: int = LASSO_MAX_ITER,
) -> FitResult:
    """
    Lasso penalizing only the monomials in ``penalty``, by cyclic coordinate descent.

    The unpenalized block is minimized exactly: its columns are projected out
    of ``y`` and of the penalized columns (a QR of the unpenalized design), so
    the coordinate sweeps run on the penalized coefficients only.  After the
    sweeps the unpenalized coefficients are recovered by least squares on
    ``y - Z_pen b``.  Sweeping stops when no coefficient moves by more than
    ``tol``; if that does not happen in ``max_iter`` sweeps the result is
    returned with ``converged=False``.

    ``objective_trace`` holds the full objective after every sweep.
    """
    if penalty.family == "none":
        return fit_ols(data, index_set)
    if penalty.family != "lasso":
        raise ValueError(f"lasso fitter got a {penalty.family!r} penalty")
    cols, lams = _penalty_columns(index_set, penalty)
    Z = design_matrix(data.X, index_set)
    y = data.y
    if np.any(np.all(Z == 0.0, axis=0)):
        raise NoUniqueSolution("design has an identically zero column")
    free = np.setdiff1d(np.arange(Z.shape[1]), cols)
    U, W = Z[:, free], Z[:, cols]
    warning = _check_rank(U, "unpenalized design block")
    if len(free):
        Q, R = np.linalg.qr(U, mode="reduced")
        Wt = W - Q @ (Q.T @ W)
        yt = y - Q @ (Q.T @ y)
    else:
        Wt, yt = W, y
    gram = Wt.T @ Wt
    corr = Wt.T @ yt
    diag = np.diag(gram).copy()
    # a penalized column inside span(U) never changes the fit, so it stays 0
    live = diag > (np.finfo(float).eps * np.max(np.sum(W * W, axis=0))) * 1e3
    half = lams / 2.0

    def objective(b):
        r = yt - Wt @ b
        return float(r @ r) + float(lams @ np.abs(b))

    b = np.zeros(len(cols))
    gb = np.zeros(len(cols))
    trace = [objective(b)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        biggest = 0.0
        for j in range(len(cols)):
            if not live[j]:
                continue
            old = b[j]
            rho = corr[j] - gb[j] + diag[j] * old
            new = soft_threshold(rho, half[j]) / diag[j]
            delta = new - old
            if delta != 0.0:
                b[j] = new
                gb += gram[:, j] * delta
                biggest = max(biggest, abs(delta))
        trace.append(objective(b))
        if biggest < tol:
            converged = True
            break

    a = np.zeros(Z.shape[1])
    a[cols] = b
    if len(free):
        a[free] = solve_triangular(R, Q.T @ (y - W @ b))
    return _result(data, index_set, a, LossSpec(penalty), iterations=it,
                   converged=converged, condition_warning=warning,
                   objective_trace=tuple(trace))


def fit(data: Dataset, index_set: IndexSet, penalty: PenaltySpec) -> FitResult:
    """Dispatch on ``penalty.family``."""
    if penalty.family == "ridge":
        return fit_ridge_selective(data, index_set, penalty)
    if penalty.family == "lasso":
        return fit_lasso_selective(data, index_set, penalty)
    return fit_ols(data, index_set)


def kkt_residuals(data: Dataset, index_set: IndexSet, penalty: PenaltySpec,
                  model: Polynomial) -> np.ndarray:
    """
    Scaled violation of the optimality conditions, one entry per coefficient.

    With ``grad = -2 Z'(y - Z a)``: unpenalized coordinates need ``grad = 0``;
    a penalized ridge coordinate needs ``grad + 2 lambda a = 0``; a penalized
    lasso coordinate needs ``grad = -lambda sign(a)`` when ``a != 0`` and
    ``|grad| <= lambda`` when ``a == 0``.  Each violation is divided by
    ``||Z_j|| * max(1, ||y||)`` so the check does not depend on column scale.
    """
    Z = design_matrix(data.X, index_set)
    a = coefficient_vector(model, index_set)
    grad = -2.0 * Z.T @ (data.y - Z @ a)
    viol = np.abs(grad)
    if penalty.family != "none":
        cols, lams = _penalty_columns(index_set, penalty)
        for c, lam in zip(cols, lams):
            if penalty.family == "ridge":
                viol[c] = abs(grad[c] + 2.0 * lam * a[c])
            elif a[c] != 0.0:
                viol[c] = abs(grad[c] + lam * np.sign(a[c]))
            else:
                viol[c] = max(0.0, abs(grad[c]) - lam)
    scale = np.linalg.norm(Z, axis=0) * max(1.0, float(np.linalg.norm(data.y)))
    return viol / np.where(scale > 0, scale, 1.0)
