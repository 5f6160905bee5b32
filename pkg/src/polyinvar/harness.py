"""
Numerical checks of translation invariance for penalized polynomial fits.

A fit is translation invariant when fitting on ``X + P`` and evaluating at
``x + P`` reproduces the fit on ``X`` evaluated at ``x``.  That holds when
the model's index set is downward closed and only its greatest monomials are
penalized (:func:`audit_penalty`).  :func:`check_fit_invariance` measures it
for configurations meeting that condition; :func:`search_counterexample`
hunts for violations in configurations that do not.

Trials draw from independent ``SeedSequence`` children of the master seed,
so any single trial can be replayed from the seed and its trial number.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from . import monomials as mono
from .dataset import DEFAULT_X_RANGE, Dataset, NoiseSpec, generate_synthetic, ssr
from .monomials import IndexSet
from .polynomial import (
    Polynomial,
    evaluate_rows,
    from_coefficients,
    greatest_monomials_of_poly,
    translate,
)
from .solvers import G_FUNCTIONS, LossSpec, PenaltySpec, fit, loss

TOL_FIT = {"none": 1e-6, "ridge": 1e-6, "lasso": 1e-5}
VIOLATION_THRESHOLD = 1e-3


class ConditionNotMet(ValueError):
    """The invariance condition required by a check does not hold."""


class ConditionSatisfied(ValueError):
    """A counterexample search was asked for on a compliant configuration."""


# -- Pointwise identities ------------------------------------------------------

def check_ssr_invariance(f: Polynomial, data: Dataset, shift) -> float:
    """Relative gap between the SSR of ``f`` on ``data`` and of ``f(. - shift)`` on shifted data."""
    shift = np.asarray(shift, dtype=float)
    before = ssr(f, data)
    after = ssr(translate(f, -shift), data.translated(shift))
    return abs(before - after) / (1.0 + before)


def check_greatest_coeff_invariance(f: Polynomial, shift) -> float:
    """Largest change of a greatest-monomial coefficient under ``f -> f(. - shift)``."""
    greatest = greatest_monomials_of_poly(f)
    g = translate(f, -np.asarray(shift, dtype=float))
    return max(abs(f.coef(m) - g.coef(m)) for m in greatest)


def check_loss_invariance(f: Polynomial, data: Dataset, shift, spec: LossSpec,
                          model: IndexSet | None = None) -> float:
    """
    Relative gap between ``L(f)`` on ``data`` and ``L(f(. - shift))`` on shifted data.

    ``model`` defaults to the support of ``f``; every penalized monomial must
    be a greatest monomial of it, otherwise :class:`ConditionNotMet` is raised.
    """
    if model is None:
        model = f.support()
    outside = [m for m, c in f.items() if c != 0.0 and m not in model]
    if outside:
        raise ValueError(f"polynomial has terms outside the model: {outside}")
    greatest = mono.greatest_monomials(model)
    bad = [m for m in spec.penalty.weights if m not in greatest]
    if bad:
        raise ConditionNotMet(f"condition not met: penalized monomials {bad} are not greatest in the model")
    shift = np.asarray(shift, dtype=float)
    before = loss(f, data, spec)
    after = loss(translate(f, -shift), data.translated(shift), spec)
    return abs(before - after) / (1.0 + abs(before))


# -- Static audit -----------------------------------------------------------------

@dataclass(frozen=True)
class AuditReport:
    downward_closed: bool
    penalized_subset_of_greatest: bool
    missing_divisors: tuple
    offending_penalized: tuple

    @property
    def compliant(self) -> bool:
        return self.downward_closed and self.penalized_subset_of_greatest

    def to_json(self) -> dict:
        return {
            "downward_closed": self.downward_closed,
            "penalized_subset_of_greatest": self.penalized_subset_of_greatest,
            "compliant": self.compliant,
            "repairs": {
                "missing_divisors": [list(m) for m in self.missing_divisors],
                "offending_penalized": [list(m) for m in self.offending_penalized],
            },
        }


def audit_penalty(index_set: IndexSet, penalized) -> AuditReport:
    """
    Check the sufficient condition for a translation-invariant penalized fit.

    Compliant means ``index_set`` is downward closed (so shifting a model
    polynomial stays inside the model) and every penalized monomial is a
    greatest monomial of ``index_set``.  The report lists the divisors that
    would have to be added and the penalized monomials that break the rule.
    """
    if not isinstance(penalized, IndexSet):
        penalized = IndexSet(penalized, arity=index_set.arity)
    if penalized.arity != index_set.arity:
        raise ValueError("penalized set and model disagree on arity")
    extra = [m for m in penalized if m not in index_set]
    if extra:
        raise ValueError(f"penalized monomials not in the model: {extra}")
    closure = mono.downward_closure(index_set)
    missing = tuple(m for m in closure if m not in index_set)
    greatest = mono.greatest_monomials(index_set)
    offending = tuple(m for m in penalized if m not in greatest)
    return AuditReport(not missing, not offending, missing, offending)


# -- Randomized fit comparisons ------------------------------------------------------

@dataclass(frozen=True)
class TrialConfig:
    index_set: IndexSet
    penalty: PenaltySpec
    g: str = "identity"
    n: int = 50
    sigma: float = 0.0
    x_range: tuple = DEFAULT_X_RANGE
    shift_range: tuple = (-5.0, 5.0)
    n_test_points: int = 20
    seed: int = 0
    trials: int = 50
    random_sign: bool = False

    def __post_init__(self):
        if self.trials < 1 or self.n_test_points < 1 or self.n < 1:
            raise ValueError("trials, n_test_points and n must be positive")
        if self.penalty.arity != self.index_set.arity:
            raise ValueError("penalty and model disagree on arity")
        if self.g not in G_FUNCTIONS:
            raise ValueError(f"unknown g {self.g!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        lo, hi = self.shift_range
        if hi < lo:
            raise ValueError("shift_range is reversed")
        xlo, xhi = self.x_range
        if not xhi > xlo:
            raise ValueError("x_range is empty")
        object.__setattr__(self, "shift_range", (float(lo), float(hi)))
        object.__setattr__(self, "x_range", (float(xlo), float(xhi)))

    @property
    def arity(self) -> int:
        return self.index_set.arity

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "monomials": self.index_set.to_json(),
            "loss": LossSpec(self.penalty, self.g).to_json(),
            "n": self.n,
            "sigma": self.sigma,
            "x_range": list(self.x_range),
            "shift_range": list(self.shift_range),
            "random_sign": self.random_sign,
            "n_test_points": self.n_test_points,
            "seed": self.seed,
            "trials": self.trials,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "TrialConfig":
        try:
            arity = int(obj["arity"])
            index_set = IndexSet(obj["monomials"], arity=arity)
            spec = LossSpec.from_json(obj.get("loss", {}), arity)
            extra = {k: obj[k] for k in ("n", "sigma", "n_test_points", "seed", "trials", "random_sign")
                     if k in obj}
            for k in ("x_range", "shift_range"):
                if k in obj:
                    lo, hi = obj[k]
                    extra[k] = (float(lo), float(hi))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed trial config: {exc}") from None
        bad = [m for m in spec.penalty.weights if m not in index_set]
        if bad:
            raise ValueError(f"penalized monomials not in the model: {bad}")
        return cls(index_set, spec.penalty, spec.g, **extra)


@dataclass
class TrialRecord:
    trial: int
    shift: list
    pred_discrepancy: float = math.nan
    rel_discrepancy: float = math.nan
    coeff_discrepancy: float = math.nan
    loss_discrepancy: float = math.nan
    converged: bool = True
    data_digest: str = ""
    error: str | None = None


@dataclass
class InvarianceReport:
    tolerance: float
    max_pred_discrepancy: float
    max_coeff_discrepancy: float
    verdict: str
    failed_trials: int
    trials: list = field(default_factory=list)

    def to_json(self, details: bool = True) -> dict:
        out = {
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "max_pred_discrepancy": self.max_pred_discrepancy,
            "max_coeff_discrepancy": self.max_coeff_discrepancy,
            "failed_trials": self.failed_trials,
        }
        if details:
            out["trials"] = [asdict(t) for t in self.trials]
        return out


@dataclass(frozen=True)
class Violation:
    seed: int
    trial: int
    shift: list
    pred_discrepancy: float
    rel_discrepancy: float
    data_digest: str
    fit_original: Polynomial
    fit_shifted: Polynomial

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "trial": self.trial,
            "shift": self.shift,
            "pred_discrepancy": self.pred_discrepancy,
            "rel_discrepancy": self.rel_discrepancy,
            "data_digest": self.data_digest,
            "fit_original": self.fit_original.to_json(),
            "fit_shifted": self.fit_shifted.to_json(),
        }


def dataset_digest(data: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(data.X).tobytes())
    h.update(np.ascontiguousarray(data.y).tobytes())
    return h.hexdigest()[:16]


def _trial_seeds(config: TrialConfig) -> list:
    return np.random.SeedSequence(config.seed).spawn(config.trials)


def replay_trial(config: TrialConfig, trial: int) -> tuple:
    """Rerun trial number ``trial`` of ``config`` exactly."""
    return run_trial(config, trial, _trial_seeds(config)[trial])


def _draw_shift(rng, config: TrialConfig) -> np.ndarray:
    lo, hi = config.shift_range
    shift = rng.uniform(lo, hi, config.arity) if hi > lo else np.full(config.arity, lo)
    if config.random_sign:
        shift = shift * rng.choice([-1.0, 1.0], config.arity)
    return shift


def run_trial(config: TrialConfig, trial: int, seq: np.random.SeedSequence) -> tuple:
    """
    One randomized comparison; returns ``(record, fit_original, fit_shifted)``.

    The truth polynomial has standard normal coefficients on every monomial
    of the model.  Solver errors are caught and stored on the record.
    """
    rng = np.random.default_rng(seq)
    I = config.index_set
    truth = from_coefficients(I, rng.standard_normal(len(I)))
    data_seed = int(rng.integers(0, 2 ** 63))
    shift = _draw_shift(rng, config)
    test_x = rng.uniform(*config.x_range, size=(config.n_test_points, config.arity))
    data = generate_synthetic(I, truth, config.n, config.x_range, NoiseSpec(config.sigma, data_seed))
    rec = TrialRecord(trial, shift.tolist(), data_digest=dataset_digest(data))
    shifted = data.translated(shift)
    try:
        r0 = fit(data, I, config.penalty)
        r1 = fit(shifted, I, config.penalty)
    except (ValueError, OverflowError, np.linalg.LinAlgError) as exc:
        rec.error = str(exc)
        return rec, None, None
    rec.converged = r0.converged and r1.converged
    diff = np.abs(evaluate_rows(r0.model, test_x) - evaluate_rows(r1.model, test_x + shift))
    rec.pred_discrepancy = float(np.max(diff))
    rec.rel_discrepancy = rec.pred_discrepancy / _response_scale(data)
    greatest = mono.greatest_monomials(I)
    rec.coeff_discrepancy = max(abs(r0.model.coef(m) - r1.model.coef(m)) for m in greatest)
    spec = LossSpec(config.penalty, config.g)
    before = loss(r0.model, data, spec)
    after = loss(translate(r0.model, -shift), shifted, spec)
    rec.loss_discrepancy = abs(before - after) / (1.0 + abs(before))
    return rec, r0.model, r1.model


def _response_scale(data: Dataset) -> float:
    sd = float(np.std(data.y))
    return sd if sd > 0 else max(1.0, float(np.max(np.abs(data.y))))


def check_fit_invariance(config: TrialConfig, tolerance: float | None = None) -> InvarianceReport:
    """
    Fit on original and shifted data for ``config.trials`` random trials.

    Discrepancies are absolute: predictions at random test points and
    coefficients of the model's greatest monomials.  The verdict is
    ``"invariant"`` when both maxima are within the tolerance
    (:data:`TOL_FIT` for the penalty family unless given).

    Raises
    ------
    ConditionNotMet
        If the configuration fails :func:`audit_penalty`.
    RuntimeError
        If every trial's fit failed.
    """
    audit = audit_penalty(config.index_set, config.penalty.penalized)
    if not audit.compliant:
        raise ConditionNotMet("condition not met: " + _audit_summary(audit))
    tol = TOL_FIT[config.penalty.family] if tolerance is None else tolerance
    records = [run_trial(config, k, seq)[0] for k, seq in enumerate(_trial_seeds(config))]
    ok = [r for r in records if r.error is None]
    if not ok:
        raise RuntimeError(f"all {len(records)} trials failed; first error: {records[0].error}")
    max_pred = max(r.pred_discrepancy for r in ok)
    max_coeff = max(r.coeff_discrepancy for r in ok)
    verdict = "invariant" if max_pred <= tol and max_coeff <= tol else "violated"
    return InvarianceReport(tol, max_pred, max_coeff, verdict, len(records) - len(ok), records)


def _audit_summary(audit: AuditReport) -> str:
    parts = []
    if audit.missing_divisors:
        parts.append(f"index set not downward closed, missing {[list(m) for m in audit.missing_divisors]}")
    if audit.offending_penalized:
        parts.append(f"penalized non-greatest monomials {[list(m) for m in audit.offending_penalized]}")
    return "; ".join(parts)


def search_counterexample(config: TrialConfig, threshold: float = VIOLATION_THRESHOLD) -> Violation | None:
    """
    Look for a trial whose fit changes under translation by more than ``threshold``.

    The discrepancy compared is relative to the standard deviation of the
    response.  Returns the first violating trial, or ``None`` when no trial
    exceeds the threshold, which is inconclusive rather than evidence of
    invariance.  Trials whose fit fails are skipped.

    Raises
    ------
    ConditionSatisfied
        If the configuration passes :func:`audit_penalty`; invariance is
        then guaranteed and the search is pointless.
    """
    audit = audit_penalty(config.index_set, config.penalty.penalized)
    if audit.compliant:
        raise ConditionSatisfied("condition satisfied; search vacuous")
    for k, seq in enumerate(_trial_seeds(config)):
        rec, f0, f1 = run_trial(config, k, seq)
        if rec.error is None and rec.rel_discrepancy > threshold:
            return Violation(config.seed, k, rec.shift, rec.pred_discrepancy,
                             rec.rel_discrepancy, rec.data_digest, f0, f1)
    return None
