"""Penalized polynomial regression that is invariant to shifts of the predictor coding."""
from .dataset import Dataset, NoiseSpec, design_matrix, generate_synthetic, ssr, translate_data
from .harness import (
    TrialConfig,
    audit_penalty,
    check_fit_invariance,
    check_greatest_coeff_invariance,
    check_loss_invariance,
    check_ssr_invariance,
    search_counterexample,
)
from .monomials import (
    IndexSet,
    PartialOrdering,
    compare,
    downward_closure,
    greatest_monomials,
    highest_total_degree_monomials,
    is_downward_closed,
)
from .polynomial import Polynomial, evaluate, greatest_monomials_of_poly, prune, translate
from .solvers import (
    FitResult,
    LossSpec,
    NoUniqueSolution,
    PenaltySpec,
    fit,
    fit_lasso_selective,
    fit_ols,
    fit_ridge_selective,
    loss,
)

__version__ = "0.1.0"
