"""Survival signatures and imprecise Bayesian reliability bounds for multi-type systems."""

from .beta_binomial import (
    DEFAULT_EPSILON,
    BetaBinomialDist,
    CanonicalBetaParams,
    ReliabilityCurve,
    discrete_pmf_hazard,
    from_canonical,
    posterior_predictive,
    to_canonical,
    update,
)
from .dominance import (
    DominanceDecision,
    Order,
    Source,
    Verdict,
    decide_n_dominance,
    dominance_oracle,
    lemma3_check,
    select_n_tilde,
    theorem2_check,
)
from .errors import InputError, NumericError
from .prior_sets import (
    PriorRectangle,
    PriorSpec,
    TestData,
    conflict_report,
    detect_conflict,
    expand_grid,
    fill_bounds,
    lint_prior,
    posterior_y_bounds,
    weibull_prior_bounds,
)
from .structure_graph import (
    SurvivalSignature,
    SystemGraph,
    compute_survival_signature,
    parse_system,
    signature_from_csv,
    signature_to_csv,
    structure_function,
    validate_signature,
)
from .system_bounds import SearchConfig, bound_at_time, compute_bounds, system_reliability_point

__all__ = [name for name in dir() if not name.startswith("_")]
