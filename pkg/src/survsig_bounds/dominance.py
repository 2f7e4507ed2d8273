"""First-order stochastic dominance between Beta-Binomial predictives.

Within one prior rectangle the predictive for the number of working
components is monotone in the prior mean: a larger ``y`` always gives a
stochastically larger law. In the prior strength ``n`` no such ordering
holds in general, but two sufficient checks often settle which end of
``[n_lower, n_upper]`` gives the larger law:

* a closed-form threshold test on ``y`` against ``s/(N+m-1)`` and
  ``(s+m-1)/(N+m-1)``, which implies likelihood-ratio ordering;
* a tail test on the likelihood ratio ``L(l) = p_upper(l) / p_lower(l)`` at
  ``l = 0`` and ``l = m``. ``log L`` is concave in ``l``, so ``L`` crosses 1 at
  most once between the tails, and the tail signs fix the ordering.

Whatever neither check decides is left to numerical search.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .beta_binomial import BetaBinomialDist, log_pmf_vector
from .errors import InputError
from .prior_sets import PriorRectangle

#: Slack used for weak inequalities on likelihood ratios and cmf comparisons.
TOLERANCE = 1e-12


class Verdict(enum.Enum):
    UPPER_N_DOMINATES = "upper_n_dominates"  # law at n_upper is stochastically larger
    LOWER_N_DOMINATES = "lower_n_dominates"
    UNDETERMINED = "undetermined"


class Source(enum.Enum):
    THEOREM2 = "theorem2"
    LEMMA3 = "lemma3"
    DEGENERATE = "degenerate"
    NONE = "none"


@dataclass(frozen=True)
class DominanceDecision:
    verdict: Verdict
    source: Source

    def __post_init__(self) -> None:
        if (self.verdict is Verdict.UNDETERMINED) != (self.source is Source.NONE):
            raise ValueError("undetermined verdicts carry source NONE and nothing else does")


UNDETERMINED = DominanceDecision(Verdict.UNDETERMINED, Source.NONE)


@dataclass(frozen=True)
class LikelihoodRatioEndpoints:
    L0: float
    Lm: float


def _check_counts(s: int, N: int, m: int) -> None:
    if N < 0 or not 0 <= s <= N:
        raise InputError(f"need 0 <= s <= N, got s={s}, N={N}")
    if m < 1:
        raise InputError(f"m must be at least 1, got {m}")


def theorem2_check(y: float, s: int, N: int, m: int) -> DominanceDecision:
    """Threshold test on the prior mean (strict inequalities)."""
    _check_counts(s, N, m)
    denom = N + m - 1
    if denom == 0:
        return UNDETERMINED
    if y * denom > s + m - 1:
        return DominanceDecision(Verdict.UPPER_N_DOMINATES, Source.THEOREM2)
    if y * denom < s:
        return DominanceDecision(Verdict.LOWER_N_DOMINATES, Source.THEOREM2)
    return UNDETERMINED


def likelihood_ratio_endpoints(y: float, n_lower: float, n_upper: float, m: int, s: int, N: int) -> LikelihoodRatioEndpoints:
    up = log_pmf_vector(m, n_upper * y + s, n_upper * (1 - y) + N - s)
    lo = log_pmf_vector(m, n_lower * y + s, n_lower * (1 - y) + N - s)
    return LikelihoodRatioEndpoints(math.exp(up[0] - lo[0]), math.exp(up[m] - lo[m]))


def lemma3_check(y: float, n_lower: float, n_upper: float, m: int, s: int, N: int) -> DominanceDecision:
    """Tail test on the likelihood ratio between the two ends of the n interval."""
    _check_counts(s, N, m)
    if not n_lower < n_upper:
        raise InputError(f"need n_lower < n_upper, got {n_lower}, {n_upper}")
    lr = likelihood_ratio_endpoints(y, n_lower, n_upper, m, s, N)
    le = lambda a: a <= 1 + TOLERANCE  # noqa: E731
    ge = lambda a: a >= 1 - TOLERANCE  # noqa: E731
    if le(lr.L0) and ge(lr.Lm):
        return DominanceDecision(Verdict.UPPER_N_DOMINATES, Source.LEMMA3)
    if ge(lr.L0) and le(lr.Lm):
        return DominanceDecision(Verdict.LOWER_N_DOMINATES, Source.LEMMA3)
    return UNDETERMINED


def decide_n_dominance(y: float, n_lower: float, n_upper: float, m: int, s: int, N: int) -> DominanceDecision:
    """Degenerate interval, then the threshold test, then the tail test."""
    if n_lower == n_upper:
        return DominanceDecision(Verdict.UPPER_N_DOMINATES, Source.DEGENERATE)
    d = theorem2_check(y, s, N, m)
    if d.verdict is not Verdict.UNDETERMINED:
        return d
    return lemma3_check(y, n_lower, n_upper, m, s, N)


class Order(enum.Enum):
    A_DOMINATES = "a_dominates"
    B_DOMINATES = "b_dominates"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def cmf_order(cmf_a: np.ndarray, cmf_b: np.ndarray, tol: float = TOLERANCE) -> Order:
    a_le = bool(np.all(cmf_a[:-1] <= cmf_b[:-1] + tol))
    b_le = bool(np.all(cmf_b[:-1] <= cmf_a[:-1] + tol))
    if a_le and b_le:
        return Order.EQUAL
    if a_le:
        return Order.A_DOMINATES
    if b_le:
        return Order.B_DOMINATES
    return Order.INCOMPARABLE


def dominance_oracle(dist_a: BetaBinomialDist, dist_b: BetaBinomialDist, tol: float = TOLERANCE) -> Order:
    """Brute-force ordering by comparing the two cmfs at every point below m."""
    if dist_a.m != dist_b.m:
        raise InputError(f"cannot compare laws on 0..{dist_a.m} and 0..{dist_b.m}")
    return cmf_order(dist_a.cmf_vector(), dist_b.cmf_vector(), tol)


@dataclass(frozen=True)
class NTildeChoice:
    """Prior strength giving the extreme predictive, or ``None`` if undecided."""

    n: float | None
    decision: DominanceDecision


def select_n_tilde(rect: PriorRectangle, bound: str, m: int, s: int, N: int) -> NTildeChoice:
    """Prior strength at which a system bound is attained for one type.

    The prior mean is pinned at ``y_lower`` for the lower bound and at
    ``y_upper`` for the upper bound. The lower bound needs the
    stochastically smallest predictive, the upper bound the largest.
    """
    if bound not in ("lower", "upper"):
        raise InputError(f"bound must be 'lower' or 'upper', got {bound!r}")
    if rect.degenerate_n:
        return NTildeChoice(rect.n_upper, DominanceDecision(Verdict.UPPER_N_DOMINATES, Source.DEGENERATE))
    y = rect.y_lower if bound == "lower" else rect.y_upper
    d = decide_n_dominance(y, rect.n_lower, rect.n_upper, m, s, N)
    if d.verdict is Verdict.UNDETERMINED:
        return NTildeChoice(None, d)
    larger_at_upper = d.verdict is Verdict.UPPER_N_DOMINATES
    want_larger = bound == "upper"
    n = rect.n_upper if larger_at_upper == want_larger else rect.n_lower
    return NTildeChoice(n, d)
