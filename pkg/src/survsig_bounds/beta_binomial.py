"""Beta and Beta-Binomial numerics in canonical (strength, mean) parameters.

A Beta(alpha, beta) prior is written as ``n = alpha + beta`` (prior strength,
a pseudocount) and ``y = alpha / n`` (prior mean functioning probability).
Observing ``s`` survivors out of ``N`` tested units moves the mean to the
weighted average of ``y`` and ``s/N`` with weights ``n`` and ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, NumericError

#: Distance kept from 0 and 1 when clamping prior functioning probabilities.
DEFAULT_EPSILON = 1e-4


@dataclass(frozen=True)
class CanonicalBetaParams:
    n: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.n) and self.n > 0):
            raise InputError(f"prior strength n must be positive, got {self.n}")
        if not (0.0 < self.y < 1.0):
            raise InputError(f"mean y must lie strictly inside (0, 1), got {self.y}")

    @property
    def alpha(self) -> float:
        return self.n * self.y

    @property
    def beta(self) -> float:
        return self.n * (1.0 - self.y)


def to_canonical(alpha: float, beta: float) -> CanonicalBetaParams:
    if not (alpha > 0 and beta > 0):
        raise InputError(f"Beta parameters must be positive, got alpha={alpha}, beta={beta}")
    n = alpha + beta
    return CanonicalBetaParams(n, alpha / n)


def from_canonical(params: CanonicalBetaParams) -> tuple[float, float]:
    return params.alpha, params.beta


def update(prior: CanonicalBetaParams, n_obs: int, s_obs: int) -> CanonicalBetaParams:
    """Conjugate update after ``s_obs`` of ``n_obs`` tested units survive."""
    if n_obs < 0 or not 0 <= s_obs <= n_obs:
        raise InputError(f"need 0 <= s <= n, got s={s_obs}, n={n_obs}")
    if n_obs == 0:
        return prior
    n_post = prior.n + n_obs
    return CanonicalBetaParams(n_post, (prior.n * prior.y + s_obs) / n_post)


def log_pmf_vector(m: int, alpha: float, beta: float) -> np.ndarray:
    """log P(C = l), l = 0..m, for C ~ BetaBinomial(m, alpha, beta).

    The Beta-function ratio B(l + a, m - l + b) / B(a, b) is a ratio of
    rising factorials, so each log-Gamma difference reduces to a finite sum
    of logs. This stays accurate for very large ``a + b`` where subtracting
    two large log-Beta values would not.
    """
    if m < 0:
        raise InputError(f"m must be nonnegative, got {m}")
    if not (alpha > 0 and beta > 0 and math.isfinite(alpha) and math.isfinite(beta)):
        raise NumericError(f"invalid Beta-Binomial shape parameters a={alpha}, b={beta}")
    x = np.arange(m, dtype=float)
    # cumulative log rising factorials: rise_a[l] = log a(a+1)...(a+l-1)
    rise_a = np.concatenate(([0.0], np.cumsum(np.log(alpha + x))))
    rise_b = np.concatenate(([0.0], np.cumsum(np.log(beta + x))))
    rise_ab = float(np.sum(np.log(alpha + beta + x)))
    ls = np.arange(m + 1)
    log_comb = np.array([math.lgamma(m + 1) - math.lgamma(l + 1) - math.lgamma(m - l + 1) for l in ls])
    out = log_comb + rise_a[ls] + rise_b[m - ls] - rise_ab
    if not np.all(np.isfinite(out)):
        raise NumericError(f"non-finite Beta-Binomial log-pmf for m={m}, a={alpha}, b={beta}")
    return out


@dataclass(frozen=True)
class BetaBinomialDist:
    """Predictive law of the number of working components among ``m``."""

    m: int
    params: CanonicalBetaParams

    def __post_init__(self) -> None:
        if self.m < 0:
            raise InputError(f"m must be nonnegative, got {self.m}")

    def pmf_vector(self) -> np.ndarray:
        return np.exp(log_pmf_vector(self.m, self.params.alpha, self.params.beta))

    def cmf_vector(self) -> np.ndarray:
        return np.cumsum(self.pmf_vector())

    def _check(self, l: int) -> None:
        if not 0 <= l <= self.m:
            raise InputError(f"l={l} outside 0..{self.m}")

    def pmf(self, l: int) -> float:
        self._check(l)
        return float(self.pmf_vector()[l])

    def cmf(self, l: int) -> float:
        self._check(l)
        return float(self.cmf_vector()[l])

    def mean(self) -> float:
        return self.m * self.params.y


def posterior_predictive(m: int, prior: CanonicalBetaParams, n_obs: int = 0, s_obs: int = 0) -> BetaBinomialDist:
    return BetaBinomialDist(m, update(prior, n_obs, s_obs))


def pmf(dist: BetaBinomialDist, l: int) -> float:
    return dist.pmf(l)


def cmf(dist: BetaBinomialDist, l: int) -> float:
    return dist.cmf(l)


def pmf_matrix(m: int, n_prior: Sequence[float], y_prior: float, n_obs: int, s_obs: int) -> np.ndarray:
    """Posterior predictive pmfs for several prior strengths at a fixed mean.

    Row ``i`` is the pmf over ``0..m`` obtained from the prior
    ``(n_prior[i], y_prior)`` updated with ``s_obs`` of ``n_obs``.
    """
    n0 = np.asarray(n_prior, dtype=float)
    a = n0 * y_prior + s_obs
    b = n0 * (1.0 - y_prior) + (n_obs - s_obs)
    if np.any(a <= 0) or np.any(b <= 0):
        raise NumericError("invalid Beta-Binomial shape parameters in pmf_matrix")
    x = np.arange(m, dtype=float)
    rise_a = np.concatenate((np.zeros((len(n0), 1)), np.cumsum(np.log(a[:, None] + x), axis=1)), axis=1)
    rise_b = np.concatenate((np.zeros((len(n0), 1)), np.cumsum(np.log(b[:, None] + x), axis=1)), axis=1)
    rise_ab = np.sum(np.log((a + b)[:, None] + x), axis=1)
    ls = np.arange(m + 1)
    log_comb = np.array([math.lgamma(m + 1) - math.lgamma(l + 1) - math.lgamma(m - l + 1) for l in ls])
    out = np.exp(log_comb[None, :] + rise_a[:, ls] + rise_b[:, m - ls] - rise_ab[:, None])
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite Beta-Binomial pmf in pmf_matrix")
    return out


@dataclass(frozen=True)
class ReliabilityCurve:
    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.values, dtype=float)
        if t.shape != p.shape or t.ndim != 1 or len(t) == 0:
            raise InputError("times and values must be nonempty sequences of equal length")
        if np.any(np.diff(t) <= 0):
            raise InputError("time grid must be strictly increasing")
        if np.any((p < 0) | (p > 1)):
            raise InputError("reliability values must lie in [0, 1]")
        bad = np.nonzero(np.diff(p) > 0)[0]
        if len(bad):
            raise InputError(f"reliability curve increases after index {int(bad[0])}")


def discrete_pmf_hazard(curve: ReliabilityCurve) -> tuple[np.ndarray, np.ndarray]:
    """Failure pmf and discrete hazard on each grid interval (t_j, t_j+1]."""
    p = np.asarray(curve.values, dtype=float)
    f = p[:-1] - p[1:]
    zero = np.nonzero(p[:-1] == 0)[0]
    if len(zero):
        raise NumericError(f"hazard undefined where reliability is zero, at indices {zero.tolist()}")
    return f, f / p[:-1]
