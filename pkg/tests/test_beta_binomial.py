import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from survsig_bounds.beta_binomial import (
    BetaBinomialDist,
    CanonicalBetaParams,
    ReliabilityCurve,
    discrete_pmf_hazard,
    from_canonical,
    log_pmf_vector,
    pmf_matrix,
    posterior_predictive,
    to_canonical,
    update,
)
from survsig_bounds.errors import InputError, NumericError


def quad_pmf(m, l, alpha, beta):
    """P(C = l) by integrating the Binomial pmf against the Beta density."""
    f = lambda p: stats.binom.pmf(l, m, p) * stats.beta.pdf(p, alpha, beta)  # noqa: E731
    val, _ = integrate.quad(f, 0, 1, epsabs=1e-12, epsrel=1e-10, limit=200)
    return val


class TestCanonical:
    def test_uniform(self):
        assert to_canonical(1, 1) == CanonicalBetaParams(2, 0.5)

    def test_arithmetic(self):
        p = to_canonical(6, 2)
        assert (p.n, p.y) == (8, 0.75)
        assert from_canonical(p) == (6, 2)

    @pytest.mark.parametrize("a, b", [(0, 1), (1, -2)])
    def test_invalid(self, a, b):
        with pytest.raises(InputError):
            to_canonical(a, b)

    @pytest.mark.parametrize("n, y", [(0, 0.5), (1, 0.0), (1, 1.0), (math.inf, 0.5)])
    def test_invalid_canonical(self, n, y):
        with pytest.raises(InputError):
            CanonicalBetaParams(n, y)


class TestUpdate:
    def test_agreeing_data(self):
        assert update(CanonicalBetaParams(8, 0.75), 16, 12) == CanonicalBetaParams(24, 0.75)

    def test_conflicting_data(self):
        assert update(CanonicalBetaParams(8, 0.75), 16, 0) == CanonicalBetaParams(24, 0.25)

    def test_no_data(self):
        prior = CanonicalBetaParams(3.3, 0.41)
        assert update(prior, 0, 0) is prior

    def test_bad_counts(self):
        with pytest.raises(InputError):
            update(CanonicalBetaParams(2, 0.5), 3, 4)

    @given(
        st.integers(1, 40), st.integers(0, 40), st.integers(0, 40), st.integers(0, 40), st.integers(0, 40)
    )
    def test_pooling(self, n0, n1, s1, n2, s2):
        s1, s2 = min(s1, n1), min(s2, n2)
        prior = CanonicalBetaParams(n0, 0.5)
        a = update(update(prior, n1, s1), n2, s2)
        b = update(prior, n1 + n2, s1 + s2)
        assert a.n == b.n
        # both routes divide the same pseudocount total; only the last bit can differ
        assert a.alpha == pytest.approx(b.alpha, abs=1e-12)
        assert a.y == pytest.approx(b.y, rel=1e-15, abs=1e-15)


class TestPmf:
    def test_single_component(self):
        d = BetaBinomialDist(1, CanonicalBetaParams(3.7, 0.62))
        assert d.pmf(1) == pytest.approx(0.62, abs=1e-15)

    def test_uniform_prior_gives_uniform_predictive(self):
        d = BetaBinomialDist(5, CanonicalBetaParams(2, 0.5))
        np.testing.assert_allclose(d.pmf_vector(), np.full(6, 1 / 6), atol=1e-15)

    def test_against_integration(self):
        d = BetaBinomialDist(5, CanonicalBetaParams(8, 0.75))
        oracle = quad_pmf(5, 2, 6, 2)
        assert d.pmf(2) == pytest.approx(oracle, abs=1e-10)
        assert round(d.pmf(2), 4) == 0.1061

    def test_cmf(self):
        d = BetaBinomialDist(5, CanonicalBetaParams(8, 0.75))
        p = d.pmf_vector()
        assert d.cmf(2) == pytest.approx(p[0] + p[1] + p[2], abs=1e-15)
        assert d.cmf(5) == pytest.approx(1, abs=1e-12)
        assert np.all(np.diff(d.cmf_vector()) >= 0)

    def test_cmf_after_conflicting_data(self):
        d = posterior_predictive(5, CanonicalBetaParams(8, 0.75), 16, 0)
        assert 0.86 <= d.cmf(2) <= 1.0

    def test_out_of_range(self):
        d = BetaBinomialDist(3, CanonicalBetaParams(2, 0.5))
        with pytest.raises(InputError):
            d.pmf(4)
        with pytest.raises(InputError):
            d.cmf(-1)

    def test_bad_shape(self):
        with pytest.raises(NumericError):
            log_pmf_vector(3, 0.0, 1.0)

    def test_matches_scipy(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            m = int(rng.integers(0, 30))
            a, b = rng.uniform(0.01, 50, size=2)
            ours = np.exp(log_pmf_vector(m, a, b))
            np.testing.assert_allclose(ours, stats.betabinom.pmf(np.arange(m + 1), m, a, b), rtol=1e-10, atol=1e-14)

    def test_integration_suite(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            m = int(rng.integers(1, 12))
            n = float(rng.uniform(0.5, 50))
            y = float(rng.uniform(0.05, 0.95))
            d = BetaBinomialDist(m, CanonicalBetaParams(n, y))
            for l in range(m + 1):
                assert d.pmf(l) == pytest.approx(quad_pmf(m, l, n * y, n * (1 - y)), abs=1e-8)

    def test_large_strength_is_binomial(self):
        m, y = 12, 0.37
        d = BetaBinomialDist(m, CanonicalBetaParams(1e8, y))
        np.testing.assert_allclose(d.pmf_vector(), stats.binom.pmf(np.arange(m + 1), m, y), atol=1e-4)

    @settings(max_examples=300)
    @given(
        st.integers(0, 50),
        st.floats(0.1, 1e4),
        st.floats(1e-4, 1 - 1e-4),
    )
    def test_normalised_with_right_mean(self, m, n, y):
        d = BetaBinomialDist(m, CanonicalBetaParams(n, y))
        p = d.pmf_vector()
        assert abs(p.sum() - 1) < 1e-12
        assert np.dot(np.arange(m + 1), p) == pytest.approx(m * y, rel=1e-9, abs=1e-12)

    def test_pmf_matrix_rows(self):
        rows = pmf_matrix(4, [1.0, 2.5, 7.0], 0.3, 6, 2)
        for n0, row in zip([1.0, 2.5, 7.0], rows):
            d = posterior_predictive(4, CanonicalBetaParams(n0, 0.3), 6, 2)
            np.testing.assert_allclose(row, d.pmf_vector(), rtol=1e-13)


class TestHazard:
    def test_halving(self):
        f, h = discrete_pmf_hazard(ReliabilityCurve((0, 1, 2), (1, 0.5, 0.25)))
        np.testing.assert_allclose(f, [0.5, 0.25])
        np.testing.assert_allclose(h, [0.5, 0.5])

    def test_constant(self):
        f, h = discrete_pmf_hazard(ReliabilityCurve((0, 1, 2), (0.8, 0.8, 0.8)))
        np.testing.assert_array_equal(f, [0, 0])
        np.testing.assert_array_equal(h, [0, 0])

    def test_general(self):
        f, h = discrete_pmf_hazard(ReliabilityCurve((0, 1, 2, 3), (1.0, 0.9, 0.6, 0.1)))
        np.testing.assert_allclose(f, [0.1, 0.3, 0.5], atol=1e-15)
        np.testing.assert_allclose(h, [0.1, 1 / 3, 0.5 / 0.6], atol=1e-15)

    def test_zero_reliability(self):
        with pytest.raises(NumericError):
            discrete_pmf_hazard(ReliabilityCurve((0, 1, 2), (1.0, 0.0, 0.0)))

    @pytest.mark.parametrize(
        "times, values",
        [((0, 1), (0.5, 0.7)), ((0, 0), (1, 1)), ((0, 1), (1, 1.2)), ((), ())],
    )
    def test_invalid_curves(self, times, values):
        with pytest.raises(InputError):
            ReliabilityCurve(times, values)
