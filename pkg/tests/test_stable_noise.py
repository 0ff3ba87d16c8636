import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosscodiff import CovMatrix2, GaussianNoise, StableParams, SubGaussianNoise, noise_log_cf
from crosscodiff.errors import ParameterDomainError
from crosscodiff.stable_noise import (
    gaussian_log_cf,
    sample_gaussian_pair,
    sample_noise,
    sample_stable,
    sample_subgaussian_pair,
    stable_log_cf,
    subgaussian_log_cf,
)

N_DRAWS = 100_000


def ecf2(z1, z2, t1, t2):
    return np.mean(np.exp(1j * (t1 * z1 + t2 * z2)))


psd_covs = st.builds(
    lambda s1, s2, c: CovMatrix2(s1, c * math.sqrt(s1 * s2), s2),
    st.floats(0.0, 3.0),
    st.floats(0.0, 3.0),
    st.floats(-1.0, 1.0),
)
thetas = st.floats(-5.0, 5.0)


class TestParameters:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(alpha=0.0),
            dict(alpha=2.1),
            dict(alpha=1.5, sigma=0.0),
            dict(alpha=1.5, beta=1.5),
            dict(alpha=float("nan")),
        ],
    )
    def test_invalid_stable_params(self, kwargs):
        with pytest.raises(ParameterDomainError):
            StableParams(**kwargs)

    def test_subordinator_parameters(self):
        p = StableParams.subordinator(1.5)
        assert p.alpha == 0.75 and p.beta == 1.0 and p.mu == 0.0
        assert p.sigma == pytest.approx(math.cos(math.pi * 1.5 / 4) ** (2 / 1.5), rel=1e-15)

    @pytest.mark.parametrize("bad", [(-0.1, 0, 1), (1, 0, -0.1), (1, 1.01, 1)])
    def test_non_psd_cov(self, bad):
        with pytest.raises(ParameterDomainError):
            CovMatrix2(*bad)

    @pytest.mark.parametrize("alpha", [1.0, 2.0, 0.5])
    def test_subgaussian_alpha_range(self, alpha):
        with pytest.raises(ParameterDomainError):
            SubGaussianNoise(alpha, CovMatrix2(1, 0, 1))


class TestStableSampler:
    def test_alpha_two_is_standard_normal(self, rng):
        x = sample_stable(StableParams(2.0, 1 / math.sqrt(2)), rng, N_DRAWS)
        assert abs(np.var(x) - 1.0) < 0.05

    def test_subordinator_draws_positive(self, rng):
        p = StableParams(0.75, math.cos(0.75 * math.pi / 2) ** (1 / 0.75), 1.0, 0.0)
        x = sample_stable(p, rng, N_DRAWS)
        assert np.all(x > 0)

    @pytest.mark.parametrize("alpha", [1.1, 1.5, 1.9, 1.999])
    def test_subordinator_positive_sweep(self, rng, alpha):
        x = sample_stable(StableParams.subordinator(alpha), rng, N_DRAWS)
        assert np.all(x > 0)

    def test_subordinator_cf_at_one(self, rng):
        alpha = 0.75
        sigma = math.cos(1.5 * math.pi / 4) ** (2 / 1.5)
        x = sample_stable(StableParams(alpha, sigma, 1.0, 0.0), rng, N_DRAWS)
        emp = np.mean(np.exp(1j * x))
        expected = np.exp(-(sigma**alpha) * (1 - 1j * math.tan(math.pi * alpha / 2)))
        assert abs(emp - expected) < 0.02

    @pytest.mark.parametrize(
        "params",
        [
            StableParams(1.5, 0.7, 0.0, 0.3),
            StableParams(1.2, 1.0, 0.5, 0.0),
            StableParams(1.0, 0.8, 0.4, -0.2),
            StableParams(1.0, 1.0, 0.0, 0.0),
            StableParams(0.6, 0.5, -0.7, 0.1),
        ],
    )
    def test_general_cf_matches_analytic(self, rng, params):
        x = sample_stable(params, rng, N_DRAWS)
        for theta in (-1.0, 0.5, 1.0):
            emp = np.mean(np.exp(1j * theta * x))
            assert abs(emp - np.exp(stable_log_cf(params, theta))) < 0.02

    def test_scalar_draw(self, rng):
        x = sample_stable(StableParams(1.5), rng)
        assert isinstance(x, float)

    def test_cauchy_cf_closed_form(self):
        # alpha = 1, beta = 0 reduces to |theta| sigma with shift mu
        v = stable_log_cf(StableParams(1.0, 2.0, 0.0, 0.5), 1.5)
        assert v == pytest.approx(-3.0 + 0.75j, abs=1e-15)


class TestGaussianPair:
    def test_diagonal_cov_uncorrelated(self, rng):
        g1, g2 = sample_gaussian_pair(CovMatrix2(1, 0, 1), rng, N_DRAWS)
        assert abs(np.corrcoef(g1, g2)[0, 1]) < 0.02

    def test_sample_moments_match(self, rng):
        cov = CovMatrix2(0.4, 0.3, 0.3)
        g1, g2 = sample_gaussian_pair(cov, rng, N_DRAWS)
        emp = np.cov(np.vstack([g1, g2]), bias=True)
        assert np.max(np.abs(emp - cov.as_matrix())) < 0.02

    def test_rank_one_is_exact_copy(self, rng):
        g1, g2 = sample_gaussian_pair(CovMatrix2(1, 1, 1), rng, 1000)
        assert np.array_equal(g1, g2)

    def test_rank_one_negative_scaled(self, rng):
        g1, g2 = sample_gaussian_pair(CovMatrix2(0.25, -0.5, 1.0), rng, 1000)
        np.testing.assert_allclose(g2, -2.0 * g1, rtol=1e-15, atol=0)

    def test_zero_first_variance(self, rng):
        g1, g2 = sample_gaussian_pair(CovMatrix2(0.0, 0.0, 2.0), rng, N_DRAWS)
        assert np.all(g1 == 0)
        assert abs(np.var(g2) - 2.0) < 0.05


class TestSubGaussianPair:
    def test_marginals_symmetric(self, rng):
        z1, z2 = sample_subgaussian_pair(1.5, CovMatrix2(1, 0, 1), rng, N_DRAWS)
        assert abs(np.median(z1)) < 0.02
        assert abs(np.median(z2)) < 0.02

    def test_bivariate_cf_at_one_one(self, rng):
        alpha, cov = 1.7, CovMatrix2(0.4, 0.3, 0.3)
        z1, z2 = sample_subgaussian_pair(alpha, cov, rng, N_DRAWS)
        expected = math.exp(-(0.5 ** (alpha / 2)) * abs(0.4 + 0.6 + 0.3) ** (alpha / 2))
        assert abs(ecf2(z1, z2, 1, 1) - expected) < 0.02

    def test_near_two_close_to_gaussian(self, rng):
        cov = CovMatrix2(0.5, -0.2, 0.8)
        z1, z2 = sample_subgaussian_pair(1.999, cov, rng, N_DRAWS)
        for t1 in (-1.0, 0.0, 1.0):
            for t2 in (-1.0, 0.0, 1.0):
                gauss = math.exp(gaussian_log_cf(cov, t1, t2))
                assert abs(ecf2(z1, z2, t1, t2) - gauss) < 0.03

    def test_cf_convergence_grid(self, rng):
        spec = SubGaussianNoise(1.5, CovMatrix2(0.4, 0.1, 0.8))
        z1, z2 = sample_noise(spec, rng, N_DRAWS)
        grid = np.linspace(-2, 2, 5)
        worst = max(
            abs(ecf2(z1, z2, t1, t2) - math.exp(noise_log_cf(spec, t1, t2))) for t1 in grid for t2 in grid
        )
        assert worst < 0.02

    def test_shared_subordinator(self, rng):
        # rank-1 cov: both components scale the same Gaussian by the same sqrt(A)
        z1, z2 = sample_subgaussian_pair(1.5, CovMatrix2(1, 1, 1), rng, 1000)
        assert np.array_equal(z1, z2)

    def test_rejects_alpha_outside(self, rng):
        with pytest.raises(ParameterDomainError):
            sample_subgaussian_pair(2.0, CovMatrix2(1, 0, 1), rng, 10)


class TestLogCF:
    def test_standard_normal_exponent(self):
        assert noise_log_cf(GaussianNoise(CovMatrix2(1, 0, 1)), 1.0, 0.0) == -0.5

    def test_subgaussian_hand_value(self):
        spec = SubGaussianNoise(1.5, CovMatrix2(0.4, 0.3, 0.3))
        expected = -math.exp(0.75 * math.log(0.5 * 1.3))
        assert noise_log_cf(spec, 1.0, 1.0) == pytest.approx(expected, rel=1e-14)
        assert noise_log_cf(spec, 1.0, 1.0) == pytest.approx(-0.7239, abs=1e-4)

    @given(psd_covs, thetas, thetas)
    def test_alpha_two_formal_equals_gaussian(self, cov, t1, t2):
        assert subgaussian_log_cf(2.0, cov, t1, t2) == pytest.approx(gaussian_log_cf(cov, t1, t2), rel=1e-13, abs=1e-15)

    @given(psd_covs, st.sampled_from([1.2, 1.5, 1.8, None]), thetas, thetas)
    def test_symmetry_and_origin(self, cov, alpha, t1, t2):
        spec = GaussianNoise(cov) if alpha is None else SubGaussianNoise(alpha, cov)
        assert noise_log_cf(spec, t1, t2) == noise_log_cf(spec, -t1, -t2)
        assert noise_log_cf(spec, 0.0, 0.0) == 0.0
        assert noise_log_cf(spec, t1, t2) <= 0.0

    @settings(max_examples=200)
    @given(psd_covs)
    def test_quadratic_form_nonnegative(self, cov):
        grid = np.random.default_rng(1).uniform(-10, 10, size=(2, 500))
        assert np.all(cov.quadratic_form(grid[0], grid[1]) >= 0.0)

    def test_vectorised(self):
        spec = SubGaussianNoise(1.5, CovMatrix2(0.4, 0.1, 0.8))
        t = np.linspace(-1, 1, 7)
        out = noise_log_cf(spec, t, -t)
        assert out.shape == (7,)
        assert out[3] == 0.0
