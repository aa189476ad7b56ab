import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy import special as sp

from obtl.errors import ConfigError, FactorizationError
from obtl.model import (
    ClassHyperparameters,
    ScalarPriorSpec,
    SpdMatrix,
    build_hyperparameters,
    derive_coupling,
    joint_prior_log_density,
    sample_class_data,
    sample_joint_precisions,
    sample_mean_given_precision,
    sample_wishart,
    wishart_log_density,
)


def random_spd(rng, d, jitter=0.5):
    A = rng.normal(size=(d, d))
    return A @ A.T + jitter * np.eye(d)


class TestSpdMatrix:
    def test_logdet_inverse_sqrt(self):
        M = random_spd(np.random.default_rng(0), 4)
        S = SpdMatrix(M)
        assert S.logdet == pytest.approx(np.linalg.slogdet(M)[1])
        np.testing.assert_allclose(S.inverse @ M, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(S.sqrt @ S.sqrt, M, atol=1e-12)

    def test_from_inverse(self):
        M = random_spd(np.random.default_rng(1), 3)
        np.testing.assert_allclose(SpdMatrix.from_inverse(np.linalg.inv(M)).matrix, M, rtol=1e-10)

    def test_rejects_indefinite(self):
        with pytest.raises(FactorizationError):
            SpdMatrix(np.diag([1.0, -1.0]))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            SpdMatrix([[1.0, 0.5], [0.0, 1.0]])


class TestCoupling:
    def test_scalar_example(self):
        C, F = derive_coupling([[1.0]], [[1.0]], [[0.5]])
        assert C.matrix[0, 0] == pytest.approx(0.75)
        assert F[0, 0] == pytest.approx(2 / 3)

    def test_zero_cross_block(self):
        M_s = random_spd(np.random.default_rng(2), 3)
        C, F = derive_coupling(np.eye(3), M_s, np.zeros((3, 3)))
        np.testing.assert_allclose(C.matrix, M_s)
        assert not F.any()

    def test_block_inverse_identity(self):
        # block inverse: lower-right block is C^-1, lower-left block is -F
        rng = np.random.default_rng(3)
        M = random_spd(rng, 6, 2.0)
        C, F = derive_coupling(M[:3, :3], M[3:, 3:], M[:3, 3:])
        Minv = np.linalg.inv(M)
        np.testing.assert_allclose(Minv[3:, 3:], C.inverse, rtol=1e-10)
        np.testing.assert_allclose(Minv[3:, :3], -F, atol=1e-12)

    def test_non_pd_block(self):
        with pytest.raises(FactorizationError):
            ClassHyperparameters(nu=4, kappa_t=1, kappa_s=1, m_t=0, m_s=0, M_t=np.eye(2), M_s=np.eye(2), M_ts=1.5 * np.eye(2))


class TestHyperparameters:
    def test_scalar_spec(self):
        hp = build_hyperparameters(ScalarPriorSpec(d=3, nu=8, kappa_t=2, kappa_s=3, m_t=0.5, k_t=2.0, k_s=0.5, alpha=0.6))
        np.testing.assert_allclose(hp.M_ts, 0.6 * np.eye(3))
        np.testing.assert_allclose(hp.m_t, [0.5] * 3)
        assert hp.d == 3

    def test_nu_bound(self):
        with pytest.raises(ConfigError):
            build_hyperparameters(ScalarPriorSpec(d=3, nu=5, kappa_t=1, kappa_s=1))

    @pytest.mark.parametrize("alpha", [1.0, -1.0, 1.5])
    def test_alpha_bound(self, alpha):
        with pytest.raises(ConfigError):
            ScalarPriorSpec(d=2, nu=5, kappa_t=1, kappa_s=1, alpha=alpha)

    def test_roundtrip(self):
        hp = build_hyperparameters(ScalarPriorSpec(d=2, nu=6, kappa_t=1, kappa_s=2, alpha=-0.4, m_s=1.0))
        back = ClassHyperparameters.from_dict(hp.to_dict())
        np.testing.assert_array_equal(back.F, hp.F)
        np.testing.assert_array_equal(back.m_s, hp.m_s)


class TestDensities:
    def test_wishart_matches_scipy(self):
        rng = np.random.default_rng(4)
        M = random_spd(rng, 3)
        L = random_spd(rng, 3)
        assert wishart_log_density(L, M, 7.5) == pytest.approx(stats.wishart(df=7.5, scale=M).logpdf(L), rel=1e-12)

    def test_joint_prior_factorizes_without_coupling(self):
        rng = np.random.default_rng(5)
        M_t, M_s = random_spd(rng, 2), random_spd(rng, 2)
        hp = ClassHyperparameters(nu=5, kappa_t=1, kappa_s=1, m_t=0, m_s=0, M_t=M_t, M_s=M_s, M_ts=np.zeros((2, 2)))
        L_t, L_s = random_spd(rng, 2), random_spd(rng, 2)
        expected = stats.wishart(df=5, scale=M_t).logpdf(L_t) + stats.wishart(df=5, scale=M_s).logpdf(L_s)
        assert joint_prior_log_density(L_t, L_s, hp) == pytest.approx(expected, rel=1e-12)

    def test_joint_prior_normalized_scalar(self):
        hp = build_hyperparameters(ScalarPriorSpec(d=1, nu=4, kappa_t=1, kappa_s=1, alpha=0.6))
        # independent oracle: scipy 0F1 in place of the zonal series
        C, F = hp.C.matrix[0, 0], hp.F[0, 0]
        prec_t = 1 / hp.M_t.matrix[0, 0] + F * F * C
        log_k = -(4 * math.log(2) + 2 * sp.gammaln(2.0) + 2.0 * hp.M.logdet)

        def density(ls, lt):
            # (nu - d - 1) / 2 = 1, so the determinant factor is lt * ls
            return lt * ls * math.exp(log_k - 0.5 * prec_t * lt - 0.5 * ls / C) * sp.hyp0f1(2.0, F * F * lt * ls / 4)

        total, _ = integrate.dblquad(density, 0, 80, 0, 80)
        assert total == pytest.approx(1.0, abs=1e-6)
        lt, ls = 2.3, 3.1
        assert math.exp(joint_prior_log_density([[lt]], [[ls]], hp)) == pytest.approx(density(ls, lt), rel=1e-12)


class TestSamplers:
    @pytest.mark.parametrize("d", [2, 5])
    def test_wishart_mean(self, d):
        rng = np.random.default_rng(d)
        M = random_spd(rng, d, 1.0)
        nu = d + 3.0
        draws = np.array([sample_wishart(M, nu, rng).matrix for _ in range(10_000)])
        np.testing.assert_allclose(draws.mean(axis=0), nu * M, rtol=0.05, atol=0.05 * np.abs(nu * M).max())

    def test_wishart_deterministic(self):
        a = sample_wishart(np.eye(3), 6, np.random.default_rng(7)).matrix
        b = sample_wishart(np.eye(3), 6, np.random.default_rng(7)).matrix
        np.testing.assert_array_equal(a, b)

    def test_joint_marginals(self):
        hp = build_hyperparameters(ScalarPriorSpec(d=2, nu=6, kappa_t=1, kappa_s=1, k_t=2.0, k_s=0.5, alpha=0.8))
        rng = np.random.default_rng(8)
        pairs = [sample_joint_precisions(hp, rng) for _ in range(5000)]
        mean_t = np.mean([p[0].matrix for p in pairs], axis=0)
        mean_s = np.mean([p[1].matrix for p in pairs], axis=0)
        np.testing.assert_allclose(mean_t, 6 * 2.0 * np.eye(2), atol=0.4)
        np.testing.assert_allclose(mean_s, 6 * 0.5 * np.eye(2), atol=0.1)
        # positive coupling shows up as positive correlation of the diagonals
        corr = np.corrcoef([p[0].matrix[0, 0] for p in pairs], [p[1].matrix[0, 0] for p in pairs])[0, 1]
        assert corr > 0.3

    def test_class_data_covariance(self):
        rng = np.random.default_rng(9)
        L = random_spd(rng, 3, 1.0)
        X = sample_class_data(np.array([1.0, -1.0, 0.0]), L, 40_000, rng)
        assert X.shape == (40_000, 3)
        np.testing.assert_allclose(np.cov(X.T), np.linalg.inv(L), atol=0.03 * np.abs(np.linalg.inv(L)).max())
        np.testing.assert_allclose(X.mean(axis=0), [1.0, -1.0, 0.0], atol=0.03)

    def test_empty_sample(self):
        assert sample_class_data(np.zeros(2), np.eye(2), 0, np.random.default_rng(0)).shape == (0, 2)

    def test_mean_given_precision(self):
        rng = np.random.default_rng(10)
        L = np.diag([1.0, 4.0])
        mus = np.array([sample_mean_given_precision([1.0, 2.0], 5.0, L, rng) for _ in range(20_000)])
        np.testing.assert_allclose(mus.var(axis=0), [1 / 5.0, 1 / 20.0], rtol=0.05)
