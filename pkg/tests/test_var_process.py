import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import solve_discrete_lyapunov

from crosscodiff import BiTrajectory, CovMatrix2, GaussianNoise, SubGaussianNoise, Theta, VarModel
from crosscodiff.errors import ModelDomainError
from crosscodiff.stable_noise import sample_noise
from crosscodiff.theory import codiff_gaussian
from crosscodiff.var_process import (
    check_stationarity,
    filter_noise,
    ma_weights,
    simulate,
    spectral_radius,
    theta_power,
)

from conftest import random_stationary_theta


def recursion_oracle(theta, z1, z2):
    """Plain loop over X(t) = Theta X(t-1) + Z(t) from a zero state."""
    m = theta.matrix
    x = np.zeros(2)
    out = np.empty((len(z1), 2))
    for t in range(len(z1)):
        x = m @ x + np.array([z1[t], z2[t]])
        out[t] = x
    return out


def ma_oracle(theta, z1, z2, order):
    powers = [np.linalg.matrix_power(theta.matrix, j) for j in range(order + 1)]
    z = np.column_stack([z1, z2])
    out = np.zeros_like(z)
    for t in range(len(z1)):
        for j in range(min(order, t) + 1):
            out[t] += powers[j] @ z[t - j]
    return out


entries = st.floats(-1.0, 1.0)


class TestPowers:
    def test_zero_power_identity(self):
        assert np.array_equal(theta_power(Theta(0.3, -2, 5, 0.1), 0), np.eye(2))

    def test_diagonal_cube(self):
        np.testing.assert_allclose(theta_power(Theta.diagonal(0.6, 0.3), 3), [[0.216, 0], [0, 0.027]], atol=1e-15)

    def test_hand_square(self):
        np.testing.assert_allclose(theta_power(Theta(0.6, 0.1, 0.4, 0.3), 2), [[0.40, 0.09], [0.36, 0.13]], atol=1e-15)

    @given(entries, entries, entries, entries, st.integers(0, 8), st.integers(0, 8))
    def test_power_composition(self, a1, a2, a3, a4, j, k):
        th = Theta(a1, a2, a3, a4)
        lhs = theta_power(th, j + k)
        rhs = theta_power(th, j) @ theta_power(th, k)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))

    def test_geometric_decay(self):
        gen = np.random.default_rng(3)
        for _ in range(30):
            th = random_stationary_theta(gen, rho_max=0.95)
            rho = spectral_radius(th)
            delta = 0.05
            bound = [np.max(np.abs(theta_power(th, j))) / (rho + delta) ** j for j in range(51)]
            # a constant C exists; with a 2x2 Jordan block it stays moderate
            assert max(bound) < 1e3


class TestStationarity:
    def test_traj_gauss_full(self):
        rep = check_stationarity(Theta(0.6, 0.2, 0.1, 0.9))
        assert rep.stationary
        assert rep.spectral_radius == pytest.approx(0.75 + math.sqrt(0.0425), abs=1e-14)
        assert rep.spectral_radius == pytest.approx(0.957, abs=1e-3)

    def test_unit_root(self):
        rep = check_stationarity(Theta(1.0, 0, 0, 0.5))
        assert not rep.stationary
        assert rep.spectral_radius == 1.0

    def test_rotation(self):
        rep = check_stationarity(Theta(0, -0.9, 0.9, 0))
        assert rep.stationary
        assert rep.spectral_radius == pytest.approx(0.9, abs=1e-15)

    @given(entries, entries, entries, entries)
    def test_radius_matches_eigvals(self, a1, a2, a3, a4):
        th = Theta(a1, a2, a3, a4)
        ref = np.max(np.abs(np.linalg.eigvals(th.matrix)))
        assert spectral_radius(th) == pytest.approx(ref, abs=1e-7)

    def test_margin(self):
        assert not check_stationarity(Theta.diagonal(1 - 1e-10, 0)).stationary
        assert check_stationarity(Theta.diagonal(1 - 1e-8, 0)).stationary

    def test_model_rejects_nonstationary(self):
        with pytest.raises(ModelDomainError):
            VarModel(Theta(1.0, 0, 0, 0.5), GaussianNoise(CovMatrix2(1, 0, 1)))


class TestMaWeights:
    def test_adaptive_half(self):
        w = ma_weights(Theta.diagonal(0.5, 0.5), tail_tol=1e-6)
        assert w.order == int(math.ceil(math.log(1e-6) / math.log(0.5))) == 20
        assert not w.truncated
        assert np.array_equal(w.powers[0], np.eye(2))
        assert np.max(np.abs(w.powers[-1])) < 1e-6 <= np.max(np.abs(w.powers[-2]))

    def test_zero_matrix(self):
        w = ma_weights(Theta(0, 0, 0, 0), tail_tol=1e-12)
        assert w.order == 1
        assert np.array_equal(w.powers[0], np.eye(2))
        assert np.array_equal(w.powers[1], np.zeros((2, 2)))

    def test_fixed_fifty(self):
        w = ma_weights(Theta(0.6, 0.1, 0.4, 0.3), tail_tol=None)
        assert w.order == 50 and len(w.powers) == 51

    def test_entry_names(self):
        th = Theta(0.6, 0.1, 0.4, 0.3)
        w = ma_weights(th, tail_tol=None)
        p3 = theta_power(th, 3)
        assert w.entry("a1")[3] == p3[0, 0] and w.entry("a2")[3] == p3[0, 1]
        assert w.entry("a3")[3] == p3[1, 0] and w.entry("a4")[3] == p3[1, 1]

    def test_cap_warns(self):
        with pytest.warns(RuntimeWarning):
            w = ma_weights(Theta.diagonal(0.99, 0.0), tail_tol=1e-12, j_max_cap=100)
        assert w.truncated and w.order == 100


class TestSimulate:
    gauss = GaussianNoise(CovMatrix2(1, 0, 1))

    def test_white_noise_case(self, rng):
        traj = simulate(VarModel(Theta(0, 0, 0, 0), self.gauss), 100_000, rng=rng)
        x = traj.x1 - traj.x1.mean()
        assert abs(np.mean(x[:-1] * x[1:])) < 0.02

    def test_recursion_matches_loop(self, rng):
        gen = np.random.default_rng(11)
        for _ in range(10):
            th = random_stationary_theta(gen, rho_max=0.95)
            z1, z2 = rng.standard_normal((2, 500))
            np.testing.assert_allclose(filter_noise(th, z1, z2).as_array(), recursion_oracle(th, z1, z2), atol=1e-11)

    def test_recursion_matches_ma_j50(self, rng):
        # 0.7^50 ~ 2e-8 so the neglected MA tail is far below 1e-6
        gen = np.random.default_rng(12)
        for _ in range(10):
            th = random_stationary_theta(gen, rho_max=0.7)
            z1, z2 = rng.standard_normal((2, 400))
            rec = filter_noise(th, z1, z2).as_array()
            ma = ma_oracle(th, z1, z2, 50)
            assert np.max(np.abs(rec[100:] - ma[100:])) < 1e-6

    def test_recursion_matches_ma_adaptive(self, rng):
        th = Theta(0, -0.9, 0.9, 0)
        order = ma_weights(th, tail_tol=1e-9).order
        z1, z2 = rng.standard_normal((2, 600))
        rec = filter_noise(th, z1, z2).as_array()
        ma = ma_oracle(th, z1, z2, order)
        assert np.max(np.abs(rec[order:] - ma[order:])) < 1e-6

    def test_length_and_noise_alignment(self, rng):
        model = VarModel(Theta(0.6, 0.1, 0.4, 0.3), self.gauss)
        traj, noise = simulate(model, 50, burn_in=10, rng=rng, return_noise=True)
        assert len(traj) == len(noise) == 50
        m = model.theta.matrix
        x = traj.as_array()
        np.testing.assert_allclose(x[1:] - x[:-1] @ m.T, noise.as_array()[1:], atol=1e-13)

    def test_seed_determinism(self):
        model = VarModel(Theta(0.6, 0.1, 0.4, 0.3), self.gauss)
        a = simulate(model, 1000, rng=np.random.default_rng(7))
        b = simulate(model, 1000, rng=np.random.default_rng(7))
        assert a == b

    def test_nonstationary_rejected_and_short(self, rng):
        with pytest.raises(ValueError):
            simulate(VarModel(Theta.diagonal(0.5, 0.5), self.gauss), 1, rng=rng)

    def test_traj_gauss_full_cross_covariance_lag0(self):
        cov = CovMatrix2(0.3, 0.2, 0.3)
        th = Theta(0.6, 0.2, 0.1, 0.9)
        traj = simulate(VarModel(th, GaussianNoise(cov)), 100_000, rng=np.random.default_rng(101))
        emp = np.mean((traj.x1 - traj.x1.mean()) * (traj.x2 - traj.x2.mean()))
        target = codiff_gaussian(th, cov, 0, j_trunc=50)
        assert abs(emp - target) < 0.05 * abs(target)

    def test_gaussian_cross_covariance_lags(self):
        cov = CovMatrix2(0.5, 0.3, 0.5)
        th = Theta(0.6, 0.1, 0.4, 0.3)
        traj = simulate(VarModel(th, GaussianNoise(cov)), 100_000, rng=np.random.default_rng(102))
        x1 = traj.x1 - traj.x1.mean()
        x2 = traj.x2 - traj.x2.mean()
        n = len(traj)
        for h in range(-5, 6):
            target = codiff_gaussian(th, cov, h, j_trunc=200)
            if abs(target) <= 0.05:
                continue
            emp = np.mean(x1[: n - h] * x2[h:]) if h >= 0 else np.mean(x1[-h:] * x2[: n + h])
            assert abs(emp - target) < 0.05 * abs(target), h

    def test_subgaussian_heavy_tails(self):
        th = Theta(0.6, 0.2, 0.1, 0.7)
        cov = CovMatrix2(0.4, 0.3, 0.3)
        gamma = solve_discrete_lyapunov(th.matrix, cov.as_matrix())
        sd = np.sqrt(np.diag(gamma))
        heavy = simulate(VarModel(th, SubGaussianNoise(1.7, cov)), 10_000, rng=np.random.default_rng(5))
        light = simulate(VarModel(th, GaussianNoise(cov)), 10_000, rng=np.random.default_rng(5))
        excess = lambda t: max(np.max(np.abs(t.x1)) / sd[0], np.max(np.abs(t.x2)) / sd[1])
        assert excess(heavy) > 6.0
        assert excess(light) < 6.0


class TestBiTrajectory:
    def test_validation(self):
        with pytest.raises(ValueError):
            BiTrajectory([1.0, 2.0], [1.0])
        with pytest.raises(ValueError):
            BiTrajectory([1.0], [1.0])
        with pytest.raises(ValueError):
            BiTrajectory([1.0, np.inf], [1.0, 2.0])

    def test_noise_sampler_shapes(self, rng):
        z1, z2 = sample_noise(SubGaussianNoise(1.5, CovMatrix2(1, 0, 1)), rng, 10)
        assert z1.shape == z2.shape == (10,)
