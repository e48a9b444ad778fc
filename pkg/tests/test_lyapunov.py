from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omsim import (ConfigError, ConvergenceError, NumericalError, UnstableModelError,
                   build_filter, integral_oracle, solve_lyapunov, stochastic_oracle)
from omsim.lyapunov import RESIDUAL_TOL, lyapunov_residual
from omsim.verification import random_stable_matrix


def brute_force_quadrature(A, D, t_max, n=20001):
    """Trapezoid rule for int exp(At) D exp(At)^T dt using an eigen-decomposition of A."""
    lam, S = np.linalg.eig(A)
    Si = np.linalg.inv(S)
    t = np.linspace(0, t_max, n)
    E = np.einsum("ij,tj,jk->tik", S, np.exp(np.outer(t, lam)), Si).real
    integrand = E @ D @ np.transpose(E, (0, 2, 1))
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    return trapezoid(integrand, t, axis=0)


class TestSolve:
    @given(st.floats(1e-3, 1e8), st.lists(st.floats(0, 1e6, allow_subnormal=False), min_size=1, max_size=11))
    def test_scalar_damping(self, a, diag):
        n = len(diag)
        D = np.diag(diag)
        V = solve_lyapunov(-a * np.eye(n), D).V
        np.testing.assert_allclose(V, D / (2 * a), rtol=1e-12, atol=0)

    def test_decoupled(self):
        V = solve_lyapunov(np.diag([-1.0, -2.0]), np.diag([2.0, 4.0])).V
        np.testing.assert_allclose(V, np.eye(2), rtol=1e-14)

    def test_unstable_raises(self):
        with pytest.raises(UnstableModelError):
            solve_lyapunov(np.diag([-1.0, 0.5]), np.eye(2))

    def test_marginal_raises(self):
        with pytest.raises(UnstableModelError):
            solve_lyapunov(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.eye(2))

    def test_singular_system_reported(self, monkeypatch):
        def broken(*_):
            raise np.linalg.LinAlgError("singular")

        monkeypatch.setattr(np.linalg, "solve", broken)
        with pytest.raises(NumericalError):
            solve_lyapunov(-np.eye(2), np.eye(2))

    def test_bare_matrix_needs_diffusion(self):
        with pytest.raises(TypeError):
            solve_lyapunov(-np.eye(2))

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 11))
    def test_residual_and_symmetry(self, seed, modes):
        rng = np.random.default_rng(seed)
        A = random_stable_matrix(rng, 2 * modes)
        D = np.diag(np.abs(rng.standard_normal(2 * modes)))
        cov = solve_lyapunov(A, D)
        assert cov.residual <= RESIDUAL_TOL
        assert lyapunov_residual(A, cov.V, D) <= RESIDUAL_TOL
        assert np.max(np.abs(cov.V - cov.V.T)) <= 1e-12 * max(1.0, np.max(np.abs(cov.V)))
        assert cov.source == "lyapunov"

    def test_against_brute_force_quadrature(self):
        rng = np.random.default_rng(3)
        A = random_stable_matrix(rng)
        D = np.diag(np.abs(rng.standard_normal(4)))
        rate = -np.max(np.linalg.eigvals(A).real)
        Q = brute_force_quadrature(A, D, 40 / rate, 200001)
        np.testing.assert_allclose(solve_lyapunov(A, D).V, Q, atol=1e-6 * np.max(np.abs(Q)))


class TestIntegralOracle:
    def test_scalar_damping(self):
        D = np.diag([1.0, 2.0, 3.0])
        V = integral_oracle(-2.0 * np.eye(3), D, rtol=1e-9).V
        np.testing.assert_allclose(V, D / 4, rtol=1e-8)

    def test_no_noise(self):
        cov = integral_oracle(-np.eye(2), np.zeros((2, 2)))
        assert np.array_equal(cov.V, np.zeros((2, 2)))

    def test_reference_filter_model(self, params):
        m = build_filter(params, params.mech_freq)
        V = solve_lyapunov(m).V
        W = integral_oracle(m).V
        assert np.max(np.abs(W - V)) / np.max(np.abs(V)) < 1e-6

    def test_horizon_exhausted(self):
        with pytest.raises(ConvergenceError) as info:
            integral_oracle(-np.eye(2), np.eye(2), horizon=1.0)
        assert info.value.residual is not None and info.value.residual > 0

    def test_unstable_raises(self):
        with pytest.raises(UnstableModelError):
            integral_oracle(np.eye(2), np.eye(2))

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_models(self, seed):
        rng = np.random.default_rng(seed)
        A = random_stable_matrix(rng)
        D = np.diag(np.abs(rng.standard_normal(4)))
        V, W = solve_lyapunov(A, D).V, integral_oracle(A, D, rtol=1e-8).V
        assert np.max(np.abs(W - V)) <= 10 * 1e-8 * np.max(np.abs(V))


class TestStochasticOracle:
    def test_no_noise_is_exactly_zero(self):
        cov = stochastic_oracle(-np.eye(2), np.zeros((2, 2)), ensemble_size=50)
        assert np.array_equal(cov.V, np.zeros((2, 2)))

    def test_ornstein_uhlenbeck(self):
        a = 3.0
        D = np.diag([1.0, 4.0])
        cov = stochastic_oracle(-a * np.eye(2), D, seed=11, ensemble_size=2000, dt=0.002,
                                horizon=20.0)
        exact = D / (2 * a)
        for i in range(2):
            assert abs(cov.V[i, i] - exact[i, i]) <= 3 * cov.stderr[i, i]
        assert abs(cov.V[0, 1]) <= 3 * cov.stderr[0, 1]

    def test_independent_of_jobs(self):
        A = np.array([[-1.0, 2.0], [-2.0, -1.0]])
        D = np.eye(2)
        kw = dict(seed=5, ensemble_size=4500, dt=0.01, horizon=3.0)
        a = stochastic_oracle(A, D, jobs=1, **kw)
        b = stochastic_oracle(A, D, jobs=3, **kw)
        assert np.array_equal(a.V, b.V) and np.array_equal(a.stderr, b.stderr)

    def test_seed_changes_result(self):
        kw = dict(ensemble_size=200, dt=0.01, horizon=2.0)
        a = stochastic_oracle(-np.eye(2), np.eye(2), seed=1, **kw)
        b = stochastic_oracle(-np.eye(2), np.eye(2), seed=2, **kw)
        assert not np.array_equal(a.V, b.V)

    def test_step_too_large_rejected(self):
        with pytest.raises(ConfigError):
            stochastic_oracle(-np.eye(2), np.eye(2), dt=0.5)

    def test_nonfinite_trajectory(self):
        # second moments overflow; reported instead of returned
        with pytest.raises(NumericalError):
            stochastic_oracle(-np.eye(2), np.diag([1e307, 1e307]), ensemble_size=50, dt=0.01,
                              horizon=1.0)

    def test_extrapolation_reduces_bias(self):
        A = np.array([[-1.0, 5.0], [-5.0, -1.0]])
        D = np.eye(2)
        exact = solve_lyapunov(A, D).V
        kw = dict(seed=2, ensemble_size=2000, dt=0.015, horizon=12.0)
        plain = stochastic_oracle(A, D, extrapolate=False, **kw).V
        rich = stochastic_oracle(A, D, extrapolate=True, **kw).V
        assert np.abs(rich - exact)[0, 0] < np.abs(plain - exact)[0, 0]
