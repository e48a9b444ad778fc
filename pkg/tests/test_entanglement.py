from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import partial_transpose_xi, rotation
from omsim import (NumericalError, PhysicalParams, UnphysicalStateError, build_array, build_filter,
                   extract_pair, log_negativity, pair_negativity, physicality_check, solve_lyapunov)
from omsim.entanglement import symplectic_eigenvalues
from omsim.verification import tmsv


def thermal_tmsv(r: float, n1: float, n2: float) -> np.ndarray:
    """Squeezed thermal state: S (diag(n1, n1, n2, n2) + 1/2) S^T with a two-mode squeezer S."""
    c, s = math.cosh(r), math.sinh(r)
    Z = np.diag([1.0, -1.0])
    S = np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])
    return S @ np.diag([n1 + 0.5, n1 + 0.5, n2 + 0.5, n2 + 0.5]) @ S.T


def mp_xi(V4) -> mp.mpf:
    """Block-determinant formula at 50 digits."""
    with mp.workdps(50):
        M = mp.matrix([[mp.mpf(float(x)) for x in row] for row in V4])
        det2 = lambda a, b, c, d: a * d - b * c  # noqa: E731
        th = det2(M[0, 0], M[0, 1], M[1, 0], M[1, 1])
        et = det2(M[2, 2], M[2, 3], M[3, 2], M[3, 3])
        be = det2(M[0, 2], M[0, 3], M[1, 2], M[1, 3])
        sig = th + et - 2 * be
        return mp.sqrt((sig - mp.sqrt(sig**2 - 4 * mp.det(M))) / 2)


class TestLogNegativity:
    def test_vacuum(self):
        rep = log_negativity(0.5 * np.eye(4))
        assert rep.sigma == pytest.approx(0.5) and rep.xi == pytest.approx(0.5)
        assert rep.e_n == 0.0 and not rep.simon_entangled

    def test_tmsv_half(self):
        rep = log_negativity(tmsv(0.5))
        assert rep.xi == pytest.approx(math.exp(-1.0) / 2, rel=1e-12)
        assert rep.e_n == pytest.approx(1.0, abs=1e-12)
        assert rep.simon_entangled

    @given(st.floats(0.0, 3.0))
    def test_tmsv_family(self, r):
        V = tmsv(r)
        assert np.linalg.det(V) == pytest.approx(1 / 16, abs=1e-12 * max(1.0, np.max(V) ** 2))
        assert log_negativity(V).e_n == pytest.approx(2 * r, abs=1e-10)

    @settings(max_examples=200)
    @given(st.floats(0, 2.5), st.floats(0, 5), st.floats(0, 5))
    def test_against_partial_transpose(self, r, n1, n2):
        V = thermal_tmsv(r, n1, n2)
        rep = log_negativity(V)
        assert rep.xi == pytest.approx(partial_transpose_xi(V), rel=1e-9)
        assert rep.xi == pytest.approx(float(mp_xi(V)), rel=1e-9)

    @settings(max_examples=200)
    @given(st.floats(0, 2.5), st.floats(0, 5), st.floats(0, 5), st.floats(0, 2 * math.pi),
           st.floats(0, 2 * math.pi))
    def test_local_rotation_invariance(self, r, n1, n2, t1, t2):
        V = thermal_tmsv(r, n1, n2)
        R = np.block([[rotation(t1), np.zeros((2, 2))], [np.zeros((2, 2)), rotation(t2)]])
        a, b = log_negativity(V), log_negativity(R @ V @ R.T)
        assert b.xi == pytest.approx(a.xi, abs=1e-10)
        assert b.e_n == pytest.approx(a.e_n, abs=1e-10)

    @settings(max_examples=300)
    @given(st.floats(0, 2.5), st.floats(0, 5), st.floats(0, 5))
    def test_three_way_equivalence(self, r, n1, n2):
        rep = log_negativity(thermal_tmsv(r, n1, n2))
        assert rep.xi > 0
        if abs(2 * rep.xi - 1) > 1e-9:
            assert (rep.e_n > 0) == (rep.xi < 0.5) == rep.simon_entangled

    def test_complex_spectrum_rejected(self):
        V = np.diag([1.0, 1.0, 1.0, 1.0])
        V[0, 2] = V[2, 0] = 0.9
        V[1, 3] = V[3, 1] = 0.9
        V[0, 3] = V[3, 0] = 0.9
        with pytest.raises(UnphysicalStateError):
            log_negativity(V)

    def test_nonpositive_rejected(self):
        with pytest.raises(UnphysicalStateError):
            log_negativity(-np.eye(4))

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            log_negativity(np.eye(6))

    def test_inconsistent_criteria_raise(self, monkeypatch):
        import omsim.entanglement as ent

        monkeypatch.setattr(ent, "_xi", lambda *_: 0.4)
        with pytest.raises(NumericalError):
            log_negativity(2.0 * np.eye(4))

    def test_guard_band_tolerates_boundary(self, monkeypatch):
        import omsim.entanglement as ent

        monkeypatch.setattr(ent, "_xi", lambda *_: 0.5 - 1e-13)
        assert log_negativity(0.5 * np.eye(4)).e_n > 0


class TestExtractPair:
    def test_two_mode_identity(self):
        V = thermal_tmsv(0.3, 1.0, 2.0)
        np.testing.assert_array_equal(extract_pair(V, 0, 1), V)

    def test_uncoupled_modes(self):
        V = np.diag([1.0, 2.0, 3.0, 4.0])
        assert not np.any(extract_pair(V, 0, 1)[:2, 2:])

    def test_errors(self):
        V = np.eye(6)
        with pytest.raises(IndexError):
            extract_pair(V, 1, 1)
        with pytest.raises(IndexError):
            extract_pair(V, 0, 3)

    def test_permutation_consistency(self):
        p = PhysicalParams(cavity_count=2, hopping=0.7 * PhysicalParams().mech_freq,
                           array_detuning=0.6 * PhysicalParams().mech_freq)
        m = build_array(p)
        V = solve_lyapunov(m).V
        for i, j in [(0, 1), (0, 2), (1, 2)]:
            # reorder modes so (i, j) come first, then read the leading block
            rest = [k for k in range(3) if k not in (i, j)]
            order = [2 * q + s for q in (i, j, *rest) for s in (0, 1)]
            P = np.eye(6)[order]
            np.testing.assert_array_equal(extract_pair(V, i, j), (P @ V @ P.T)[:4, :4])

    def test_array_optimum_value(self):
        w = PhysicalParams().mech_freq
        p = PhysicalParams(cavity_count=2, hopping=0.7 * w, array_detuning=0.6 * w)
        e = pair_negativity(solve_lyapunov(build_array(p)).V, 0, 1).e_n
        assert e == pytest.approx(0.045, abs=0.015)


class TestPhysicality:
    @pytest.mark.parametrize("modes", [1, 2, 5])
    def test_vacuum(self, modes):
        ok, nu = physicality_check(0.5 * np.eye(2 * modes))
        assert ok and nu == pytest.approx(0.5, abs=1e-15)

    def test_below_vacuum(self):
        assert not physicality_check(0.25 * np.eye(4))[0]

    def test_thermal_spectrum(self):
        V = thermal_tmsv(0.7, 2.0, 3.0)
        np.testing.assert_allclose(symplectic_eigenvalues(V), [2.5, 3.5], rtol=1e-10)

    def test_detuning_sweep_outputs_physical(self, params):
        for x in np.linspace(0.0, 2.0, 201):
            m = build_filter(params, x * params.mech_freq)
            try:
                V = solve_lyapunov(m).V
            except Exception:
                continue
            assert physicality_check(V)[0]


def test_negativity_non_increasing_in_temperature(params):
    grid = np.linspace(0.1, 20.0, 201)
    values = []
    for T in grid:
        p = params.with_(temperature=float(T))
        values.append(pair_negativity(solve_lyapunov(build_filter(p, 0.5 * p.mech_freq)).V, 0, 1).e_n)
    assert np.all(np.diff(values) <= 1e-12)
