from __future__ import annotations

import math

import numpy as np
import pytest

from omsim import PhysicalParams


@pytest.fixture
def params() -> PhysicalParams:
    return PhysicalParams()


@pytest.fixture
def omega_m(params) -> float:
    return params.mech_freq


def partial_transpose_xi(V4: np.ndarray) -> float:
    """Smallest symplectic eigenvalue of the partial transpose, by diagonalization."""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    Vt = flip @ V4 @ flip
    omega = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    return float(np.min(np.abs(np.linalg.eigvals(1j * omega @ Vt))))


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def pytest_terminal_summary(terminalreporter):
    from tests_support import ACCEPTANCE

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, message = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {message}")
