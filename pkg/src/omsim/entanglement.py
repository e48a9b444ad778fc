"""Bipartite Gaussian entanglement from a steady-state covariance matrix.

All formulas assume the normalization in which the vacuum has covariance
``I/2`` (``[q, p] = i``, symmetrized second moments).  In that convention a
two-mode Gaussian state is entangled iff the smallest symplectic eigenvalue
of the partial transpose, ``xi``, is below 1/2, and the logarithmic
negativity is ``max(0, -ln(2 xi))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import NumericalError, UnphysicalStateError

#: Relative tolerance (times Sigma^2) on the symplectic discriminant.
EPS_NUM = 1e-12

#: Symplectic eigenvalues may undershoot 1/2 by this much and still count as physical.
PHYSICAL_TOL = 1e-9


@dataclass(frozen=True)
class EntanglementReport:
    pair: tuple[int, int]
    sigma: float
    xi: float
    e_n: float
    simon_entangled: bool
    block_dets: tuple[float, float, float]

    @property
    def entangled(self) -> bool:
        return self.e_n > 0


def _as_cov(V) -> NDArray[np.float64]:
    return np.asarray(getattr(V, "V", V), dtype=float)


def extract_pair(V: ArrayLike, i: int, j: int) -> NDArray[np.float64]:
    """4x4 covariance of modes ``i`` and ``j`` (0-based; mode 0 is the mirror)."""
    V = _as_cov(V)
    n_modes = V.shape[0] // 2
    if i == j:
        raise IndexError("a mode pair needs two distinct modes")
    for k in (i, j):
        if not 0 <= k < n_modes:
            raise IndexError(f"mode index {k} out of range for {n_modes} modes")
    idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
    return V[np.ix_(idx, idx)]


def _det2(a, b, c, d):
    return a * d - b * c


def _exact_invariants(V4: NDArray[np.float64]):
    """Block determinants, Sigma and det V4 in exact rational arithmetic.

    The float entries are converted exactly, so ``Sigma^2 - 4 det V4`` carries
    no cancellation error even when the two symplectic eigenvalues of the
    partial transpose nearly coincide.
    """
    m = [[Fraction(x) for x in row] for row in V4.tolist()]
    det_theta = _det2(m[0][0], m[0][1], m[1][0], m[1][1])
    det_eta = _det2(m[2][2], m[2][3], m[3][2], m[3][3])
    det_beta = _det2(m[0][2], m[0][3], m[1][2], m[1][3])
    # Laplace expansion along the first two rows
    det_v = Fraction(0)
    for cols in combinations(range(4), 2):
        rest = tuple(c for c in range(4) if c not in cols)
        sign = -1 if (sum(cols) + 1) % 2 else 1
        top = _det2(m[0][cols[0]], m[0][cols[1]], m[1][cols[0]], m[1][cols[1]])
        bottom = _det2(m[2][rest[0]], m[2][rest[1]], m[3][rest[0]], m[3][rest[1]])
        det_v += sign * top * bottom
    return det_theta, det_eta, det_beta, det_v


def _xi(sigma: float, det_v: float, disc: float) -> float:
    """Smallest symplectic eigenvalue of the partial transpose."""
    # Sigma - sqrt(disc) rewritten without cancellation for strongly squeezed states.
    return math.sqrt(2.0 * det_v / (sigma + math.sqrt(disc)))


def log_negativity(V4: ArrayLike, pair: tuple[int, int] = (0, 1)) -> EntanglementReport:
    """Logarithmic negativity of a two-mode covariance matrix.

    With ``V4 = [[Theta, beta], [beta^T, eta]]``::

        Sigma = det Theta + det eta - 2 det beta
        xi    = sqrt(Sigma - sqrt(Sigma^2 - 4 det V4)) / sqrt(2)
        E_N   = max(0, -ln(2 xi))

    ``xi`` is evaluated as ``sqrt(2 det V4 / (Sigma + sqrt(Sigma^2 - 4 det V4)))``,
    the same quantity without the subtraction.  The Simon flag is evaluated
    independently as ``4 det V4 < Sigma - 1/4``.  At ``xi = 1/2`` exactly,
    ``E_N = 0``.

    Raises
    ------
    UnphysicalStateError
        If a diagonal block is not positive definite, ``det V4 <= 0``, or the
        discriminant is negative beyond ``EPS_NUM * Sigma^2``.
    NumericalError
        If the negativity and the Simon criterion disagree outside the guard
        band.
    """
    V4 = _as_cov(V4)
    if V4.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {V4.shape}")
    if not np.all(np.isfinite(V4)):
        raise UnphysicalStateError("covariance contains non-finite entries")
    th, et, be, dv = _exact_invariants(V4)
    sigma_q = th + et - 2 * be
    disc_q = sigma_q * sigma_q - 4 * dv
    det_theta, det_eta, det_beta, det_v = float(th), float(et), float(be), float(dv)
    sigma, disc = float(sigma_q), float(disc_q)
    if not (V4[0, 0] > 0 and V4[2, 2] > 0 and th > 0 and et > 0 and dv > 0):
        raise UnphysicalStateError("covariance blocks are not positive definite")
    eps = EPS_NUM * sigma * sigma
    if disc < -eps:
        raise UnphysicalStateError(f"complex symplectic spectrum (discriminant {disc:.3g})")
    xi = _xi(sigma, det_v, max(disc, 0.0))
    e_n = max(0.0, -math.log(2.0 * xi))
    simon_gap = sigma_q - Fraction(1, 4) - 4 * dv
    simon = simon_gap > 0
    in_band = abs(float(simon_gap)) <= eps or abs(2.0 * xi - 1.0) <= 1e-12
    if simon != (e_n > 0) and not in_band:
        raise NumericalError(f"negativity (E_N={e_n:.3g}) and Simon criterion disagree")
    return EntanglementReport(pair=tuple(pair), sigma=sigma, xi=xi, e_n=e_n,
                              simon_entangled=simon, block_dets=(det_theta, det_eta, det_beta))


def pair_negativity(V: ArrayLike, i: int, j: int) -> EntanglementReport:
    """Convenience wrapper: extract modes ``i, j`` and compute the negativity."""
    return log_negativity(extract_pair(V, i, j), pair=(i, j))


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Block-diagonal ``Omega`` for the ordering ``(q1, p1, q2, p2, ...)``."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(V: ArrayLike) -> NDArray[np.float64]:
    """Moduli of the eigenvalues of ``i Omega V``, each listed once, ascending."""
    V = _as_cov(V)
    n_modes = V.shape[0] // 2
    eig = np.abs(np.linalg.eigvals(1j * symplectic_form(n_modes) @ V))
    return np.sort(eig)[::2]


def physicality_check(V: ArrayLike, tol: float = PHYSICAL_TOL) -> tuple[bool, float]:
    """Uncertainty-principle check; returns ``(physical, min symplectic eigenvalue)``."""
    nu_min = float(symplectic_eigenvalues(V)[0])
    return nu_min >= 0.5 - tol, nu_min
