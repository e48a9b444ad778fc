"""Steady-state covariance of a stable linear Gaussian system.

The production path solves ``A V + V A^T = -D`` as a dense linear system in
vectorized form.  Two oracles reach the same matrix by unrelated routes:
time integration of ``dV/dt = A V + V A^T + D`` and Euler-Maruyama
simulation of the underlying linear SDE.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import ConfigError, ConvergenceError, NumericalError, UnstableModelError
from .model import LinearModel
from .stability import spectral_stable

#: Acceptance bound on the relative Lyapunov residual.
RESIDUAL_TOL = 1e-10

#: Trajectories sharing one random stream in the stochastic oracle.  The
#: partition depends only on the trajectory index, never on worker count.
BLOCK_SIZE = 2000
#: Trajectories per group for the standard-error estimate.
GROUP_SIZE = 25


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric covariance ``V`` plus provenance.

    ``residual`` is the relative Lyapunov residual (lyapunov source only);
    ``stderr`` holds per-entry standard errors (stochastic source only).
    """

    V: NDArray[np.float64]
    source: str
    residual: float | None = None
    stderr: NDArray[np.float64] | None = None

    @property
    def dim(self) -> int:
        return self.V.shape[0]


def _as_pair(model: LinearModel | ArrayLike, D: ArrayLike | None):
    if isinstance(model, LinearModel):
        return np.asarray(model.A, dtype=float), np.asarray(model.D, dtype=float)
    if D is None:
        raise TypeError("D is required when passing a bare drift matrix")
    A = np.asarray(model, dtype=float)
    D = np.asarray(D, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or D.shape != A.shape:
        raise ValueError(f"A {A.shape} and D {D.shape} must be equal square shapes")
    return A, D


def _require_stable(A: NDArray[np.float64]) -> float:
    report = spectral_stable(A)
    if not report.stable:
        raise UnstableModelError(
            f"drift matrix is not asymptotically stable (max Re eig = {report.max_real_eig:.6g})")
    return report.max_real_eig


def lyapunov_residual(A: ArrayLike, V: ArrayLike, D: ArrayLike) -> float:
    """``||A V + V A^T + D||_F / max(||D||_F, ||A||_F ||V||_F)``."""
    A, V, D = (np.asarray(x, dtype=float) for x in (A, V, D))
    num = np.linalg.norm(A @ V + V @ A.T + D)
    den = max(np.linalg.norm(D), np.linalg.norm(A) * np.linalg.norm(V))
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return float(num / den)


def solve_lyapunov(model: LinearModel | ArrayLike, D: ArrayLike | None = None) -> CovarianceMatrix:
    """Solve ``A V + V A^T = -D`` for a stable drift matrix.

    Uses the row-major vectorization ``(A kron I + I kron A) vec(V) = -vec(D)``
    after rescaling by ``max |A_ij|`` (V is invariant under a common rescaling
    of A and D), followed by symmetrization and one round of iterative
    refinement.

    Raises
    ------
    UnstableModelError
        If ``A`` has an eigenvalue with non-negative real part.
    NumericalError
        If the linear system is singular or the residual bound is missed.
    """
    A, D = _as_pair(model, D)
    _require_stable(A)
    n = A.shape[0]
    scale = float(np.max(np.abs(A)))
    As, Ds = A / scale, D / scale
    eye = np.eye(n)
    op = np.kron(As, eye) + np.kron(eye, As)
    try:
        v = np.linalg.solve(op, -Ds.reshape(-1))
        r = -Ds.reshape(-1) - op @ v
        v = v + np.linalg.solve(op, r)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"vectorized Lyapunov system is singular: {exc}") from exc
    V = v.reshape(n, n)
    V = 0.5 * (V + V.T)
    res = lyapunov_residual(A, V, D)
    if not res <= RESIDUAL_TOL:
        raise NumericalError(f"Lyapunov residual {res:.3g} exceeds {RESIDUAL_TOL:g}")
    return CovarianceMatrix(V=V, source="lyapunov", residual=res)


def _rk4(A, D, V, h):
    def f(X):
        return A @ X + X @ A.T + D

    k1 = f(V)
    k2 = f(V + 0.5 * h * k1)
    k3 = f(V + 0.5 * h * k2)
    k4 = f(V + h * k3)
    return V + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integral_oracle(model: LinearModel | ArrayLike, D: ArrayLike | None = None, *,
                    horizon: float | None = None, rtol: float = 1e-8,
                    max_steps: int = 2_000_000) -> CovarianceMatrix:
    """Integrate ``dV/dt = A V + V A^T + D`` from ``V(0) = 0`` to stationarity.

    The limit equals the quadrature of ``exp(A t) D exp(A t)^T`` over
    ``[0, inf)``.  Classical RK4 with step doubling: each step is compared
    against two half steps, the difference (divided by 15) is the local error
    estimate and the Richardson-extrapolated value (order 5) is kept.  The
    local error per unit time is held below ``0.1 * rtol * |V|`` and the step
    never exceeds ``1 / max|lambda_i + lambda_j|``, keeping the stiffest
    covariance mode well inside the RK4 stability region.

    Time is measured in units of the slowest relaxation time
    ``1/|max Re eig(A)|``; integration stops once
    ``||dV/dt||_F / (|max Re eig| ||V||_F) < rtol``.  ``horizon`` defaults to
    200 relaxation times.
    """
    A, D = _as_pair(model, D)
    rate = -_require_stable(A)
    if horizon is None:
        horizon = 200.0 / rate
    if not np.any(D):
        return CovarianceMatrix(V=np.zeros_like(A), source="integral_oracle")

    # Work in dimensionless time tau = rate * t.
    As, Ds = A / rate, D / rate
    t_end = horizon * rate
    step_tol = 0.1 * rtol
    V = np.zeros_like(A)
    t = 0.0
    eig = np.linalg.eigvals(As)
    h_max = 1.0 / np.max(np.abs(eig[:, None] + eig[None, :]))
    h = min(0.1 * h_max, t_end)
    residual = math.inf
    for _ in range(max_steps):
        deriv = As @ V + V @ As.T + Ds
        v_norm = np.linalg.norm(V)
        if v_norm > 0:
            residual = np.linalg.norm(deriv) / v_norm
            if residual < rtol:
                V = 0.5 * (V + V.T)
                return CovarianceMatrix(V=V, source="integral_oracle", residual=float(residual))
        if t >= t_end:
            break
        h = min(h, t_end - t)
        full = _rk4(As, Ds, V, h)
        half = _rk4(As, Ds, _rk4(As, Ds, V, 0.5 * h), 0.5 * h)
        diff = half - full
        err = np.linalg.norm(diff) / 15.0
        scale = max(np.linalg.norm(half), np.linalg.norm(Ds))
        allowed = step_tol * h * scale
        if not np.all(np.isfinite(half)):
            h *= 0.25
            continue
        if err <= allowed:
            V = half + diff / 15.0
            t += h
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * (allowed / err) ** 0.25))
        h = min(h * factor, h_max)
    raise ConvergenceError(
        f"integral oracle did not reach rtol={rtol:g} within the horizon (last residual "
        f"{residual:.3g})", residual=float(residual))


def _simulate_block(A, noise_scale, n_traj, n_steps, dt, seed, block_index, extrapolate):
    """Second-moment sums per trajectory group for one block of trajectories.

    Returns ``(fine, coarse, counts)`` with shapes ``(groups, n, n)`` and
    ``(groups,)``: window sums of ``mu mu^T`` on the ``dt`` grid and on the
    ``2 dt`` grid driven by the same Brownian path.
    """
    rng = np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed, spawn_key=(block_index,))))
    n = A.shape[0]
    n_groups = -(-n_traj // GROUP_SIZE)
    pad = n_groups * GROUP_SIZE - n_traj
    fine_prop = (np.eye(n) + dt * A).T
    coarse_prop = (np.eye(n) + 2.0 * dt * A).T
    mu = np.zeros((n_traj, n))
    mu_c = np.zeros((n_traj, n))
    fine = np.zeros((n_groups, n, n))
    coarse = np.zeros((n_groups, n, n))
    noise = np.empty((n_traj, n))
    pending = np.zeros((n_traj, n))
    avg_start = n_steps // 2
    padding = np.zeros((pad, n))

    def group_moments(x):
        g = np.concatenate([x, padding]).reshape(n_groups, GROUP_SIZE, n)
        return np.matmul(g.transpose(0, 2, 1), g)

    # overflow is detected below and reported as a step-size problem
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(n_steps):
            rng.standard_normal(out=noise)
            noise *= noise_scale
            mu = mu @ fine_prop + noise
            if extrapolate:
                pending += noise
                if step % 2 == 1:
                    mu_c = mu_c @ coarse_prop + pending
                    pending[:] = 0.0
            if step >= avg_start:
                fine += group_moments(mu)
                if extrapolate and step % 2 == 1:
                    coarse += group_moments(mu_c)
    if not (np.all(np.isfinite(fine)) and np.all(np.isfinite(coarse))):
        raise NumericalError("non-finite trajectory: the time step is too large")
    counts = np.full(n_groups, GROUP_SIZE, dtype=float)
    counts[-1] -= pad
    n_fine = n_steps - avg_start
    n_coarse = sum(1 for s in range(avg_start, n_steps) if s % 2 == 1)
    fine /= n_fine
    coarse = coarse / n_coarse if extrapolate else fine
    return fine, coarse, counts


def stochastic_oracle(model: LinearModel | ArrayLike, D: ArrayLike | None = None, *,
                      seed: int = 0, ensemble_size: int = 10_000, dt: float | None = None,
                      horizon: float | None = None, extrapolate: bool = True,
                      jobs: int = 1) -> CovarianceMatrix:
    """Ensemble estimate of the stationary covariance from the linear SDE.

    Trajectories start at ``mu = 0`` and follow the Euler-Maruyama update
    ``mu <- mu + A mu dt + dW`` with ``Cov(dW) = D dt``; ``D`` is the
    symmetrized correlator strength, so this reproduces ``A V + V A^T = -D``.
    Second moments are averaged over the final half of the horizon and over
    the ensemble.

    Euler-Maruyama biases the stationary covariance by ``O(dt)``.  With
    ``extrapolate`` (default) every trajectory is also stepped at ``2 dt``
    with the summed increments and the two estimates are combined as
    ``2 V(dt) - V(2 dt)``, cancelling the leading term.  ``stderr`` is the
    standard error from means over groups of :data:`GROUP_SIZE` trajectories.

    Defaults: ``horizon = 20 / |max Re eig|``, ``dt = 0.003 / ||A||_2``.
    Trajectories are split into fixed blocks of :data:`BLOCK_SIZE`, each with
    a stream derived from ``(seed, block index)``, so the result does not
    depend on ``jobs``.
    """
    A, D = _as_pair(model, D)
    rate = -_require_stable(A)
    a_norm = float(np.linalg.norm(A, 2))
    if dt is None:
        dt = 0.003 / a_norm
    if not dt * a_norm < 0.1:
        raise ConfigError(f"dt * ||A|| = {dt * a_norm:.3g} must be < 0.1", field="dt")
    if horizon is None:
        horizon = 20.0 / rate
    if ensemble_size < 2:
        raise ConfigError("ensemble_size must be at least 2", field="ensemble_size")
    n = A.shape[0]
    if not np.any(D):
        zero = np.zeros((n, n))
        return CovarianceMatrix(V=zero, source="stochastic_oracle", stderr=zero.copy())

    n_steps = max(4, int(math.ceil(horizon / dt)))
    noise_scale = np.sqrt(np.diag(D) * dt)
    sizes = [min(BLOCK_SIZE, ensemble_size - start) for start in range(0, ensemble_size, BLOCK_SIZE)]
    args = [(A, noise_scale, size, n_steps, dt, seed, i, extrapolate) for i, size in enumerate(sizes)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            blocks = list(pool.map(lambda a: _simulate_block(*a), args))
    else:
        blocks = [_simulate_block(*a) for a in args]
    fine = np.concatenate([b[0] for b in blocks])
    coarse = np.concatenate([b[1] for b in blocks])
    counts = np.concatenate([b[2] for b in blocks])
    sums = 2.0 * fine - coarse if extrapolate else fine
    weights = counts / counts.sum()
    V = np.einsum("g,gij->ij", weights, sums / counts[:, None, None])
    group_means = sums / counts[:, None, None]
    n_groups = len(counts)
    if n_groups > 1:
        var = np.einsum("g,gij->ij", weights**2, (group_means - V) ** 2) * n_groups / (n_groups - 1)
        stderr = np.sqrt(var)
    else:
        stderr = np.full((n, n), np.inf)
    V = 0.5 * (V + V.T)
    return CovarianceMatrix(V=V, source="stochastic_oracle", stderr=0.5 * (stderr + stderr.T))
