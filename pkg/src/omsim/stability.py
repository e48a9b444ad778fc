"""Asymptotic stability of linear drift matrices.

Two independent routes are provided: the spectral test (all eigenvalues in
the open left half-plane) and the Routh-Hurwitz sign conditions on the
characteristic quartic of a two-mode model.  :func:`assess_stability`
runs both and records whether they agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import ConvergenceError
from .model import LinearModel
from .params import PhysicalParams, cavity_mean_field, derive_params, effective_coupling

#: Margins with absolute value below this (in omega_m-normalized units) are
#: treated as undecidable when comparing methods.
EPS_MARGIN = 1e-6

RH_NAMES = ("C0", "C1", "C1C2-C0C3", "(C1C2-C0C3)C3-C1^2C4", "C4")


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    max_real_eig: float
    rh_conditions: dict[str, float] = field(default_factory=dict)
    method_agreement: bool = True
    eigenvalues: tuple[complex, ...] = ()


def char_poly(A: ArrayLike) -> NDArray[np.float64]:
    """Coefficients ``[C0, C1, ..., Cn]`` of ``det(lambda I - A)``, with ``C0 = 1``.

    Uses the Faddeev-LeVerrier recurrence
    ``M_k = A M_{k-1} + c_{k-1} I``, ``c_k = -tr(A M_k) / k``.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    coeffs = np.empty(n + 1)
    coeffs[0] = 1.0
    identity = np.eye(n)
    m = np.zeros((n, n))
    for k in range(1, n + 1):
        m = A @ m + coeffs[k - 1] * identity
        coeffs[k] = -np.trace(A @ m) / k
    return coeffs


def routh_hurwitz_quartic(coeffs: ArrayLike) -> tuple[dict[str, float], bool]:
    """Routh-Hurwitz margins of ``C0 l^4 + C1 l^3 + C2 l^2 + C3 l + C4``.

    Returns the five quantities that must all be positive for every root to
    have negative real part, plus the joint verdict.  Coefficients are
    normalized so that ``C0 = 1`` first.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (5,):
        raise ValueError("expected five coefficients C0..C4")
    if c[0] == 0:
        raise ValueError("leading coefficient must be non-zero")
    c0, c1, c2, c3, c4 = c / c[0]
    h3 = c1 * c2 - c0 * c3
    margins = {
        RH_NAMES[0]: c0,
        RH_NAMES[1]: c1,
        RH_NAMES[2]: h3,
        RH_NAMES[3]: h3 * c3 - c1 * c1 * c4,
        RH_NAMES[4]: c4,
    }
    margins = {k: float(v) for k, v in margins.items()}
    return margins, all(v > 0 for v in margins.values())


def filter_margins(omega_m: float, gamma_m: float, kappa: float, delta: float,
                   g: float) -> tuple[float, float]:
    """Closed-form nontrivial stability margins of the filtered 4x4 model.

    The first is the constant term ``C4`` of the characteristic quartic, the
    second equals the Hurwitz determinant ``(C1C2 - C0C3)C3 - C1^2 C4``.
    """
    c4 = (omega_m**2 + gamma_m**2 / 16.0) * (delta**2 + kappa**2) - omega_m * g**2 * delta
    inner = (delta**4
             + delta**2 * (gamma_m**2 / 8.0 + gamma_m * kappa + 2.0 * kappa**2 - 2.0 * omega_m**2)
             + (16.0 * omega_m**2 + (gamma_m + 4.0 * kappa) ** 2) ** 2 / 256.0)
    h4 = gamma_m * kappa * inner + omega_m * g**2 * delta * (gamma_m / 2.0 + 2.0 * kappa) ** 2
    return c4, h4


def explicit_filter_conditions(p: PhysicalParams, delta: float) -> tuple[float, float]:
    """Both filter-model margins with all frequencies in units of omega_m."""
    d = derive_params(p)
    mf = cavity_mean_field(d.drive_magnitude, p.cavity_decay, delta)
    g = effective_coupling(mf.alpha_s.real, d.g0)
    w = p.mech_freq
    return filter_margins(1.0, p.mech_damping / w, p.cavity_decay / w, delta / w, g / w)


def spectral_stable(A: ArrayLike) -> StabilityReport:
    """Eigenvalue test: stable iff every eigenvalue has strictly negative real part.

    Eigenvalues come from LAPACK ``geev`` (balancing, Hessenberg reduction and
    shifted QR), which stops after 30 iterations per eigenvalue; failure to
    converge is reported as :class:`ConvergenceError`.
    """
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("A contains non-finite entries")
    try:
        eig = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}") from exc
    max_re = float(np.max(eig.real))
    return StabilityReport(stable=max_re < 0, max_real_eig=max_re,
                           eigenvalues=tuple(complex(e) for e in eig))


def assess_stability(model: LinearModel, eps_margin: float = EPS_MARGIN) -> StabilityReport:
    """Spectral verdict, cross-checked by Routh-Hurwitz for two-mode models.

    Margins are computed from ``A / omega_m``.  Disagreement is tolerated
    only when some margin lies inside ``(-eps_margin, eps_margin)``.
    """
    report = spectral_stable(model.A)
    if model.dim != 4:
        return report
    margins, rh_stable = routh_hurwitz_quartic(char_poly(model.A / model.omega_m))
    decidable = all(abs(v) > eps_margin for v in margins.values())
    agree = rh_stable == report.stable or not decidable
    return StabilityReport(stable=report.stable, max_real_eig=report.max_real_eig,
                           rh_conditions=margins, method_agreement=agree,
                           eigenvalues=report.eigenvalues)

