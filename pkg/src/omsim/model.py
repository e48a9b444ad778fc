"""Drift and diffusion matrices of the linearized Langevin dynamics.

Quadrature vector ordering is ``(dq, dp, dX_1, dY_1, ..., dX_N, dY_N)``:
the mirror always occupies indices 0-1, cavity ``j`` occupies ``2j, 2j+1``.
Quadratures are normalized so the vacuum variance is 1/2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .exceptions import ConfigError
from .params import (MeanField, PhysicalParams, array_mean_fields, cavity_mean_field,
                     derive_params, effective_coupling)


class ModelKind(str, enum.Enum):
    ORIGINAL = "original"
    FILTER = "filter"
    INVERSE_FILTER = "inverse_filter"
    ARRAY = "array"

    @classmethod
    def parse(cls, value: str | ModelKind) -> ModelKind:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown model {value!r}; expected one of {choices}",
                              field="model") from None


@dataclass(frozen=True)
class LinearModel:
    """Complete Gaussian description: ``d mu/dt = A mu + noise``, noise strength ``D``.

    ``omega_m`` is kept as the natural frequency scale for normalized
    stability margins.
    """

    A: NDArray[np.float64]
    D: NDArray[np.float64]
    mode_labels: tuple[str, ...]
    mean_field: MeanField
    kind: ModelKind
    omega_m: float

    def __post_init__(self):
        a = np.array(self.A, dtype=float)
        d = np.array(self.D, dtype=float)
        n = 2 * len(self.mode_labels)
        if a.shape != (n, n) or d.shape != (n, n):
            raise ValueError(f"A {a.shape} and D {d.shape} must both be {n}x{n}")
        if np.any(d != np.diag(np.diag(d))) or np.any(np.diag(d) < 0):
            raise ValueError("D must be diagonal with non-negative entries")
        a.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "D", d)

    @property
    def n_modes(self) -> int:
        return len(self.mode_labels)

    @property
    def dim(self) -> int:
        return 2 * len(self.mode_labels)


def _mirror_diffusion(p: PhysicalParams, split: bool) -> tuple[float, float]:
    strength = p.mech_damping * (2.0 * derive_params(p).nbar + 1.0)
    if split:
        return strength / 4.0, strength / 4.0
    return 0.0, strength


def _single_cavity(p: PhysicalParams, delta: float, kind: ModelKind) -> LinearModel:
    d = derive_params(p)
    mf = cavity_mean_field(d.drive_magnitude, p.cavity_decay, delta, d.g0, p.mech_freq)
    g = effective_coupling(mf.alpha_s.real, d.g0)
    wm, gm, k = p.mech_freq, p.mech_damping, p.cavity_decay
    if kind is ModelKind.ORIGINAL:
        damp_q, damp_p = 0.0, gm
    else:
        damp_q = damp_p = gm / 4.0
    A = np.array([
        [-damp_q, wm, 0.0, 0.0],
        [-wm, -damp_p, g, 0.0],
        [0.0, 0.0, -k, delta],
        [g, 0.0, -delta, -k],
    ])
    dq, dp = _mirror_diffusion(p, split=kind is not ModelKind.ORIGINAL)
    D = np.diag([dq, dp, k, k])
    return LinearModel(A=A, D=D, mode_labels=("mirror", "cavity1"), mean_field=mf, kind=kind,
                       omega_m=wm)


def build_filter(p: PhysicalParams, delta: float) -> LinearModel:
    """Resonance-filtered model at effective detuning ``delta`` (rad/s).

    The mirror loses energy through both quadratures at rate gamma_m/4 and
    receives a quarter of the thermal diffusion on each.
    """
    return _single_cavity(p, delta, ModelKind.FILTER)


def build_original(p: PhysicalParams, delta: float) -> LinearModel:
    """Unfiltered Brownian-motion model: damping and thermal noise act on dp only."""
    return _single_cavity(p, delta, ModelKind.ORIGINAL)


def build_inverse_filter(p: PhysicalParams, delta: float) -> LinearModel:
    """Inverse-resonance filter; its linear dynamics coincide with :func:`build_filter`."""
    return replace(build_filter(p, delta), kind=ModelKind.INVERSE_FILTER)


def build_array(p: PhysicalParams, n: int | None = None, hopping: float | None = None,
                varpi: float | None = None) -> LinearModel:
    """Chain of ``n`` hopping-coupled cavities; the last one carries the mirror.

    The complex amplitude of cavity N splits the optomechanical coupling
    into ``G_x = sqrt(2) g0 Re(alpha_N)`` (acting via dX_N) and
    ``G_y = sqrt(2) g0 Im(alpha_N)`` (acting via dY_N).  Cavity 1 sits at the
    laser detuning, every other cavity at ``varpi``.  Mirror damping and
    diffusion follow the filtered form.
    """
    n = p.cavity_count if n is None else int(n)
    hopping = p.hopping if hopping is None else hopping
    varpi = p.array_detuning if varpi is None else varpi
    mf = array_mean_fields(p, n, hopping, varpi)
    d = derive_params(p)
    alpha_n = mf.alpha_s
    gx = effective_coupling(alpha_n.real, d.g0)
    gy = effective_coupling(alpha_n.imag, d.g0)
    wm, gm, k = p.mech_freq, p.mech_damping, p.cavity_decay

    dim = 2 * (n + 1)
    A = np.zeros((dim, dim))
    A[0, 0] = A[1, 1] = -gm / 4.0
    A[0, 1] = wm
    A[1, 0] = -wm
    for j in range(1, n + 1):
        x, y = 2 * j, 2 * j + 1
        det = p.laser_detuning if j == 1 else varpi
        A[x, x] = A[y, y] = -k
        A[x, y] = det
        A[y, x] = -det
        for nb in (j - 1, j + 1):
            if 1 <= nb <= n:
                A[x, 2 * nb + 1] += hopping
                A[y, 2 * nb] -= hopping
    xn, yn = 2 * n, 2 * n + 1
    A[1, xn] += gx
    A[1, yn] += gy
    A[xn, 0] += -gy
    A[yn, 0] += gx

    dq, dp = _mirror_diffusion(p, split=True)
    D = np.diag([dq, dp] + [k] * (2 * n))
    labels = ("mirror",) + tuple(f"cavity{j}" for j in range(1, n + 1))
    return LinearModel(A=A, D=D, mode_labels=labels, mean_field=mf, kind=ModelKind.ARRAY,
                       omega_m=wm)


def build_model(kind: ModelKind | str, p: PhysicalParams, delta: float | None = None) -> LinearModel:
    """Dispatch on ``kind``.  ``delta`` is required for single-cavity models."""
    kind = ModelKind.parse(kind)
    if kind is ModelKind.ARRAY:
        return build_array(p)
    if delta is None:
        raise TypeError("delta is required for single-cavity models")
    builder = {ModelKind.ORIGINAL: build_original, ModelKind.FILTER: build_filter,
               ModelKind.INVERSE_FILTER: build_inverse_filter}[kind]
    return builder(p, delta)
