"""Physical parameters, constants and derived scalar quantities.

Unit convention
---------------
Every frequency-like quantity (cavity decay, mechanical frequency and
damping, detunings, hopping) is an *angular* frequency in rad/s.  Values
quoted in the literature as ``20 pi MHz`` therefore mean
``20 * pi * 1e6`` rad/s.  Lengths are in metres, masses in kilograms,
powers in watts and temperatures in kelvin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .exceptions import ConfigError, NumericalError


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 exact values (SI)."""

    hbar: float = 1.054571817e-34
    k_B: float = 1.380649e-23
    c: float = 299_792_458.0


CONSTANTS = PhysicalConstants()

#: Quality factors below this still run but trigger a weak-coupling warning.
LOW_Q_WARNING = 1e3


@dataclass(frozen=True)
class PhysicalParams:
    """Raw experimental knobs, SI units.

    Defaults reproduce the operating point used throughout the reference
    figures: 1 mm cavity, 810 nm / 50 mW drive, kappa = 8.8 pi x 10^6 rad/s,
    omega_m = 20 pi x 10^6 rad/s, m = 50 ng, T = 400 mK, gamma_m = 200 pi rad/s.
    """

    cavity_length: float = 1e-3
    drive_wavelength: float = 810e-9
    drive_power: float = 50e-3
    cavity_decay: float = 8.8 * math.pi * 1e6
    mech_freq: float = 20 * math.pi * 1e6
    mech_mass: float = 50e-12
    temperature: float = 0.4
    mech_damping: float = 200 * math.pi
    laser_detuning: float = 0.0
    cavity_count: int = 1
    hopping: float = 0.0
    array_detuning: float = 0.0
    constants: PhysicalConstants = field(default=CONSTANTS, repr=False, compare=False)

    def __post_init__(self):
        for name in ("cavity_length", "drive_wavelength", "cavity_decay", "mech_freq", "mech_mass"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be finite and > 0, got {value!r}", field=name)
        for name in ("drive_power", "temperature", "mech_damping"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {value!r}", field=name)
        for name in ("laser_detuning", "hopping", "array_detuning"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite", field=name)
        if int(self.cavity_count) != self.cavity_count or self.cavity_count < 1:
            raise ConfigError(f"cavity_count must be a positive integer, got {self.cavity_count!r}",
                              field="cavity_count")
        if self.mech_damping > 0:
            q = self.mech_freq / self.mech_damping
            if q <= 1:
                raise ConfigError(f"quality factor omega_m/gamma_m = {q:.3g} must exceed 1",
                                  field="mech_damping")
            if q < LOW_Q_WARNING:
                warnings.warn(f"quality factor {q:.3g} < {LOW_Q_WARNING:g}: "
                              "weak-coupling approximation is questionable", stacklevel=3)

    def with_(self, **changes) -> PhysicalParams:
        """Return a copy with some fields replaced."""
        return replace(self, **changes)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls) if f.name != "constants")


@dataclass(frozen=True)
class DerivedParams:
    omega_c: float
    omega_L: float
    g0: float
    drive_magnitude: float
    nbar: float
    quality_factor: float
    finesse: float
    gamma: float


@dataclass(frozen=True)
class MeanField:
    """Classical steady state about which the dynamics is linearized.

    ``amplitudes`` holds one complex photon amplitude per cavity, cavity 1
    first.  For a single cavity the amplitude is real and non-negative.
    ``q_s`` is the mirror displacement driven by the last cavity.
    """

    amplitudes: tuple[complex, ...]
    q_s: float
    p_s: float
    delta: float

    @property
    def alpha_s(self) -> complex:
        """Amplitude of the cavity that touches the mirror."""
        return self.amplitudes[-1]


def thermal_occupation(omega_m: float, temperature: float,
                       constants: PhysicalConstants = CONSTANTS) -> float:
    """Bose-Einstein occupation ``1 / (exp(hbar w / k_B T) - 1)``; 0 at T = 0."""
    thermal = constants.k_B * temperature
    if thermal == 0:
        return 0.0
    x = constants.hbar * omega_m / thermal
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def derive_params(p: PhysicalParams) -> DerivedParams:
    """Compute coupling, drive strength and bath occupation from raw parameters.

    The drive is taken resonant with the bare cavity, so omega_L = omega_c.
    """
    k = p.constants
    omega_c = 2.0 * math.pi * k.c / p.drive_wavelength
    omega_L = omega_c
    g0 = (omega_c / p.cavity_length) * math.sqrt(k.hbar / (p.mech_mass * p.mech_freq))
    drive = math.sqrt(2.0 * p.drive_power * p.cavity_decay / (k.hbar * omega_L))
    nbar = thermal_occupation(p.mech_freq, p.temperature, k)
    gamma = p.mech_damping / p.mech_freq
    quality = math.inf if gamma == 0 else 1.0 / gamma
    finesse = math.pi * k.c / (p.cavity_length * p.cavity_decay)
    derived = DerivedParams(omega_c=omega_c, omega_L=omega_L, g0=g0, drive_magnitude=drive,
                            nbar=nbar, quality_factor=quality, finesse=finesse, gamma=gamma)
    for name in ("omega_c", "g0", "drive_magnitude", "nbar", "finesse", "gamma"):
        if not math.isfinite(getattr(derived, name)):
            raise ConfigError(f"derived quantity {name} is not finite", field=name)
    return derived


def cavity_mean_field(drive_magnitude: float, kappa: float, delta: float,
                      g0: float = 0.0, omega_m: float = 1.0) -> MeanField:
    """Single-cavity steady state with the drive phase chosen so alpha_s is real.

    Parameters
    ----------
    drive_magnitude : |E|
    kappa : cavity decay rate (rad/s), must be positive
    delta : effective detuning (rad/s)
    g0, omega_m : single-photon coupling and mechanical frequency, used only
        for the mirror displacement ``q_s = g0 |alpha_s|^2 / omega_m``
    """
    if not kappa > 0:
        raise ConfigError("kappa must be > 0", field="cavity_decay")
    alpha = drive_magnitude / math.hypot(kappa, delta)
    return MeanField(amplitudes=(complex(alpha, 0.0),), q_s=g0 * alpha * alpha / omega_m,
                     p_s=0.0, delta=delta)


def effective_coupling(alpha_s: float, g0: float) -> float:
    """Drive-enhanced coupling ``G = sqrt(2) alpha_s g0``."""
    return math.sqrt(2.0) * alpha_s * g0


def delta0_from_delta(delta: float, alpha_s: complex, g0: float, omega_m: float) -> float:
    """Bare laser detuning that produces effective detuning ``delta``."""
    return delta + g0 * g0 * abs(alpha_s) ** 2 / omega_m


def array_mean_fields(p: PhysicalParams, n: int | None = None, hopping: float | None = None,
                      varpi: float | None = None) -> MeanField:
    """Steady-state amplitudes of a chain of ``n`` driven cavities.

    Cavity 1 is driven (real E) with detuning ``p.laser_detuning``; cavities
    2..n carry the effective detuning ``varpi``.  The steady state solves the
    tridiagonal system ``(kappa + i Delta_j) a_j + i J (a_{j-1} + a_{j+1}) =
    E delta_{j1}``.  A single cavity falls back to :func:`cavity_mean_field`.
    """
    n = p.cavity_count if n is None else n
    hopping = p.hopping if hopping is None else hopping
    varpi = p.array_detuning if varpi is None else varpi
    if int(n) != n or n < 1:
        raise ConfigError("cavity count must be a positive integer", field="cavity_count")
    d = derive_params(p)
    if n == 1:
        return cavity_mean_field(d.drive_magnitude, p.cavity_decay, p.laser_detuning,
                                 d.g0, p.mech_freq)

    detunings = np.full(n, varpi, dtype=float)
    detunings[0] = p.laser_detuning
    system = np.diag(p.cavity_decay + 1j * detunings)
    idx = np.arange(n - 1)
    system[idx, idx + 1] = 1j * hopping
    system[idx + 1, idx] = 1j * hopping
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = d.drive_magnitude
    try:
        amplitudes = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular steady-state system for the cavity array: {exc}") from exc
    last = amplitudes[-1]
    q_s = d.g0 * abs(last) ** 2 / p.mech_freq
    return MeanField(amplitudes=tuple(complex(a) for a in amplitudes), q_s=q_s, p_s=0.0,
                     delta=varpi)
