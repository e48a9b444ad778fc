"""Built-in scenarios reproducing the reference figures.

Every preset uses 201 grid points.  Detuning grids cover the positive
branch only; negative effective detuning is dynamically unstable for these
parameters.
"""

from __future__ import annotations

import copy
import math
from typing import Any

from .exceptions import ConfigError
from .sweep import ScenarioConfig, config_from_dict

POINTS = 201
FIG2_DAMPINGS = (0.0, 200.0, 400.0, 600.0, 800.0, 1000.0, 2000.0)  # multiples of pi rad/s
FIG6C_HOPPINGS = (0.0, 0.2, 0.4, 0.6, 0.7, 0.8, 1.0)
FIG6D_DETUNINGS = (0.2, 0.4, 0.6, 0.8, 1.0)
ARRAY_PAIRS = [[0, 1], [0, 2], [1, 2]]


def _fig2(model: str) -> dict[str, Any]:
    return {
        "model": model,
        "sweep": {"axis": "delta", "start": 0.0, "stop": 2.0, "points": POINTS, "units": "omega_m"},
        "series": [{"label": f"gamma_m={g:g}pi", "physical": {"mech_damping": g * math.pi}}
                   for g in FIG2_DAMPINGS],
    }


def _three_models() -> list[dict[str, Any]]:
    return [{"label": m, "model": m} for m in ("original", "filter", "inverse_filter")]


def _array(**physical) -> dict[str, Any]:
    return {"model": "array", "physical": {"cavity_count": 2, "laser_detuning": 0.0, **physical}}


_RAW: dict[str, dict[str, Any]] = {
    "fig2a": _fig2("original"),
    "fig2b": _fig2("filter"),
    "fig3a": {
        "model": "filter",
        "sweep": {"axis": "delta", "start": 0.0, "stop": 2.0, "points": POINTS, "units": "omega_m"},
        "series": _three_models(),
    },
    "fig3b": {
        "model": "filter",
        "physical": {"laser_detuning_omega_m_units": 0.5},
        "sweep": {"axis": "temperature", "start": 0.1, "stop": 20.0, "points": POINTS},
        "series": _three_models(),
    },
    "fig6a": {
        **_array(hopping_omega_m_units=0.7),
        "sweep": {"axis": "varpi", "start": 0.0, "stop": 1.2, "points": POINTS, "units": "omega_m"},
        "pairs": ARRAY_PAIRS,
    },
    "fig6b": {
        **_array(array_detuning_omega_m_units=0.6),
        "sweep": {"axis": "hopping", "start": 0.0, "stop": 1.2, "points": POINTS, "units": "omega_m"},
        "pairs": ARRAY_PAIRS,
    },
    "fig6c": {
        **_array(),
        "sweep": {"axis": "varpi", "start": 0.0, "stop": 1.2, "points": POINTS, "units": "omega_m"},
        "series": [{"label": f"J={j:g}", "physical": {"hopping_omega_m_units": j}}
                   for j in FIG6C_HOPPINGS],
    },
    "fig6d": {
        **_array(),
        "sweep": {"axis": "hopping", "start": 0.0, "stop": 1.2, "points": POINTS, "units": "omega_m"},
        "series": [{"label": f"varpi={v:g}", "physical": {"array_detuning_omega_m_units": v}}
                   for v in FIG6D_DETUNINGS],
    },
}

DESCRIPTIONS = {
    "fig2a": "original model, E_N vs Delta/omega_m for seven mechanical damping rates",
    "fig2b": "filter model, E_N vs Delta/omega_m for seven mechanical damping rates",
    "fig3a": "original, filter and inverse filter, E_N vs Delta/omega_m",
    "fig3b": "original, filter and inverse filter, E_N vs T at Delta = 0.5 omega_m",
    "fig6a": "two-cavity array, mirror/cavity negativities vs varpi at J = 0.7 omega_m",
    "fig6b": "two-cavity array, mirror/cavity negativities vs J at varpi = 0.6 omega_m",
    "fig6c": "two-cavity array, remote negativity vs varpi for several J",
    "fig6d": "two-cavity array, remote negativity vs J for several varpi",
}


def preset_names() -> tuple[str, ...]:
    return tuple(_RAW)


def preset_dict(name: str) -> dict[str, Any]:
    """Raw scenario mapping for a preset (a fresh copy)."""
    if name not in _RAW:
        raise ConfigError(f"unknown preset {name!r}; run preset-list", field="preset")
    return {"name": name, **copy.deepcopy(_RAW[name])}


def preset(name: str) -> ScenarioConfig:
    return config_from_dict(preset_dict(name))
