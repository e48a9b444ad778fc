"""Scenario configuration, single-point evaluation and parameter sweeps.

A scenario is a JSON object::

    {
      "model": "filter",
      "physical": {"temperature": 0.4, "mech_damping_rad_per_s": 628.3},
      "sweep": {"axis": "delta", "start": 0, "stop": 2, "points": 201,
                "scale": "linear", "units": "omega_m"},
      "series": [{"label": "gm=0", "physical": {"mech_damping_rad_per_s": 0}}],
      "pairs": [[0, 1]],
      "output": "fig.csv",
      "seed": 0
    }

Frequency fields may carry a ``_rad_per_s`` or ``_omega_m_units`` suffix;
internally everything is rad/s.  For single-cavity models the
``laser_detuning`` field is the effective detuning used to build the model.
Mode indices in ``pairs`` are 0-based with the mirror at 0 and cavity ``j``
at ``j``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray

from . import __version__
from .entanglement import pair_negativity, physicality_check
from .exceptions import ConfigError, OmsimError
from .lyapunov import solve_lyapunov
from .model import LinearModel, ModelKind, build_model
from .params import PhysicalParams
from .stability import assess_stability

FREQUENCY_FIELDS = ("cavity_decay", "mech_freq", "mech_damping", "laser_detuning", "hopping",
                    "array_detuning")
AXES = {
    "delta": "laser_detuning",
    "gamma_m": "mech_damping",
    "temperature": "temperature",
    "varpi": "array_detuning",
    "hopping": "hopping",
}
ARRAY_ONLY_AXES = ("varpi", "hopping")
SCALES = ("linear", "log")


def _resolve_physical(raw: dict[str, Any], base: PhysicalParams | None = None) -> PhysicalParams:
    """Apply a dict of overrides, converting suffixed frequency fields to rad/s."""
    base = PhysicalParams() if base is None else base
    known = set(PhysicalParams.field_names())
    values: dict[str, Any] = {}
    omega_m = raw.get("mech_freq_rad_per_s", raw.get("mech_freq", base.mech_freq))
    for key, value in raw.items():
        name, scale = key, 1.0
        if key.endswith("_rad_per_s"):
            name = key[: -len("_rad_per_s")]
        elif key.endswith("_omega_m_units"):
            name = key[: -len("_omega_m_units")]
            if name == "mech_freq":
                raise ConfigError("mech_freq cannot be given in omega_m units", field=key)
            scale = omega_m
        if name not in known:
            raise ConfigError(f"unknown physical parameter {key!r}", field=key)
        if name != key and name not in FREQUENCY_FIELDS:
            raise ConfigError(f"{name} is not a frequency; use the bare field name", field=key)
        if name in values:
            raise ConfigError(f"{name} given more than once", field=key)
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a number, got {value!r}", field=key) from None
        values[name] = int(number) if name == "cavity_count" else number * scale
    return replace(base, **values)


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    start: float
    stop: float
    points: int
    scale: str = "linear"
    units: str = "native"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown axis {self.axis!r}; expected one of {', '.join(AXES)}",
                              field="sweep.axis")
        if self.scale not in SCALES:
            raise ConfigError(f"scale must be linear or log, got {self.scale!r}", field="sweep.scale")
        if self.units not in ("native", "omega_m"):
            raise ConfigError("units must be 'native' or 'omega_m'", field="sweep.units")
        if self.units == "omega_m" and AXES[self.axis] not in FREQUENCY_FIELDS:
            raise ConfigError(f"axis {self.axis} is not a frequency", field="sweep.units")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError("points must be an integer >= 2", field="sweep.points")
        if not (math.isfinite(self.start) and math.isfinite(self.stop) and self.start < self.stop):
            raise ConfigError("sweep requires finite start < stop", field="sweep.start")
        if self.scale == "log" and self.start <= 0:
            raise ConfigError("log scale requires start > 0", field="sweep.start")

    def grid(self) -> NDArray[np.float64]:
        """Grid in the configured units, ascending."""
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class Series:
    label: str
    model: ModelKind
    params: PhysicalParams


@dataclass(frozen=True)
class ScenarioConfig:
    model: ModelKind
    params: PhysicalParams
    sweep: SweepSpec | None = None
    series: tuple[Series, ...] = ()
    pairs: tuple[tuple[int, int], ...] = ((0, 1),)
    output: str | None = None
    seed: int = 0
    name: str = "custom"

    def resolved_series(self) -> tuple[Series, ...]:
        return self.series or (Series(label=self.model.value, model=self.model, params=self.params),)

    def to_dict(self) -> dict[str, Any]:
        """Fully resolved, JSON-serializable description (canonical units)."""
        def phys(p: PhysicalParams) -> dict[str, Any]:
            return {f.name: getattr(p, f.name) for f in fields(p) if f.name != "constants"}

        return {
            "name": self.name,
            "model": self.model.value,
            "physical": phys(self.params),
            "sweep": None if self.sweep is None else asdict(self.sweep),
            "series": [{"label": s.label, "model": s.model.value, "physical": phys(s.params)}
                       for s in self.series],
            "pairs": [list(p) for p in self.pairs],
            "output": self.output,
            "seed": self.seed,
            "version": __version__,
        }


def _parse_pairs(raw, n_modes: int | None) -> tuple[tuple[int, int], ...]:
    try:
        pairs = tuple((int(a), int(b)) for a, b in raw)
    except (TypeError, ValueError):
        raise ConfigError("pairs must be a list of [i, j] mode indices", field="pairs") from None
    if not pairs:
        raise ConfigError("at least one mode pair is required", field="pairs")
    for i, j in pairs:
        if i == j or min(i, j) < 0 or (n_modes is not None and max(i, j) >= n_modes):
            raise ConfigError(f"invalid mode pair ({i}, {j})", field="pairs")
    return pairs


def config_from_dict(raw: dict[str, Any]) -> ScenarioConfig:
    """Validate a scenario mapping (see the module docstring for the schema)."""
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object", field="<root>")
    allowed = {"model", "physical", "sweep", "series", "pairs", "output", "seed", "name"}
    extra = set(raw) - allowed
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"unknown scenario field {key!r}", field=key)
    model = ModelKind.parse(raw.get("model", "filter"))
    params = _resolve_physical(raw.get("physical", {}) or {})

    sweep = None
    if raw.get("sweep") is not None:
        s = dict(raw["sweep"])
        unknown = set(s) - {"axis", "start", "stop", "points", "scale", "units"}
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(f"unknown sweep field {key!r}", field=f"sweep.{key}")
        for key in ("axis", "start", "stop", "points"):
            if key not in s:
                raise ConfigError(f"sweep.{key} is required", field=f"sweep.{key}")
        try:
            sweep = SweepSpec(axis=str(s["axis"]), start=float(s["start"]), stop=float(s["stop"]),
                              points=s["points"], scale=str(s.get("scale", "linear")),
                              units=str(s.get("units", "native")))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid sweep: {exc}", field="sweep") from None

    series = []
    for k, item in enumerate(raw.get("series", []) or []):
        s_model = ModelKind.parse(item.get("model", model))
        s_params = _resolve_physical(item.get("physical", {}) or {}, base=params)
        series.append(Series(label=str(item.get("label", f"series{k}")), model=s_model,
                             params=s_params))

    kinds = {s.model for s in series} or {model}
    if sweep is not None and sweep.axis in ARRAY_ONLY_AXES and kinds != {ModelKind.ARRAY}:
        raise ConfigError(f"axis {sweep.axis} is only valid for the array model", field="sweep.axis")
    max_modes = None
    if kinds == {ModelKind.ARRAY}:
        max_modes = 1 + min(s.params.cavity_count for s in series) if series else 1 + params.cavity_count
    elif ModelKind.ARRAY not in kinds:
        max_modes = 2
    pairs = _parse_pairs(raw.get("pairs", [[0, 1]]), max_modes)
    try:
        seed = int(raw.get("seed", 0))
    except (TypeError, ValueError):
        raise ConfigError("seed must be an integer", field="seed") from None
    output = raw.get("output")
    return ScenarioConfig(model=model, params=params, sweep=sweep, series=tuple(series),
                          pairs=pairs, output=None if output is None else str(output), seed=seed,
                          name=str(raw.get("name", "custom")))


def load_config(path: str | os.PathLike) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}", field="<file>") from exc
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# point evaluation


@dataclass(frozen=True)
class PairResult:
    pair: tuple[int, int]
    e_n: float | None = None
    xi: float | None = None
    sigma: float | None = None
    simon: bool | None = None


@dataclass(frozen=True)
class PointResult:
    stable: bool
    max_real_eig: float
    rh_conditions: dict[str, float] = field(default_factory=dict)
    residual: float | None = None
    min_symplectic: float | None = None
    pairs: tuple[PairResult, ...] = ()
    status: str = "ok"


def build_for(kind: ModelKind, p: PhysicalParams) -> LinearModel:
    """Model at the detuning stored in ``p.laser_detuning``."""
    return build_model(kind, p, p.laser_detuning)


def evaluate_model(model: LinearModel, pairs: Sequence[tuple[int, int]]) -> PointResult:
    """Stability, covariance and per-pair negativity for one model.

    Unstable models and solver failures are reported in ``status``; they
    never raise.
    """
    try:
        st = assess_stability(model)
    except OmsimError as exc:
        return PointResult(stable=False, max_real_eig=math.nan, status=f"error: {exc}")
    if not st.stable:
        return PointResult(stable=False, max_real_eig=st.max_real_eig,
                           rh_conditions=st.rh_conditions, status="unstable")
    try:
        cov = solve_lyapunov(model)
        physical, nu_min = physicality_check(cov.V)
        results = []
        for i, j in pairs:
            if max(i, j) >= model.n_modes:
                results.append(PairResult(pair=(i, j)))
                continue
            rep = pair_negativity(cov.V, i, j)
            results.append(PairResult(pair=(i, j), e_n=rep.e_n, xi=rep.xi, sigma=rep.sigma,
                                      simon=rep.simon_entangled))
    except OmsimError as exc:
        return PointResult(stable=True, max_real_eig=st.max_real_eig,
                           rh_conditions=st.rh_conditions, status=f"error: {exc}")
    status = "ok" if physical else "unphysical"
    if not st.method_agreement:
        status = "method-disagreement"
    return PointResult(stable=True, max_real_eig=st.max_real_eig, rh_conditions=st.rh_conditions,
                       residual=cov.residual, min_symplectic=nu_min, pairs=tuple(results),
                       status=status)


def negativity(kind: ModelKind | str, p: PhysicalParams, pair: tuple[int, int] = (0, 1)) -> float:
    """E_N for one pair, ``nan`` where the model is unstable or fails."""
    res = evaluate_model(build_for(ModelKind.parse(kind), p), [pair])
    if not res.pairs or res.pairs[0].e_n is None:
        return math.nan
    return res.pairs[0].e_n


# ---------------------------------------------------------------------------
# sweeps


def axis_params(p: PhysicalParams, spec: SweepSpec, value: float) -> PhysicalParams:
    """Parameters at one grid value (``value`` in the sweep's units)."""
    name = AXES[spec.axis]
    scale = p.mech_freq if spec.units == "omega_m" else 1.0
    return replace(p, **{name: value * scale})


def _evaluate_task(task: tuple[ModelKind, PhysicalParams, tuple[tuple[int, int], ...]]) -> PointResult:
    kind, p, pairs = task
    try:
        model = build_for(kind, p)
    except OmsimError as exc:
        return PointResult(stable=False, max_real_eig=math.nan, status=f"error: {exc}")
    return evaluate_model(model, pairs)


def resolve_jobs(jobs: int | None) -> int:
    """``jobs`` if given, else ``$OMSIM_JOBS``, else 1."""
    if jobs is None:
        env = os.environ.get("OMSIM_JOBS", "").strip()
        if not env:
            return 1
        try:
            jobs = int(env)
        except ValueError:
            raise ConfigError(f"OMSIM_JOBS must be an integer, got {env!r}",
                              field="OMSIM_JOBS") from None
    if jobs < 1:
        raise ConfigError("jobs must be >= 1", field="jobs")
    return jobs


def map_points(tasks: Sequence, jobs: int = 1) -> list[PointResult]:
    """Evaluate tasks in order; ``jobs > 1`` uses worker processes."""
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_evaluate_task(t) for t in tasks]


@dataclass(frozen=True)
class SweepResult:
    config: ScenarioConfig
    grid: NDArray[np.float64]
    series: tuple[Series, ...]
    points: tuple[tuple[PointResult, ...], ...]

    def e_n(self, series: int | str = 0, pair: tuple[int, int] | None = None) -> NDArray[np.float64]:
        """E_N curve of one series (``nan`` where unavailable)."""
        k = series if isinstance(series, int) else [s.label for s in self.series].index(series)
        pair = self.config.pairs[0] if pair is None else tuple(pair)
        idx = self.config.pairs.index(pair)
        return np.array([np.nan if r.pairs == () or r.pairs[idx].e_n is None else r.pairs[idx].e_n
                         for r in self.points[k]])


def run_sweep(config: ScenarioConfig, jobs: int = 1) -> SweepResult:
    if config.sweep is None:
        raise ConfigError("scenario has no sweep section", field="sweep")
    grid = config.sweep.grid()
    series = config.resolved_series()
    tasks = []
    for s in series:
        for v in grid:
            tasks.append((s.model, axis_params(s.params, config.sweep, float(v)), config.pairs))
    flat = map_points(tasks, jobs)
    n = len(grid)
    points = tuple(tuple(flat[k * n:(k + 1) * n]) for k in range(len(series)))
    return SweepResult(config=config, grid=grid, series=series, points=points)


def csv_columns(config: ScenarioConfig) -> list[str]:
    spec = config.sweep
    cols = ["series", "model", spec.axis]
    if AXES[spec.axis] in FREQUENCY_FIELDS:
        cols.append(f"{spec.axis}_over_omega_m")
    cols += ["stable", "max_real_eig", "lyapunov_residual", "min_symplectic_eig"]
    if ModelKind.ARRAY not in {s.model for s in config.resolved_series()}:
        cols += ["rh_c4", "rh_hurwitz3", "rh_hurwitz4"]
    for i, j in config.pairs:
        cols += [f"e_n_{i}{j}", f"xi_{i}{j}", f"sigma_{i}{j}", f"simon_{i}{j}"]
    cols.append("status")
    return cols


def _fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def _row(config: ScenarioConfig, s: Series, value: float, r: PointResult) -> list[str]:
    spec = config.sweep
    p = axis_params(s.params, spec, value)
    native = getattr(p, AXES[spec.axis])
    row = [s.label, s.model.value, _fmt(native)]
    if AXES[spec.axis] in FREQUENCY_FIELDS:
        row.append(_fmt(native / p.mech_freq))
    row += ["true" if r.stable else "false", _fmt(r.max_real_eig), _fmt(r.residual),
            _fmt(r.min_symplectic)]
    if "rh_c4" in csv_columns(config):
        rh = r.rh_conditions
        row += [_fmt(rh.get("C4")), _fmt(rh.get("C1C2-C0C3")), _fmt(rh.get("(C1C2-C0C3)C3-C1^2C4"))]
    by_pair = {pr.pair: pr for pr in r.pairs}
    for pair in config.pairs:
        pr = by_pair.get(tuple(pair))
        if pr is None or pr.e_n is None:
            row += ["", "", "", ""]
        else:
            row += [_fmt(pr.e_n), _fmt(pr.xi), _fmt(pr.sigma), "true" if pr.simon else "false"]
    row.append(r.status)
    return row


def sweep_to_csv(result: SweepResult, timestamp: str | None = None) -> str:
    """CSV text with a ``#`` metadata block, one row per (series, grid point)."""
    config = result.config
    buf = io.StringIO()
    buf.write(f"# omsim {__version__} sweep\n")
    if timestamp is not None:
        buf.write(f"# generated: {timestamp}\n")
    buf.write("# units: frequencies in rad/s, temperature in K\n")
    buf.write(f"# config: {json.dumps(config.to_dict(), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(config))
    for s, pts in zip(result.series, result.points):
        for value, r in zip(result.grid, pts):
            writer.writerow(_row(config, s, float(value), r))
    return buf.getvalue()


def read_sweep_csv(path: str | os.PathLike) -> list[dict[str, str]]:
    """Rows of a sweep CSV as dicts, metadata comments skipped."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
