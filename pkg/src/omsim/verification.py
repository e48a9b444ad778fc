"""Reproducible cross-method validation suite and figure-level metrics.

Every check derives its random numbers from ``(seed, check name)`` so the
report does not depend on which checks run or in what order.
"""

from __future__ import annotations

import json
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from numpy.typing import NDArray

from .entanglement import log_negativity
from .exceptions import OmsimError
from .lyapunov import integral_oracle, solve_lyapunov, stochastic_oracle
from .model import ModelKind, build_array, build_filter, build_inverse_filter
from .params import PhysicalParams
from .presets import preset, preset_names
from .stability import EPS_MARGIN, char_poly, filter_margins, routh_hurwitz_quartic, spectral_stable
from .sweep import build_for, evaluate_model, run_sweep

LEVELS = ("fast", "full")


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    measured: Any
    tolerance: Any
    runtime: float = 0.0
    detail: str = ""

    def to_dict(self, timing: bool = True) -> dict[str, Any]:
        d = {"name": self.name, "status": self.status, "measured": self.measured,
             "tolerance": self.tolerance, "detail": self.detail}
        if timing:
            d["runtime"] = round(self.runtime, 6)
        return d


@dataclass(frozen=True)
class ValidationReport:
    seed: int
    level: str
    checks: tuple[CheckResult, ...] = field(default_factory=tuple)

    @property
    def overall(self) -> bool:
        return all(c.status == "pass" for c in self.checks if c.status != "skipped")

    def to_dict(self, timing: bool = True) -> dict[str, Any]:
        return {"seed": self.seed, "level": self.level, "overall": self.overall,
                "checks": [c.to_dict(timing) for c in self.checks]}

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"


def check_rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def random_stable_matrix(rng: np.random.Generator, n: int = 4) -> NDArray[np.float64]:
    """``-P^T P / ||P|| + K`` with ``K`` skew: stable by construction."""
    P = rng.standard_normal((n, n))
    K = rng.standard_normal((n, n))
    return -P.T @ P / np.linalg.norm(P, 2) + (K - K.T)


def random_params(rng: np.random.Generator) -> PhysicalParams:
    """Log-uniform draw around the reference operating point."""
    def lu(lo, hi):
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    w = lu(2 * math.pi * 1e5, 2 * math.pi * 1e8)
    return PhysicalParams(
        cavity_length=lu(1e-4, 1e-2), drive_wavelength=lu(400e-9, 1600e-9),
        drive_power=lu(1e-5, 1e-1), cavity_decay=lu(1e-2, 10.0) * w, mech_freq=w,
        mech_mass=lu(1e-15, 1e-9), temperature=lu(1e-3, 30.0), mech_damping=w * lu(1e-8, 1e-4),
        laser_detuning=w * rng.uniform(-3.0, 3.0))


# ---------------------------------------------------------------------------
# figure-level metrics


def e_n_curve(kind: ModelKind | str, params: list[PhysicalParams],
              pair: tuple[int, int] = (0, 1)) -> NDArray[np.float64]:
    """E_N along a list of parameter sets; ``nan`` where unstable."""
    kind = ModelKind.parse(kind)
    out = []
    for p in params:
        res = evaluate_model(build_for(kind, p), [pair])
        out.append(math.nan if not res.pairs or res.pairs[0].e_n is None else res.pairs[0].e_n)
    return np.array(out)


def detuning_scan(kind, grid: NDArray[np.float64], base: PhysicalParams | None = None):
    base = PhysicalParams() if base is None else base
    return e_n_curve(kind, [base.with_(laser_detuning=x * base.mech_freq) for x in grid])


def peak_detuning(kind, lo: float = 0.05, hi: float = 2.0, points: int = 196,
                  base: PhysicalParams | None = None) -> tuple[float, float]:
    """``(argmax Delta/omega_m, max E_N)`` over a uniform grid."""
    grid = np.linspace(lo, hi, points)
    curve = detuning_scan(kind, grid, base)
    k = int(np.nanargmax(curve))
    return float(grid[k]), float(curve[k])


def robustness_drop(kind, low: float = 0.0, high: float = 2000 * math.pi,
                    grid: NDArray[np.float64] | None = None) -> float:
    """``max E_N(gamma_m = low) - max E_N(gamma_m = high)`` over the detuning grid."""
    grid = np.linspace(0.0, 2.0, 201) if grid is None else grid
    lo = np.nanmax(detuning_scan(kind, grid, PhysicalParams(mech_damping=low)))
    hi = np.nanmax(detuning_scan(kind, grid, PhysicalParams(mech_damping=high)))
    return float(lo - hi)


def persistence_temperature(kind, delta_over_omega_m: float = 0.5, threshold: float = 1e-3,
                            grid: NDArray[np.float64] | None = None) -> float:
    """Lowest grid temperature (K) where E_N drops below ``threshold``."""
    grid = np.linspace(0.1, 20.0, 201) if grid is None else grid
    base = PhysicalParams()
    params = [base.with_(temperature=float(t), laser_detuning=delta_over_omega_m * base.mech_freq)
              for t in grid]
    curve = e_n_curve(kind, params)
    below = np.flatnonzero(~(curve >= threshold))
    return float(grid[below[0]]) if below.size else math.inf


def array_optimum(points: int = 61, hi: float = 1.2) -> tuple[float, float, float]:
    """Maximize mirror/cavity-1 E_N for two cavities over ``(varpi, J)`` in ``[0, hi]^2``.

    Returns ``(varpi/omega_m, J/omega_m, max E_N)``.
    """
    base = PhysicalParams(cavity_count=2, laser_detuning=0.0)
    w = base.mech_freq
    grid = np.linspace(0.0, hi, points)
    best = (math.nan, math.nan, -math.inf)
    for v in grid:
        for j in grid:
            p = base.with_(array_detuning=v * w, hopping=j * w)
            res = evaluate_model(build_array(p), [(0, 1)])
            e = res.pairs[0].e_n if res.pairs and res.pairs[0].e_n is not None else None
            if e is not None and e > best[2]:
                best = (float(v), float(j), float(e))
    return best


# ---------------------------------------------------------------------------
# individual checks


def _timed(name: str, fn: Callable[[], tuple[str, Any, Any, str]]) -> CheckResult:
    start = time.perf_counter()
    try:
        status, measured, tolerance, detail = fn()
    except OmsimError as exc:
        status, measured, tolerance, detail = "fail", None, None, f"{type(exc).__name__}: {exc}"
    return CheckResult(name=name, status=status, measured=measured, tolerance=tolerance,
                       runtime=time.perf_counter() - start, detail=detail)


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def check_analytic_lyapunov(seed: int):
    rng = check_rng(seed, "analytic_lyapunov")
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 11)) * 2
        a = float(np.exp(rng.uniform(-5, 5)))
        d = np.exp(rng.uniform(-5, 5, n))
        V = solve_lyapunov(-a * np.eye(n), np.diag(d)).V
        exact = np.diag(d / (2 * a))
        worst = max(worst, float(np.max(np.abs(V - exact)) / np.max(np.abs(exact))))
    V = solve_lyapunov(np.diag([-1.0, -2.0]), np.diag([2.0, 4.0])).V
    worst = max(worst, float(np.max(np.abs(V - np.eye(2)))))
    tol = 1e-12
    return _verdict(worst <= tol), worst, tol, "A = -a I and decoupled diagonal cases"


def check_integral_oracle(seed: int, n_models: int = 100, rtol: float = 1e-8):
    rng = check_rng(seed, "integral_oracle")
    worst = 0.0
    for _ in range(n_models):
        A = random_stable_matrix(rng)
        D = np.diag(np.abs(rng.standard_normal(4)))
        V = solve_lyapunov(A, D).V
        W = integral_oracle(A, D, rtol=rtol).V
        worst = max(worst, float(np.max(np.abs(W - V) / np.abs(V))))
    tol = 1e-6
    return (_verdict(worst <= tol), worst, tol,
            f"{n_models} random stable 4x4 models, entrywise relative error")


def tmsv(r: float) -> NDArray[np.float64]:
    """Two-mode squeezed vacuum covariance (vacuum variance 1/2)."""
    c, s = 0.5 * math.cosh(2 * r), 0.5 * math.sinh(2 * r)
    return np.block([[c * np.eye(2), s * np.diag([1.0, -1.0])],
                     [s * np.diag([1.0, -1.0]), c * np.eye(2)]])


def check_tmsv(seed: int):
    worst = 0.0
    for r in np.round(np.arange(0, 31) * 0.1, 10):
        worst = max(worst, abs(log_negativity(tmsv(float(r))).e_n - 2 * r))
    vac = log_negativity(0.5 * np.eye(4)).e_n
    tol = 1e-10
    return _verdict(worst <= tol and vac == 0.0), worst, tol, "r = 0, 0.1, ..., 3.0 and vacuum"


def check_stability_agreement(seed: int, draws: int = 10_000):
    rng = check_rng(seed, "stability_agreement")
    mismatches = decided = 0
    for _ in range(draws):
        w = 1.0
        gm = float(np.exp(rng.uniform(np.log(1e-8), np.log(1e-1))))
        k = float(np.exp(rng.uniform(np.log(1e-2), np.log(10.0))))
        delta = float(rng.uniform(-3.0, 3.0))
        g = float(np.exp(rng.uniform(np.log(1e-3), np.log(3.0))))
        A = np.array([[-gm / 4, w, 0, 0], [-w, -gm / 4, g, 0], [0, 0, -k, delta], [g, 0, -delta, -k]])
        margins, rh = routh_hurwitz_quartic(char_poly(A))
        c4, h4 = filter_margins(w, gm, k, delta, g)
        explicit = c4 > 0 and h4 > 0
        spectral = spectral_stable(A).stable
        values = list(margins.values()) + [c4, h4]
        if all(abs(v) > EPS_MARGIN for v in values):
            decided += 1
            if not (rh == explicit == spectral):
                mismatches += 1
    p = PhysicalParams()
    ref_stable = spectral_stable(build_filter(p, p.mech_freq).A).stable
    ok = mismatches == 0 and ref_stable and decided > 0
    return (_verdict(ok), mismatches, 0,
            f"{decided}/{draws} decidable draws; reference parameters stable={ref_stable}")


def check_filter_identity(seed: int, draws: int = 100):
    rng = check_rng(seed, "filter_identity")
    bad = 0
    for _ in range(draws):
        p = random_params(rng)
        f, i = build_filter(p, p.laser_detuning), build_inverse_filter(p, p.laser_detuning)
        bad += not (np.array_equal(f.A, i.A) and np.array_equal(f.D, i.D))
    return _verdict(bad == 0), bad, 0, f"{draws} random parameter draws, bitwise comparison"


def check_array_reduction(seed: int, draws: int = 100):
    rng = check_rng(seed, "array_reduction")
    worst = 0.0
    for _ in range(draws):
        p = random_params(rng).with_(cavity_count=1, hopping=float(rng.uniform(0, 1e8)),
                                     array_detuning=float(rng.uniform(-1e8, 1e8)))
        a, f = build_array(p), build_filter(p, p.laser_detuning)
        worst = max(worst, float(np.max(np.abs(a.A - f.A))), float(np.max(np.abs(a.D - f.D))))
    tol = 1e-12
    return _verdict(worst <= tol), worst, tol, f"{draws} random draws, max absolute difference"


def stochastic_agreement(seed: int, ensemble_size: int = 10_000, horizon_relax: float = 150.0,
                         jobs: int = 1) -> tuple[float, NDArray[np.float64]]:
    """Worst relative error on entries above 1% of ``max|V|`` (filter model, Delta = omega_m)."""
    p = PhysicalParams()
    model = build_filter(p, p.mech_freq)
    V = solve_lyapunov(model).V
    rate = -spectral_stable(model.A).max_real_eig
    est = stochastic_oracle(model, seed=seed, ensemble_size=ensemble_size,
                            horizon=horizon_relax / rate, jobs=jobs)
    dominant = np.abs(V) > 0.01 * np.max(np.abs(V))
    rel = np.abs(est.V - V)[dominant] / np.abs(V)[dominant]
    return float(rel.max()), est.V


def check_stochastic(seed: int):
    worst, _ = stochastic_agreement(seed)
    tol = 0.05
    return _verdict(worst <= tol), worst, tol, "ensemble 1e4, entries above 1% of max|V|"


def check_fig2_peak(seed: int):
    peaks = {k: peak_detuning(k)[0] for k in ("original", "filter")}
    ok = all(0.7 <= x <= 1.2 for x in peaks.values())
    return _verdict(ok), peaks, [0.7, 1.2], "argmax of E_N over Delta/omega_m in [0.05, 2]"


def check_robustness(seed: int):
    s_orig, s_filt = robustness_drop("original"), robustness_drop("filter")
    ratio = s_orig / s_filt
    return (_verdict(1.5 <= ratio <= 2.5), ratio, [1.5, 2.5],
            f"S(original)={s_orig:.6g}, S(filter)={s_filt:.6g}")


def check_persistence(seed: int):
    t_f, t_o = persistence_temperature("filter"), persistence_temperature("original")
    ratio = t_f / t_o
    ok = 7.0 <= t_f <= 13.0 and 1.6 <= ratio <= 2.4
    return (_verdict(ok), {"T_filter": t_f, "T_original": t_o, "ratio": ratio},
            {"T_filter": [7.0, 13.0], "ratio": [1.6, 2.4]}, "E_N < 1e-3 threshold, Delta = 0.5 omega_m")


def check_array_optimum(seed: int):
    v, j, e = array_optimum()
    ok = abs(v - 0.6) <= 0.1 and abs(j - 0.7) <= 0.1 and abs(e - 0.045) <= 0.015
    return (_verdict(ok), {"varpi": v, "J": j, "e_n": e},
            {"varpi": [0.5, 0.7], "J": [0.6, 0.8], "e_n": [0.03, 0.06]}, "61 x 61 grid, N = 2")


def check_presets(seed: int):
    """Simon equivalence, physicality and filter/inverse coincidence over all presets."""
    n_points = simon_bad = unphysical = 0
    inverse_gap = 0.0
    for name in preset_names():
        result = run_sweep(preset(name))
        for s, pts in zip(result.series, result.points):
            for r in pts:
                if not r.stable or r.status.startswith("error"):
                    continue
                n_points += 1
                unphysical += not (r.min_symplectic is not None and r.min_symplectic >= 0.5 - 1e-9)
                for pr in r.pairs:
                    if pr.e_n is None or (pr.e_n > 0) == pr.simon:
                        continue
                    # disagreement at xi = 1/2 to rounding lies inside the guard band
                    simon_bad += abs(2 * pr.xi - 1) > 1e-12
        if name == "fig3a" or name == "fig3b":
            f, i = result.e_n("filter"), result.e_n("inverse_filter")
            same = np.array_equal(np.isnan(f), np.isnan(i))
            inverse_gap = max(inverse_gap, 0.0 if same else math.inf,
                              float(np.nanmax(np.abs(f - i))) if np.any(~np.isnan(f)) else 0.0)
    ok = simon_bad == 0 and unphysical == 0 and inverse_gap == 0.0
    return (_verdict(ok), {"points": n_points, "simon_violations": simon_bad,
                           "unphysical": unphysical, "inverse_filter_gap": inverse_gap},
            {"simon_violations": 0, "unphysical": 0, "inverse_filter_gap": 0.0},
            "all preset sweeps")


FAST_CHECKS: dict[str, Callable[[int], tuple]] = {
    "a_analytic_lyapunov": check_analytic_lyapunov,
    "b_integral_oracle": check_integral_oracle,
    "c_tmsv_negativity": check_tmsv,
    "d_stability_agreement": check_stability_agreement,
    "e_filter_inverse_identity": check_filter_identity,
    "f_array_reduction": check_array_reduction,
}
FULL_CHECKS: dict[str, Callable[[int], tuple]] = {
    "g_stochastic_oracle": check_stochastic,
    "h_fig2_peak_location": check_fig2_peak,
    "i_fig2_robustness_ratio": check_robustness,
    "j_fig3_temperature_persistence": check_persistence,
    "k_fig6_optimum": check_array_optimum,
    "l_preset_sweeps": check_presets,
}


def run_validation(seed: int = 1, level: str = "fast") -> ValidationReport:
    """Run the validation suite.  Failures become report entries, never exceptions."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    checks = dict(FAST_CHECKS)
    if level == "full":
        checks.update(FULL_CHECKS)
    results = [_timed(name, lambda fn=fn: fn(seed)) for name, fn in sorted(checks.items())]
    return ValidationReport(seed=seed, level=level, checks=tuple(results))
