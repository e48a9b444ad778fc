"""Command-line interface: ``omsim point|sweep|validate|preset-list``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .exceptions import ConfigError, NumericalError, OmsimError
from .model import ModelKind
from .params import delta0_from_delta, derive_params, effective_coupling
from .presets import DESCRIPTIONS, preset_dict, preset_names
from .sweep import (build_for, config_from_dict, evaluate_model, resolve_jobs, run_sweep,
                    sweep_to_csv)
from .verification import LEVELS, run_validation

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text: str) -> list[int]:
    try:
        i, j = (int(x) for x in text.replace(",", "-").split("-"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a pair like 0-1, got {text!r}") from None
    return [i, j]


def _add_physical_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("physical parameters (override config values)")
    g.add_argument("--model", choices=[k.value for k in ModelKind])
    g.add_argument("--delta-over-omega-m", type=float, metavar="X",
                   help="detuning in units of omega_m (effective for single-cavity models)")
    g.add_argument("--delta", type=float, metavar="RAD_S", help="detuning in rad/s")
    g.add_argument("--power", type=float, metavar="W", help="drive power")
    g.add_argument("--temperature", type=float, metavar="K")
    g.add_argument("--gamma-m", type=float, metavar="RAD_S", help="mechanical damping rate")
    g.add_argument("--kappa", type=float, metavar="RAD_S", help="cavity decay rate")
    g.add_argument("--n", type=int, metavar="N", help="number of cavities (array model)")
    g.add_argument("--hopping-over-omega-m", type=float, metavar="X")
    g.add_argument("--varpi-over-omega-m", type=float, metavar="X")
    g.add_argument("--pair", type=_pair, action="append", metavar="I-J",
                   help="mode pair, 0 = mirror, j = cavity j (repeatable)")


def _physical_overrides(args) -> dict[str, Any]:
    mapping = {
        "delta_over_omega_m": "laser_detuning_omega_m_units",
        "delta": "laser_detuning_rad_per_s",
        "power": "drive_power",
        "temperature": "temperature",
        "gamma_m": "mech_damping_rad_per_s",
        "kappa": "cavity_decay_rad_per_s",
        "n": "cavity_count",
        "hopping_over_omega_m": "hopping_omega_m_units",
        "varpi_over_omega_m": "array_detuning_omega_m_units",
    }
    if args.delta is not None and args.delta_over_omega_m is not None:
        raise ConfigError("give either --delta or --delta-over-omega-m", field="delta")
    return {key: getattr(args, attr) for attr, key in mapping.items()
            if getattr(args, attr) is not None}


def _merge_physical(raw: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Overrides replace any spelling of the same field already in ``raw``."""
    def base(key):
        for suffix in ("_rad_per_s", "_omega_m_units"):
            if key.endswith(suffix):
                return key[: -len(suffix)]
        return key

    replaced = {base(k) for k in overrides}
    merged = {k: v for k, v in raw.items() if base(k) not in replaced}
    merged.update(overrides)
    return merged


def _load_raw(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}", field="config") from exc
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object", field="config")
    return raw


def _num(x: float | None) -> float | None:
    return None if x is None or math.isnan(x) else x


def point_report(raw: dict[str, Any]) -> tuple[dict[str, Any], int]:
    """Evaluate one configuration; returns the report and an exit code."""
    raw = {k: v for k, v in raw.items() if k != "sweep"}
    config = config_from_dict(raw)
    p = config.params
    kind = config.model
    derived = derive_params(p)
    model = build_for(kind, p)
    mf = model.mean_field
    result = evaluate_model(model, config.pairs)
    single = kind is not ModelKind.ARRAY
    report = {
        "model": kind.value,
        "physical": config.to_dict()["physical"],
        "derived": asdict(derived),
        "mean_field": {
            "amplitudes": [[a.real, a.imag] for a in mf.amplitudes],
            "q_s": mf.q_s,
            "p_s": mf.p_s,
            "delta": mf.delta,
            "delta0": delta0_from_delta(mf.delta, mf.alpha_s, derived.g0, p.mech_freq) if single
            else p.laser_detuning,
        },
        "coupling": {"G": [effective_coupling(mf.alpha_s.real, derived.g0),
                           effective_coupling(mf.alpha_s.imag, derived.g0)]},
        "stability": {"stable": result.stable, "max_real_eig": _num(result.max_real_eig),
                      "rh_conditions": result.rh_conditions},
        "lyapunov_residual": result.residual,
        "min_symplectic_eig": result.min_symplectic,
        "pairs": [{"pair": list(pr.pair), "e_n": pr.e_n, "xi": pr.xi, "sigma": pr.sigma,
                   "simon_entangled": pr.simon} for pr in result.pairs],
        "status": result.status,
    }
    code = EXIT_OK if result.status == "ok" else EXIT_NUMERICAL
    return report, code


def _print_point(report: dict[str, Any], out) -> None:
    d = report["derived"]
    mf = report["mean_field"]
    st = report["stability"]
    print(f"model            {report['model']}", file=out)
    print(f"omega_c          {d['omega_c']:.10g} rad/s", file=out)
    print(f"G0               {d['g0']:.10g} rad/s", file=out)
    print(f"|E|              {d['drive_magnitude']:.10g} 1/s", file=out)
    print(f"nbar             {d['nbar']:.10g}", file=out)
    print(f"Q                {d['quality_factor']:.6g}", file=out)
    print(f"finesse          {d['finesse']:.6g}", file=out)
    for k, (re, im) in enumerate(mf["amplitudes"], start=1):
        print(f"alpha_{k}          {re:.10g} {im:+.10g}j", file=out)
    print(f"q_s              {mf['q_s']:.10g}", file=out)
    print(f"delta            {mf['delta']:.10g} rad/s", file=out)
    print(f"delta0           {mf['delta0']:.10g} rad/s", file=out)
    print(f"G                {report['coupling']['G'][0]:.10g} rad/s", file=out)
    print(f"stable           {st['stable']}", file=out)
    print(f"max_real_eig     {st['max_real_eig']}", file=out)
    for name, value in st["rh_conditions"].items():
        print(f"  RH {name:<24s} {value:.6g}", file=out)
    if report["lyapunov_residual"] is not None:
        print(f"lyapunov_resid   {report['lyapunov_residual']:.3g}", file=out)
        print(f"min_symplectic   {report['min_symplectic_eig']:.10g}", file=out)
    for pr in report["pairs"]:
        i, j = pr["pair"]
        if pr["e_n"] is None:
            print(f"E_N[{i}-{j}]         n/a", file=out)
        else:
            print(f"E_N[{i}-{j}]         {pr['e_n']:.10g}  (xi={pr['xi']:.10g}, "
                  f"simon={pr['simon_entangled']})", file=out)
    print(f"status           {report['status']}", file=out)


def cmd_point(args) -> int:
    raw = _load_raw(args.config)
    raw["physical"] = _merge_physical(raw.get("physical", {}) or {}, _physical_overrides(args))
    if args.model:
        raw["model"] = args.model
    if args.pair:
        raw["pairs"] = args.pair
    report, code = point_report(raw)
    if args.json:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        _print_point(report, sys.stdout)
    return code


def cmd_sweep(args) -> int:
    if (args.preset is None) == (args.config is None):
        raise ConfigError("give exactly one of --preset or --config", field="preset")
    raw = preset_dict(args.preset) if args.preset else _load_raw(args.config)
    overrides = _physical_overrides(args)
    if overrides:
        raw["physical"] = _merge_physical(raw.get("physical", {}) or {}, overrides)
    if args.model:
        raw["model"] = args.model
    if args.pair:
        raw["pairs"] = args.pair
    if args.points is not None:
        raw.setdefault("sweep", {})["points"] = args.points
    config = config_from_dict(raw)
    jobs = resolve_jobs(args.jobs)
    result = run_sweep(config, jobs=jobs)
    stamp = None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = sweep_to_csv(result, timestamp=stamp)
    output = args.output or config.output
    if output in (None, "-"):
        sys.stdout.write(text)
        if args.plot:
            raise ConfigError("--plot needs a file output", field="output")
    else:
        Path(output).write_text(text, encoding="utf-8")
        if args.plot:
            from .plotting import plot_sweep

            plot_sweep(result, Path(output).with_suffix(".png"))
    n_bad = sum(1 for pts in result.points for r in pts if r.status.startswith("error"))
    if n_bad:
        print(f"warning: {n_bad} grid point(s) failed; see the status column", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    report = run_validation(seed=args.seed, level=args.level)
    text = report.to_json(timing=not args.no_timing)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for c in report.checks:
        print(f"{c.status:7s} {c.name}  measured={c.measured}", file=sys.stderr)
    return EXIT_OK if report.overall else EXIT_VALIDATION


def cmd_preset_list(args) -> int:
    for name in preset_names():
        print(f"{name:8s} {DESCRIPTIONS[name]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="omsim", description="Steady-state optomechanical entanglement "
                     "(all frequencies in rad/s).")
    parser.add_argument("--version", action="version", version=f"omsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("point", help="evaluate a single parameter point")
    p.add_argument("--config", help="JSON scenario file (sweep section ignored)")
    _add_physical_flags(p)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_point)

    s = sub.add_parser("sweep", help="evaluate a parameter grid and write CSV")
    s.add_argument("--preset", help="built-in scenario (see preset-list)")
    s.add_argument("--config", help="JSON scenario file")
    s.add_argument("--output", "-o", help="CSV path ('-' for stdout)")
    s.add_argument("--points", type=int, help="override the number of grid points")
    s.add_argument("--jobs", "-j", type=int, help="worker processes (default $OMSIM_JOBS or 1)")
    s.add_argument("--no-timestamp", action="store_true", help="omit the generation time line")
    s.add_argument("--plot", action="store_true", help="also write <output>.png")
    _add_physical_flags(s)
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="run the cross-method validation suite")
    v.add_argument("--level", choices=LEVELS, default="fast")
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--output", "-o", help="JSON report path (default stdout)")
    v.add_argument("--no-timing", action="store_true", help="omit runtime fields")
    v.set_defaults(func=cmd_validate)

    pl = sub.add_parser("preset-list", help="list built-in scenarios")
    pl.set_defaults(func=cmd_preset_list)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        print(f"omsim: configuration error{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"omsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OmsimError as exc:
        print(f"omsim: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"omsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
