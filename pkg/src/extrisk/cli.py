"""Command-line front end: config ingestion, scenario runs, CSV/JSON output.

Subcommands: eval, simulate, sweep, profile, sensitivity, table1, verify.
Configs are JSON (nested key/value); results are written atomically (temp
file + rename) as CSV tables or JSON documents. Exit codes: 0 success,
1 malformed config, 2 divergent grid point under --strict, 3 failed
simulation reproducibility self-check.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .model import (
    ConsumptionPath,
    DegenerateHazardError,
    DivergenceError,
    HazardParams,
    NoExtinctionError,
    UtilitySpec,
)
from .series import (
    DEFAULT_TOLERANCE,
    DYNASTY,
    Scenario,
    evaluate,
    known_extinction,
)
from .analysis import (
    belief_update_response,
    discount_factor,
    discount_profile,
    scenario_sweep,
)
from .simulate import (
    SimulationConfig,
    VERIFY_GRID,
    VERIFY_PATH,
    VERIFY_UTILITY,
    abm_smoothing_study,
    mc_eg_lineage,
    mc_eu_individual,
    mc_ev_dynasty,
    mc_ew_social,
    reproducibility_selfcheck,
    verify_oracle_grid,
)

OUT_DIR_ENV = "EXTRISK_OUT"

_CASE_NAMES = ("individual", "dynasty", "dynasty_theta", "lineage", "social_welfare")
_DEFAULT_CASES = tuple(Scenario(k) for k in _CASE_NAMES)


class ConfigError(Exception):
    """Malformed run configuration; the message carries the offending key path."""


# --- config parsing ----------------------------------------------------------


def _as_float_list(value: Any, where: str) -> List[float]:
    if isinstance(value, dict):
        spec = value.get("linspace")
        if spec is None or len(value) != 1:
            raise ConfigError(f"{where}: expected a list of numbers or {{'linspace': [lo, hi, k]}}")
        if not (isinstance(spec, list) and len(spec) == 3):
            raise ConfigError(f"{where}.linspace: expected [lo, hi, k]")
        lo, hi, k = spec
        if not isinstance(k, int) or k < 1:
            raise ConfigError(f"{where}.linspace: k must be a positive integer")
        return [float(x) for x in np.linspace(float(lo), float(hi), k)]
    if not isinstance(value, list):
        raise ConfigError(f"{where}: expected a list of numbers")
    out = []
    for i, x in enumerate(value):
        if not isinstance(x, (int, float)) or isinstance(x, bool):
            raise ConfigError(f"{where}[{i}]: expected a number, got {x!r}")
        out.append(float(x))
    return out


def _parse_grid(raw: Any) -> List[HazardParams]:
    if not isinstance(raw, dict):
        raise ConfigError("grid: expected an object with per-parameter value lists")
    known = {"m", "M", "b", "theta", "alpha", "N0"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"grid.{key}: unknown parameter (use {sorted(known)})")
    for required in ("m", "M"):
        if required not in raw:
            raise ConfigError(f"grid.{required}: required")
    axes = {
        "m": _as_float_list(raw["m"], "grid.m"),
        "M": _as_float_list(raw["M"], "grid.M"),
        "b": _as_float_list(raw.get("b", [0.0]), "grid.b"),
        "theta": _as_float_list(raw.get("theta", [1.0]), "grid.theta"),
        "alpha": _as_float_list(raw.get("alpha", [0.5]), "grid.alpha"),
        "N0": _as_float_list(raw.get("N0", [1.0]), "grid.N0"),
    }
    points = []
    for m, M, b, theta, alpha, n0 in itertools.product(
        axes["m"], axes["M"], axes["b"], axes["theta"], axes["alpha"], axes["N0"]
    ):
        try:
            points.append(HazardParams(m=m, M=M, b=b, theta=theta, alpha=alpha, N0=n0))
        except ValueError as exc:
            raise ConfigError(f"grid: invalid point (m={m}, M={M}, b={b}, theta={theta}, alpha={alpha}, N0={n0}): {exc}")
    return points


def _parse_cases(raw: Any) -> List[Scenario]:
    if raw is None:
        return list(_DEFAULT_CASES)
    if not isinstance(raw, list):
        raise ConfigError("cases: expected a list")
    cases = []
    for i, item in enumerate(raw):
        where = f"cases[{i}]"
        if isinstance(item, str):
            if item not in _CASE_NAMES:
                raise ConfigError(f"{where}: unknown case {item!r} (use {_CASE_NAMES} or {{'known_extinction': T}})")
            cases.append(Scenario(item))
        elif isinstance(item, dict) and set(item) == {"known_extinction"}:
            T = item["known_extinction"]
            if not isinstance(T, int) or T < 0:
                raise ConfigError(f"{where}.known_extinction: expected an integer T >= 0")
            cases.append(known_extinction(T))
        else:
            raise ConfigError(f"{where}: expected a case name or {{'known_extinction': T}}")
    return cases


def _parse_path(raw: Any) -> ConsumptionPath:
    if raw is None:
        return ConsumptionPath.constant(1.0)
    if not isinstance(raw, dict):
        raise ConfigError("path: expected an object")
    prefix = raw.get("prefix")
    if not isinstance(prefix, list) or not prefix:
        raise ConfigError("path.prefix: expected a non-empty list of positive numbers")
    tail = raw.get("tail", "constant")
    ratio = raw.get("ratio")
    extra = set(raw) - {"prefix", "tail", "ratio"}
    if extra:
        raise ConfigError(f"path.{extra.pop()}: unknown key")
    try:
        return ConsumptionPath(prefix=tuple(prefix), tail=tail, ratio=ratio)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"path: {exc}")


def _parse_utility(raw: Any) -> UtilitySpec:
    if raw is None:
        return UtilitySpec.log()
    if not isinstance(raw, dict) or "family" not in raw:
        raise ConfigError("utility: expected an object with a 'family' key")
    extra = set(raw) - {"family", "sigma"}
    if extra:
        raise ConfigError(f"utility.{extra.pop()}: unknown key")
    try:
        return UtilitySpec(family=raw["family"], sigma=raw.get("sigma"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"utility: {exc}")


def _parse_simulation(raw: Any) -> SimulationConfig:
    if raw is None:
        return SimulationConfig(replications=100_000, seed=0)
    if not isinstance(raw, dict):
        raise ConfigError("simulation: expected an object")
    known = {"replications", "seed", "horizon_cap", "mode", "offspring_law", "n0_values"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"simulation.{extra.pop()}: unknown key")
    kwargs = {k: raw[k] for k in known - {"n0_values"} if k in raw}
    try:
        return SimulationConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"simulation: {exc}")


@dataclass
class RunConfig:
    cases: List[Scenario]
    grid: List[HazardParams]
    path: ConsumptionPath
    utility: UtilitySpec
    tolerance: float
    simulation: SimulationConfig
    n0_values: List[int]
    horizon: int

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("top level: expected a JSON object")
        known = {"cases", "grid", "path", "utility", "tolerance", "simulation", "horizon"}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"{extra.pop()}: unknown top-level key")
        if "grid" not in raw:
            raise ConfigError("grid: required")
        tolerance = raw.get("tolerance", DEFAULT_TOLERANCE)
        if not isinstance(tolerance, (int, float)) or tolerance <= 0:
            raise ConfigError("tolerance: expected a positive number")
        horizon = raw.get("horizon", 2100)
        if not isinstance(horizon, int) or horizon < 1:
            raise ConfigError("horizon: expected a positive integer")
        sim_raw = raw.get("simulation")
        n0_values = [1, 10, 100, 1000]
        if isinstance(sim_raw, dict) and "n0_values" in sim_raw:
            vals = sim_raw["n0_values"]
            if not (isinstance(vals, list) and vals and all(isinstance(v, int) and v >= 1 for v in vals)):
                raise ConfigError("simulation.n0_values: expected a list of positive integers")
            n0_values = vals
        return cls(
            cases=_parse_cases(raw.get("cases")),
            grid=_parse_grid(raw["grid"]),
            path=_parse_path(raw.get("path")),
            utility=_parse_utility(raw.get("utility")),
            tolerance=float(tolerance),
            simulation=_parse_simulation(sim_raw),
            n0_values=n0_values,
            horizon=horizon,
        )

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}")
        return cls.from_dict(json.loads(text))


def _default_config() -> RunConfig:
    return RunConfig(
        cases=list(_DEFAULT_CASES),
        grid=list(VERIFY_GRID),
        path=VERIFY_PATH,
        utility=VERIFY_UTILITY,
        tolerance=DEFAULT_TOLERANCE,
        simulation=SimulationConfig(replications=100_000, seed=0),
        n0_values=[1, 10, 100, 1000],
        horizon=2100,
    )


def _load_config(args: argparse.Namespace, required: bool) -> RunConfig:
    if args.config is None:
        if required:
            raise ConfigError("--config PATH is required for this subcommand")
        cfg = _default_config()
    else:
        cfg = RunConfig.from_file(args.config)
    if args.tolerance is not None:
        if args.tolerance <= 0:
            raise ConfigError("--tolerance must be > 0")
        cfg.tolerance = args.tolerance
    sim_kwargs = {}
    if args.reps is not None:
        sim_kwargs["replications"] = args.reps
    if args.seed is not None:
        sim_kwargs["seed"] = args.seed
    if sim_kwargs:
        try:
            cfg.simulation = replace(cfg.simulation, **sim_kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc))
    return cfg


# --- output ------------------------------------------------------------------


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _atomic_write(target: Path, text: str) -> None:
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_rows(
    out_dir: Path, name: str, columns: Sequence[str], rows: List[Dict[str, Any]],
    fmt: str,
) -> List[Path]:
    written = []
    if fmt in ("csv", "both"):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(col)) for col in columns])
        target = out_dir / f"{name}.csv"
        _atomic_write(target, buf.getvalue())
        written.append(target)
    if fmt in ("json", "both"):
        target = out_dir / f"{name}.json"
        _atomic_write(target, json.dumps(rows, indent=2) + "\n")
        written.append(target)
    return written


def _param_cells(p: HazardParams) -> Dict[str, Any]:
    return {"m": p.m, "M": p.M, "b": p.b, "theta": p.theta, "alpha": p.alpha, "N0": p.N0, "n": p.n}


# --- subcommands ---------------------------------------------------------------

_EVAL_COLUMNS = [
    "m", "M", "b", "theta", "alpha", "N0", "n", "case",
    "value", "tail_bound", "truncation_index", "converged", "status",
]


def _cmd_eval(args: argparse.Namespace, out_dir: Path) -> int:
    cfg = _load_config(args, required=True)
    rows = []
    divergent = False
    for params in cfg.grid:
        for case in cfg.cases:
            row = {**_param_cells(params), "case": case.label()}
            try:
                res = evaluate(case, params, cfg.path, cfg.utility, cfg.tolerance)
                row.update(
                    value=res.value, tail_bound=res.tail_bound,
                    truncation_index=res.truncation_index, converged=res.converged,
                    status="ok",
                )
            except DivergenceError as exc:
                divergent = True
                row.update(value=None, tail_bound=None, truncation_index=None,
                           converged=None, status=f"divergent: {exc}")
            except (NoExtinctionError, DegenerateHazardError, ValueError) as exc:
                row.update(value=None, tail_bound=None, truncation_index=None,
                           converged=None, status=f"rejected: {exc}")
            rows.append(row)
    for f in _write_rows(out_dir, "eval", _EVAL_COLUMNS, rows, args.format):
        print(f"wrote {f}")
    return 2 if (args.strict and divergent) else 0


_SWEEP_COLUMNS = [
    "m", "M", "b", "theta", "alpha", "N0", "n", "case",
    "factor", "rate_simple", "rate_log", "factor_n0", "constant_factor",
    "finite", "finiteness_product", "finiteness_margin", "status",
    "value", "tail_bound", "truncation_index", "converged",
]


def _cmd_sweep(args: argparse.Namespace, out_dir: Path) -> int:
    cfg = _load_config(args, required=True)
    rows = [r.to_dict() for r in scenario_sweep(cfg.grid, cfg.cases, cfg.path, cfg.utility, cfg.tolerance)]
    for f in _write_rows(out_dir, "sweep", _SWEEP_COLUMNS, rows, args.format):
        print(f"wrote {f}")
    divergent = any(r["status"] == "divergent" for r in rows)
    return 2 if (args.strict and divergent) else 0


_TABLE1_COLUMNS = ["m", "M", "b", "theta", "alpha", "N0", "n", "case", "factor", "factor_n0"]


def _cmd_table1(args: argparse.Namespace, out_dir: Path) -> int:
    cfg = _load_config(args, required=False)
    rows = []
    for params in cfg.grid:
        for case in _DEFAULT_CASES:
            rep = discount_factor(case, params)
            rows.append({**_param_cells(params), "case": case.label(),
                         "factor": rep.factor, "factor_n0": rep.factor_n0})
    for f in _write_rows(out_dir, "table1", _TABLE1_COLUMNS, rows, args.format):
        print(f"wrote {f}")
    return 0


_PROFILE_COLUMNS = ["m", "M", "b", "theta", "alpha", "case", "parameter", "t", "value"]


def _cmd_profile(args: argparse.Namespace, out_dir: Path) -> int:
    cfg = _load_config(args, required=False)
    rows = []
    for params in cfg.grid:
        if params.b <= 0.0:
            continue
        prof = discount_profile(params, cfg.horizon)
        base = {**_param_cells(params)}
        base.pop("N0")
        base.pop("n")
        for t, r in enumerate(prof.ratios):
            rows.append({**base, "case": "social_welfare", "parameter": "weight_ratio",
                         "t": t, "value": float(r)})
        rows.append({**base, "case": "social_welfare", "parameter": "long_run_factor",
                     "t": None, "value": prof.long_run})
        rows.append({**base, "case": "dynasty", "parameter": "factor",
                     "t": None, "value": discount_factor(DYNASTY, params).factor})
    for f in _write_rows(out_dir, "profile", _PROFILE_COLUMNS, rows, args.format):
        print(f"wrote {f}")
    return 0


_SENSITIVITY_COLUMNS = [
    "m", "M", "b", "theta", "alpha", "case", "regime",
    "d_factor_d_M", "d_factor_d_m", "fd_d_factor_d_M", "fd_d_factor_d_m",
]


def _cmd_sensitivity(args: argparse.Namespace, out_dir: Path) -> int:
    cfg = _load_config(args, required=False)
    step = args.step
    rows = []
    for params in cfg.grid:
        base = {**_param_cells(params)}
        base.pop("N0")
        base.pop("n")
        for case in cfg.cases:
            try:
                rep = belief_update_response(case, params, dM=step, dm=step)
            except ValueError as exc:
                raise ConfigError(f"sensitivity at m={params.m}, M={params.M}: {exc}")
            for reg in (rep.b_fixed, rep.n_fixed):
                rows.append({
                    **base, "case": case.label(), "regime": reg.regime,
                    "d_factor_d_M": reg.d_factor_d_M,
                    "d_factor_d_m": reg.d_factor_d_m,
                    "fd_d_factor_d_M": reg.fd_d_factor_d_M,
                    "fd_d_factor_d_m": reg.fd_d_factor_d_m,
                })
    for f in _write_rows(out_dir, "sensitivity", _SENSITIVITY_COLUMNS, rows, args.format):
        print(f"wrote {f}")
    return 0


_SIMULATE_COLUMNS = [
    "m", "M", "b", "theta", "alpha", "N0", "n", "case",
    "analytic", "mc_mean", "mc_se", "abs_error", "within_3se",
    "replications", "truncated_mass", "status",
]
_ABM_COLUMNS = [
    "m", "M", "b", "theta", "alpha", "n0", "runs", "mean_abs_gap",
    "die_off_frequency", "mean_welfare_per_capita", "smoothed_mean_per_capita",
    "cap_hit_fraction",
]


def _cmd_simulate(args: argparse.Namespace, out_dir: Path) -> int:
    cfg = _load_config(args, required=True)
    if not reproducibility_selfcheck():
        print("simulation reproducibility self-check FAILED", file=sys.stderr)
        return 3
    sim = cfg.simulation
    if sim.mode == "agent":
        rows = []
        for params in cfg.grid:
            study = abm_smoothing_study(params, cfg.path, cfg.utility, cfg.n0_values, sim)
            base = {**_param_cells(params)}
            base.pop("N0")
            base.pop("n")
            for r in study:
                rows.append({
                    **base, "n0": r.n0, "runs": r.runs,
                    "mean_abs_gap": r.mean_abs_gap,
                    "die_off_frequency": r.die_off_frequency,
                    "mean_welfare_per_capita": r.mean_welfare_per_capita,
                    "smoothed_mean_per_capita": r.smoothed_mean_per_capita,
                    "cap_hit_fraction": r.cap_hit_fraction,
                })
        for f in _write_rows(out_dir, "simulate", _ABM_COLUMNS, rows, args.format):
            print(f"wrote {f}")
        return 0
    rows = []
    divergent = False
    for params in cfg.grid:
        for case in cfg.cases:
            row = {**_param_cells(params), "case": case.label(), "replications": sim.replications}
            try:
                analytic = evaluate(case, params, cfg.path, cfg.utility, cfg.tolerance).value
                if case.kind == "known_extinction":
                    row.update(analytic=analytic, mc_mean=None, mc_se=None,
                               abs_error=None, within_3se=None, truncated_mass=None,
                               status="deterministic (no sampling)")
                else:
                    est = _MC_BY_KIND[case.kind](params, cfg.path, cfg.utility, sim)
                    err = abs(est.mean - analytic)
                    row.update(analytic=analytic, mc_mean=est.mean, mc_se=est.standard_error,
                               abs_error=err,
                               within_3se=err <= 3.0 * est.standard_error + 1e-12,
                               truncated_mass=est.truncated_mass, status="ok")
            except DivergenceError as exc:
                divergent = True
                row.update(analytic=None, mc_mean=None, mc_se=None, abs_error=None,
                           within_3se=None, truncated_mass=None, status=f"divergent: {exc}")
            except (NoExtinctionError, DegenerateHazardError, ValueError) as exc:
                row.update(analytic=None, mc_mean=None, mc_se=None, abs_error=None,
                           within_3se=None, truncated_mass=None, status=f"rejected: {exc}")
            rows.append(row)
    for f in _write_rows(out_dir, "simulate", _SIMULATE_COLUMNS, rows, args.format):
        print(f"wrote {f}")
    return 2 if (args.strict and divergent) else 0


_MC_BY_KIND = {
    "individual": mc_eu_individual,
    "dynasty": lambda p, path, u, cfg: mc_ev_dynasty(p, path, u, 1.0, cfg),
    "dynasty_theta": lambda p, path, u, cfg: mc_ev_dynasty(p, path, u, None, cfg),
    "lineage": mc_eg_lineage,
    "social_welfare": mc_ew_social,
}


def _cmd_verify(args: argparse.Namespace, out_dir: Path) -> int:
    if not reproducibility_selfcheck():
        print("simulation reproducibility self-check FAILED", file=sys.stderr)
        return 3
    reps = args.reps if args.reps is not None else 100_000
    seed = args.seed if args.seed is not None else 20240613
    rows = verify_oracle_grid(replications=reps, seed=seed)
    failures = 0
    for r in rows:
        status = "PASS" if r.ok else "FAIL"
        failures += 0 if r.ok else 1
        se = r.mc_se if r.mc_se > 0 else float("nan")
        print(f"{status} {r.functional:<17s} point={r.point:<2d} "
              f"analytic={r.analytic:.6f} mc={r.mc_mean:.6f} |err|/se={r.abs_error / se:.2f}")
    print(f"verify: {len(rows)} comparisons, {failures} outside 3 SE "
          f"(reps={reps}, seed={seed})")
    for f in _write_rows(out_dir, "verify", list(rows[0].to_dict().keys()) if rows else [],
                         [r.to_dict() for r in rows], args.format):
        print(f"wrote {f}")
    return 0


# --- entry point ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extrisk",
        description="Expected-utility discounting under mortality and extinction hazards",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("eval", "evaluate the analytic functionals over a config grid"),
        ("simulate", "Monte Carlo / agent-based runs over a config grid"),
        ("sweep", "factor + series + finiteness table over a config grid"),
        ("profile", "time-varying social-welfare weight-ratio profile"),
        ("sensitivity", "factor derivatives wrt perceived hazards, both regimes"),
        ("table1", "closed-form discount factors and their n=0 restriction"),
        ("verify", "analytic vs Monte Carlo agreement over the built-in grid"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", metavar="PATH", default=None, help="JSON run configuration")
        p.add_argument("--out", metavar="DIR", default=None,
                       help=f"output directory (default ${OUT_DIR_ENV} or '.')")
        p.add_argument("--seed", type=int, default=None, help="override the simulation seed")
        p.add_argument("--reps", type=int, default=None, help="override the replication count")
        p.add_argument("--tolerance", type=float, default=None, help="series tolerance override")
        p.add_argument("--strict", action="store_true", help="exit 2 on any divergent grid point")
        p.add_argument("--format", choices=("csv", "json", "both"), default="both",
                       help="output file format(s)")
        if name == "sensitivity":
            p.add_argument("--step", type=float, default=1e-6, help="finite-difference step")
    return parser


_DISPATCH = {
    "eval": _cmd_eval,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "profile": _cmd_profile,
    "sensitivity": _cmd_sensitivity,
    "table1": _cmd_table1,
    "verify": _cmd_verify,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out or os.environ.get(OUT_DIR_ENV) or ".")
    try:
        return _DISPATCH[args.command](args, out_dir)
    except json.JSONDecodeError as exc:
        print(f"config error: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
