"""Command-line front end.

Every subcommand writes ``<subcommand>.csv`` (data only, deterministic) and
``<subcommand>.json`` (config echo, derived quantities, validity flags,
timing) into the output directory.  Rates are in units of kappa by default.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.  Failures print
one line ``optosqueeze: error exit=<code> kind=<Exception> msg=<json string>``
to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import floquet, lindblad, optimize, rwa, spectra
from .errors import InvalidInput, NumericalFailure, SqueezeError, UnstableRatio
from .model import INFINITE, SystemParams, check_bad_cavity_condition, derive, params_from_cooperativity

OUT_ENV = "OPTOSQUEEZE_OUT"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2
FLOAT_FORMAT = "%.12g"

DEFAULTS = {
    "coop": 1e4,
    "ratio": None,
    "nth": 10.0,
    "gamma_ratio": 1e-4,
    "kappa": 1.0,
    "kappa_over_omega": 0.0,
    "backend": "rwa",
    "jobs": 1,
    "ratio_grid": "0.5:0.999:200:linear",
    "coop_grid": "1e2:1e8:13:log",
    "omega_grid": "-3:3:601:linear",
    "grid_points": 200,
    "ratio_tol": 1e-6,
}
_INT_KEYS = {"jobs", "grid_points"}
_STR_KEYS = {"backend", "ratio_grid", "coop_grid", "omega_grid"}

SUBCOMMANDS = (
    "steady", "sweep-ratio", "optimize", "spectrum", "floquet-sweep",
    "third-tone", "compare-lindblad", "check-validity", "bounds",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInput(message)


# -- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int
    log: bool

    def values(self) -> np.ndarray:
        if self.log:
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.count)
        return np.linspace(self.start, self.stop, self.count)


def parse_grid(text: str) -> GridSpec:
    """``start:stop:count[:log|linear]``."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise InvalidInput(f"grid {text!r} must be start:stop:count[:log|linear]")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InvalidInput(f"grid {text!r} has a non-numeric field") from None
    kind = parts[3] if len(parts) == 4 else "linear"
    if kind not in ("log", "linear"):
        raise InvalidInput(f"grid spacing must be 'log' or 'linear', got {kind!r}")
    if count < 1 or not stop >= start or (count > 1 and stop == start):
        raise InvalidInput(f"grid {text!r} must have count >= 1 and stop > start")
    if kind == "log" and start <= 0:
        raise InvalidInput(f"log grid {text!r} needs a positive start")
    return GridSpec(start, stop, count, kind == "log")


def _coerce(key: str, value):
    if value is None:
        return None
    if key in _STR_KEYS:
        return str(value)
    try:
        return int(value) if key in _INT_KEYS else float(value)
    except ValueError:
        raise InvalidInput(f"{key} = {value!r} is not a number") from None


def read_config(path: str | os.PathLike) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, unknown keys are rejected."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise InvalidInput(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Flags override config-file keys, which override defaults."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["kappa_over_omega"] < 0:
        raise InvalidInput("kappa_over_omega must be >= 0 (0 selects the RWA)")
    if cfg["jobs"] < 1:
        raise InvalidInput("jobs must be >= 1")
    optimize.get_backend(cfg["backend"])
    return cfg


def _omega_m(cfg) -> float:
    kw = cfg["kappa_over_omega"]
    return INFINITE if kw == 0 else cfg["kappa"] / kw


def _gamma_m(cfg) -> float:
    return cfg["gamma_ratio"] * cfg["kappa"]


def _params(cfg, ratio=None, third_tone=False) -> SystemParams:
    if ratio is None:
        ratio = cfg["ratio"]
    if ratio is None:
        ratio = rwa.optimal_ratio_analytic(cfg["coop"], cfg["nth"]).ratio
    return params_from_cooperativity(cfg["coop"], ratio, cfg["kappa"], _gamma_m(cfg), cfg["nth"],
                                     _omega_m(cfg), third_tone)


def _opt_kwargs(cfg) -> dict:
    return {"grid_points": cfg["grid_points"], "tol": cfg["ratio_tol"]}


# -- output -------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return FLOAT_FORMAT % v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, complex):
        return {"re": _jsonable(v.real), "im": _jsonable(v.imag)}
    return v


def _derived(params: SystemParams) -> dict:
    out = {"g_plus": params.g_plus, "g_minus": params.g_minus, "coop": params.coop,
           "omega_m": params.omega_m}
    try:
        d = derive(params)
        out.update(r=d.r, exp_minus_2r=d.exp_minus_2r, g_eff=d.g_eff, gamma_opt=d.gamma_opt)
    except UnstableRatio:
        out.update(r=math.inf, exp_minus_2r=0.0)
    return out


def _validity(params: SystemParams) -> dict:
    out = {"rwa": params.rwa, "rwa_stable": params.rwa_stable}
    if not params.rwa:
        v = check_bad_cavity_condition(params)
        out.update(bad_cavity_lhs=v.lhs, bad_cavity_rhs=v.rhs, bad_cavity_ok=v.satisfied)
    return out


# -- subcommands ----------------------------------------------------------------
# Each returns (header, rows, summary-dict) for one CSV and one JSON file.

def _report_row(rep):
    return [rep.var_x1, rep.var_x2, rep.n_eff, rep.beta_occupancy]


def _evaluate_report(backend: str, params: SystemParams):
    if backend == "rwa":
        return rwa.steady_state(params)
    if backend == "lindblad":
        return lindblad.lindblad_steady_state(params)
    return floquet.periodic_steady_state(params).report


def cmd_steady(cfg):
    p = _params(cfg)
    rep = _evaluate_report(cfg["backend"], p)
    result = {"ratio": p.ratio, "var_x1": rep.var_x1, "var_x2": rep.var_x2, "n_eff": rep.n_eff,
              "beta_occ": rep.beta_occupancy, "squeezing_db": rep.squeezing_db,
              "beyond_3db": rep.var_x1 < 0.5}
    header = ["ratio", "var_x1", "var_x2", "n_eff", "beta_occ"]
    return header, [[p.ratio] + _report_row(rep)], {"result": result, "params": p}


def cmd_sweep_ratio(cfg):
    ratios = parse_grid(cfg["ratio_grid"]).values()
    rows, failures = [], 0
    for x in ratios:
        p = _params(cfg, ratio=float(x))
        try:
            rows.append([x] + _report_row(_evaluate_report(cfg["backend"], p)))
        except NumericalFailure:
            failures += 1
            rows.append([x] + [math.nan] * 4)
    header = ["ratio", "var_x1", "var_x2", "n_eff", "beta_occ"]
    finite = [r for r in rows if math.isfinite(r[1])]
    best = min(finite, key=lambda r: r[1]) if finite else [math.nan, math.nan]
    return header, rows, {"result": {"failed_points": failures, "scan_min_ratio": best[0],
                                     "scan_min_var_x1": best[1]},
                          "params": _params(cfg, ratio=float(ratios[0]))}


def _sweep(cfg, backend, third_tone=False):
    coops = parse_grid(cfg["coop_grid"]).values()
    return optimize.sweep(backend, coops, kappa=cfg["kappa"], gamma_m=_gamma_m(cfg), n_th=cfg["nth"],
                          omega_m=_omega_m(cfg), third_tone=third_tone, jobs=cfg["jobs"],
                          **_opt_kwargs(cfg))


def cmd_optimize(cfg):
    main = _sweep(cfg, cfg["backend"])
    lind = _sweep(cfg, "lindblad")
    header = ["coop", "ratio_opt", "var_x1_opt", "n_eff", "ratio_analytic", "var_x1_analytic",
              "ratio_lindblad", "var_x1_lindblad", "n_eff_lindblad", "regime_warning", "status"]
    rows = []
    for a, b in zip(main, lind):
        ana = rwa.optimal_ratio_analytic(a.coop, cfg["nth"])
        rows.append([a.coop, a.ratio_opt, a.var_x1_opt, a.n_eff, ana.ratio, a.var_x1_analytic,
                     b.ratio_opt, b.var_x1_opt, b.n_eff, a.regime_warning, a.status])
    return header, rows, {"result": {"failed_points": sum(not r.ok for r in main)},
                          "timing_ms": [r.wall_time_ms for r in main]}


def cmd_spectrum(cfg):
    p = _params(cfg)
    w = parse_grid(cfg["omega_grid"]).values() * cfg["kappa"]
    ana = spectra.output_spectrum_analytic(p, w)
    num = spectra.output_spectrum_numeric(p, w)
    rows = [[wi, a, n] for wi, a, n in zip(w, ana.s, num.s)]
    weight = spectra.integrated_weight(p)
    exact = rwa.steady_state(p)
    peaks = ana.peaks()
    result = {"area": weight.area, "beta_occ_from_area": weight.beta_occ_inferred,
              "beta_occ_exact": exact.beta_occupancy, "peaks": list(peaks),
              "peak_splitting": float(peaks[-1] - peaks[0]) if len(peaks) > 1 else 0.0,
              "max_relative_mismatch": float(np.max(np.abs(num.s - ana.s) / np.abs(ana.s)))}
    return ["omega", "s_analytic", "s_numeric"], rows, {"result": result, "params": p}


def _require_bad_cavity(cfg):
    if cfg["kappa_over_omega"] == 0:
        raise InvalidInput("this subcommand needs kappa_over_omega > 0")


def cmd_floquet_sweep(cfg):
    _require_bad_cavity(cfg)
    recs = _sweep(cfg, "floquet")
    header = ["coop", "ratio_opt", "var_x1_opt", "var_x1_analytic", "n_eff", "bad_cavity_ok", "status"]
    rows = [[r.coop, r.ratio_opt, r.var_x1_opt, r.var_x1_analytic, r.n_eff, r.bad_cavity_ok, r.status]
            for r in recs]
    return header, rows, {"result": {"failed_points": sum(not r.ok for r in recs)},
                          "timing_ms": [r.wall_time_ms for r in recs]}


def cmd_third_tone(cfg):
    _require_bad_cavity(cfg)
    plain = _sweep(cfg, "floquet", third_tone=False)
    tone = _sweep(cfg, "floquet", third_tone=True)
    header = ["coop", "ratio_opt_g3_0", "var_x1_g3_0", "ratio_opt_g3_gp", "var_x1_g3_gp", "relative_change"]
    rows = [[a.coop, a.ratio_opt, a.var_x1_opt, b.ratio_opt, b.var_x1_opt,
             (b.var_x1_opt - a.var_x1_opt) / a.var_x1_opt] for a, b in zip(plain, tone)]
    return header, rows, {"result": {"failed_points": sum(not r.ok for r in plain + tone)}}


def cmd_compare_lindblad(cfg):
    coops = parse_grid(cfg["coop_grid"]).values()
    header = ["coop", "ratio", "var_x1_exact", "var_x1_lindblad", "relative_deviation",
              "n_eff_exact", "n_eff_lindblad"]
    rows = []
    for c in coops:
        ratio = cfg["ratio"] if cfg["ratio"] is not None else rwa.optimal_ratio_analytic(c, cfg["nth"]).ratio
        p = params_from_cooperativity(c, ratio, cfg["kappa"], _gamma_m(cfg), cfg["nth"])
        ex, li = rwa.steady_state(p), lindblad.lindblad_steady_state(p)
        rows.append([c, ratio, ex.var_x1, li.var_x1, (li.var_x1 - ex.var_x1) / ex.var_x1, ex.n_eff, li.n_eff])
    return header, rows, {}


def cmd_check_validity(cfg):
    _require_bad_cavity(cfg)
    coops = parse_grid(cfg["coop_grid"]).values()
    rows = []
    for c in coops:
        p = params_from_cooperativity(c, 0.0, cfg["kappa"], _gamma_m(cfg), cfg["nth"], _omega_m(cfg))
        v = check_bad_cavity_condition(p)
        rows.append([c, v.lhs, v.rhs, v.satisfied])
    return ["coop", "lhs", "rhs", "satisfied"], rows, {}


def cmd_bounds(cfg):
    coops = parse_grid(cfg["coop_grid"]).values()
    header = ["coop", "ratio", "var_x1_exact", "lower", "upper", "estimate", "beta_occ", "lower_ok", "upper_ok"]
    rows = []
    for c in coops:
        ratio = cfg["ratio"] if cfg["ratio"] is not None else rwa.optimal_ratio_analytic(c, cfg["nth"]).ratio
        p = params_from_cooperativity(c, ratio, cfg["kappa"], _gamma_m(cfg), cfg["nth"])
        rep = rwa.steady_state(p)
        b = spectra.squeezing_bounds(derive(p).r, rep.beta_occupancy, cfg["nth"])
        rows.append([c, ratio, rep.var_x1, b.lower, b.upper, b.estimate, rep.beta_occupancy,
                     b.lower <= rep.var_x1, rep.var_x1 <= b.upper])
    return header, rows, {}


COMMANDS = {
    "steady": cmd_steady,
    "sweep-ratio": cmd_sweep_ratio,
    "optimize": cmd_optimize,
    "spectrum": cmd_spectrum,
    "floquet-sweep": cmd_floquet_sweep,
    "third-tone": cmd_third_tone,
    "compare-lindblad": cmd_compare_lindblad,
    "check-validity": cmd_check_validity,
    "bounds": cmd_bounds,
}


# -- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' file; flags override it")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--coop", type=float, help="cooperativity 4 G-^2 / (kappa Gamma_M)")
    common.add_argument("--ratio", type=float, help="G+/G- (default: large-C analytic optimum)")
    common.add_argument("--nth", type=float, help="mechanical bath occupancy")
    common.add_argument("--gamma-ratio", dest="gamma_ratio", type=float, help="Gamma_M / kappa")
    common.add_argument("--kappa", type=float, help="cavity linewidth (rate unit)")
    common.add_argument("--kappa-over-omega", dest="kappa_over_omega", type=float,
                        help="kappa / Omega_M; 0 selects the rotating-wave approximation")
    common.add_argument("--backend", choices=sorted(optimize.BACKENDS))
    common.add_argument("--jobs", type=int, help="parallel workers for sweeps")
    common.add_argument("--ratio-grid", dest="ratio_grid", help="start:stop:count[:log|linear]")
    common.add_argument("--coop-grid", dest="coop_grid", help="start:stop:count[:log|linear]")
    common.add_argument("--omega-grid", dest="omega_grid",
                        help="detunings in units of kappa; write --omega-grid=-3:3:601 for negative starts")
    common.add_argument("--grid-points", dest="grid_points", type=int, help="optimizer scan points")
    common.add_argument("--ratio-tol", dest="ratio_tol", type=float, help="optimizer ratio tolerance")

    parser = _Parser(prog="optosqueeze", description="Dissipative mechanical squeezing calculator.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _fail(code: int, exc: BaseException) -> int:
    print(f"optosqueeze: error exit={code} kind={type(exc).__name__} msg={json.dumps(str(exc))}",
          file=sys.stderr)
    return code


def run(argv=None) -> int:
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        out_dir = Path(args.out or os.environ.get(OUT_ENV) or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        header, rows, extra = COMMANDS[args.subcommand](cfg)
    except (InvalidInput, UnstableRatio, ValueError) as exc:
        return _fail(EXIT_INVALID, exc)
    except (NumericalFailure, SqueezeError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERICAL, exc)
    except OSError as exc:
        return _fail(EXIT_INVALID, exc)

    stem = args.subcommand
    write_csv(out_dir / f"{stem}.csv", header, rows)
    summary = {"subcommand": stem, "config": cfg, "csv": f"{stem}.csv", "columns": header}
    params = extra.pop("params", None)
    if params is None:
        try:
            params = _params(cfg)
        except SqueezeError:
            params = None
    if params is not None:
        summary["derived"] = _derived(params)
        summary["validity"] = _validity(params)
    summary.update(extra)
    summary["timing"] = {"wall_time_s": time.perf_counter() - start}
    (out_dir / f"{stem}.json").write_text(json.dumps(_jsonable(summary), indent=2) + "\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
