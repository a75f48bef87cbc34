"""Command-line surface: config ingestion, experiment execution, sweeps,
oracle verification, and plot-ready data emission.

Configuration comes from a JSON file (--config) with inline flags taking
precedence.  Every run resolves to a normalized config dict whose SHA-256
hash stamps the output files, making reruns byte-identical and sweeps
resumable.  Exit codes: 0 ok, 2 config error, 3 validation error,
4 internal-consistency error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import oracle
from .couplings import CouplingMatrix, couplings_from_modes, equal_couplings, load_couplings, load_modes
from .engine import EvolutionSpec, PlainIsing, SpinEcho, full_density_matrix
from .errors import ConfigError, ConsistencyError, ScatterSpinError, ValidationError
from .experiments import (
    correlator_curves,
    ghz_fidelity,
    qaoa_single_layer,
    spin_squeezing,
)
from .rates import CaLaserParams, ScatteringRates, ca_stark_and_rates

ARTIFACT_VERSION = 1
TWO_PI = 2.0 * math.pi

EXPERIMENTS = ("ghz", "correlations", "squeezing", "qaoa", "oracle-verify", "rates")

log = logging.getLogger("scatterspin")


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return doc


def normalize_config(doc: dict) -> dict:
    """Validate and normalize a run configuration.

    Exactly one couplings source and one rates source must be present
    (except for the 'rates' experiment, which needs no couplings).
    """
    experiment = doc.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose one of {EXPERIMENTS}")
    units = doc.get("units", "rad")
    if units not in ("rad", "hz"):
        raise ConfigError(f"units must be 'rad' or 'hz', got {units!r}")

    couplings = doc.get("couplings") or {}
    sources = [k for k in ("equal", "file", "modes_file") if k in couplings]
    if experiment != "rates":
        if len(sources) != 1:
            raise ConfigError(
                "exactly one couplings source required: 'equal', 'file' or 'modes_file'"
            )

    rates = doc.get("rates") or {}
    rate_sources = [k for k in ("zero", "explicit", "ca_laser") if k in rates]
    if len(rate_sources) != 1:
        raise ConfigError(
            "exactly one rates source required: 'zero', 'explicit' or 'ca_laser'"
        )

    mode = doc.get("mode", "spin-echo")
    if mode not in ("plain", "spin-echo"):
        raise ConfigError(f"mode must be 'plain' or 'spin-echo', got {mode!r}")

    sweep = doc.get("sweep")
    if sweep is not None:
        for key in ("parameter", "min", "max", "points"):
            if key not in sweep:
                raise ConfigError(f"sweep is missing {key!r}")
        if sweep["parameter"] not in ("n", "j", "t"):
            raise ConfigError(f"sweep parameter must be 'n', 'j' or 't', got {sweep['parameter']!r}")
        if float(sweep["min"]) > float(sweep["max"]):
            raise ConfigError("sweep axis bounds inverted")
        if int(sweep["points"]) < 1:
            raise ConfigError("sweep needs at least 1 point")

    normalized = {
        "experiment": experiment,
        "couplings": couplings,
        "rates": rates,
        "mode": mode,
        "units": units,
        "seed": int(doc.get("seed", 0)),
    }
    for key in ("sweep", "m", "times", "grid_points", "scan", "cases", "n", "subset_average"):
        if doc.get(key) is not None:
            normalized[key] = doc[key]
    return normalized


def config_hash(config: dict) -> str:
    """Stable hash of the physics config (output destination excluded)."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def resolve_rates(config: dict) -> ScatteringRates:
    spec = config["rates"]
    if "zero" in spec:
        return ScatteringRates()
    if "explicit" in spec:
        return ScatteringRates(**spec["explicit"])
    params = dict(spec["ca_laser"])
    if "power" not in params or "waist" not in params:
        raise ConfigError("ca_laser rates need at least 'power' and 'waist'")
    return ca_stark_and_rates(CaLaserParams(**params))[1]


def resolve_couplings(config: dict, n_override: int | None = None) -> CouplingMatrix:
    spec = config["couplings"]
    factor = TWO_PI if config["units"] == "hz" else 1.0
    if "equal" in spec:
        n = int(n_override if n_override is not None else spec["equal"]["n"])
        return equal_couplings(n, float(spec["equal"]["j"]) * factor)
    if n_override is not None:
        raise ConfigError("an ion-count sweep needs the 'equal' couplings source")
    if "file" in spec:
        return load_couplings(spec["file"])
    return couplings_from_modes(load_modes(spec["modes_file"]))


# ----------------------------------------------------------------------
# experiment execution -> rows
# ----------------------------------------------------------------------

GHZ_COLUMNS = [
    "n", "t_cat", "f_scatter", "f_unequal", "f_total",
    "f_postselect", "p_no_leak", "overhead",
]
CORRELATION_COLUMNS = [
    "t", "t_arm", "exact", "exact_perp", "model", "model_perp",
    "single_ion_bound", "p_leak",
]
SQUEEZING_COLUMNS = ["coupling_angle", "xi2", "xi2_noiseless"]
QAOA_COLUMNS = ["gamma", "beta", "cost", "cost_noiseless"]
RATES_COLUMNS = ["quantity", "value"]
VERIFY_COLUMNS = ["case", "n", "mode", "max_abs_diff"]


def _ghz_rows(config: dict, n_override=None, j_override=None) -> tuple[list[dict], dict]:
    couplings = resolve_couplings(config, n_override)
    if j_override is not None:
        couplings = equal_couplings(couplings.n, j_override)
    rates = resolve_rates(config)
    mode = "spin_echo" if config["mode"] == "spin-echo" else "plain"
    res = ghz_fidelity(couplings.n, couplings, rates, mode=mode)
    row = {k: getattr(res, k) for k in GHZ_COLUMNS}
    return [row], row


def _times_grid(config: dict, couplings: CouplingMatrix) -> np.ndarray:
    times = config.get("times")
    jbar = couplings.mean_j
    if times is None:
        if jbar <= 0:
            raise ConfigError("cannot build a default time grid without a positive mean coupling")
        t_cat = math.pi * couplings.n / (4.0 * jbar)
        return np.linspace(t_cat / 20.0, t_cat, 20)
    if isinstance(times, list):
        return np.asarray(times, dtype=float)
    return np.linspace(float(times["min"]), float(times["max"]), int(times["points"]))


def _correlation_rows(config: dict, n_override=None, times=None) -> tuple[list[dict], dict]:
    couplings = resolve_couplings(config, n_override)
    if couplings.variance_j != 0.0:
        raise ConfigError("the correlations experiment requires equal couplings")
    rates = resolve_rates(config)
    if config["mode"] != "spin-echo":
        raise ConfigError("the correlations experiment runs in spin-echo mode")
    m = int(config.get("m", 1))
    grid = times if times is not None else _times_grid(config, couplings)
    curve = correlator_curves(
        couplings.n, m, rates, couplings.mean_j, grid,
        subset_average=bool(config.get("subset_average", False)),
    )
    rows = []
    for i, t in enumerate(curve.times):
        rows.append(
            {
                "t": float(t),
                "t_arm": 2.0 * float(t),
                "exact": float(curve.exact[i]),
                "exact_perp": float(curve.exact_perp[i]),
                "model": float(curve.model[i]),
                "model_perp": float(curve.model_perp[i]),
                "single_ion_bound": float(curve.single_ion_bound[i]),
                "p_leak": float(curve.p_leak[i]),
            }
        )
    summary = {"n": couplings.n, "m": m, "axis": curve.axis}
    return rows, summary


def _scan_grid(config: dict, n: int):
    scan = config.get("scan")
    if scan is None:
        return None
    if isinstance(scan, list):
        return np.asarray(scan, dtype=float)
    return np.geomspace(float(scan["min"]), float(scan["max"]), int(scan["points"]))


def _squeezing_rows(config: dict, n_override=None, j_override=None) -> tuple[list[dict], dict]:
    couplings = resolve_couplings(config, n_override)
    if j_override is not None:
        couplings = equal_couplings(couplings.n, j_override)
    rates = resolve_rates(config)
    mode = "spin_echo" if config["mode"] == "spin-echo" else "plain"
    res = spin_squeezing(
        couplings.n, rates, couplings, scan=_scan_grid(config, couplings.n), mode=mode
    )
    rows = [
        {"coupling_angle": x, "xi2": v, "xi2_noiseless": v0}
        for (x, v), (_, v0) in zip(res.coupling_scan, res.noiseless_scan)
    ]
    summary = {
        "n": res.n,
        "optimal_coupling_angle": res.optimal[0],
        "xi2": res.optimal[1],
        "noiseless_coupling_angle": res.noiseless_optimal[0],
        "xi2_noiseless": res.noiseless_optimal[1],
        "p_leak_at_opt": res.p_leak_at_opt,
    }
    return rows, summary


def _qaoa_rows(config: dict, n_override=None, j_override=None) -> tuple[list[dict], dict]:
    couplings = resolve_couplings(config, n_override)
    if j_override is not None:
        couplings = equal_couplings(couplings.n, j_override)
    rates = resolve_rates(config)
    mode = "spin_echo" if config["mode"] == "spin-echo" else "plain"
    res = qaoa_single_layer(
        couplings.n, rates, couplings, grid_points=int(config.get("grid_points", 101)),
        mode=mode,
    )
    rows = []
    for gi, g in enumerate(res.gammas):
        for bi, b in enumerate(res.betas):
            rows.append(
                {
                    "gamma": float(g),
                    "beta": float(b),
                    "cost": float(res.costs[gi, bi]),
                    "cost_noiseless": float(res.noiseless_costs[gi, bi]),
                }
            )
    summary = {
        "n": res.n,
        "best_cost": res.best_cost,
        "best_gamma": res.best_params[0],
        "best_beta": res.best_params[1],
        "noiseless_best_cost": res.noiseless_best_cost,
    }
    return rows, summary


def _rates_rows(config: dict) -> tuple[list[dict], dict]:
    spec = config["rates"]
    if "ca_laser" not in spec:
        rates = resolve_rates(config)
        rows = [
            {"quantity": name, "value": getattr(rates, name)}
            for name in ("gamma_01", "gamma_10", "gamma_0g", "gamma_1g", "gamma_el")
        ]
        return rows, {"total": rates.total}
    params = CaLaserParams(**spec["ca_laser"])
    stark, rates = ca_stark_and_rates(params)
    total = rates.total
    rows = [{"quantity": "stark_shift", "value": stark}]
    for name in ("gamma_01", "gamma_10", "gamma_0g", "gamma_1g", "gamma_el"):
        rows.append({"quantity": name, "value": getattr(rates, name)})
    rows.append({"quantity": "total_scattering", "value": total})
    summary = {
        "stark_shift": stark,
        "total": total,
        "leak_percent": 100.0 * rates.gamma_0g / total if total else 0.0,
        "elastic_percent": 100.0 * rates.gamma_el / total if total else 0.0,
        "raman_percent": 100.0 * rates.gamma_01 / total if total else 0.0,
    }
    return rows, summary


def oracle_verify(
    n: int, seed: int, cases: int = 5, mode: str = "plain"
) -> tuple[list[dict], float]:
    """Randomized engine-versus-integrator comparison over full density matrices."""
    rng = np.random.default_rng(seed)
    rows = []
    worst = 0.0
    for case in range(cases):
        mat = rng.uniform(-2.0, 2.0, (n, n))
        mat = 0.5 * (mat + mat.T)
        np.fill_diagonal(mat, 0.0)
        couplings = CouplingMatrix(n, mat)
        if mode == "spin-echo":
            rates = ScatteringRates(
                gamma_01=rng.uniform(0.1, 0.8),
                gamma_0g=rng.uniform(0.1, 1.2),
                gamma_el=rng.uniform(0.1, 0.8),
            )
            t_arm = rng.uniform(0.2, 1.5)
            spec = EvolutionSpec(couplings, rates, SpinEcho(t_arm))
            rho_oracle = oracle.spin_echo_sequence(
                oracle.product_plus_density(n), couplings, rates, t_arm
            ).data
        else:
            rates = ScatteringRates(*rng.uniform(0.1, 1.2, 5))
            t = rng.uniform(0.2, 1.5)
            spec = EvolutionSpec(couplings, rates, PlainIsing(t))
            gen = oracle.build_lindbladian(couplings, rates, "ising")
            dt = oracle.default_dt(couplings, rates, t)
            rho_oracle = oracle.integrate(
                oracle.product_plus_density(n), gen,
                oracle.IntegratorConfig(dt=dt, t_final=t),
            ).data
        diff = float(np.abs(full_density_matrix(spec) - rho_oracle).max())
        worst = max(worst, diff)
        rows.append({"case": case, "n": n, "mode": mode, "max_abs_diff": diff})
    return rows, worst


def _verify_rows(config: dict) -> tuple[list[dict], dict]:
    n = int(config.get("n", 3))
    cases = int(config.get("cases", 5))
    mode = config["mode"]
    rows, worst = oracle_verify(n, config["seed"], cases=cases, mode=mode)
    return rows, {"max_abs_diff": worst, "passed": worst <= 1e-8}


_EXECUTORS = {
    "ghz": _ghz_rows,
    "correlations": _correlation_rows,
    "squeezing": _squeezing_rows,
    "qaoa": _qaoa_rows,
}

_COLUMNS = {
    "ghz": GHZ_COLUMNS,
    "correlations": CORRELATION_COLUMNS,
    "squeezing": SQUEEZING_COLUMNS,
    "qaoa": QAOA_COLUMNS,
    "rates": RATES_COLUMNS,
    "oracle-verify": VERIFY_COLUMNS,
}


# ----------------------------------------------------------------------
# sweeps
# ----------------------------------------------------------------------

_SWEEP_SUMMARY_COLUMNS = {
    "ghz": GHZ_COLUMNS,
    "squeezing": ["n", "optimal_coupling_angle", "xi2", "xi2_noiseless", "p_leak_at_opt"],
    "qaoa": ["n", "best_cost", "best_gamma", "best_beta", "noiseless_best_cost"],
}


def _sweep_axis(config: dict) -> list:
    sweep = config["sweep"]
    lo, hi, points = float(sweep["min"]), float(sweep["max"]), int(sweep["points"])
    if sweep["parameter"] == "n":
        values = sorted(set(int(round(v)) for v in np.linspace(lo, hi, points)))
        return values
    return [float(v) for v in np.linspace(lo, hi, points)]


def _sweep_point(payload: tuple) -> dict:
    """One sweep work item (top-level so a process pool can pickle it)."""
    config, parameter, value = payload
    experiment = config["experiment"]
    if parameter == "n":
        _, summary = _EXECUTORS[experiment](config, n_override=int(value))
    else:  # "j"
        factor = TWO_PI if config["units"] == "hz" else 1.0
        _, summary = _EXECUTORS[experiment](config, j_override=float(value) * factor)
    row = {parameter: value}
    row.update(summary)
    return row


def run_sweep(config: dict, jobs: int = 1) -> tuple[list[dict], list[str]]:
    experiment = config["experiment"]
    parameter = config["sweep"]["parameter"]
    if parameter == "t":
        if experiment != "correlations":
            raise ConfigError("a time sweep is only defined for the correlations experiment")
        sweep = config["sweep"]
        grid = np.linspace(float(sweep["min"]), float(sweep["max"]), int(sweep["points"]))
        rows, _ = _correlation_rows(config, times=grid)
        return rows, CORRELATION_COLUMNS
    if experiment not in _SWEEP_SUMMARY_COLUMNS:
        raise ConfigError(f"sweeping {parameter!r} is not defined for {experiment!r}")
    values = _sweep_axis(config)
    payloads = [(config, parameter, v) for v in values]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]
    columns = [parameter] + [
        c for c in _SWEEP_SUMMARY_COLUMNS[experiment] if c != parameter
    ]
    return rows, columns


# ----------------------------------------------------------------------
# output
# ----------------------------------------------------------------------


def _format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(rows: list[dict], columns: list[str], chash: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_value(row.get(c, "")) for c in columns])
    buf.write(f"# config_hash={chash} artifact_version={ARTIFACT_VERSION}\n")
    return buf.getvalue()


def render_json(rows: list[dict], columns: list[str], chash: str, summary: dict | None) -> str:
    doc = {
        "artifact_version": ARTIFACT_VERSION,
        "config_hash": chash,
        "columns": columns,
        "rows": rows,
    }
    if summary:
        doc["summary"] = summary
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _existing_rows(path: Path, chash: str, columns: list[str]) -> dict:
    """Completed rows keyed by first column, if the file matches this config."""
    if not path.exists():
        return {}
    try:
        lines = path.read_text().splitlines()
    except OSError:
        return {}
    if not lines or f"config_hash={chash}" not in lines[-1]:
        return {}
    reader = csv.DictReader([ln for ln in lines if not ln.startswith("#")])
    if reader.fieldnames != columns:
        return {}
    return {row[columns[0]]: row for row in reader}


# ----------------------------------------------------------------------
# argument parsing and main
# ----------------------------------------------------------------------


def _add_common_options(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output file path")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--units", choices=("hz", "rad"), default=None,
                   help="units of inline frequency inputs such as --j (hz applies 2*pi)")
    p.add_argument("--jobs", type=int, default=1, help="worker pool size for sweeps")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--plot", action="store_true",
                   help="render a PNG figure next to the output file")
    p.add_argument("--mode", choices=("plain", "spin-echo"), default=None)
    p.add_argument("--n", type=int, default=None, help="ion count (equal couplings)")
    p.add_argument("--j", type=float, default=None, help="uniform coupling strength")
    p.add_argument("--couplings-file", default=None)
    p.add_argument("--modes-file", default=None)
    p.add_argument("--rates", default=None,
                   help="'zero', 'ca', or five comma-separated rates g01,g10,g0g,g1g,gel")
    p.add_argument("--power", type=float, default=None, help="Ca+ beam power (W)")
    p.add_argument("--waist", type=float, default=None, help="Ca+ beam waist (m)")
    p.add_argument("--sweep", default=None, help="axis as parameter:min:max:points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scatterspin",
        description="Light-scattering and leakage errors in trapped-ion Ising dynamics",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        _add_common_options(p)
        if name == "correlations":
            p.add_argument("--m", type=int, default=None, help="half the correlator body count")
            p.add_argument("--t-max", type=float, default=None)
            p.add_argument("--t-points", type=int, default=None)
        if name == "qaoa":
            p.add_argument("--grid-points", type=int, default=None)
        if name == "squeezing":
            p.add_argument("--scan-min", type=float, default=None)
            p.add_argument("--scan-max", type=float, default=None)
            p.add_argument("--scan-points", type=int, default=None)
        if name == "oracle-verify":
            p.add_argument("--cases", type=int, default=None)
    return parser


def _merge_args_into_config(args: argparse.Namespace) -> dict:
    doc = _load_config_file(args.config)
    doc["experiment"] = args.experiment
    if args.units:
        doc["units"] = args.units
    if args.mode:
        doc["mode"] = args.mode
    if args.seed is not None:
        doc["seed"] = args.seed

    if args.n is not None or args.j is not None or args.couplings_file or args.modes_file:
        if args.couplings_file:
            doc["couplings"] = {"file": args.couplings_file}
        elif args.modes_file:
            doc["couplings"] = {"modes_file": args.modes_file}
        else:
            equal = dict(doc.get("couplings", {}).get("equal", {}))
            if args.n is not None:
                equal["n"] = args.n
            if args.j is not None:
                equal["j"] = args.j
            if "n" not in equal or "j" not in equal:
                if args.experiment == "oracle-verify" and args.n is not None:
                    doc["n"] = args.n
                    doc.setdefault("couplings", {"equal": {"n": args.n, "j": 1.0}})
                else:
                    raise ConfigError("equal couplings need both --n and --j")
            else:
                doc["couplings"] = {"equal": equal}
        if args.experiment == "oracle-verify" and args.n is not None:
            doc["n"] = args.n

    if args.rates is not None:
        if args.rates == "zero":
            doc["rates"] = {"zero": True}
        elif args.rates == "ca":
            ca = {"power": args.power if args.power is not None else 0.05,
                  "waist": args.waist if args.waist is not None else 150e-6}
            doc["rates"] = {"ca_laser": ca}
        else:
            try:
                values = [float(x) for x in args.rates.split(",")]
            except ValueError as exc:
                raise ConfigError(f"cannot parse --rates {args.rates!r}") from exc
            if len(values) != 5:
                raise ConfigError("--rates needs five comma-separated values")
            doc["rates"] = {
                "explicit": dict(
                    zip(("gamma_01", "gamma_10", "gamma_0g", "gamma_1g", "gamma_el"), values)
                )
            }
    elif args.power is not None or args.waist is not None:
        doc["rates"] = {
            "ca_laser": {
                "power": args.power if args.power is not None else 0.05,
                "waist": args.waist if args.waist is not None else 150e-6,
            }
        }
    if args.experiment == "rates":
        doc.setdefault("rates", {"ca_laser": {"power": 0.05, "waist": 150e-6}})
    elif args.experiment == "oracle-verify":
        doc.setdefault("rates", {"zero": True})  # cases draw their own rates
    if doc.get("rates") is None:
        raise ConfigError("a rates source is required (--rates or config)")

    if args.sweep:
        parts = args.sweep.split(":")
        if len(parts) != 4:
            raise ConfigError("--sweep needs parameter:min:max:points")
        doc["sweep"] = {
            "parameter": parts[0], "min": float(parts[1]),
            "max": float(parts[2]), "points": int(parts[3]),
        }

    if args.experiment == "correlations":
        if getattr(args, "m", None) is not None:
            doc["m"] = args.m
        if getattr(args, "t_max", None) is not None:
            points = getattr(args, "t_points", None) or 20
            doc["times"] = {"min": args.t_max / points, "max": args.t_max, "points": points}
    if args.experiment == "qaoa" and getattr(args, "grid_points", None) is not None:
        doc["grid_points"] = args.grid_points
    if args.experiment == "squeezing" and getattr(args, "scan_min", None) is not None:
        doc["scan"] = {
            "min": args.scan_min,
            "max": args.scan_max if args.scan_max is not None else args.scan_min * 36.0,
            "points": args.scan_points or 60,
        }
    if args.experiment == "oracle-verify":
        doc.setdefault("couplings", {"equal": {"n": doc.get("n", 3), "j": 1.0}})
        doc.setdefault("mode", "plain")  # echo opt-in via --mode
        if getattr(args, "cases", None) is not None:
            doc["cases"] = args.cases
    return doc


def _print_summary(experiment: str, summary: dict):
    if not summary:
        return
    width = max(len(k) for k in summary)
    print(f"{experiment} summary:")
    for key, value in summary.items():
        if isinstance(value, float):
            print(f"  {key:<{width}}  {value:.6g}")
        else:
            print(f"  {key:<{width}}  {value}")


def run(config: dict, out: str | None = None, fmt: str = "csv",
        jobs: int = 1, plot: bool = False) -> int:
    """Execute a normalized config; write artifacts; return exit status."""
    experiment = config["experiment"]
    chash = config_hash(config)
    summary: dict = {}

    if config.get("sweep") and experiment in ("ghz", "squeezing", "qaoa", "correlations"):
        columns = None
        out_path = Path(out) if out else None
        values_done = {}
        if out_path and fmt == "csv" and experiment != "correlations" \
                and config["sweep"]["parameter"] != "t":
            parameter = config["sweep"]["parameter"]
            axis = _sweep_axis(config)
            columns = [parameter] + [
                c for c in _SWEEP_SUMMARY_COLUMNS[experiment] if c != parameter
            ]
            values_done = _existing_rows(out_path, chash, columns)
            if values_done:
                missing = [v for v in axis if _format_value(v) not in values_done]
                log.info("resuming sweep: %d rows present, %d to compute",
                         len(values_done), len(missing))
                payloads = [(config, parameter, v) for v in missing]
                new_rows = [_sweep_point(p) for p in payloads]
                merged = []
                fresh = {_format_value(r[parameter]): r for r in new_rows}
                for v in axis:
                    key = _format_value(v)
                    if key in fresh:
                        merged.append(fresh[key])
                    else:
                        merged.append({c: values_done[key][c] for c in columns})
                rows = merged
            else:
                rows, columns = run_sweep(config, jobs=jobs)
        else:
            rows, columns = run_sweep(config, jobs=jobs)
        summary = {"points": len(rows)}
    elif experiment == "rates":
        rows, summary = _rates_rows(config)
        columns = _COLUMNS[experiment]
    elif experiment == "oracle-verify":
        rows, summary = _verify_rows(config)
        columns = _COLUMNS[experiment]
    else:
        rows, summary = _EXECUTORS[experiment](config)
        columns = _COLUMNS[experiment]

    if out:
        out_path = Path(out)
        if fmt == "json":
            out_path.write_text(render_json(rows, columns, chash, summary))
        else:
            out_path.write_text(render_csv(rows, columns, chash))
        print(f"wrote {out_path}")
        if plot:
            _render_figures(experiment, config, rows, out_path)
    else:
        sys.stdout.write(render_csv(rows, columns, chash) if len(rows) <= 40
                         else f"({len(rows)} rows; use --out to write them)\n")

    _print_summary(experiment, summary)

    if experiment == "rates" and "leak_percent" in summary:
        print(
            f"branching split: leak {summary['leak_percent']:.1f}% / "
            f"elastic {summary['elastic_percent']:.1f}% / "
            f"raman {summary['raman_percent']:.1f}%"
        )
    if experiment == "oracle-verify":
        verdict = "PASS" if summary["passed"] else "FAIL"
        print(f"{verdict}: max |engine - oracle| = {summary['max_abs_diff']:.3e} "
              f"(threshold 1e-8)")
        if not summary["passed"]:
            raise ConsistencyError("engine disagrees with the brute-force integrator")
    return 0


def _render_figures(experiment: str, config: dict, rows: list[dict], out_path: Path):
    from . import plotting  # deferred so headless use never needs matplotlib

    fig_path = out_path.with_suffix(".png")
    if experiment == "correlations" or (
        config.get("sweep") and config["sweep"]["parameter"] == "t"
    ):
        plotting.plot_correlations(rows, fig_path)
    elif experiment == "squeezing" and not config.get("sweep"):
        plotting.plot_squeezing(rows, fig_path)
    elif experiment == "qaoa" and not config.get("sweep"):
        gammas = sorted({r["gamma"] for r in rows})
        betas = sorted({r["beta"] for r in rows})
        plotting.plot_qaoa(rows, gammas, betas, fig_path)
    elif config.get("sweep"):
        x = config["sweep"]["parameter"]
        numeric = [c for c in rows[0] if c != x and isinstance(rows[0][c], (int, float))]
        plotting.plot_sweep(rows, x, numeric[:4], fig_path)
    else:
        return
    print(f"wrote {fig_path}")


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SCATTERSPIN_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = _merge_args_into_config(args)
        config = normalize_config(doc)
        fmt = args.format or "csv"
        return run(config, out=args.out, fmt=fmt, jobs=args.jobs, plot=args.plot)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3
    except ConsistencyError as exc:
        print(f"internal-consistency error: {exc}", file=sys.stderr)
        return 4
    except ScatterSpinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
