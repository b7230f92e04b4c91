"""Command line runner for the figure presets and the validation suite.

    udn-mf fig1 | fig2 | fig3 | validate [flags]
    udn-mf run experiment.json [flags]

Configuration files are flat JSON objects; see ``CONFIG_KEYS``.  Results go
to CSV with a leading ``#`` comment line recording the seed and version.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__, validation
from .channel import FadingParams
from .errors import ConvergenceError, ParameterError
from .meanfield import NetworkConfig
from .montecarlo import SimConfig, rate_sweep, simulate_trajectory, stationary_ee_sweep

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

PRESETS = ("fig1", "fig2", "fig3", "validate", "custom")
EXPERIMENTS = ("rate_sweep", "trajectory", "ee_sweep", "validate")

# Reference parameter values fixed for each figure preset.
PRESET_VALUES = {
    "fig1": {"lambda_u": 0.001, "n_antennas": 10, "alpha": 4.0, "eta": 1.0, "mu_norm": math.sqrt(2.0),
             "noise": 0.001, "tx_power": 1.0},
    "fig2": {"lambda_b": 10.0, "lambda_u": 1.0, "n_antennas": 1, "p_max": 1.0, "p_c": 1.0, "eta": 1.0,
             "mu_norm": math.sqrt(2.0), "alpha": 4.0},
    "fig3": {"p_max": 1.0, "p_c": 1.0, "eta": 1.0, "mu_x": 1.0, "mu_y": 1.0, "alpha": 4.0, "R": 10.0},
}

FIG1_RATIOS = [1e2, 10 ** 2.5, 1e3, 10 ** 3.5, 1e4]
FIG3_N = [1, 4, 16, 64]
FIG3_LAMBDA_B = [1.0, 3.0, 10.0, 30.0, 100.0]

NETWORK_KEYS = ("lambda_b", "lambda_u", "n_antennas", "alpha", "R", "noise", "p_max", "p_c", "asymptotic")
FADING_KEYS = ("mu_x", "mu_y", "eta")
SIM_KEYS = ("trials", "seed", "dt", "horizon", "activity_mode", "rate_metric", "workers", "transient",
            "marginal_mode")
SWEEP_KEYS = ("ratios", "n_list", "lambda_b_list")
OTHER_KEYS = ("preset", "experiment", "output", "tx_power")
CONFIG_KEYS = NETWORK_KEYS + FADING_KEYS + SIM_KEYS + SWEEP_KEYS + OTHER_KEYS

_BASE = {
    "lambda_b": 10.0, "lambda_u": 1.0, "n_antennas": 1, "alpha": 4.0, "R": 10.0, "noise": 0.001,
    "p_max": 1.0, "p_c": 1.0, "asymptotic": True, "mu_x": 1.0, "mu_y": 1.0, "eta": 1.0,
    "trials": 10_000, "seed": 2016, "dt": 0.05, "horizon": 20.0, "activity_mode": "thinning",
    "rate_metric": "log", "workers": 1, "transient": 5.0, "marginal_mode": "paper", "tx_power": 1.0,
}

PRESET_DEFAULTS = {
    "fig1": {**_BASE, "lambda_u": 0.001, "lambda_b": 0.1, "n_antennas": 10, "noise": 0.001,
             "experiment": "rate_sweep", "ratios": FIG1_RATIOS, "output": "fig1.csv"},
    "fig2": {**_BASE, "experiment": "trajectory", "output": "fig2.csv"},
    "fig3": {**_BASE, "experiment": "ee_sweep", "n_list": FIG3_N, "lambda_b_list": FIG3_LAMBDA_B,
             "output": "fig3.csv"},
    "validate": {**_BASE, "experiment": "validate", "trials": 2000, "output": "validate.csv"},
}

REQUIRED_CUSTOM = NETWORK_KEYS[:2] + ("experiment", "output")


class ConfigError(ParameterError):
    pass


@dataclass
class ExperimentSpec:
    preset: str
    experiment: str
    network: NetworkConfig
    sim: SimConfig
    fading: FadingParams
    output_path: str
    tx_power: float = 1.0
    sweep: dict = field(default_factory=dict)


def _build(raw: dict) -> ExperimentSpec:
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
    preset = raw.get("preset", "custom")
    if preset not in PRESETS:
        raise ConfigError(f"preset must be one of {PRESETS}, got {preset!r}")
    if preset == "custom":
        missing = [k for k in REQUIRED_CUSTOM if k not in raw]
        if missing:
            raise ConfigError(f"custom config is missing required field(s): {', '.join(missing)}")
        merged = {**_BASE, **raw}
    else:
        merged = {**PRESET_DEFAULTS[preset], **raw}
    if merged["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
    sweep = {k: list(merged[k]) for k in SWEEP_KEYS if k in merged}
    for k, v in sweep.items():
        if len(v) == 0:
            raise ConfigError(f"sweep list {k} must be non-empty")
    try:
        network = NetworkConfig(**{k: merged[k] for k in NETWORK_KEYS})
        fading = FadingParams((merged["mu_x"], merged["mu_y"]), merged["eta"])
        sim = SimConfig(trials=int(merged["trials"]), master_seed=int(merged["seed"]), dt=merged["dt"],
                        horizon=merged["horizon"], activity_mode=merged["activity_mode"],
                        rate_metric=merged["rate_metric"], workers=int(merged["workers"]),
                        transient=merged["transient"], marginal_mode=merged["marginal_mode"])
    except (TypeError, ParameterError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    if not merged["tx_power"] > 0:
        raise ConfigError("tx_power > 0")
    return ExperimentSpec(preset, merged["experiment"], network, sim, fading, str(merged["output"]),
                          float(merged["tx_power"]), sweep)


def load_config(path) -> ExperimentSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return _build(raw)


def preset_spec(preset: str, **overrides) -> ExperimentSpec:
    return _build({"preset": preset, **{k: v for k, v in overrides.items() if v is not None}})


def dump_config(spec: ExperimentSpec) -> dict:
    """Flat, fully explicit config that ``load_config`` maps back to ``spec``."""
    net = asdict(spec.network)
    sim = spec.sim
    out = {"preset": spec.preset, "experiment": spec.experiment, **net,
           "mu_x": spec.fading.mu[0], "mu_y": spec.fading.mu[1], "eta": spec.fading.eta,
           "trials": sim.trials, "seed": sim.master_seed, "dt": sim.dt, "horizon": sim.horizon,
           "activity_mode": sim.activity_mode, "rate_metric": sim.rate_metric, "workers": sim.workers,
           "transient": sim.transient, "marginal_mode": sim.marginal_mode, "tx_power": spec.tx_power,
           "output": spec.output_path}
    out.update(spec.sweep)
    return out


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path: str, header, rows, comment: str):
    """Write rows atomically: a temp file in the target directory, then rename."""
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _execute(spec: ExperimentSpec):
    """Run the experiment; returns (header, rows, summary)."""
    cfg, sim = spec.network, spec.sim
    if spec.experiment == "rate_sweep":
        ratios = spec.sweep.get("ratios", FIG1_RATIOS)
        rows = rate_sweep(cfg, sim, spec.fading, ratios, spec.tx_power)
        header = ["ratio", "lambda_b", "rate_simulated", "std_error", "rate_mf", "accuracy", "trials_used",
                  "outages"]
        table = [[r["ratio"], r["lambda_b"], r["simulated"], r["std_error"], r["analytical"], r["accuracy"],
                  r["trials_used"], r["outages"]] for r in rows]
        worst = min(r["accuracy"] for r in rows)
        return header, table, f"min simulated/analytical rate ratio = {worst:.4f}"
    if spec.experiment == "trajectory":
        res = simulate_trajectory(cfg, sim, spec.fading)
        header = ["t", "ee_proposed", "ee_fixed", "ee_full_search", "p_star"]
        table = [[float(t), float(a), float(b), float(c), float(p)] for t, a, b, c, p in
                 zip(res.times, res.ee_proposed, res.ee_fixed, res.ee_full_search, res.power_trace)]
        avg = res.post_transient(sim.transient)
        summary = (f"proposed/fixed EE = {avg['ee_proposed'] / avg['ee_fixed']:.4f}, "
                   f"proposed/full-search EE = {avg['ee_proposed'] / avg['ee_full_search']:.4f} "
                   f"(t >= {sim.transient:g})")
        return header, table, summary
    if spec.experiment == "ee_sweep":
        table_ = stationary_ee_sweep(cfg, spec.sweep.get("n_list", FIG3_N),
                                     spec.sweep.get("lambda_b_list", FIG3_LAMBDA_B), spec.fading,
                                     sim.marginal_mode)
        header = ["n_antennas", "lambda_b", "ee", "p_star", "status"]
        table = []
        for i, n in enumerate(table_.n_list):
            for j, lb in enumerate(table_.lambda_b_list):
                err = table_.errors.get((n, lb))
                table.append([int(n), float(lb), float(table_.ee[i, j]), float(table_.power[i, j]),
                              "error" if err else "ok"])
        if table_.errors:
            raise ConvergenceError(f"{len(table_.errors)} sweep cell(s) failed: {table_.errors}")
        return header, table, f"max stationary EE = {float(table_.ee.max()):.4f}"
    checks = validation.run_all(sim.trials, sim.master_seed)
    header = ["check", "value", "target", "passed"]
    table = [[c.name, float(c.value), c.target, c.passed] for c in checks]
    passed = sum(c.passed for c in checks)
    return header, table, f"{passed}/{len(checks)} checks passed"


def run_experiment(spec: ExperimentSpec, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        header, rows, summary = _execute(spec)
    except ConvergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    comment = f"udn_meanfield {__version__} preset={spec.preset} experiment={spec.experiment} seed={spec.sim.master_seed}"
    try:
        write_csv(spec.output_path, header, rows, comment)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if spec.experiment == "validate":
        for row in rows:
            print(f"{'PASS' if row[3] else 'FAIL'}  {row[0]}: {row[1]:.4g} ({row[2]})", file=stdout)
    print(f"{spec.preset}: {summary} -> {spec.output_path}", file=stdout)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    common.add_argument("--out", help="CSV output path")
    common.add_argument("--activity-mode", choices=("voronoi", "thinning"))
    common.add_argument("--rate-metric", choices=("log", "literal"))
    common.add_argument("--workers", type=int, help="worker processes for trial loops")

    parser = argparse.ArgumentParser(prog="udn-mf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fig1", "fig2", "fig3", "validate"):
        sub.add_parser(name, parents=[common], help=f"run the {name} preset")
    run = sub.add_parser("run", parents=[common], help="run a JSON experiment config")
    run.add_argument("config")
    return parser


def _overrides(args) -> dict:
    mapping = {"seed": args.seed, "trials": args.trials, "output": args.out, "activity_mode": args.activity_mode,
               "rate_metric": args.rate_metric, "workers": args.workers}
    return {k: v for k, v in mapping.items() if v is not None}


def main(argv: Optional[list] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            spec = load_config(args.config)
            if _overrides(args):
                spec = _build({**dump_config(spec), **_overrides(args)})
        else:
            spec = preset_spec(args.command, **_overrides(args))
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_experiment(spec)


if __name__ == "__main__":
    sys.exit(main())
