"""Configuration-driven experiment runner.

Every subcommand resolves its options from built-in defaults, an optional
JSON config file, and command-line flags (flags win), echoes the resolved
configuration into its JSON output, and writes deterministic artifacts:
pretty-printed JSON with sorted keys, headered CSV, and (for report paths)
PNG figures rendered alongside the delimited output.

Exit codes: 0 success, 1 computation error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .energy import GammaOrder, energy_sq_ustat, energy_sq_vstat
from .estimation import (
    GeneratorModel,
    StoppingConfig,
    affine_model,
    build_codebook,
    fit_discrete_simplex,
    fit_min_energy_sgd,
    gamma_schedule,
    gaussian_mixture_model,
    stopping_verifier,
)
from .experiments import (
    concentration_experiment,
    discrete_rate_experiment,
    tst_ordering_experiment,
    vc_decay_experiment,
)
from .halfspace import dhbar_1d, dhbar_2d_exact, dhbar_heuristic, t_stat_dk
from .measures import construction_1d, gaussian, load_csv, uniform_ball
from .sliced import sliced_energy_sq_mc
from .spectral import build_construction_pair, construction_energy, verify_scaling
from .testing import make_statistic, permutation_test, power_curve, threshold_test


class ConfigError(ValueError):
    """Invalid configuration: unknown key, bad type, or missing field."""


@dataclass(frozen=True)
class Opt:
    name: str
    typ: type | str  # float/int/str/bool or "int-list"/"float-list"
    default: object = None
    required: bool = False
    help: str = ""


_GLOBAL = [
    Opt("seed", int, 0, help="master seed; all randomness derives from it"),
    Opt("out", str, "out", help="output directory"),
    Opt("threads", int, 0, help="worker threads (0 = hardware parallelism)"),
    Opt("plot", bool, True, help="render figures next to the delimited output"),
]


def _parse_list(val, kind):
    if isinstance(val, (list, tuple)):
        return [kind(v) for v in val]
    return [kind(v) for v in str(val).split(",") if v != ""]


def _coerce(opt: Opt, val, where: str):
    try:
        if opt.typ == "int-list":
            return _parse_list(val, int)
        if opt.typ == "float-list":
            return _parse_list(val, float)
        if opt.typ is bool:
            if isinstance(val, bool):
                return val
            if str(val).lower() in ("1", "true", "yes"):
                return True
            if str(val).lower() in ("0", "false", "no"):
                return False
            raise ValueError(val)
        return opt.typ(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{opt.name}: cannot interpret {val!r} as {opt.typ}") from None


_SPECS: dict[str, dict] = {}


def _subcommand(name, positional=(), options=(), runner=None, help=""):
    _SPECS[name] = {
        "positional": list(positional),
        "options": list(options) + _GLOBAL,
        "runner": runner,
        "help": help,
    }


def resolve_config(name: str, cli_args: dict, config_path: str | None) -> dict:
    """Merge defaults, config-file values, and explicit flags for a subcommand."""
    spec = _SPECS[name]
    known = {o.name: o for o in spec["options"]}
    for p in spec["positional"]:
        known[p.name] = p
    resolved = {o.name: o.default for o in known.values()}
    if config_path is not None:
        try:
            raw = json.loads(Path(config_path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {config_path!r} does not exist") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {config_path!r}: {e}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {config_path!r}: top level must be an object")
        for key, val in raw.items():
            if key not in known:
                raise ConfigError(f"{name}.{key}: unknown key")
            resolved[key] = _coerce(known[key], val, name)
    for key, val in cli_args.items():
        if val is not None:
            resolved[key] = _coerce(known[key], val, name)
    for key, opt in known.items():
        if opt.required and resolved.get(key) is None:
            raise ConfigError(f"{name}.{key}: missing required field")
    if resolved["threads"] == 0:
        resolved["threads"] = os.cpu_count() or 1
    return resolved


# ---------------------------------------------------------------------------
# Output helpers


class RunWriter:
    """Tracks written files so partial outputs can be removed on failure."""

    def __init__(self, outdir: str):
        self.outdir = Path(outdir)
        self.written: list[Path] = []

    def _prep(self, fname: str) -> Path:
        self.outdir.mkdir(parents=True, exist_ok=True)
        path = self.outdir / fname
        self.written.append(path)
        return path

    def json(self, fname: str, payload: dict, cfg: dict) -> Path:
        doc = {"version": __version__, "config": _jsonable(cfg), "results": _jsonable(payload)}
        path = self._prep(fname)
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return path

    def csv(self, fname: str, header: list[str], rows) -> Path:
        path = self._prep(fname)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([_csv_cell(v) for v in row])
        return path

    def figure(self, fname: str, render, *args) -> Path:
        path = self._prep(fname)
        render(*args, path)
        return path

    def cleanup(self):
        for path in self.written:
            try:
                path.unlink()
            except OSError:
                pass


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def _gamma_order(gamma, dim) -> GammaOrder:
    try:
        return GammaOrder(gamma, dim)
    except ValueError as e:
        raise ConfigError(f"gamma: {e}") from None


def _load_pair(cfg):
    x = load_csv(cfg["x_csv"])
    y = load_csv(cfg["y_csv"], expected_dim=x.dim)
    return x, y


def _pair_specs(cfg):
    kind = cfg["pair"]
    if kind == "construction":
        a = construction_1d(cfg["beta"], cfg["epsilon"], "p")
        b = construction_1d(cfg["beta"], cfg["epsilon"], "q")
    elif kind == "gaussian-shift":
        a = gaussian(cfg["dim"])
        b = gaussian(cfg["dim"], mean=[cfg["shift"]] + [0.0] * (cfg["dim"] - 1))
    elif kind == "null":
        a = b = uniform_ball(cfg["dim"])
    else:
        raise ConfigError(f"power.pair: unknown pair kind {kind!r}")
    return a, b


# ---------------------------------------------------------------------------
# Runners


def run_energy(cfg, writer: RunWriter):
    x, y = _load_pair(cfg)
    g = _gamma_order(cfg["gamma"], x.dim)
    if cfg["estimator"] == "vstat":
        val = energy_sq_vstat(x, y, g)
    elif cfg["estimator"] == "ustat":
        val = energy_sq_ustat(x, y, g)
    else:
        raise ConfigError(f"energy.estimator: unknown estimator {cfg['estimator']!r}")
    writer.json(
        "energy_summary.json",
        {
            "energy_sq": val,
            "energy": math.sqrt(max(val, 0.0)),
            "n": x.n,
            "m": y.n,
            "gamma": cfg["gamma"],
            "estimator": cfg["estimator"],
        },
        cfg,
    )


def run_slice(cfg, writer: RunWriter):
    x, y = _load_pair(cfg)
    g = _gamma_order(cfg["gamma"], x.dim)
    est = sliced_energy_sq_mc(x, y, g, cfg["n_dirs"], cfg["seed"], threads=cfg["threads"])
    writer.json(
        "slice_summary.json",
        {
            "sliced_energy_sq": est.value,
            "standard_error": est.standard_error,
            "n_dirs": est.n_dirs,
            "n_unique_dirs": est.n_unique,
            "direct_energy_sq": energy_sq_vstat(x, y, g),
        },
        cfg,
    )


def run_halfspace(cfg, writer: RunWriter):
    x, y = _load_pair(cfg)
    method = cfg["method"]
    if method == "auto":
        method = {1: "exact", 2: "exact"}.get(x.dim, "heuristic")
    if method == "exact" and x.dim == 1:
        w = dhbar_1d(x, y)
    elif method == "exact" and x.dim == 2:
        w = dhbar_2d_exact(x, y)
    elif method == "heuristic":
        w = dhbar_heuristic(x, y, cfg["n_dirs"], cfg["seed"])
    else:
        raise ConfigError(f"halfspace.method: {cfg['method']!r} unsupported in dimension {x.dim}")
    writer.json(
        "halfspace_summary.json",
        {
            "value": w.value,
            "direction": w.direction,
            "threshold": w.threshold,
            "exact": w.exact,
            "method": method,
        },
        cfg,
    )


def run_tstat(cfg, writer: RunWriter):
    x, y = _load_pair(cfg)
    val = t_stat_dk(x, y, cfg["k"], cfg["n_dirs"], cfg["seed"])
    writer.json("tstat_summary.json", {"t_stat": val, "k": cfg["k"], "n_dirs": cfg["n_dirs"]}, cfg)


def run_fit(cfg, writer: RunWriter):
    data = load_csv(cfg["data_csv"])
    if cfg["model"] == "gaussian-mixture":
        model = gaussian_mixture_model(data.dim, cfg["components"])
    elif cfg["model"] == "affine":
        model = affine_model(data.dim)
    else:
        raise ConfigError(f"fit.model: unknown model {cfg['model']!r}")
    g = _gamma_order(cfg["gamma"], data.dim)
    res = fit_min_energy_sgd(
        data,
        model,
        g,
        steps=cfg["steps"],
        batch_m=cfg["batch_m"],
        learning_rate=cfg["learning_rate"],
        seed=cfg["seed"],
    )
    writer.json(
        "fit_summary.json",
        {
            "kind": res.model.kind,
            "dim": res.model.dim,
            "components": res.model.components,
            "theta": res.model.theta,
            "seed-provenance": {"seed": cfg["seed"], "steps": res.steps, "batch_m": res.batch_m},
            "final_loss": res.trace[-1],
        },
        cfg,
    )
    writer.csv("fit_trace.csv", ["step", "energy_sq"], [[i, float(v)] for i, v in enumerate(res.trace)])
    if cfg["plot"]:
        from .plots import render_trace

        writer.figure("fit_trace.png", render_trace, res.trace)


def run_discrete(cfg, writer: RunWriter):
    counts = np.asarray(_parse_list(cfg["counts"], float))
    cb = build_codebook(len(counts), cfg["delta_target"], cfg["seed"])
    support = None
    if cfg["support"]:
        support = _parse_list(cfg["support"], int)
    fit = fit_discrete_simplex(counts, cb, support=support)
    writer.json(
        "discrete_summary.json",
        {
            "pmf": fit.pmf,
            "objective": fit.objective,
            "fw_gap": fit.fw_gap,
            "iterations": fit.iterations,
            "converged": fit.converged,
            "codebook": {"k": cb.k, "dim": cb.dim, "min_dist": cb.min_dist, "seed": cb.seed},
        },
        cfg,
    )


def run_stop(cfg, writer: RunWriter):
    data = load_csv(cfg["data_csv"])
    models_doc = json.loads(Path(cfg["models"]).read_text())
    candidates = [
        GeneratorModel(m["kind"], m["dim"], m.get("components", 0), np.asarray(m["theta"], float))
        for m in models_doc
    ]
    gam = gamma_schedule(data.n, cfg["gamma_schedule"])
    scfg = StoppingConfig(n=data.n, delta=cfg["delta"], gamma=GammaOrder(gam, data.dim), c_cal=cfg["c_cal"])
    report = stopping_verifier(data, candidates, scfg, cfg["tau"], seed=cfg["seed"])
    writer.json(
        "stop_summary.json",
        {
            "stopped": report.stopped,
            "k_star": report.k_star,
            "certificate": report.certificate,
            "threshold": report.threshold,
            "values": list(report.values),
            "m_schedule": list(report.m_schedule),
            "gamma": gam,
            "exhausted": report.exhausted,
        },
        cfg,
    )


def run_test(cfg, writer: RunWriter):
    x, y = _load_pair(cfg)
    stat = make_statistic(cfg["statistic"], x.dim, gamma=cfg["gamma"], k=cfg["k"], n_dirs=cfg["n_dirs"], seed=cfg["seed"])
    if cfg["mode"] == "permutation":
        rep = permutation_test(x, y, stat, level=cfg["level"], B=cfg["permutations"], seed=cfg["seed"])
    elif cfg["mode"] == "threshold":
        rep = threshold_test(x, y, stat, exponent=cfg["exponent"], seed=cfg["seed"])
    else:
        raise ConfigError(f"test.mode: unknown mode {cfg['mode']!r}")
    writer.json(
        "test_summary.json",
        {
            "statistic": rep.statistic_name,
            "observed": rep.observed,
            "threshold": rep.threshold,
            "p_value": rep.p_value,
            "reject": rep.reject,
            "n": rep.n,
            "m": rep.m,
            "permutations": rep.permutations,
            "mode": cfg["mode"],
            "detail": rep.detail,
        },
        cfg,
    )


def run_power(cfg, writer: RunWriter):
    spec_a, spec_b = _pair_specs(cfg)
    if cfg["mode"] == "separation":
        if cfg["pair"] != "construction":
            raise ConfigError("power.mode: separation mode requires the construction pair")
        records = tst_ordering_experiment(cfg["epsilon"], cfg["beta"], cfg["n_list"], cfg["trials"], seed=cfg["seed"])
        writer.csv(
            "power_separation.csv",
            ["statistic", "n", "trials", "mean_alt", "se_alt", "mean_null", "se_null", "separation"],
            [r.to_row() for r in records],
        )
        writer.json(
            "power_summary.json",
            {
                "mode": "separation",
                "records": [
                    {
                        "statistic": r.statistic,
                        "n": r.n,
                        "separation": r.separation,
                        "mean_alt": r.mean_alt,
                        "mean_null": r.mean_null,
                    }
                    for r in records
                ],
            },
            cfg,
        )
        if cfg["plot"]:
            from .plots import render_ordering

            writer.figure("power_separation.png", render_ordering, records)
        return
    stats = [
        make_statistic(kind, spec_a.dim, gamma=cfg["gamma"], k=cfg["k"], n_dirs=cfg["n_dirs"], seed=cfg["seed"])
        for kind in _parse_list(cfg["statistics"], str)
    ]
    records = power_curve(
        spec_a, spec_b, stats, cfg["n_list"], cfg["trials"], seed=cfg["seed"], level=cfg["level"], B=cfg["permutations"]
    )
    writer.csv(
        "power_curve.csv",
        ["statistic", "n", "trials", "power", "mean_stat", "se_stat", "seed"],
        [r.to_row() for r in records],
    )
    writer.json(
        "power_summary.json",
        {
            "mode": "test",
            "records": [
                {"statistic": r.statistic, "n": r.n, "power": r.power, "mean_stat": r.mean_stat} for r in records
            ],
        },
        cfg,
    )
    if cfg["plot"]:
        from .plots import render_power_curves

        writer.figure("power_curve.png", render_power_curves, records)


def run_construct(cfg, writer: RunWriter):
    if cfg["action"] == "verify":
        reports = []
        for t in cfg["t_list"]:
            reports.extend(
                rep
                for rep in verify_scaling(cfg["beta_bar"], t, cfg["r_list"])
                if rep.quantity.startswith("weighted")
            )
        # the grid quantities do not depend on t; compute them once
        reports.extend(verify_scaling(cfg["beta_bar"], cfg["t_list"][0], cfg["r_list"])[1:])
        writer.json("construct_verify.json", {"slopes": [r.to_record() for r in reports]}, cfg)
        writer.csv(
            "construct_verify.csv",
            ["quantity", "slope", "stderr"] + [f"r={r}" for r in cfg["r_list"]],
            [[r.quantity, r.slope, r.stderr] + list(r.values) for r in reports],
        )
        if cfg["plot"]:
            from .plots import render_slopes

            writer.figure("construct_verify.png", render_slopes, reports)
    elif cfg["action"] == "build":
        c = build_construction_pair(cfg["beta"], cfg["epsilon"])
        writer.json(
            "construct_build.json",
            {
                "r": c.r,
                "beta_bar": c.beta_bar,
                "epsilon": c.epsilon,
                "amplitude": c.amplitude,
                "tv": c.tv,
                "dhbar": c.dhbar_exact(),
                "energy_gamma1": construction_energy(c, GammaOrder(1.0, 1)),
            },
            cfg,
        )
        if cfg["plot"]:
            from .plots import render_densities

            writer.figure("construct_build.png", render_densities, c)
    else:
        raise ConfigError(f"construct.action: unknown action {cfg['action']!r}")


def run_rates(cfg, writer: RunWriter):
    kind = cfg["experiment"]
    if kind == "concentration":
        records, slopes = concentration_experiment(
            cfg["d_list"], cfg["n_list"], cfg["gamma_list"], cfg["trials"], seed=cfg["seed"]
        )
        slope_rows = [[f"slope d={d},gamma={g:g}", "", fit.slope, fit.stderr, ""] for (d, g), fit in sorted(slopes.items())]
    elif kind == "vc":
        records, slopes = vc_decay_experiment(cfg["d_list"], cfg["n_list"], cfg["trials"], seed=cfg["seed"])
        slope_rows = [[f"slope d={d}", "", fit.slope, fit.stderr, ""] for d, fit in sorted(slopes.items())]
    elif kind == "discrete":
        records, slopes, consts = discrete_rate_experiment(cfg["k_list"], cfg["n_list"], cfg["trials"], seed=cfg["seed"])
        slope_rows = [[f"slope k={k}", "", fit.slope, fit.stderr, consts[k]] for k, fit in sorted(slopes.items())]
    else:
        raise ConfigError(f"rates.experiment: unknown experiment {kind!r}")
    writer.csv(
        "rates_%s.csv" % kind,
        ["label", "n", "mean", "se", "bound"],
        [r.to_row() for r in records] + slope_rows,
    )
    writer.json(
        "rates_%s.json" % kind,
        {
            "records": [{"label": r.label, "n": r.n, "mean": r.mean, "se": r.se, "bound": r.bound} for r in records],
            "slopes": {str(k): {"slope": v.slope, "stderr": v.stderr} for k, v in slopes.items()},
        },
        cfg,
    )
    if cfg["plot"]:
        from .plots import render_rate_records

        writer.figure("rates_%s.png" % kind, render_rate_records, records)


def run_bench(cfg, writer: RunWriter):
    import time

    from .measures import sample as msample

    rows = []
    g = _gamma_order(cfg["gamma"], cfg["dim"])
    for n in cfg["sizes"]:
        x = msample(uniform_ball(cfg["dim"]), n, cfg["seed"])
        y = msample(uniform_ball(cfg["dim"]), n, cfg["seed"] + 1)
        t0 = time.perf_counter()
        energy_sq_vstat(x, y, g)
        t_v = time.perf_counter() - t0
        t0 = time.perf_counter()
        sliced_energy_sq_mc(x, y, g, 256, cfg["seed"], threads=cfg["threads"])
        t_s = time.perf_counter() - t0
        t0 = time.perf_counter()
        dhbar_heuristic(x, y, 128, cfg["seed"])
        t_h = time.perf_counter() - t0
        rows.append([n, t_v, t_s, t_h])
    writer.csv("bench.csv", ["n", "energy_vstat_s", "sliced_mc_s", "dhbar_heuristic_s"], rows)
    writer.json("bench.json", {"rows": [dict(zip(["n", "vstat", "sliced", "dhbar"], r)) for r in rows]}, cfg)


# ---------------------------------------------------------------------------
# Wiring

_subcommand(
    "energy",
    positional=[Opt("x_csv", str, required=True), Opt("y_csv", str, required=True)],
    options=[Opt("gamma", float, 1.0), Opt("estimator", str, "vstat", help="vstat or ustat")],
    runner=run_energy,
    help="energy distance between two CSV measures",
)
_subcommand(
    "slice",
    positional=[Opt("x_csv", str, required=True), Opt("y_csv", str, required=True)],
    options=[Opt("gamma", float, 1.0), Opt("n_dirs", int, 1000)],
    runner=run_slice,
    help="sliced Monte Carlo energy estimate",
)
_subcommand(
    "halfspace",
    positional=[Opt("x_csv", str, required=True), Opt("y_csv", str, required=True)],
    options=[Opt("method", str, "auto", help="auto, exact, or heuristic"), Opt("n_dirs", int, 512)],
    runner=run_halfspace,
    help="perceptron discrepancy with witness",
)
_subcommand(
    "tstat",
    positional=[Opt("x_csv", str, required=True), Opt("y_csv", str, required=True)],
    options=[Opt("k", int, 0), Opt("n_dirs", int, 512)],
    runner=run_tstat,
    help="ramp-feature statistic T_{d,k}",
)
_subcommand(
    "fit",
    positional=[Opt("data_csv", str, required=True)],
    options=[
        Opt("model", str, "gaussian-mixture"),
        Opt("components", int, 1),
        Opt("gamma", float, 1.0),
        Opt("steps", int, 2000),
        Opt("batch_m", int, 64),
        Opt("learning_rate", float, 0.1),
    ],
    runner=run_fit,
    help="fit a generator by minimum-energy SGD",
)
_subcommand(
    "discrete",
    options=[
        Opt("counts", str, required=True, help="comma-separated histogram"),
        Opt("delta_target", float, 1.0),
        Opt("support", str, "", help="optional comma-separated support restriction"),
    ],
    runner=run_discrete,
    help="codebook-embedded discrete estimator",
)
_subcommand(
    "stop",
    positional=[Opt("data_csv", str, required=True)],
    options=[
        Opt("models", str, required=True, help="JSON list of serialized generator models"),
        Opt("delta", float, 0.05),
        Opt("tau", float, 2.0),
        Opt("c_cal", float, 1.0),
        Opt("gamma_schedule", str, "1/log n"),
    ],
    runner=run_stop,
    help="run the training stopping verifier",
)
_subcommand(
    "test",
    positional=[Opt("x_csv", str, required=True), Opt("y_csv", str, required=True)],
    options=[
        Opt("statistic", str, "energy"),
        Opt("gamma", float, 1.0),
        Opt("k", int, 0),
        Opt("n_dirs", int, 512),
        Opt("level", float, 0.05),
        Opt("permutations", int, 199),
        Opt("mode", str, "permutation"),
        Opt("exponent", float, 0.25),
    ],
    runner=run_test,
    help="two-sample test",
)
_subcommand(
    "power",
    options=[
        Opt("pair", str, "construction", help="construction, gaussian-shift, or null"),
        Opt("beta", float, 1.0),
        Opt("epsilon", float, 0.1),
        Opt("dim", int, 1),
        Opt("shift", float, 1.0),
        Opt("statistics", str, "energy,dhbar"),
        Opt("gamma", float, 1.0),
        Opt("k", int, 0),
        Opt("n_dirs", int, 512),
        Opt("n_list", "int-list", [100, 200, 400]),
        Opt("trials", int, 100),
        Opt("level", float, 0.05),
        Opt("permutations", int, 199),
        Opt("mode", str, "test", help="test (rejection frequency) or separation"),
    ],
    runner=run_power,
    help="power curves / statistic separation",
)
_subcommand(
    "construct",
    positional=[Opt("action", str, required=True, help="verify or build")],
    options=[
        Opt("beta", float, 1.0),
        Opt("epsilon", float, 0.1),
        Opt("beta_bar", int, 2),
        Opt("t_list", "float-list", [-1.0, 0.0, 1.0]),
        Opt("r_list", "int-list", [16, 32, 64, 128, 256]),
    ],
    runner=run_construct,
    help="build or verify the adversarial construction",
)
_subcommand(
    "rates",
    positional=[Opt("experiment", str, required=True, help="concentration, vc, or discrete")],
    options=[
        Opt("d_list", "int-list", [1, 2]),
        Opt("gamma_list", "float-list", [0.5, 1.0, 1.5]),
        Opt("k_list", "int-list", [8, 32]),
        Opt("n_list", "int-list", [50, 200, 800]),
        Opt("trials", int, 200),
    ],
    runner=run_rates,
    help="rate experiments with slope summaries",
)
_subcommand(
    "bench",
    options=[Opt("sizes", "int-list", [100, 400, 1600]), Opt("gamma", float, 1.0), Opt("dim", int, 2)],
    runner=run_bench,
    help="timing of the core statistics",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edstat", description=__doc__)
    parser.add_argument("--version", action="version", version=f"edstat {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, spec in _SPECS.items():
        p = sub.add_parser(name, help=spec["help"])
        for opt in spec["positional"]:
            p.add_argument(opt.name, help=opt.help)
        p.add_argument("--config", default=None, help="JSON config file (flags override it)")
        for opt in spec["options"]:
            flag = "--" + opt.name.replace("_", "-")
            if opt.typ is bool:
                p.add_argument(flag, dest=opt.name, action="store_true", default=None, help=opt.help)
                p.add_argument(
                    "--no-" + opt.name.replace("_", "-"), dest=opt.name, action="store_false", default=None
                )
            else:
                p.add_argument(flag, dest=opt.name, default=None, help=opt.help)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    name = args.pop("subcommand")
    config_path = args.pop("config", None)
    try:
        cfg = resolve_config(name, args, config_path)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    writer = RunWriter(cfg["out"])
    try:
        _SPECS[name]["runner"](cfg, writer)
    except ConfigError as e:
        writer.cleanup()
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # computation failure: remove partial outputs
        writer.cleanup()
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
