"""Scenario runner: end-to-end experiments with deterministic seeds and CSV/JSON output.

Experiments:
    gain_cdf        per-subcarrier array-gain profiles and CDFs for the joint,
                    benchmark, and ideal designs at one spatial direction
    rate_cdf        pooled per-subcarrier achievable-rate CDFs over random channels
    sizing          minimum delay-element count with its audit trace
    prop1_sweep     edge/center-subcarrier gain of a frequency-flat beamformer vs n_tx
    criteria_report antenna-count and delay-budget selection bounds

Every run writes a manifest.json with the resolved configuration and seed.
Trials use counter-based RNG streams keyed by trial index, so output bytes are
identical for any thread count.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from . import design as design_mod
from . import metrics, precoders, sizing
from .model import (SystemConfig, make_rng, sample_channel,
                    subcarrier_frequencies, ula_response)

try:  # version string for the manifest
    from importlib.metadata import version as _pkg_version

    VERSION = _pkg_version("delayphase")
except Exception:  # pragma: no cover - not installed
    VERSION = "0+unknown"

EXPERIMENTS = ("gain_cdf", "rate_cdf", "sizing", "prop1_sweep", "criteria_report")
DESIGN_NAMES = ("proposed", "benchmark", "ideal")
_CONFIG_FIELDS = {f.name for f in dc_fields(SystemConfig)}


@dataclass
class Scenario:
    """One experiment description, loadable from a JSON file."""

    config: SystemConfig
    experiment: str
    sweep: list = field(default_factory=list)  # [(config_field, [values...]), ...]
    trials: int = 100
    psi_eval: float = 0.8
    g0: float = 0.9
    out_dir: str = "results"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; pick one of {EXPERIMENTS}")
        for param, values in self.sweep:
            if param not in _CONFIG_FIELDS:
                raise ValueError(f"sweep parameter {param!r} is not a config field")
            if not isinstance(values, (list, tuple)) or not values:
                raise ValueError(f"sweep values for {param!r} must be a non-empty list")
        if self.experiment == "rate_cdf" and self.trials < 1:
            raise ValueError("rate_cdf needs trials >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        data = dict(data)
        cfg = SystemConfig.from_dict(data.pop("config"))
        sweep = [(str(p), list(v)) for p, v in data.pop("sweep", [])]
        return cls(config=cfg, sweep=sweep, **data)

    @classmethod
    def from_file(cls, path) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class RunResult:
    out_dir: Path
    files: list
    manifest: dict


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _write_table(path: Path, header, rows, fmt: str) -> Path:
    # append the extension; with_suffix would truncate stems like "t_max=3.2e-10"
    if fmt == "csv":
        path = path.parent / (path.name + ".csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    else:
        path = path.parent / (path.name + ".json")
        payload = {"header": list(header),
                   "rows": [[(float(v) if isinstance(v, (float, np.floating)) else
                              int(v) if isinstance(v, (int, np.integer)) else v)
                             for v in row] for row in rows]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return path


def _sweep_points(scenario: Scenario):
    """Expand the sweep into (param, value, config) triples; no sweep -> base config."""
    if not scenario.sweep:
        return [(None, None, scenario.config)]
    points = []
    for param, values in scenario.sweep:
        for value in values:
            points.append((param, value, _apply_sweep(scenario.config, param, value)))
    return points


def _apply_sweep(cfg: SystemConfig, param: str, value) -> SystemConfig:
    if param == "n_tx":
        # keep the delay-element count, rebalance phase shifters per element
        if value % cfg.ttds_per_rf != 0:
            raise ValueError(f"n_tx={value} not divisible by ttds_per_rf={cfg.ttds_per_rf}")
        return cfg.replace(n_tx=int(value), ps_per_ttd=int(value) // cfg.ttds_per_rf)
    return cfg.replace(**{param: value})


def _stem(experiment: str, design: str | None, param: str | None, value) -> str:
    parts = [experiment]
    if design:
        parts.append(design)
    name = "_".join(parts)
    if param is not None:
        name += f"_{param}={_fmt(value)}"
    return name


def _analog_columns(cfg: SystemConfig, analog_design) -> np.ndarray:
    """First composite-precoder column per subcarrier, shape (K, n_tx)."""
    pset = precoders.materialize(cfg, analog_design)
    return pset.analog[:, :, 0]


def _ideal_columns(cfg: SystemConfig, psi: float) -> np.ndarray:
    return np.stack([precoders.ideal_precoder(cfg, [psi], k)[:, 0]
                     for k in range(1, cfg.n_subcarriers + 1)])


def _gain_tables(scenario: Scenario, files, out_dir, fmt):
    for param, value, cfg in _sweep_points(scenario):
        psi = scenario.psi_eval
        psi_all = np.full(cfg.n_rf, psi)
        columns = {
            "proposed": _analog_columns(cfg, design_mod.design_joint(cfg, psi_all).design),
            "benchmark": _analog_columns(cfg, design_mod.design_benchmark(cfg, psi_all)),
            "ideal": _ideal_columns(cfg, psi),
        }
        freqs = subcarrier_frequencies(cfg)
        for name in DESIGN_NAMES:
            profile = metrics.gain_profile(cfg, columns[name], psi)
            rows = [(k, freqs[k - 1], profile.gains[k - 1])
                    for k in range(1, cfg.n_subcarriers + 1)]
            files.append(_write_table(out_dir / _stem("gain_profile", name, param, value),
                                      ("k", "f_k", "value"), rows, fmt))
            cdf_rows = list(zip(profile.cdf_x, profile.cdf_y))
            files.append(_write_table(out_dir / _stem("gain_cdf", name, param, value),
                                      ("x", "G"), cdf_rows, fmt))


def _rate_trial(cfg: SystemConfig, seed: int, point_index: int, trial: int) -> dict:
    rng = make_rng(seed, stream=(point_index, trial))
    channel = sample_channel(cfg, rng)
    psi_t = channel.paths.psi_tx
    stacks = {
        "proposed": precoders.materialize(
            cfg, design_mod.design_joint(cfg, psi_t).design).analog,
        "benchmark": precoders.materialize(
            cfg, design_mod.design_benchmark(cfg, psi_t)).analog,
        "ideal": np.stack([precoders.ideal_precoder(cfg, psi_t, k)
                           for k in range(1, cfg.n_subcarriers + 1)]),
    }
    out = {}
    for name, analog in stacks.items():
        rates = np.empty(cfg.n_subcarriers)
        for k in range(1, cfg.n_subcarriers + 1):
            h_k = channel.h[k - 1]
            f_k = analog[k - 1]
            w_k = precoders.digital_precoder(h_k, f_k, cfg.n_streams)
            rates[k - 1] = metrics.achievable_rate(h_k, f_k, w_k, cfg.rho, cfg.n_streams)
        out[name] = rates
    return out


def _rate_tables(scenario: Scenario, seed, files, out_dir, fmt, threads):
    for point_index, (param, value, cfg) in enumerate(_sweep_points(scenario)):
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            results = list(pool.map(
                lambda t: _rate_trial(cfg, seed, point_index, t), range(scenario.trials)))
        mean_rows = []
        for name in DESIGN_NAMES:
            pooled = np.concatenate([res[name] for res in results])
            profile = metrics.rate_profile(pooled)
            cdf_rows = list(zip(profile.cdf_x, profile.cdf_y))
            files.append(_write_table(out_dir / _stem("rate_cdf", name, param, value),
                                      ("x", "G"), cdf_rows, fmt))
            mean_rows.append((name, profile.mean_rate))
        files.append(_write_table(out_dir / _stem("rate_mean", None, param, value),
                                  ("design", "mean_rate"), mean_rows, fmt))


def _sizing_tables(scenario: Scenario, files, out_dir, fmt):
    for param, value, cfg in _sweep_points(scenario):
        result = sizing.size_ttds(cfg, scenario.g0, scenario.psi_eval)
        path = out_dir / (_stem("sizing_result", None, param, value) + ".json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(result.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        files.append(path)
        rows = sorted((m, g) for m, g in result.worst_gain_by_divisor.items())
        files.append(_write_table(out_dir / _stem("sizing_trace", None, param, value),
                                  ("m", "worst_gain"), rows, fmt))


def _prop1_tables(scenario: Scenario, files, out_dir, fmt):
    sweep = scenario.sweep or [("n_tx", [128, 256, 512, 1024])]
    rows = []
    for param, values in sweep:
        if param != "n_tx":
            raise ValueError("prop1_sweep sweeps n_tx only")
        for value in values:
            cfg = _apply_sweep(scenario.config, param, value)
            flat = ula_response(cfg, cfg.center_subcarrier, scenario.psi_eval)
            edge = metrics.array_gain(flat, cfg, cfg.n_subcarriers, scenario.psi_eval)
            center = metrics.array_gain(flat, cfg, cfg.center_subcarrier, scenario.psi_eval)
            rows.append((int(value), edge, center))
    rows.sort(key=lambda r: r[0])
    files.append(_write_table(out_dir / "prop1_sweep",
                              ("n_tx", "gain_edge", "gain_center"), rows, fmt))


def _criteria_tables(scenario: Scenario, files, out_dir, fmt):
    points = sorted(_sweep_points(scenario),
                    key=lambda p: ("" if p[0] is None else p[0],
                                   0.0 if p[1] is None else float(p[1])))
    rows = []
    for param, value, cfg in points:
        nt = design_mod.nt_upper_bound(cfg, scenario.psi_eval)
        tmax = design_mod.tmax_lower_bound(cfg, scenario.psi_eval)
        rows.append(("" if param is None else param,
                     "" if value is None else _fmt(value),
                     "inf" if nt == float("inf") else int(nt), tmax))
    files.append(_write_table(out_dir / "criteria_report",
                              ("param", "value", "nt_bound", "tmax_bound_s"), rows, fmt))


def run(scenario: Scenario, seed: int | None = None, out_dir=None,
        threads: int = 1, fmt: str = "csv") -> RunResult:
    """Execute a scenario; returns the output files and the manifest dict."""
    if fmt not in ("csv", "json"):
        raise ValueError("format must be csv or json")
    seed = scenario.config.seed if seed is None else int(seed)
    out = Path(out_dir if out_dir is not None else scenario.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    t0 = time.perf_counter()

    files: list = []
    if scenario.experiment == "gain_cdf":
        _gain_tables(scenario, files, out, fmt)
    elif scenario.experiment == "rate_cdf":
        _rate_tables(scenario, seed, files, out, fmt, threads)
    elif scenario.experiment == "sizing":
        _sizing_tables(scenario, files, out, fmt)
    elif scenario.experiment == "prop1_sweep":
        _prop1_tables(scenario, files, out, fmt)
    elif scenario.experiment == "criteria_report":
        _criteria_tables(scenario, files, out, fmt)

    manifest = {
        "experiment": scenario.experiment,
        "config": scenario.config.to_dict(),
        "sweep": [[p, list(v)] for p, v in scenario.sweep],
        "trials": scenario.trials,
        "psi_eval": scenario.psi_eval,
        "g0": scenario.g0,
        "seed": seed,
        "threads": threads,
        "format": fmt,
        "version": VERSION,
        "started_utc": started,
        "elapsed_s": time.perf_counter() - t0,
        "files": sorted(p.name for p in files),
    }
    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return RunResult(out_dir=out, files=sorted(files), manifest=manifest)
