"""Experiment registry: named, schema-validated simulation protocols.

Each experiment couples a strict configuration schema (unknown keys
rejected, every violation names the offending key and its constraint)
with a runner that writes its artifacts -- raster/curve CSVs, a metrics
JSON and rendered figures -- into an output directory.  Runners are
deterministic functions of the resolved configuration, so identical
configurations produce byte-identical metric artifacts.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import report
from .network import Network, StimulusItem
from .neurons import IzhikevichParams
from .circuits.drosophila import (DrosophilaConfig, build_drosophila,
                                  preference_sweep, train_drosophila)
from .circuits.bdm import BDMConfig, CorridorEnv, build_bdm, run_bdm_task
from .circuits.column import ColumnConfig, build_column, stimulate_l4
from .circuits.mouse import (MouseBrainConfig, build_mouse_brain,
                             run_spontaneous, save_connectome)
from .circuits.digits import (assign_labels_and_score,
                              build_unsupervised_layer, train_unsupervised)

__all__ = [
    "EXPERIMENTS",
    "ExperimentSpec",
    "Field",
    "resolve_config",
    "validate_config",
]


@dataclass(frozen=True)
class Field:
    """One schema entry: accepted type, default and value constraint."""

    type: type
    default: object = None
    required: bool = False
    check: Callable[[object], bool] | None = None
    constraint: str = ""


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    description: str
    steps_key: str
    schema: dict[str, Field]
    runner: Callable[[dict, Path, int], dict]


def _positive_int(name: str = "steps") -> Field:
    return Field(int, None, check=lambda v: v >= 1,
                 constraint=f"{name} >= 1")


def _seed_field() -> Field:
    return Field(int, None, required=True,
                 check=lambda v: -(2 ** 63) <= v < 2 ** 63,
                 constraint="seed must be a 64-bit integer")


def validate_config(spec: ExperimentSpec, config: dict) -> list[str]:
    """Schema check only; returns violations naming key and constraint."""
    violations = []
    for key in sorted(config):
        if key in ("experiment",):
            continue
        if key not in spec.schema:
            violations.append(f"{key}: unknown key for experiment "
                              f"{spec.name}")
    if "experiment" in config and config["experiment"] != spec.name:
        violations.append(f"experiment: must be {spec.name!r}, "
                          f"got {config['experiment']!r}")
    for key, f in spec.schema.items():
        if key not in config:
            if f.required:
                violations.append(f"{key}: required key is missing")
            continue
        value = config[key]
        if f.type is int and isinstance(value, bool):
            violations.append(f"{key}: expected int, got bool")
            continue
        if f.type is float and isinstance(value, int) \
                and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, f.type):
            violations.append(f"{key}: expected {f.type.__name__}, "
                              f"got {type(value).__name__}")
            continue
        if f.check is not None and not f.check(value):
            violations.append(f"{key}: must satisfy {f.constraint}")
    return violations


def resolve_config(spec: ExperimentSpec, config: dict) -> dict:
    """Apply defaults to a validated configuration."""
    resolved = {}
    for key, f in spec.schema.items():
        value = config.get(key, f.default)
        if f.type is float and isinstance(value, int) \
                and not isinstance(value, bool):
            value = float(value)
        resolved[key] = value
    return resolved


def _write_curve(path: Path, header: list[str], rows):
    with open(path, "w", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([x if isinstance(x, (int, str)) else repr(float(x))
                             for x in row])


def _write_metrics(path: Path, metrics: dict):
    with open(path, "w", newline="\n") as f:
        json.dump(metrics, f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def _run_drosophila_pi(cfg: dict, out: Path, workers: int) -> dict:
    intensities = np.linspace(0.0, 1.0, cfg["sweep_points"])
    curves = {}
    for pathway in ("linear", "nonlinear"):
        net = build_drosophila(DrosophilaConfig(
            pathway=pathway, kc_size=cfg["kc_size"],
            train_trials=cfg["train_trials"], test_steps=cfg["steps"]))
        train_drosophila(net, seed=cfg["seed"])
        curves[pathway] = preference_sweep(net, intensities,
                                           seed=cfg["seed"] + 1)
    _write_curve(out / "curve.csv",
                 ["intensity", "linear_preference", "nonlinear_preference"],
                 zip(intensities, curves["linear"], curves["nonlinear"]))
    metrics = {"intensities": [float(c) for c in intensities]}
    for pathway, curve in curves.items():
        slopes = np.diff(curve) / np.diff(intensities)
        metrics[pathway] = {
            "preference": [float(v) for v in curve],
            "max_abs_slope": float(np.abs(slopes).max()),
            "preference_low": float(curve[0]),
            "preference_high": float(curve[-1]),
        }
    _write_metrics(out / "metrics.json", metrics)
    report.preference_figure(intensities, curves, out / "preference.png")
    return metrics


def _run_bdm_task(cfg: dict, out: Path, workers: int) -> dict:
    net = build_bdm(BDMConfig(neuron_variant=cfg["variant"],
                              episodes=cfg["episodes"],
                              steps_per_episode=cfg["steps"]))
    env = CorridorEnv(seed=cfg["seed"])
    curve = run_bdm_task(net, env, seed=cfg["seed"])
    _write_curve(out / "curve.csv", ["episode", "cumulative_reward"],
                 enumerate(curve))
    k = max(1, len(curve) // 5)
    metrics = {
        "variant": cfg["variant"],
        "episodes": len(curve),
        "reward_per_episode": [float(r) for r in curve],
        "first_fifth_mean": float(curve[:k].mean()),
        "last_fifth_mean": float(curve[-k:].mean()),
    }
    metrics["improved"] = metrics["last_fifth_mean"] > metrics["first_fifth_mean"]
    _write_metrics(out / "metrics.json", metrics)
    report.learning_curve_figure(curve, out / "learning_curve.png")
    return metrics


def _run_column_l4(cfg: dict, out: Path, workers: int) -> dict:
    net = build_column(ColumnConfig())
    rec = stimulate_l4(net, amplitude=cfg["amplitude"],
                       duration=cfg["duration"], steps=cfg["steps"],
                       seed=cfg["seed"], workers=workers)
    rec.export_raster(out / "raster.csv")
    latencies = {}
    for layer in ("l1", "l23", "l4", "l5", "l6", "thalamus", "rtn"):
        lat = net.first_layer_latency(rec, layer)
        latencies[layer] = None if lat is None else int(lat)
    metrics = {"latency_steps": latencies,
               "total_spikes": rec.total_spikes()}
    _write_metrics(out / "metrics.json", metrics)
    names = {pid: name for name, pid in net.groups.items()}
    report.raster_figure(rec, names, out / "raster.png")
    return metrics


def _run_mouse_spontaneous(cfg: dict, out: Path, workers: int) -> dict:
    net = build_mouse_brain(MouseBrainConfig(scale=cfg["scale"],
                                             n_areas=cfg["n_areas"],
                                             connectome_seed=cfg["seed"]))
    save_connectome(net.connectome, out / "connectome.csv")
    rec, rates = run_spontaneous(net, steps=cfg["steps"], seed=cfg["seed"],
                                 workers=workers)
    rec.export_raster(out / "raster.csv")
    metrics = {
        "counts": {k: int(v) for k, v in net.counts.items()},
        "rates_hz": {k: float(v) for k, v in rates.items()},
        "total_spikes": rec.total_spikes(),
    }
    _write_metrics(out / "metrics.json", metrics)
    report.rate_figure(rates, out / "rates.png")
    names = {pid: name for name, pid in net.pops.items()}
    report.raster_figure(rec, names, out / "raster.png")
    return metrics


def _load_digit_set():
    from sklearn.datasets import load_digits
    d = load_digits()
    return d.data / 16.0, d.target


def _run_unsupervised_digits(cfg: dict, out: Path, workers: int) -> dict:
    x, y = _load_digit_set()
    n_train = cfg["train_items"]
    train_x, train_y = x[:n_train], y[:n_train]
    test_x, test_y = x[-cfg["test_items"]:], y[-cfg["test_items"]:]
    label_x, label_y = train_x[:300], train_y[:300]
    untrained = build_unsupervised_layer(x.shape[1], cfg["n_neurons"],
                                         seed=cfg["seed"])
    acc_untrained = assign_labels_and_score(untrained, label_x, label_y,
                                            test_x, test_y, seed=cfg["seed"])
    layer = build_unsupervised_layer(x.shape[1], cfg["n_neurons"],
                                     seed=cfg["seed"])
    train_unsupervised(layer, train_x, epochs=cfg["epochs"], seed=cfg["seed"])
    accuracy = assign_labels_and_score(layer, label_x, label_y,
                                       test_x, test_y, seed=cfg["seed"])
    metrics = {
        "train_items": n_train,
        "epochs": cfg["epochs"],
        "n_neurons": cfg["n_neurons"],
        "chance": 1.0 / len(np.unique(y)),
        "untrained_accuracy": float(acc_untrained),
        "accuracy": float(accuracy),
    }
    _write_metrics(out / "metrics.json", metrics)
    _write_curve(out / "curve.csv", ["condition", "accuracy"],
                 [("untrained", acc_untrained), ("trained", accuracy)])
    report.receptive_field_figure(layer.weights, out / "receptive_fields.png")
    return metrics


_PROBE_MODELS = ("if", "lif", "aeif", "izhikevich", "hh_full",
                 "hh_simplified")
_IZH_PRESETS = ("regular_spiking", "intrinsically_bursting", "chattering",
                "fast_spiking", "low_threshold_spiking")


def _run_neuron_probe(cfg: dict, out: Path, workers: int) -> dict:
    net = Network()
    params = None
    if cfg["model"] == "izhikevich":
        params = getattr(IzhikevichParams, cfg["preset"])()
    pid = net.add_population(1, cfg["model"], params, name="probe")
    schedule = [StimulusItem(population=pid, onset=cfg["onset"],
                             offset=cfg["steps"], amplitude=cfg["current"])]
    from .network import Recorder
    rec = Recorder()
    rec.add_probe(pid, 0)
    net.run(cfg["steps"], schedule=schedule, seed=cfg["seed"],
            recorder=rec, workers=workers)
    rec.export_raster(out / "raster.csv")
    rec.export_voltages(out / "voltages.csv")
    spikes = [int(s) for s, p in zip(rec.spike_steps, rec.spike_pops)
              if p == pid]
    metrics = {
        "model": cfg["model"],
        "current": cfg["current"],
        "spike_count": len(spikes),
        "first_spike_step": spikes[0] if spikes else None,
    }
    _write_metrics(out / "metrics.json", metrics)
    trace = [(row[0], row[3]) for row in rec.voltage_rows]
    report.voltage_figure(trace, spikes, out / "voltage.png")
    return metrics


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

EXPERIMENTS: dict[str, ExperimentSpec] = {
    "drosophila_pi": ExperimentSpec(
        name="drosophila_pi",
        description="Two-cue dilemma: preference curves of the linear and "
                    "nonlinear mushroom-body pathways",
        steps_key="steps",
        schema={
            "seed": _seed_field(),
            "steps": Field(int, 500, check=lambda v: v >= 1,
                           constraint="steps >= 1"),
            "train_trials": Field(int, 40, check=lambda v: v >= 0,
                                  constraint="train_trials >= 0"),
            "kc_size": Field(int, 40,
                             check=lambda v: v >= 2 and v % 2 == 0,
                             constraint="kc_size even and >= 2"),
            "sweep_points": Field(int, 9, check=lambda v: v >= 2,
                                  constraint="sweep_points >= 2"),
        },
        runner=_run_drosophila_pi),
    "bdm_task": ExperimentSpec(
        name="bdm_task",
        description="Basal-ganglia decision circuit learning the corridor "
                    "reward task",
        steps_key="episodes",
        schema={
            "seed": _seed_field(),
            "episodes": Field(int, 40, check=lambda v: v >= 1,
                              constraint="episodes >= 1"),
            "steps": Field(int, 20, check=lambda v: v >= 1,
                           constraint="steps >= 1"),
            "variant": Field(str, "lif",
                             check=lambda v: v in ("lif", "simplified_hh",
                                                   "simplified_hh_no_na",
                                                   "simplified_hh_no_k"),
                             constraint="variant in {lif, simplified_hh, "
                                        "simplified_hh_no_na, "
                                        "simplified_hh_no_k}"),
        },
        runner=_run_bdm_task),
    "column_l4": ExperimentSpec(
        name="column_l4",
        description="Thalamocortical column probed with an L4 current step",
        steps_key="steps",
        schema={
            "seed": _seed_field(),
            "steps": Field(int, 200, check=lambda v: v >= 1,
                           constraint="steps >= 1"),
            "duration": Field(int, 100, check=lambda v: v >= 1,
                              constraint="duration >= 1"),
            "amplitude": Field(float, 12.0, check=lambda v: v > 0,
                               constraint="amplitude > 0"),
        },
        runner=_run_column_l4),
    "mouse_spontaneous": ExperimentSpec(
        name="mouse_spontaneous",
        description="Scaled mouse brain running spontaneously over the "
                    "area connectome",
        steps_key="steps",
        schema={
            "seed": _seed_field(),
            "steps": Field(int, 1000, check=lambda v: v >= 1,
                           constraint="steps >= 1"),
            "scale": Field(float, 0.02, check=lambda v: 0.0 < v <= 1.0,
                           constraint="scale ∈ (0,1]"),
            "n_areas": Field(int, 20, check=lambda v: v >= 2,
                             constraint="n_areas >= 2"),
        },
        runner=_run_mouse_spontaneous),
    "unsupervised_digits": ExperimentSpec(
        name="unsupervised_digits",
        description="Unsupervised STDP digit layer with label assignment "
                    "accuracy",
        steps_key="epochs",
        schema={
            "seed": _seed_field(),
            "train_items": Field(int, 1000,
                                 check=lambda v: 1 <= v <= 2000,
                                 constraint="train_items ∈ [1, 2000]"),
            "test_items": Field(int, 297, check=lambda v: v >= 1,
                                constraint="test_items >= 1"),
            "epochs": Field(int, 2, check=lambda v: v >= 1,
                            constraint="epochs >= 1"),
            "n_neurons": Field(int, 100, check=lambda v: v >= 1,
                               constraint="n_neurons >= 1"),
        },
        runner=_run_unsupervised_digits),
    "neuron_probe": ExperimentSpec(
        name="neuron_probe",
        description="Single-neuron current-step probe with voltage trace",
        steps_key="steps",
        schema={
            "seed": _seed_field(),
            "steps": Field(int, 200, check=lambda v: v >= 1,
                           constraint="steps >= 1"),
            "onset": Field(int, 10, check=lambda v: v >= 0,
                           constraint="onset >= 0"),
            "current": Field(float, 10.0,
                             check=lambda v: np.isfinite(v),
                             constraint="current finite"),
            "model": Field(str, "izhikevich",
                           check=lambda v: v in _PROBE_MODELS,
                           constraint=f"model in {set(_PROBE_MODELS)}"),
            "preset": Field(str, "regular_spiking",
                            check=lambda v: v in _IZH_PRESETS,
                            constraint=f"preset in {set(_IZH_PRESETS)}"),
        },
        runner=_run_neuron_probe),
}
