"""Thalamocortical column with Izhikevich cell classes.

Six cortical layers (L1 hosts only inhibitory cells), a thalamic relay
and the reticular nucleus.  Cell classes are reduced to four Izhikevich
presets: regular-spiking and intrinsically-bursting excitatory cells,
fast-spiking basket cells and low-threshold-spiking interneurons.  The
canonical probe stimulates the spiny stellate cells of layer 4 and
records the whole-column raster.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..network import Network, Recorder, StimulusItem
from ..neurons import (
    IzhikevichParams,
    classify_firing_pattern,
    rebound_probe,
    run_trace,
)

__all__ = [
    "ColumnConfig",
    "ColumnNet",
    "build_column",
    "stimulate_l4",
    "classify_presets",
]

_LAYERS = ("l1", "l23", "l4", "l5", "l6")


@dataclass(frozen=True)
class ColumnConfig:
    layer_sizes: dict = field(default_factory=lambda: {
        "l1": 6, "l23": 40, "l4": 40, "l5": 30, "l6": 30,
        "thalamus": 12, "rtn": 8,
    })
    exc_ratio: dict = field(default_factory=lambda: {
        "l1": 0.0, "l23": 0.8, "l4": 0.8, "l5": 0.8, "l6": 0.8,
    })
    burst_fraction: float = 0.2
    lts_fraction: float = 0.35
    background_rate: float = 0.02
    background_weight: float = 4.0

    def __post_init__(self):
        for layer, ratio in self.exc_ratio.items():
            if not 0.0 <= ratio <= 1.0:
                raise ValueError(f"exc_ratio[{layer!r}] must lie in [0, 1]")
        if not 0.0 <= self.burst_fraction <= 1.0:
            raise ValueError("burst_fraction must lie in [0, 1]")


class ColumnNet:
    """Population handle per (layer, cell class) group."""

    def __init__(self, cfg: ColumnConfig):
        self.cfg = cfg
        net = Network()
        self.groups: dict[str, int] = {}

        def add(name, size, preset):
            if size < 1:
                return
            pid = net.add_population(
                size, "izhikevich", preset, name=name,
                background_rate=cfg.background_rate,
                background_weight=cfg.background_weight)
            self.groups[name] = pid

        rs = IzhikevichParams.regular_spiking()
        ib = IzhikevichParams.chattering()
        fs = IzhikevichParams.fast_spiking()
        lts = IzhikevichParams.low_threshold_spiking()
        for layer in _LAYERS:
            size = cfg.layer_sizes[layer]
            n_exc = int(round(size * cfg.exc_ratio[layer]))
            n_inh = size - n_exc
            if n_exc:
                n_ib = int(round(n_exc * cfg.burst_fraction))
                add(f"{layer}_exc", n_exc - n_ib, rs)
                add(f"{layer}_burst", n_ib, ib)
            if n_inh:
                n_lts = int(round(n_inh * cfg.lts_fraction))
                add(f"{layer}_basket", n_inh - n_lts, fs)
                add(f"{layer}_lts", n_lts, lts)
        add("thalamus", cfg.layer_sizes["thalamus"], rs)
        add("rtn", cfg.layer_sizes["rtn"], fs)

        def link(src, dst, weight, delay=1, sign="excitatory"):
            if src in self.groups and dst in self.groups:
                net.connect(self.groups[src], self.groups[dst], weight=weight,
                            delay=delay, sign=sign)

        # Feedforward cortical loop: L4 -> L2/3 -> L5 -> L6 -> thalamus,
        # with thalamic input entering at L4 and the RTN gating relay.
        for src_layer, dst_layer, w in (
            ("l4", "l23", 1.6), ("l23", "l5", 1.4), ("l5", "l6", 1.4),
        ):
            for s_cls in ("exc", "burst"):
                for d_cls in ("exc", "burst", "basket", "lts"):
                    link(f"{src_layer}_{s_cls}", f"{dst_layer}_{d_cls}", w)
        for layer in ("l23", "l4", "l5", "l6"):
            # Local excitation and the two inhibitory motifs.
            for s_cls in ("exc", "burst"):
                link(f"{layer}_{s_cls}", f"{layer}_basket", 1.0)
                link(f"{layer}_{s_cls}", f"{layer}_lts", 0.8)
            for i_cls in ("basket", "lts"):
                for d_cls in ("exc", "burst"):
                    link(f"{layer}_{i_cls}", f"{layer}_{d_cls}", -1.5,
                         sign="inhibitory")
        # L1 interneurons inhibit apical targets in L2/3 and L5.
        for dst in ("l23_exc", "l23_burst", "l5_exc", "l5_burst"):
            link("l1_basket", dst, -0.8, sign="inhibitory")
            link("l1_lts", dst, -0.8, sign="inhibitory")
        link("l6_exc", "thalamus", 1.0)
        link("l6_exc", "rtn", 0.8)
        link("thalamus", "l4_exc", 1.2)
        link("thalamus", "l4_burst", 1.2)
        link("thalamus", "rtn", 1.0)
        link("rtn", "thalamus", -1.5, sign="inhibitory")
        self.net = net

    def layer_populations(self, layer: str) -> list[int]:
        return [pid for name, pid in self.groups.items()
                if name == layer or name.startswith(layer + "_")]

    def first_layer_latency(self, recorder: Recorder, layer: str) -> int | None:
        """Earliest spike step over every population of a layer."""
        steps = [recorder.first_spike_step(pid)
                 for pid in self.layer_populations(layer)]
        steps = [s for s in steps if s is not None]
        return min(steps) if steps else None


def build_column(cfg: ColumnConfig) -> ColumnNet:
    return ColumnNet(cfg)


def stimulate_l4(net: ColumnNet, amplitude: float = 12.0,
                 duration: int = 100, steps: int = 200,
                 seed: int = 0, workers: int = 1) -> Recorder:
    """Drive the L4 excitatory cells and record the whole-column raster."""
    schedule = [
        StimulusItem(population=net.groups[name], onset=5, offset=5 + duration,
                     amplitude=amplitude)
        for name in ("l4_exc", "l4_burst") if name in net.groups
    ]
    return net.net.run(steps, schedule=schedule, seed=seed, workers=workers)


def classify_presets(drive: float = 10.0, dt: float = 0.1,
                     duration_ms: float = 400.0) -> dict[str, str]:
    """Classify the firing pattern of each Izhikevich preset in the column.

    Each preset is driven with a constant suprathreshold current from
    rest and its spike train is labelled by the firing-pattern
    classifier (with the hyperpolarization rebound probe feeding the
    low-threshold label).
    """
    presets = {
        "regular_spiking": IzhikevichParams.regular_spiking(),
        "chattering": IzhikevichParams.chattering(),
        "fast_spiking": IzhikevichParams.fast_spiking(),
        "low_threshold_spiking": IzhikevichParams.low_threshold_spiking(),
    }
    labels = {}
    for name, p in presets.items():
        times = run_trace(p, drive, dt, duration_ms)
        labels[name] = classify_firing_pattern(
            np.zeros(int(duration_ms)), times, rebound=rebound_probe(p))
    return labels
