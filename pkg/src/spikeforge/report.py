"""Figure rendering for experiment reports.

Every experiment writes its numeric artifacts as CSV/JSON; the
functions here render the matching matplotlib figures next to them.
The Agg backend is forced so rendering works headless, and no
timestamps enter the files, keeping output deterministic.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "preference_figure",
    "learning_curve_figure",
    "raster_figure",
    "rate_figure",
    "receptive_field_figure",
    "voltage_figure",
]


def _save(fig, path):
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def preference_figure(intensities, curves: dict, path):
    """Signed preference vs. color intensity, one line per pathway."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for pathway, curve in sorted(curves.items()):
        ax.plot(intensities, curve, marker="o", label=pathway)
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_xlabel("color intensity")
    ax.set_ylabel("signed preference")
    ax.set_ylim(-1.1, 1.1)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def learning_curve_figure(curve, path):
    """Cumulative reward per episode."""
    curve = np.asarray(curve, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(np.arange(len(curve)), curve, lw=1.0)
    if len(curve) >= 5:
        k = max(1, len(curve) // 5)
        smooth = np.convolve(curve, np.ones(k) / k, mode="valid")
        ax.plot(np.arange(len(smooth)) + (k - 1) / 2, smooth, lw=2.0,
                label="smoothed")
        ax.legend()
    ax.set_xlabel("episode")
    ax.set_ylabel("cumulative reward")
    fig.tight_layout()
    _save(fig, path)


def raster_figure(recorder, population_names: dict, path):
    """Spike raster with contiguous per-population row bands."""
    fig, ax = plt.subplots(figsize=(6, 4))
    offsets = {}
    base = 0
    for pid in sorted(population_names):
        offsets[pid] = base
        neurons = [n for p, n in zip(recorder.spike_pops,
                                     recorder.spike_neurons) if p == pid]
        base += (max(neurons) + 2) if neurons else 2
    rows = [offsets[p] + n for p, n in zip(recorder.spike_pops,
                                           recorder.spike_neurons)]
    ax.scatter(recorder.spike_steps, rows, s=1.0, marker="|", lw=0.6)
    ax.set_yticks([offsets[pid] for pid in sorted(population_names)])
    ax.set_yticklabels([population_names[pid]
                        for pid in sorted(population_names)], fontsize=6)
    ax.set_xlabel("step")
    fig.tight_layout()
    _save(fig, path)


def rate_figure(rates: dict, path):
    """Mean firing rate per neuron type."""
    names = sorted(rates)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(names, [rates[n] for n in names])
    ax.set_ylabel("rate (Hz)")
    fig.tight_layout()
    _save(fig, path)


def receptive_field_figure(weights, path, max_cells: int = 25):
    """Grid of learned input-weight maps (square inputs assumed)."""
    weights = np.asarray(weights, dtype=float)
    side = int(round(np.sqrt(weights.shape[0])))
    n = min(max_cells, weights.shape[1])
    cols = int(np.ceil(np.sqrt(n)))
    rows = int(np.ceil(n / cols))
    fig, axes = plt.subplots(rows, cols, figsize=(cols, rows))
    for i, ax in enumerate(np.atleast_1d(axes).ravel()):
        ax.axis("off")
        if i < n and side * side == weights.shape[0]:
            ax.imshow(weights[:, i].reshape(side, side),
                      cmap="viridis", interpolation="nearest")
    fig.tight_layout()
    _save(fig, path)


def voltage_figure(trace, spike_steps, path):
    """Membrane-potential trace with spike markers."""
    fig, ax = plt.subplots(figsize=(6, 3))
    if trace:
        steps, volts = zip(*trace)
        ax.plot(steps, volts, lw=0.8)
    for s in spike_steps:
        ax.axvline(s, color="crimson", lw=0.4, alpha=0.5)
    ax.set_xlabel("step")
    ax.set_ylabel("membrane potential")
    fig.tight_layout()
    _save(fig, path)
