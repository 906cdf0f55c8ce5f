"""Scaled mouse-brain model: six neuron types over an area connectome.

Six cell types -- cortical excitatory (E), basket (I_BC) and Martinotti
(I_MC) interneurons, thalamocortical relay (TC), thalamic interneurons
(TI) and reticular-nucleus cells (TRN) -- are simulated as adaptive
exponential integrate-and-fire populations whose parameters and
full-scale counts come from the reference tables.  Neurons are assigned
to brain areas and inter-type projections are masked by a directed area
connectome, loaded from CSV (``src_area,dst_area,weight``) or produced
by a small-world generator.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..network import Network, Recorder
from ..neurons import AEIFParams

__all__ = [
    "MouseBrainConfig",
    "MouseBrainNet",
    "TYPE_COUNTS",
    "TYPE_PARAMS",
    "build_mouse_brain",
    "run_spontaneous",
    "generate_connectome",
    "save_connectome",
    "load_connectome",
]

# Full-scale neuron counts per type.
TYPE_COUNTS = {
    "E": 56100, "I_BC": 14960, "I_MC": 7480,
    "TC": 1300, "TI": 260, "TRN": 520,
}

# Membrane parameters per type: threshold, reset, membrane and
# adaptation time constants, and the sub/spike-triggered adaptation
# couplings (a, b).  A missing adaptation time constant means the type
# carries no adaptation current.
TYPE_PARAMS = {
    "E": dict(v_th=-50.0, v_r=-110.0, tau_v=100.0, tau_w=None, a=0.0, b=0.0),
    "I_BC": dict(v_th=-44.0, v_r=-110.0, tau_v=100.0, tau_w=20.0, a=-2.0, b=4.5),
    "I_MC": dict(v_th=-45.0, v_r=-66.0, tau_v=85.0, tau_w=20.0, a=-2.0, b=4.5),
    "TC": dict(v_th=-50.0, v_r=-60.0, tau_v=200.0, tau_w=None, a=0.0, b=0.0),
    "TI": dict(v_th=-50.0, v_r=-60.0, tau_v=20.0, tau_w=20.0, a=-2.0, b=4.5),
    "TRN": dict(v_th=-45.0, v_r=-65.0, tau_v=40.0, tau_w=20.0, a=-2.0, b=4.5),
}

_CORTICAL = ("E", "I_BC", "I_MC")
_EXCITATORY = ("E", "TC")


def aeif_params_for(type_name: str) -> AEIFParams:
    """Adaptive-exponential parameters for one neuron type.

    Types without an adaptation current (E, TC) rest a few millivolts
    below threshold so background synaptic noise can depolarize them;
    the adapting interneuron types self-depolarize through their
    negative subthreshold coupling and rest at the reset potential.
    """
    row = TYPE_PARAMS[type_name]
    e_l = row["v_th"] - 5.0 if row["tau_w"] is None else row["v_r"]
    return AEIFParams(
        c_mem=row["tau_v"], g_l=1.0, e_l=e_l, delta_t=2.0,
        v_th=row["v_th"], v_reset=row["v_r"],
        tau_w=row["tau_w"] if row["tau_w"] is not None else 1e9,
        a=row["a"], b=row["b"],
    )


@dataclass(frozen=True)
class MouseBrainConfig:
    scale: float = 0.02
    n_areas: int = 20
    connectome_path: str | None = None
    connectome_seed: int = 0
    connection_prob: float = 0.05
    exc_weight: float = 18.0
    inh_weight: float = -25.0
    background_rate: float = 0.05
    background_weight: float = 70.0

    def __post_init__(self):
        if not 0.0 < self.scale <= 1.0:
            raise ValueError("scale must lie in (0, 1]")
        if self.n_areas < 2:
            raise ValueError("n_areas must be at least 2")
        for name, count in self.scaled_counts().items():
            if count < 1:
                raise ValueError(
                    f"scale {self.scale} reduces type {name} below 1 neuron")

    def scaled_counts(self) -> dict[str, int]:
        return {name: int(round(self.scale * count))
                for name, count in TYPE_COUNTS.items()}


def generate_connectome(n_areas: int, seed: int = 0, k_ring: int = 4,
                        rewire_prob: float = 0.2) -> dict:
    """Synthetic small-world area graph with log-normal weights.

    Areas sit on a ring, each connecting to its ``k_ring`` nearest
    neighbours per side; every edge is rewired to a random target with
    probability ``rewire_prob``.  Returns ``{(src, dst): weight}``.
    """
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xC0E)))
    edges: dict[tuple[int, int], float] = {}
    for src in range(n_areas):
        for step in range(1, k_ring + 1):
            dst = (src + step) % n_areas
            if rng.random() < rewire_prob:
                dst = int(rng.integers(n_areas))
            if dst != src:
                edges[(src, dst)] = float(rng.lognormal(0.0, 0.5))
                edges[(dst, src)] = float(rng.lognormal(0.0, 0.5))
    return edges


def save_connectome(edges: dict, path):
    with open(path, "w", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["src_area", "dst_area", "weight"])
        for (src, dst), w in sorted(edges.items()):
            writer.writerow([src, dst, repr(w)])


def load_connectome(path) -> dict:
    """Read an area connectome CSV; malformed rows are rejected with
    their row number and offending column."""
    edges: dict[tuple[int, int], float] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["src_area", "dst_area", "weight"]:
            raise ValueError(
                "connectome header must be src_area,dst_area,weight, "
                f"got {header}")
        for row_no, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ValueError(f"row {row_no}: expected 3 columns, "
                                 f"got {len(row)}")
            try:
                src = int(row[0])
            except ValueError:
                raise ValueError(f"row {row_no}, column src_area: "
                                 f"{row[0]!r} is not an integer") from None
            try:
                dst = int(row[1])
            except ValueError:
                raise ValueError(f"row {row_no}, column dst_area: "
                                 f"{row[1]!r} is not an integer") from None
            try:
                weight = float(row[2])
            except ValueError:
                raise ValueError(f"row {row_no}, column weight: "
                                 f"{row[2]!r} is not a number") from None
            if not np.isfinite(weight) or weight < 0:
                raise ValueError(f"row {row_no}, column weight: must be a "
                                 "finite non-negative number")
            edges[(src, dst)] = weight
    return edges


class MouseBrainNet:
    """One population per neuron type with connectome-masked projections."""

    def __init__(self, cfg: MouseBrainConfig):
        self.cfg = cfg
        if cfg.connectome_path is not None:
            self.connectome = load_connectome(cfg.connectome_path)
        else:
            self.connectome = generate_connectome(cfg.n_areas,
                                                  seed=cfg.connectome_seed)
        counts = cfg.scaled_counts()
        self.counts = counts
        net = Network()
        self.pops: dict[str, int] = {}
        self.areas: dict[str, np.ndarray] = {}
        for name, count in counts.items():
            self.pops[name] = net.add_population(
                count, "aeif", aeif_params_for(name), name=name,
                background_rate=cfg.background_rate,
                background_weight=cfg.background_weight)
            # Round-robin assignment of neurons to brain areas.
            self.areas[name] = np.arange(count) % cfg.n_areas
        rng = np.random.default_rng(
            np.random.SeedSequence((cfg.connectome_seed, 0xC0F)))
        # Type-level projection motifs: cortical E drives everything
        # cortical, interneurons inhibit locally, and the
        # thalamocortical loop runs TC <-> cortex with TI/TRN gating.
        motifs = [
            ("E", "E", 1.0), ("E", "I_BC", 1.0), ("E", "I_MC", 1.0),
            ("I_BC", "E", 1.0), ("I_BC", "I_MC", 0.5),
            ("I_MC", "E", 1.0), ("I_MC", "I_BC", 0.5),
            ("TC", "E", 1.0), ("E", "TC", 0.4),
            ("TC", "TRN", 0.8), ("TRN", "TC", 1.0),
            ("TI", "TC", 1.0), ("TC", "TI", 0.5),
            ("E", "TRN", 0.3),
        ]
        self.projections = {}
        for src, dst, strength in motifs:
            mask = self._area_mask(src, dst, rng)
            if not mask.any():
                continue
            inhibitory = src not in _EXCITATORY
            base = cfg.inh_weight if inhibitory else cfg.exc_weight
            self.projections[(src, dst)] = net.connect(
                self.pops[src], self.pops[dst], mask=mask,
                weight=base * strength,
                sign="inhibitory" if inhibitory else "excitatory")
        self.net = net

    def _area_mask(self, src: str, dst: str,
                   rng: np.random.Generator) -> np.ndarray:
        """Sparse mask allowing synapses only along connectome edges
        (or within the same area)."""
        a_src = self.areas[src]
        a_dst = self.areas[dst]
        allowed = np.zeros((self.cfg.n_areas, self.cfg.n_areas), dtype=bool)
        np.fill_diagonal(allowed, True)
        for (s, d) in self.connectome:
            if s < self.cfg.n_areas and d < self.cfg.n_areas:
                allowed[s, d] = True
        pair_ok = allowed[np.ix_(a_src, a_dst)]
        random_ok = rng.random(pair_ok.shape) < self.cfg.connection_prob
        mask = pair_ok & random_ok
        if src == dst:
            np.fill_diagonal(mask, False)
        return mask

    def rate_summary(self, recorder: Recorder, steps: int) -> dict[str, float]:
        """Mean firing rate in Hz per neuron type (dt = 1 ms)."""
        out = {}
        for name, pid in self.pops.items():
            total = int(recorder.spike_counts(pid, self.counts[name]).sum())
            out[name] = 1000.0 * total / (self.counts[name] * steps)
        return out


def build_mouse_brain(cfg: MouseBrainConfig) -> MouseBrainNet:
    return MouseBrainNet(cfg)


def run_spontaneous(net: MouseBrainNet, steps: int = 1000, seed: int = 0,
                    workers: int = 1) -> tuple[Recorder, dict[str, float]]:
    """Spontaneous run without external stimulation.

    Returns the recorder and the per-type mean-rate summary; raises if
    any membrane or adaptation state went non-finite.
    """
    recorder = net.net.run(steps, seed=seed, workers=workers)
    for name, pid in net.pops.items():
        state = net.net.populations[pid].state
        if not (np.isfinite(state.v).all() and np.isfinite(state.w).all()):
            raise FloatingPointError(f"non-finite state in type {name}")
    return recorder, net.rate_summary(recorder, steps)
