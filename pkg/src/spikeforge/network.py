"""Synchronous population-graph runtime.

Populations of model neurons are linked by weighted, delayed, optionally
plastic projections.  The network advances on a fixed global clock
(dt = 1 ms by default) with current-based synapses: each presynaptic
spike deposits its weight as current on the postsynaptic neuron when its
delay expires.  A projection with delay 0 delivers at t + 1, so there is
no intra-step ordering ambiguity.

Determinism contract: for a fixed seed and configuration, runs are
bit-identical regardless of the worker-count setting.  Random streams
are drawn per population from a spawned seed sequence, and the worker
count only partitions index ranges whose results are order-independent.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import neurons as nm
from .plasticity import STDPParams

__all__ = [
    "Network",
    "Population",
    "Projection",
    "Recorder",
    "StimulusItem",
    "wta_readout",
]

_MODEL_STEPPERS = {
    "if": (nm.step_if, nm.IFParams),
    "lif": (nm.step_lif, nm.LIFParams),
    "aeif": (nm.step_aeif, nm.AEIFParams),
    "izhikevich": (nm.step_izhikevich, nm.IzhikevichParams),
    "hh_full": (nm.step_hh, nm.HHParams),
    "hh_simplified": (nm.step_hh, nm.HHParams),
}


@dataclass
class StimulusItem:
    """Constant-current stimulus on a neuron range of one population."""

    population: int
    onset: int
    offset: int
    amplitude: float
    neuron_start: int = 0
    neuron_stop: int | None = None

    def __post_init__(self):
        if self.onset > self.offset:
            raise ValueError("stimulus onset must not exceed offset")


class Population:
    """A homogeneous group of neurons sharing one model and parameter set."""

    def __init__(self, pid: int, name: str, size: int, model: str, params,
                 refractory_steps: int = 0, background_rate: float = 0.0,
                 background_weight: float = 0.0, v_init: float | None = None,
                 hh_substep_dt: float | None = None):
        if size < 1:
            raise ValueError("population size must be at least 1")
        if model not in _MODEL_STEPPERS:
            raise ValueError(f"unknown neuron model: {model!r}")
        self.pid = pid
        self.name = name
        self.size = size
        self.model = model
        self.params = params
        self.refractory_steps = refractory_steps
        self.background_rate = background_rate
        self.background_weight = background_weight
        self.hh_substep_dt = hh_substep_dt
        self.state = self._initial_state(v_init)
        self.last_spiked = np.zeros(size, dtype=bool)

    def _initial_state(self, v_init: float | None) -> nm.NeuronState:
        if self.model in ("hh_full", "hh_simplified"):
            st = nm.NeuronState.hh_resting(self.size, self.params)
            if v_init is not None:
                st.v[:] = v_init
            return st
        if v_init is None:
            if self.model == "izhikevich":
                v_init = self.params.c
            else:
                v_init = getattr(self.params, "v_reset", 0.0)
        st = nm.NeuronState.resting(self.size, v_init)
        if self.model == "izhikevich":
            st.u[:] = self.params.b * st.v
        return st

    def reset(self, v_init: float | None = None):
        self.state = self._initial_state(v_init)
        self.last_spiked[:] = False

    def step(self, currents: np.ndarray, dt: float, workers: int = 1) -> np.ndarray:
        """Advance all neurons one network step; returns the spike mask."""
        spiked = np.zeros(self.size, dtype=bool)
        chunks = _partition(self.size, workers)
        for lo, hi in chunks:
            sub = _slice_state(self.state, lo, hi)
            if self.model in ("hh_full", "hh_simplified"):
                variant = "full" if self.model == "hh_full" else "simplified"
                sub_dt = self.hh_substep_dt or (0.01 if variant == "full" else 0.05)
                n_sub = max(1, int(round(dt / sub_dt)))
                sp = np.zeros(hi - lo, dtype=bool)
                for _ in range(n_sub):
                    res = nm.step_hh(sub, self.params, currents[lo:hi], sub_dt,
                                     variant=variant,
                                     refractory_steps=self.refractory_steps)
                    sub = res.state
                    sp |= res.spiked
            else:
                stepper = _MODEL_STEPPERS[self.model][0]
                res = stepper(sub, self.params, currents[lo:hi], dt,
                              refractory_steps=self.refractory_steps)
                sub = res.state
                sp = res.spiked
            _write_state(self.state, sub, lo, hi)
            spiked[lo:hi] = sp
        self.last_spiked = spiked
        return spiked


def _partition(size: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, size))
    bounds = np.linspace(0, size, workers + 1).astype(int)
    return [(int(bounds[k]), int(bounds[k + 1])) for k in range(workers)
            if bounds[k] < bounds[k + 1]]


def _slice_state(state: nm.NeuronState, lo: int, hi: int) -> nm.NeuronState:
    # Views into the parent arrays; bypass __post_init__ so the slices
    # are not copied (hot path, called once per population per step).
    sub = object.__new__(nm.NeuronState)
    sub.v = state.v[lo:hi]
    sub.u = state.u[lo:hi]
    sub.w = state.w[lo:hi]
    sub.n = state.n[lo:hi]
    sub.m = state.m[lo:hi]
    sub.h = state.h[lo:hi]
    sub.refractory_remaining = state.refractory_remaining[lo:hi]
    return sub


def _write_state(state: nm.NeuronState, sub: nm.NeuronState, lo: int, hi: int):
    for name in ("v", "u", "w", "n", "m", "h", "refractory_remaining"):
        getattr(state, name)[lo:hi] = getattr(sub, name)


class Projection:
    """Weighted, delayed connection between two populations.

    Weights are dense (n_pre, n_post) aligned to an explicit boolean
    mask; entries outside the mask stay zero.  Sign constraints are
    enforced at construction and re-applied after plasticity updates.
    """

    def __init__(self, proj_id: int, pre: Population, post: Population,
                 mask: np.ndarray, weights: np.ndarray, delay: int,
                 sign: str, plasticity: str = "none",
                 stdp: STDPParams | None = None, tau_e: float = 200.0,
                 reward_gain: float = 1.0):
        if sign not in ("excitatory", "inhibitory"):
            raise ValueError(f"sign must be excitatory or inhibitory, got {sign!r}")
        if plasticity not in ("none", "stdp", "rstdp"):
            raise ValueError(f"unknown plasticity mode: {plasticity!r}")
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (pre.size, post.size):
            raise ValueError(
                f"mask shape {mask.shape} does not match "
                f"({pre.size}, {post.size})")
        weights = np.broadcast_to(np.asarray(weights, dtype=float), mask.shape).copy()
        weights[~mask] = 0.0
        if sign == "excitatory" and np.any(weights < 0):
            raise ValueError("excitatory projection initialized with negative weights")
        if sign == "inhibitory" and np.any(weights > 0):
            raise ValueError("inhibitory projection initialized with positive weights")
        if delay < 0:
            raise ValueError("delay must be non-negative")
        self.proj_id = proj_id
        self.pre = pre
        self.post = post
        self.mask = mask
        self.weights = weights
        self.delay = delay
        self.sign = sign
        self.plasticity = plasticity
        self.stdp = stdp or STDPParams()
        self.reward_gain = reward_gain
        # Spike queue: slot k holds the presynaptic spike vector due in
        # k+1 steps (delay 0 is treated as delay 1).
        self._queue: list[np.ndarray] = [
            np.zeros(pre.size, dtype=bool) for _ in range(max(delay, 1))
        ]
        self._trace_pre = np.zeros(pre.size)
        self._trace_post = np.zeros(post.size)
        self.eligibility = np.zeros_like(weights)
        self.tau_e = tau_e

    def n_synapses(self) -> int:
        return int(self.mask.sum())

    def deliver(self) -> np.ndarray:
        """Pop the due spike vector and return postsynaptic currents."""
        due = self._queue.pop(0)
        self._queue.append(np.zeros(self.pre.size, dtype=bool))
        if not due.any():
            return np.zeros(self.post.size)
        return due.astype(float) @ self.weights

    def enqueue(self, pre_spikes: np.ndarray):
        self._queue[-1] = pre_spikes.copy()

    def _clamp(self, w: np.ndarray) -> np.ndarray:
        lo, hi = self.stdp.w_min, self.stdp.w_max
        if self.sign == "excitatory":
            lo = max(lo, 0.0)
        else:
            hi = min(hi, 0.0)
        w = np.clip(w, lo, hi)
        w[~self.mask] = 0.0
        return w

    def plasticity_step(self, pre_spikes: np.ndarray, post_spikes: np.ndarray,
                        dt: float):
        """Online trace-based STDP increment for this step.

        For ``stdp`` the increment is applied to the weights directly;
        for ``rstdp`` it accumulates into the eligibility trace, which
        converts to a weight change only when a reward arrives.
        """
        if self.plasticity == "none":
            return
        p = self.stdp
        self._trace_pre *= np.exp(-dt / p.tau_plus)
        self._trace_post *= np.exp(-dt / p.tau_minus)
        dw = np.zeros_like(self.weights)
        if post_spikes.any():
            dw[:, post_spikes] += p.a_plus * self._trace_pre[:, None]
        if pre_spikes.any():
            dw[pre_spikes, :] -= p.a_minus * self._trace_post[None, :]
        self._trace_pre[pre_spikes] += 1.0
        self._trace_post[post_spikes] += 1.0
        if self.plasticity == "stdp":
            self.weights = self._clamp(self.weights + dw)
        else:
            self.eligibility += (-self.eligibility / self.tau_e) * dt + dw

    def apply_reward(self, reward: float):
        """Convert the eligibility trace into a weight change (R-STDP)."""
        if self.plasticity != "rstdp":
            raise ValueError("apply_reward requires an rstdp projection")
        self.weights = self._clamp(
            self.weights + self.reward_gain * reward * self.eligibility)


class Recorder:
    """Spike raster, voltage probes and scalar metric series for one run."""

    def __init__(self):
        self.spike_steps: list[int] = []
        self.spike_pops: list[int] = []
        self.spike_neurons: list[int] = []
        self.voltage_rows: list[tuple[int, int, int, float]] = []
        self.metrics: dict[str, list] = {}
        self._probes: list[tuple[int, int]] = []

    def add_probe(self, population: int, neuron: int):
        self._probes.append((population, neuron))

    def record_spikes(self, step: int, pid: int, spiked: np.ndarray):
        idx = np.flatnonzero(spiked)
        self.spike_steps.extend([step] * len(idx))
        self.spike_pops.extend([pid] * len(idx))
        self.spike_neurons.extend(int(i) for i in idx)

    def record_voltages(self, step: int, pops: dict[int, Population]):
        for pid, ni in self._probes:
            self.voltage_rows.append((step, pid, ni, float(pops[pid].state.v[ni])))

    def append_metric(self, name: str, value):
        self.metrics.setdefault(name, []).append(value)

    def total_spikes(self) -> int:
        return len(self.spike_steps)

    def spike_counts(self, population: int, size: int,
                     window: tuple[int, int] | None = None) -> np.ndarray:
        counts = np.zeros(size, dtype=int)
        for step, pid, ni in zip(self.spike_steps, self.spike_pops,
                                 self.spike_neurons):
            if pid != population:
                continue
            if window is not None and not (window[0] <= step < window[1]):
                continue
            counts[ni] += 1
        return counts

    def first_spike_step(self, population: int) -> int | None:
        steps = [s for s, p in zip(self.spike_steps, self.spike_pops)
                 if p == population]
        return min(steps) if steps else None

    def export_raster(self, path):
        with open(path, "w", newline="\n") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["step", "population", "neuron"])
            for row in zip(self.spike_steps, self.spike_pops, self.spike_neurons):
                writer.writerow(row)

    def export_voltages(self, path):
        with open(path, "w", newline="\n") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["step", "population", "neuron", "v"])
            for row in self.voltage_rows:
                writer.writerow([row[0], row[1], row[2], repr(row[3])])

    def export_metrics(self, path):
        with open(path, "w", newline="\n") as f:
            json.dump(self.metrics, f, indent=2, sort_keys=True)
            f.write("\n")


class Network:
    """Population graph with a synchronous fixed-dt clock."""

    def __init__(self, dt: float = 1.0):
        self.dt = dt
        self.populations: dict[int, Population] = {}
        self.projections: dict[int, Projection] = {}
        self._names: dict[str, int] = {}
        self._next_pid = 0
        self._next_proj = 0
        self._rngs: dict[int, np.random.Generator] = {}
        self.step_index = 0

    def add_population(self, size: int, model: str, params=None,
                       name: str | None = None, **kwargs) -> int:
        """Register a population; returns its id.  Duplicate names are
        rejected.  Initial membrane potential is the model's reset value
        unless ``v_init`` is given."""
        if name is not None and name in self._names:
            raise ValueError(f"duplicate population name: {name!r}")
        if model not in _MODEL_STEPPERS:
            raise ValueError(f"unknown neuron model: {model!r}")
        if params is None:
            params = _MODEL_STEPPERS[model][1]()
        pid = self._next_pid
        self._next_pid += 1
        pop = Population(pid, name or f"pop{pid}", size, model, params, **kwargs)
        self.populations[pid] = pop
        if name is not None:
            self._names[name] = pid
        return pid

    def pop(self, ref) -> Population:
        if isinstance(ref, str):
            ref = self._names[ref]
        return self.populations[ref]

    def pop_id(self, name: str) -> int:
        return self._names[name]

    def connect(self, pre, post, mask=None, weight=0.1, delay: int = 0,
                sign: str = "excitatory", plasticity: str = "none",
                stdp: STDPParams | None = None, tau_e: float = 200.0,
                reward_gain: float = 1.0) -> int:
        """Create a projection; ``mask=None`` means all-to-all."""
        pre_pop = self.pop(pre)
        post_pop = self.pop(post)
        if mask is None:
            mask = np.ones((pre_pop.size, post_pop.size), dtype=bool)
        proj_id = self._next_proj
        self._next_proj += 1
        proj = Projection(proj_id, pre_pop, post_pop, mask, weight, delay,
                          sign, plasticity, stdp, tau_e, reward_gain)
        self.projections[proj_id] = proj
        return proj_id

    def lateral_inhibit(self, population, strength: float, delay: int = 0) -> int:
        """All-to-all inhibition within a population, minus self-connections."""
        pop = self.pop(population)
        mask = ~np.eye(pop.size, dtype=bool)
        return self.connect(pop.pid, pop.pid, mask=mask, weight=-strength,
                            delay=delay, sign="inhibitory")

    def seed(self, seed: int):
        """(Re)initialize per-population random streams.

        Streams are spawned per population id, so draws never depend on
        worker partitioning or on other populations."""
        ss = np.random.SeedSequence(seed)
        children = ss.spawn(len(self.populations))
        self._rngs = {
            pid: np.random.default_rng(child)
            for pid, child in zip(sorted(self.populations), children)
        }

    def step(self, external_currents: dict[int, np.ndarray] | None = None,
             recorder: Recorder | None = None,
             workers: int = 1) -> dict[int, np.ndarray]:
        """Advance the global clock one step.

        Order: deliver due projection spikes, accumulate currents (plus
        external and background drive), step neurons, enqueue new spikes,
        run plasticity hooks, record.
        """
        currents = {pid: np.zeros(p.size) for pid, p in self.populations.items()}
        for proj_id in sorted(self.projections):
            proj = self.projections[proj_id]
            currents[proj.post.pid] += proj.deliver()
        if external_currents:
            for pid, cur in external_currents.items():
                if pid not in self.populations:
                    raise KeyError(f"unknown population id: {pid}")
                currents[pid] += cur
        for pid in sorted(self.populations):
            pop = self.populations[pid]
            if pop.background_rate > 0:
                rng = self._rngs.get(pid)
                if rng is None:
                    raise RuntimeError("call seed() before using background drive")
                hits = rng.random(pop.size) < pop.background_rate
                currents[pid] += hits * pop.background_weight
        spikes = {}
        for pid in sorted(self.populations):
            pop = self.populations[pid]
            spikes[pid] = pop.step(currents[pid], self.dt, workers=workers)
        for proj_id in sorted(self.projections):
            proj = self.projections[proj_id]
            proj.enqueue(spikes[proj.pre.pid])
            proj.plasticity_step(spikes[proj.pre.pid], spikes[proj.post.pid],
                                 self.dt)
        if recorder is not None:
            for pid in sorted(spikes):
                recorder.record_spikes(self.step_index, pid, spikes[pid])
            recorder.record_voltages(self.step_index, self.populations)
        self.step_index += 1
        return spikes

    def run(self, steps: int, schedule: list[StimulusItem] | None = None,
            seed: int = 0, recorder: Recorder | None = None,
            workers: int = 1) -> Recorder:
        """Run for ``steps`` clock ticks applying a stimulus schedule."""
        if steps < 1:
            raise ValueError("steps must be at least 1")
        schedule = schedule or []
        for item in schedule:
            if item.population not in self.populations:
                raise KeyError(f"schedule references unknown population "
                               f"{item.population}")
        self.seed(seed)
        recorder = recorder or Recorder()
        for t in range(steps):
            ext: dict[int, np.ndarray] = {}
            for item in schedule:
                if item.onset <= t < item.offset:
                    pop = self.populations[item.population]
                    cur = ext.setdefault(item.population, np.zeros(pop.size))
                    stop = item.neuron_stop if item.neuron_stop is not None else pop.size
                    cur[item.neuron_start:stop] += item.amplitude
            self.step(ext, recorder=recorder, workers=workers)
        return recorder


def wta_readout(recorder: Recorder, population: int, size: int,
                window: tuple[int, int]) -> tuple[int, bool]:
    """Winner-take-all readout: argmax of spike counts in a window.

    Returns (winner index, decisive flag).  Ties break to the lowest
    index; the flag is False on a tie or when no spikes occurred.
    """
    counts = recorder.spike_counts(population, size, window)
    winner = int(np.argmax(counts))
    decisive = counts[winner] > 0 and (counts == counts[winner]).sum() == 1
    return winner, bool(decisive)
