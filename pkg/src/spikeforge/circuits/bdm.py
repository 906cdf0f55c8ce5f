"""Basal-ganglia decision-making network (BDM-SNN) with a built-in task.

The circuit routes a prefrontal state representation through the three
canonical basal-ganglia pathways -- direct (PFC -> StrD1 -| GPi),
indirect (PFC -> StrD2 -| GPe) and hyperdirect (PFC -> STN) -- onto an
action-channelled output stage (GPi -| thalamus -> premotor cortex).
Dopamine-scaled R-STDP adapts the PFC-to-striatal projections: rewards
potentiate the direct pathway and depress the indirect one.

The built-in reward task is an obstacle corridor: the agent occupies one
of several rows, each step a wall with a gap arrives, and the agent must
steer toward the gap.  The gap sequence is a fixed function of the run
seed, so a policy that never changes collects exactly the same reward
every episode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..network import Network, wta_readout
from ..neurons import HHParams, LIFParams
from ..plasticity import STDPParams

__all__ = [
    "BDMConfig",
    "BDMNet",
    "RewardTaskEnv",
    "CorridorEnv",
    "build_bdm",
    "run_bdm_task",
]

_VARIANTS = ("lif", "simplified_hh", "simplified_hh_no_na",
             "simplified_hh_no_k")


@dataclass(frozen=True)
class BDMConfig:
    neuron_variant: str = "lif"
    state_space: int = 3
    action_space: int = 3
    episodes: int = 40
    steps_per_episode: int = 20
    decision_steps: int = 30
    settle_steps: int = 10
    a_plus: float = 0.05
    tau_e: float = 10.0
    da_gain: float = 0.15
    w_floor: float = 0.15
    anneal_end: float = 0.5

    def __post_init__(self):
        if self.neuron_variant not in _VARIANTS:
            raise ValueError(f"neuron_variant must be one of {_VARIANTS}, "
                             f"got {self.neuron_variant!r}")
        if self.state_space < 1 or self.action_space < 1:
            raise ValueError("state and action space sizes must be >= 1")
        if self.episodes < 0:
            raise ValueError("episodes must be non-negative")


class RewardTaskEnv:
    """Abstract episodic task interface for the decision circuit."""

    def reset(self, episode: int) -> int:
        """Start an episode; returns the initial state index."""
        raise NotImplementedError

    def act(self, action: int) -> tuple[float, int, bool]:
        """Apply an action; returns (reward, next state, done)."""
        raise NotImplementedError


class CorridorEnv(RewardTaskEnv):
    """Obstacle corridor with a fixed, seed-determined gap sequence.

    State encodes where the gap lies relative to the agent (below,
    aligned, above); actions move the agent (down, stay, up).  Passing
    through the gap earns +1, hitting the wall costs -1.  Episodes last
    ``length`` walls and replay the identical gap sequence, so reward
    differences across episodes reflect policy changes only.
    """

    BELOW, ALIGNED, ABOVE = 0, 1, 2
    DOWN, STAY, UP = 0, 1, 2

    def __init__(self, seed: int, length: int = 20, rows: int = 5):
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0xB0D)))
        self.length = length
        self.rows = rows
        # The gap follows a bounded random walk, so steering one row
        # toward it per wall is enough to stay aligned.
        gaps = np.empty(length, dtype=int)
        gap = rows // 2
        for t in range(length):
            gap = int(np.clip(gap + rng.integers(-1, 2), 0, rows - 1))
            gaps[t] = gap
        self.gaps = gaps
        self.start_row = rows // 2

    def _state(self) -> int:
        gap = self.gaps[self._t]
        if gap < self.row:
            return self.BELOW
        if gap > self.row:
            return self.ABOVE
        return self.ALIGNED

    def reset(self, episode: int) -> int:
        self._t = 0
        self.row = self.start_row
        return self._state()

    def act(self, action: int) -> tuple[float, int, bool]:
        if action == self.DOWN:
            self.row = max(0, self.row - 1)
        elif action == self.UP:
            self.row = min(self.rows - 1, self.row + 1)
        reward = 1.0 if self.row == self.gaps[self._t] else -1.0
        self._t += 1
        done = self._t >= self.length
        state = 0 if done else self._state()
        return reward, state, done


def _variant_params(variant: str):
    """Per-population neuron model, params and a current scale factor."""
    if variant == "lif":
        return "lif", LIFParams(tau=3.0, v_th=1.0), 1.0
    if variant == "simplified_hh":
        p = HHParams.simplified()
    elif variant == "simplified_hh_no_na":
        p = HHParams.simplified_without_sodium()
    else:
        p = HHParams.simplified_without_potassium()
    # The simplified conductance model has a responsive firing-rate range
    # for drives of roughly 0.1-1, so synaptic currents are scaled to it.
    return "hh_simplified", p, 0.15


# Operating points per membrane model.  The LIF membrane integrates over
# ~3 ms, so moderate subtractive inhibition modulates downstream rates;
# the simplified conductance membrane has a strongly compressive f-I
# curve, so the pallido-thalamic gate only transmits channel contrast
# when its inhibitory synapses act as per-spike vetoes (hyperpolarizing
# pulses several times the tonic drive) and tonic rates sit high on the
# f-I curve.  ``drive_*`` values are external currents in units of the
# variant current scale, ``w_*`` are synaptic weights in the same units,
# and ``da`` multiplies the dopamine reward gain.
_OPERATING_POINTS = {
    "lif": dict(
        drive_pfc=3.0, drive_gpi=1.5, drive_gpe=1.2, drive_tha=1.15,
        noise_d1=1.3, noise_d2=0.6,
        w_strd1_gpi=-2.5, w_gpi_tha=-2.0, w_tha_pmc=4.0,
        w_pmc_lat=-1.0, w_pmc_strd1=1.2, da=1.0,
    ),
    "hh_simplified": dict(
        drive_pfc=6.0, drive_gpi=4.0, drive_gpe=1.2, drive_tha=4.0,
        noise_d1=0.8, noise_d2=0.4,
        w_strd1_gpi=-20.0, w_gpi_tha=-16.0, w_tha_pmc=8.0,
        w_pmc_lat=-8.0, w_pmc_strd1=1.2, da=1.0,
    ),
}


class BDMNet:
    """Network handle with the pathway projections of the BDM circuit."""

    def __init__(self, cfg: BDMConfig):
        self.cfg = cfg
        model, params, scale = _variant_params(cfg.neuron_variant)
        self.current_scale = scale
        op = _OPERATING_POINTS[model]
        self._op = op
        n_s, n_a = cfg.state_space, cfg.action_space
        net = Network()

        # All nuclei live in one population (index-sliced per nucleus):
        # the conductance variants step far faster on one array than on
        # eight tiny ones.  The conductance variants also tolerate a
        # coarser Euler substep than the engine default.
        layout = [("pfc", n_s), ("strd1", n_a), ("strd2", n_a),
                  ("stn", n_a), ("gpi", n_a), ("gpe", n_a),
                  ("tha", n_a), ("pmc", n_a)]
        self.n_total = sum(size for _, size in layout)
        self.slices: dict[str, slice] = {}
        offset = 0
        for name, size in layout:
            self.slices[name] = slice(offset, offset + size)
            offset += size
        sub_dt = 0.25 if model == "hh_simplified" else None
        self.pop = net.add_population(self.n_total, model, params, name="bg",
                                      hh_substep_dt=sub_dt)

        def block(src: str, dst: str, diagonal: bool = False) -> np.ndarray:
            mask = np.zeros((self.n_total, self.n_total), dtype=bool)
            s, d = self.slices[src], self.slices[dst]
            if diagonal:
                k = min(s.stop - s.start, d.stop - d.start)
                mask[s.start + np.arange(k), d.start + np.arange(k)] = True
            else:
                mask[s, d] = True
            return mask
        # Plastic cortico-striatal pathways; dopamine scales rewards with
        # opposite polarity on the direct and indirect routes.  The
        # direct pathway keeps a weight floor so a fully depressed
        # striatal row can still be re-explored, and the indirect cap
        # stops runaway action suppression.
        stdp_direct = STDPParams(a_plus=cfg.a_plus, a_minus=0.0,
                                 w_min=cfg.w_floor * scale, w_max=3.0 * scale)
        stdp_indirect = STDPParams(a_plus=cfg.a_plus, a_minus=0.0,
                                   w_min=0.0, w_max=1.2 * scale)
        self.proj_direct = net.connect(
            self.pop, self.pop, mask=block("pfc", "strd1"),
            weight=1.0 * scale, plasticity="rstdp",
            stdp=stdp_direct, tau_e=cfg.tau_e,
            reward_gain=cfg.da_gain * op["da"] * scale)
        self.proj_indirect = net.connect(
            self.pop, self.pop, mask=block("pfc", "strd2"),
            weight=1.0 * scale, plasticity="rstdp",
            stdp=stdp_indirect, tau_e=cfg.tau_e,
            reward_gain=-cfg.da_gain * op["da"] * scale)
        # Hyperdirect pathway and internal basal-ganglia wiring.
        self.proj_hyperdirect = net.connect(
            self.pop, self.pop, mask=block("pfc", "stn"), weight=0.3 * scale)
        self.proj_strd1_gpi = net.connect(
            self.pop, self.pop, mask=block("strd1", "gpi", diagonal=True),
            weight=op["w_strd1_gpi"] * scale, sign="inhibitory")
        self.proj_strd2_gpe = net.connect(
            self.pop, self.pop, mask=block("strd2", "gpe", diagonal=True),
            weight=-2.5 * scale, sign="inhibitory")
        self.proj_gpe_gpi = net.connect(
            self.pop, self.pop, mask=block("gpe", "gpi", diagonal=True),
            weight=-0.6 * scale, sign="inhibitory")
        self.proj_gpe_stn = net.connect(
            self.pop, self.pop, mask=block("gpe", "stn", diagonal=True),
            weight=-0.6 * scale, sign="inhibitory")
        self.proj_stn_gpi = net.connect(
            self.pop, self.pop, mask=block("stn", "gpi"), weight=0.4 * scale)
        self.proj_stn_gpe = net.connect(
            self.pop, self.pop, mask=block("stn", "gpe", diagonal=True),
            weight=0.4 * scale)
        # Output stage: GPi gates thalamus, thalamus drives premotor.
        self.proj_gpi_tha = net.connect(
            self.pop, self.pop, mask=block("gpi", "tha", diagonal=True),
            weight=op["w_gpi_tha"] * scale, sign="inhibitory")
        self.proj_tha_pmc = net.connect(
            self.pop, self.pop, mask=block("tha", "pmc", diagonal=True),
            weight=op["w_tha_pmc"] * scale)
        self.proj_pfc_tha = net.connect(
            self.pop, self.pop, mask=block("pfc", "tha"),
            weight=0.15 * scale)
        self.proj_tha_pfc = net.connect(
            self.pop, self.pop, mask=block("tha", "pfc"),
            weight=0.05 * scale)
        lat = block("pmc", "pmc") & ~block("pmc", "pmc", diagonal=True)
        self.proj_pmc_lat = net.connect(
            self.pop, self.pop, mask=lat, weight=op["w_pmc_lat"] * scale,
            sign="inhibitory")
        # Motor feedback onto the striatum: the winning premotor channel
        # re-excites its own striatal column, which concentrates the
        # eligibility trace on the action actually taken.
        self.proj_pmc_strd1 = net.connect(
            self.pop, self.pop, mask=block("pmc", "strd1", diagonal=True),
            weight=op["w_pmc_strd1"] * scale)
        self.net = net
        net.seed(0)
        # Running per-state reward baseline: the dopamine signal is the
        # reward prediction error, which keeps a uniformly punished
        # policy from silencing the circuit.
        self._baseline = np.zeros(cfg.state_space)
        self._last_state = 0

    def select_action(self, state: int, rng: np.random.Generator,
                      explore: float = 1.0) -> int:
        """Drive PFC with the state, read the premotor WTA winner."""
        cfg = self.cfg
        n_a = cfg.action_space
        cs = self.current_scale
        sl = self.slices
        op = self._op
        rec_counts = np.zeros(n_a, dtype=int)
        for t in range(cfg.decision_steps):
            ext = np.zeros(self.n_total)
            ext[sl["pfc"].start + state] = op["drive_pfc"] * cs
            # Tonic drives: GPi and GPe are spontaneously active, the
            # thalamus idles near rheobase so pallidal inhibition gates
            # it, and striatal noise sustains exploration.
            ext[sl["gpi"]] = op["drive_gpi"] * cs
            ext[sl["gpe"]] = op["drive_gpe"] * cs
            ext[sl["tha"]] = op["drive_tha"] * cs
            ext[sl["strd1"]] = rng.random(n_a) * op["noise_d1"] * explore * cs
            ext[sl["strd2"]] = rng.random(n_a) * op["noise_d2"] * explore * cs
            spikes = self.net.step({self.pop: ext})
            # The early window only lets the pallido-thalamic contrast
            # settle; votes are counted once it has.
            if t >= cfg.settle_steps:
                rec_counts += spikes[self.pop][sl["pmc"]].astype(int)
        self._last_state = state
        if rec_counts.max() == 0:
            # No premotor channel fired, so no movement command exists;
            # the deterministic middle ("hold") action keeps a silent
            # circuit's behaviour -- and hence its reward stream --
            # exactly reproducible.
            return n_a // 2
        winners = np.flatnonzero(rec_counts == rec_counts.max())
        return int(rng.choice(winners))

    def learn(self, reward: float):
        """Dopamine-modulated conversion of the striatal eligibility.

        The dopamine signal is the reward prediction error against a
        per-state running baseline; it potentiates the direct pathway
        and depresses the indirect one for better-than-expected
        outcomes, and vice versa.
        """
        state = self._last_state
        da = reward - self._baseline[state]
        self._baseline[state] += 0.1 * da
        self.net.projections[self.proj_direct].apply_reward(da)
        self.net.projections[self.proj_indirect].apply_reward(da)


def build_bdm(cfg: BDMConfig) -> BDMNet:
    return BDMNet(cfg)


def run_bdm_task(net: BDMNet, env: RewardTaskEnv,
                 seed: int = 0) -> np.ndarray:
    """Train on the task; returns cumulative reward per episode."""
    cfg = net.cfg
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xB0E)))
    curve = np.zeros(cfg.episodes)
    for ep in range(cfg.episodes):
        state = env.reset(ep)
        total = 0.0
        done = False
        # Striatal exploration noise anneals linearly over training.
        frac = ep / max(cfg.episodes - 1, 1)
        explore = 1.0 - (1.0 - cfg.anneal_end) * frac
        while not done:
            # Exploration comes from the striatal noise inside the
            # decision window, so the eligibility trace always matches
            # the action actually taken.
            action = net.select_action(state, rng, explore=explore)
            reward, state, done = env.act(action)
            net.learn(reward)
            total += reward
        curve[ep] = total
    return curve
