"""Drosophila-inspired two-cue decision circuit.

Two sensory channels (a "green" and a "blue" cue) project through
Kenyon-cell relays onto a pair of mushroom-body output populations
("approach" and "avoid").  The KC-to-MBON synapses learn by
reward-modulated STDP.  The linear pathway stops there; the nonlinear
pathway adds an APL interneuron pool that pools all KC activity and
feeds back subtractive inhibition, plus a small dopaminergic population
that is mutually inhibitory with APL and excites the output layer.

The behavioural readout over a test window counts avoid-selection steps
t1 and approach-selection steps t2 (total spikes of the two output
populations) and reports the prefer index PI = |t1 - t2| / (t1 + t2)
together with the signed preference (t2 - t1) / (t1 + t2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..network import Network
from ..neurons import LIFParams
from ..plasticity import STDPParams

__all__ = [
    "DrosophilaConfig",
    "DrosophilaNet",
    "build_drosophila",
    "train_drosophila",
    "test_dilemma",
    "preference_sweep",
]


@dataclass(frozen=True)
class DrosophilaConfig:
    kc_size: int = 40
    pathway: str = "linear"
    a_plus: float = 0.02
    tau_e: float = 60.0
    da_gain: float = 0.2
    apl_gain: float = 1.0
    train_trials: int = 40
    train_steps: int = 12
    test_steps: int = 500
    w_init: float = 0.6
    w_max: float = 1.3
    reward_scale: float = 0.05

    def __post_init__(self):
        if self.pathway not in ("linear", "nonlinear"):
            raise ValueError(f"pathway must be linear or nonlinear, "
                             f"got {self.pathway!r}")
        if self.kc_size < 2 or self.kc_size % 2:
            raise ValueError("kc_size must be an even number >= 2")
        if self.da_gain < 0 or self.apl_gain < 0:
            raise ValueError("modulation gains must be non-negative")
        if self.test_steps < 1:
            raise ValueError("test_steps must be at least 1")


class DrosophilaNet:
    """Network handle plus the population/projection ids of the circuit."""

    def __init__(self, cfg: DrosophilaConfig):
        self.cfg = cfg
        half = cfg.kc_size // 2
        self.half = half
        net = Network()
        # Projection-neuron relays: one per cue channel and KC.
        self.pn_green = net.add_population(half, "lif", LIFParams(tau=1.0, v_th=0.5),
                                           name="pn_green")
        self.pn_blue = net.add_population(half, "lif", LIFParams(tau=1.0, v_th=0.5),
                                          name="pn_blue")
        # Kenyon cells: slow-ish membrane so feedback inhibition can
        # accumulate as hyperpolarization (rate subtraction).
        kc_params = LIFParams(tau=6.0, v_th=1.0)
        self.kc_green = net.add_population(half, "lif", kc_params, name="kc_green")
        self.kc_blue = net.add_population(half, "lif", kc_params, name="kc_blue")
        # Output populations, memoryless relays of the trained synapses.
        mbon_params = LIFParams(tau=1.0, v_th=1.0)
        self.mbon_avoid = net.add_population(half, "lif", mbon_params,
                                             name="mbon_avoid")
        self.mbon_approach = net.add_population(half, "lif", mbon_params,
                                                name="mbon_approach")
        eye = np.eye(half, dtype=bool)
        net.connect(self.pn_green, self.kc_green, mask=eye, weight=6.5 * eye)
        net.connect(self.pn_blue, self.kc_blue, mask=eye, weight=6.5 * eye)
        stdp = STDPParams(a_plus=cfg.a_plus, a_minus=0.0, tau_plus=20.0,
                          w_min=0.0, w_max=cfg.w_max)
        w0 = cfg.w_init * eye
        self.proj_g_app = net.connect(self.kc_green, self.mbon_approach,
                                      mask=eye, weight=w0, plasticity="rstdp",
                                      stdp=stdp, tau_e=cfg.tau_e)
        self.proj_g_avd = net.connect(self.kc_green, self.mbon_avoid,
                                      mask=eye, weight=w0, plasticity="rstdp",
                                      stdp=stdp, tau_e=cfg.tau_e)
        self.proj_b_app = net.connect(self.kc_blue, self.mbon_approach,
                                      mask=eye, weight=w0, plasticity="rstdp",
                                      stdp=stdp, tau_e=cfg.tau_e)
        self.proj_b_avd = net.connect(self.kc_blue, self.mbon_avoid,
                                      mask=eye, weight=w0, plasticity="rstdp",
                                      stdp=stdp, tau_e=cfg.tau_e)
        self.apl = None
        self.da = None
        if cfg.pathway == "nonlinear":
            self.apl = net.add_population(10, "lif", LIFParams(tau=3.0, v_th=1.0),
                                          name="apl")
            self.da = net.add_population(2, "lif", LIFParams(tau=3.0, v_th=1.0),
                                         name="da")
            for kc in (self.kc_green, self.kc_blue):
                net.connect(kc, self.apl, weight=0.2)
                net.connect(self.apl, kc, weight=-4.0 * cfg.apl_gain,
                            sign="inhibitory")
            # DA excites the output layer and trades inhibition with APL.
            net.connect(self.da, self.mbon_approach, weight=0.05 * cfg.da_gain)
            net.connect(self.da, self.mbon_avoid, weight=0.05 * cfg.da_gain)
            net.connect(self.apl, self.da, weight=-0.3, sign="inhibitory")
            net.connect(self.da, self.apl, weight=-0.3 * cfg.da_gain,
                        sign="inhibitory")
        self.net = net
        net.seed(0)

    def plastic_projections(self):
        return {
            "g_app": self.net.projections[self.proj_g_app],
            "g_avd": self.net.projections[self.proj_g_avd],
            "b_app": self.net.projections[self.proj_b_app],
            "b_avd": self.net.projections[self.proj_b_avd],
        }

    def weight_summary(self) -> dict[str, float]:
        return {name: float(proj.weights.sum())
                for name, proj in self.plastic_projections().items()}

    def _cue_currents(self, green: float, blue: float,
                      rng: np.random.Generator) -> dict[int, np.ndarray]:
        """Bernoulli rate-coded cue drive onto the projection neurons."""
        ext = {}
        ext[self.pn_green] = 2.0 * (rng.random(self.half) < green)
        ext[self.pn_blue] = 2.0 * (rng.random(self.half) < blue)
        return ext

    def present(self, green: float, blue: float, steps: int,
                rng: np.random.Generator, teach: float = 0.0) -> dict[str, int]:
        """Run the circuit on a cue mixture; returns output spike totals."""
        t_avoid = 0
        t_approach = 0
        for _ in range(steps):
            ext = self._cue_currents(green, blue, rng)
            if teach:
                ext[self.mbon_avoid] = np.full(self.half, teach)
                ext[self.mbon_approach] = np.full(self.half, teach)
            spikes = self.net.step(ext)
            t_avoid += int(spikes[self.mbon_avoid].sum())
            t_approach += int(spikes[self.mbon_approach].sum())
        return {"avoid": t_avoid, "approach": t_approach}


def build_drosophila(cfg: DrosophilaConfig) -> DrosophilaNet:
    """Assemble the untrained circuit for the requested pathway."""
    return DrosophilaNet(cfg)


def train_drosophila(net: DrosophilaNet, seed: int = 0,
                     reward_sign: float = 1.0) -> DrosophilaNet:
    """Condition the circuit on the safe (green) and punished (blue) cues.

    Green trials reward approach-side eligibility and punish the
    avoid side; blue trials do the reverse.  ``reward_sign=-1`` flips
    the contingency entirely.
    """
    cfg = net.cfg
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD20)))
    projs = net.plastic_projections()
    r = reward_sign * cfg.reward_scale
    for trial in range(cfg.train_trials):
        if trial % 2 == 0:  # safe pattern: green cue alone
            net.present(0.8, 0.0, cfg.train_steps, rng, teach=2.0)
            projs["g_app"].apply_reward(r)
            projs["g_avd"].apply_reward(-r)
        else:  # punished pattern: blue cue alone
            net.present(0.0, 0.8, cfg.train_steps, rng, teach=2.0)
            projs["b_avd"].apply_reward(r)
            projs["b_app"].apply_reward(-r)
    return net


def test_dilemma(net: DrosophilaNet, color_intensity: float,
                 steps: int | None = None, seed: int = 1) -> dict[str, float]:
    """Present the conflicting cue mixture and score the preference.

    The green cue is shown at ``color_intensity`` c and the blue cue at
    1 - c.  Returns t1 (avoid steps), t2 (approach steps), the prefer
    index PI = |t1 - t2| / (t1 + t2) and the signed preference
    (t2 - t1) / (t1 + t2).
    """
    if not 0.0 <= color_intensity <= 1.0:
        raise ValueError("color intensity must lie in [0, 1]")
    steps = steps if steps is not None else net.cfg.test_steps
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD21)))
    counts = net.present(color_intensity, 1.0 - color_intensity, steps, rng)
    t1, t2 = counts["avoid"], counts["approach"]
    if t1 + t2 == 0:
        raise ValueError("no decisions made in the test window")
    pi = abs(t1 - t2) / (t1 + t2)
    signed = (t2 - t1) / (t1 + t2)
    return {"t1": float(t1), "t2": float(t2), "pi": float(pi),
            "preference": float(signed)}


def preference_sweep(net: DrosophilaNet, intensities, seed: int = 1):
    """Signed-preference curve over a grid of color intensities."""
    return np.array([test_dilemma(net, float(c), seed=seed)["preference"]
                     for c in intensities])
