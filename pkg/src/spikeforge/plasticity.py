"""Synaptic plasticity rules.

Covers Hebbian, STDP (offline all-pairs double sum and online traces),
BCM with a sliding threshold, short-term plasticity, reward-modulated
STDP via an eligibility trace, a sample/temporal-batch STDP variant,
layer-target feedback propagation, and potential-based normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .spiketrain import SpikeTrain

__all__ = [
    "STDPParams",
    "BCMParams",
    "BCMState",
    "STPParams",
    "STPState",
    "RSTDPState",
    "stdp_window",
    "apply_stdp",
    "hebbian_update",
    "bcm_update",
    "stp_on_spike",
    "rstdp_step",
    "batch_stdp",
    "feedback_target",
    "pbln_normalize",
]


@dataclass(frozen=True)
class STDPParams:
    a_plus: float = 0.01
    a_minus: float = 0.01
    tau_plus: float = 20.0
    tau_minus: float = 20.0
    w_min: float = 0.0
    w_max: float = 1.0
    pairing: str = "all_pairs"

    def __post_init__(self):
        if self.tau_plus <= 0 or self.tau_minus <= 0:
            raise ValueError("time constants must be positive")
        if self.a_plus < 0 or self.a_minus < 0:
            raise ValueError("modification magnitudes must be non-negative")
        if self.w_min > self.w_max:
            raise ValueError("w_min must not exceed w_max")
        if self.pairing not in ("all_pairs", "nearest_neighbor"):
            raise ValueError(f"unknown pairing mode: {self.pairing!r}")


def stdp_window(delta_t: float, p: STDPParams) -> float:
    """STDP kernel W(dt): potentiation for dt > 0, depression for dt < 0.

    dt is post spike time minus pre spike time.  W(0) = 0.
    """
    if delta_t > 0:
        return p.a_plus * np.exp(-delta_t / p.tau_plus)
    if delta_t < 0:
        return -p.a_minus * np.exp(delta_t / p.tau_minus)
    return 0.0


def _all_pairs_delta(pre_steps: np.ndarray, post_steps: np.ndarray,
                     p: STDPParams) -> float:
    """Exact double sum of the STDP kernel over all pre/post spike pairs."""
    if pre_steps.size == 0 or post_steps.size == 0:
        return 0.0
    dt = post_steps[None, :].astype(float) - pre_steps[:, None].astype(float)
    pot = np.where(dt > 0, p.a_plus * np.exp(-dt / p.tau_plus), 0.0)
    dep = np.where(dt < 0, -p.a_minus * np.exp(dt / p.tau_minus), 0.0)
    return float((pot + dep).sum())


def _nearest_neighbor_delta(pre_steps: np.ndarray, post_steps: np.ndarray,
                            p: STDPParams) -> float:
    """Trace-based online approximation: each spike interacts with the
    exponentially decayed trace of the opposite train."""
    delta = 0.0
    trace_pre = 0.0
    trace_post = 0.0
    t_last = 0
    events = sorted(
        [(int(t), "pre") for t in pre_steps] + [(int(t), "post") for t in post_steps]
    )
    for t, kind in events:
        gap = t - t_last
        trace_pre *= np.exp(-gap / p.tau_plus)
        trace_post *= np.exp(-gap / p.tau_minus)
        t_last = t
        if kind == "post":
            delta += p.a_plus * trace_pre
            trace_post += 1.0
        else:
            delta -= p.a_minus * trace_post
            trace_pre += 1.0
    return delta


def apply_stdp(pre_train: SpikeTrain, post_train: SpikeTrain,
               w: np.ndarray, p: STDPParams) -> np.ndarray:
    """Apply STDP between every (pre, post) neuron pair of two trains.

    ``w`` has shape (n_pre, n_post).  In ``all_pairs`` mode the update is
    the exact double sum over spike pairs; ``nearest_neighbor`` uses the
    online trace approximation.  The result is clamped to [w_min, w_max].
    """
    if pre_train.duration_steps != post_train.duration_steps:
        raise ValueError("pre and post trains must share the same duration")
    w = np.asarray(w, dtype=float)
    if w.shape != (pre_train.n_neurons, post_train.n_neurons):
        raise ValueError("weight matrix shape must be (n_pre, n_post)")
    pair_fn = _all_pairs_delta if p.pairing == "all_pairs" else _nearest_neighbor_delta
    delta = np.zeros_like(w)
    for i in range(pre_train.n_neurons):
        pre_steps = pre_train.spike_steps(i)
        for j in range(post_train.n_neurons):
            delta[i, j] = pair_fn(pre_steps, post_train.spike_steps(j), p)
    return np.clip(w + delta, p.w_min, p.w_max)


def hebbian_update(x_pre, x_post):
    """Plain Hebbian rule: dw = x_pre * x_post (broadcasts over arrays)."""
    return np.multiply(x_pre, x_post)


@dataclass(frozen=True)
class BCMParams:
    epsilon: float = 0.0
    theta_window: int = 100

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.theta_window < 1:
            raise ValueError("theta_window must be at least 1")


@dataclass
class BCMState:
    """Sliding modification threshold: running average of post activity."""

    theta_m: float = 0.0


def bcm_update(x: float, y: float, st: BCMState, w: float,
               p: BCMParams) -> tuple[float, BCMState]:
    """BCM rule: dw = y (y - theta_M) x - epsilon w.

    theta_M is updated afterwards as an exponential moving average of the
    post-synaptic rate with horizon ``theta_window``.
    """
    if x < 0 or y < 0:
        raise ValueError("rates must be non-negative")
    dw = y * (y - st.theta_m) * x - p.epsilon * w
    alpha = 1.0 / p.theta_window
    new_theta = (1.0 - alpha) * st.theta_m + alpha * y
    return dw, BCMState(theta_m=new_theta)


@dataclass(frozen=True)
class STPParams:
    u_frac: float = 0.2
    tau_fac: float = 100.0
    tau_rec: float = 100.0

    def __post_init__(self):
        if not 0 < self.u_frac <= 1:
            raise ValueError("utilization fraction must lie in (0, 1]")
        if self.tau_fac <= 0 or self.tau_rec <= 0:
            raise ValueError("time constants must be positive")


@dataclass
class STPState:
    """Running utilization u and available resources r.

    Initial condition u = U, r = 1 so the first spike has efficacy U.
    """

    u: float
    r: float = 1.0

    @classmethod
    def initial(cls, p: STPParams) -> "STPState":
        return cls(u=p.u_frac, r=1.0)


def stp_on_spike(st: STPState, dt_since_prev_spike: float,
                 p: STPParams) -> tuple[STPState, float]:
    """Advance short-term plasticity state across one inter-spike interval.

    Returns the new state and the efficacy a = u * r for the current
    spike.  The recurrences are

        u' = U + u (1 - U) exp(-dt / tau_fac)
        r' = 1 + (r - u r - 1) exp(-dt / tau_rec)
    """
    if dt_since_prev_spike < 0:
        raise ValueError("inter-spike interval must be non-negative")
    decay_f = np.exp(-dt_since_prev_spike / p.tau_fac)
    decay_r = np.exp(-dt_since_prev_spike / p.tau_rec)
    u_new = p.u_frac + st.u * (1.0 - p.u_frac) * decay_f
    r_new = 1.0 + (st.r - st.u * st.r - 1.0) * decay_r
    new_state = STPState(u=float(u_new), r=float(r_new))
    return new_state, new_state.u * new_state.r


@dataclass
class RSTDPState:
    """Per-synapse eligibility trace for reward-modulated STDP."""

    e: np.ndarray
    tau_e: float = 200.0

    def __post_init__(self):
        self.e = np.asarray(self.e, dtype=float)
        if self.tau_e <= 0:
            raise ValueError("tau_e must be positive")

    @classmethod
    def zeros(cls, shape, tau_e: float = 200.0) -> "RSTDPState":
        return cls(e=np.zeros(shape), tau_e=tau_e)


def rstdp_step(st: RSTDPState, stdp_increment, reward: float,
               dt: float) -> tuple[RSTDPState, np.ndarray]:
    """Advance the eligibility trace and gate it by reward.

    The trace decays with tau_e and accumulates the STDP increment; the
    returned weight delta is reward * trace (zero whenever reward is 0).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    e_new = st.e + (-st.e / st.tau_e) * dt + np.asarray(stdp_increment, dtype=float)
    dw = reward * e_new
    return RSTDPState(e=e_new, tau_e=st.tau_e), dw


def batch_stdp(pre_batches: list[SpikeTrain], post_batches: list[SpikeTrain],
               p: STDPParams) -> np.ndarray:
    """Sample/temporal-batch STDP: one update summed over a batch.

    Equals the sum of the per-sample all-pairs double sums, applied as a
    single weight delta.  An empty batch yields a zero scalar delta.
    """
    if len(pre_batches) != len(post_batches):
        raise ValueError("pre and post batches must have the same length")
    if not pre_batches:
        return np.zeros(())
    shape = (pre_batches[0].n_neurons, post_batches[0].n_neurons)
    total = np.zeros(shape)
    for pre, post in zip(pre_batches, post_batches):
        if (pre.n_neurons, post.n_neurons) != shape:
            raise ValueError("all batch members must share shape")
        for i in range(pre.n_neurons):
            pre_steps = pre.spike_steps(i)
            for j in range(post.n_neurons):
                total[i, j] += _all_pairs_delta(pre_steps, post.spike_steps(j), p)
    return total


def feedback_target(s_l: np.ndarray, g_l: np.ndarray, s_out: np.ndarray,
                    s_target: np.ndarray, eta_t: float = 1.0) -> np.ndarray:
    """Hidden-layer target from a global feedback pathway.

    Returns s_l - eta_t * G_l @ (s_out - s_target).  For the penultimate
    layer pass the transposed forward weights as ``g_l``.
    """
    s_l = np.asarray(s_l, dtype=float)
    g_l = np.asarray(g_l, dtype=float)
    err = np.asarray(s_out, dtype=float) - np.asarray(s_target, dtype=float)
    if g_l.ndim != 2 or g_l.shape[0] != s_l.shape[0] or g_l.shape[1] != err.shape[0]:
        raise ValueError("feedback matrix dimensions do not conform")
    return s_l - eta_t * g_l @ err


def pbln_normalize(x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Potential-based layer normalization.

    Centers the potential vector and scales by sqrt(var + eps), using
    the standard population variance.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 1:
        raise ValueError("vector must have length >= 1")
    mean = x.mean()
    var = x.var()
    return (x - mean) / np.sqrt(var + eps)
