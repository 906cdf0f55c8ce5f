"""Spiking neuron models integrated with explicit Euler steps.

Five point-neuron models are provided: IF, LIF, adaptive exponential IF,
Izhikevich, and Hodgkin-Huxley (full squid-axon parameterization and a
fast simplified variant).  All step functions are pure: they take a state
and return a new state plus a boolean spike flag per neuron.  States are
vectorized over a population; scalars broadcast naturally.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "IFParams",
    "LIFParams",
    "AEIFParams",
    "IzhikevichParams",
    "HHParams",
    "NeuronState",
    "StepResult",
    "step_if",
    "step_lif",
    "step_aeif",
    "step_izhikevich",
    "step_hh",
    "classify_firing_pattern",
    "rebound_probe",
    "run_trace",
]

# Exponent clamp for the aEIF spike-initiation term; prevents overflow
# while a spike is still declared whenever V >= v_th.
_EXP_ARG_MAX = 20.0


@dataclass(frozen=True)
class IFParams:
    """Integrate-and-fire: pure accumulator with threshold/reset."""

    v_th: float = 1.0
    v_reset: float = 0.0

    def __post_init__(self):
        if not self.v_reset < self.v_th:
            raise ValueError("v_reset must be below v_th")


@dataclass(frozen=True)
class LIFParams:
    """Leaky integrate-and-fire with membrane time constant tau = RC."""

    tau: float = 10.0
    r_mem: float = 1.0
    v_th: float = 1.0
    v_reset: float = 0.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not self.v_reset < self.v_th:
            raise ValueError("v_reset must be below v_th")


@dataclass(frozen=True)
class AEIFParams:
    """Adaptive exponential integrate-and-fire.

    The membrane equation follows the two-variable form with a leak,
    an exponential spike-initiation term and an adaptation current w:

        c_mem dV/dt = -g_l (V - e_l) + g_l exp((V - v_th)/delta_t) + I - w
        tau_w dw/dt = a (V - e_l) - w

    On a spike V is reset to v_reset and w is incremented by b.
    """

    c_mem: float = 200.0
    g_l: float = 10.0
    e_l: float = -70.0
    delta_t: float = 2.0
    v_th: float = -50.0
    v_reset: float = -58.0
    tau_w: float = 120.0
    a: float = 2.0
    b: float = 0.0

    def __post_init__(self):
        for name in ("c_mem", "g_l", "delta_t", "tau_w"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class IzhikevichParams:
    """Izhikevich two-variable model with spike cutoff at v_peak."""

    a: float = 0.02
    b: float = 0.2
    c: float = -65.0
    d: float = 8.0
    v_peak: float = 30.0

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("a must be positive")
        if not self.v_peak > self.c:
            raise ValueError("v_peak must exceed the reset value c")

    @classmethod
    def regular_spiking(cls) -> "IzhikevichParams":
        return cls(a=0.02, b=0.2, c=-65.0, d=8.0)

    @classmethod
    def intrinsically_bursting(cls) -> "IzhikevichParams":
        return cls(a=0.02, b=0.2, c=-55.0, d=4.0)

    @classmethod
    def chattering(cls) -> "IzhikevichParams":
        return cls(a=0.02, b=0.2, c=-50.0, d=2.0)

    @classmethod
    def fast_spiking(cls) -> "IzhikevichParams":
        return cls(a=0.1, b=0.2, c=-65.0, d=2.0)

    @classmethod
    def low_threshold_spiking(cls) -> "IzhikevichParams":
        return cls(a=0.02, b=0.25, c=-65.0, d=2.0)


@dataclass(frozen=True)
class HHParams:
    """Hodgkin-Huxley conductance model.

    Voltages use the original squid-axon convention (rest near 0 mV,
    depolarization positive).  ``squid()`` gives the classic 1952
    parameter set; ``simplified()`` gives the fast low-capacitance
    variant (C = 0.02 uF/cm^2, reset to 0 on crossing 60 mV) with
    conductances scaled down so that a 0.05 ms Euler substep is stable.
    """

    c_mem: float = 1.0
    gbar_k: float = 36.0
    gbar_na: float = 120.0
    gbar_l: float = 0.3
    v_k: float = -12.0
    v_na: float = 115.0
    v_l: float = 10.613
    v_th: float = 50.0
    v_reset: float = 0.0

    def __post_init__(self):
        if self.c_mem <= 0:
            raise ValueError("c_mem must be positive")
        for name in ("gbar_k", "gbar_na", "gbar_l"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def squid(cls) -> "HHParams":
        return cls()

    @classmethod
    def simplified(cls, gbar_na: float = 2.4, gbar_k: float = 0.36,
                   gbar_l: float = 0.003) -> "HHParams":
        """Fast low-capacitance variant (C = 0.02, reset 0, threshold 60).

        The leak reversal is chosen so the default-conductance resting
        point sits at V = 0; the sodium window current at rest then
        exceeds the rheobase, so removing the sodium channel makes the
        membrane decay under any drive that normally elicits spikes.
        """
        # Rest gating values at V = 0 for the canonical rate functions.
        na_rest = gbar_na * 0.0529325**3 * 0.596121 * 115.0
        k_rest = gbar_k * 0.317677**4 * 12.0
        v_l = (k_rest - na_rest) / gbar_l if gbar_l > 0 else 0.0
        return cls(
            c_mem=0.02,
            gbar_k=gbar_k,
            gbar_na=gbar_na,
            gbar_l=gbar_l,
            v_l=v_l,
            v_th=60.0,
            v_reset=0.0,
        )

    @classmethod
    def simplified_without_sodium(cls) -> "HHParams":
        """Simplified variant with the sodium channel removed (leak kept)."""
        return replace(cls.simplified(), gbar_na=0.0)

    @classmethod
    def simplified_without_potassium(cls) -> "HHParams":
        """Simplified variant with the potassium channel removed."""
        return replace(cls.simplified(), gbar_k=0.0)


@dataclass
class NeuronState:
    """Evolving per-neuron state shared by all models.

    Only the fields a given model uses are meaningful for it (u for
    Izhikevich, w for aEIF, n/m/h for H-H).  All arrays share one shape.
    """

    v: np.ndarray
    u: np.ndarray = None
    w: np.ndarray = None
    n: np.ndarray = None
    m: np.ndarray = None
    h: np.ndarray = None
    refractory_remaining: np.ndarray = None

    def __post_init__(self):
        self.v = np.atleast_1d(np.asarray(self.v, dtype=float))
        shape = self.v.shape
        for name in ("u", "w", "n", "m", "h"):
            val = getattr(self, name)
            if val is None:
                val = np.zeros(shape)
            setattr(self, name, np.broadcast_to(np.asarray(val, dtype=float), shape).copy())
        if self.refractory_remaining is None:
            self.refractory_remaining = np.zeros(shape, dtype=int)
        else:
            self.refractory_remaining = np.broadcast_to(
                np.asarray(self.refractory_remaining, dtype=int), shape
            ).copy()

    @classmethod
    def resting(cls, size: int, v0: float = 0.0) -> "NeuronState":
        return cls(v=np.full(size, float(v0)))

    @classmethod
    def hh_resting(cls, size: int, p: HHParams) -> "NeuronState":
        """Resting state with gating variables at their steady values."""
        v0 = np.zeros(size)
        an, bn = _alpha_n(v0), _beta_n(v0)
        am, bm = _alpha_m(v0), _beta_m(v0)
        ah, bh = _alpha_h(v0), _beta_h(v0)
        return cls(
            v=v0,
            n=an / (an + bn),
            m=am / (am + bm),
            h=ah / (ah + bh),
        )

    def copy(self) -> "NeuronState":
        # Fields are already normalized arrays, so skip __post_init__'s
        # broadcasting; this sits on the simulation hot path.
        new = object.__new__(NeuronState)
        new.v = self.v.copy()
        new.u = self.u.copy()
        new.w = self.w.copy()
        new.n = self.n.copy()
        new.m = self.m.copy()
        new.h = self.h.copy()
        new.refractory_remaining = self.refractory_remaining.copy()
        return new


@dataclass
class StepResult:
    state: NeuronState
    spiked: np.ndarray


def _check_current(i_in) -> np.ndarray:
    i = np.asarray(i_in, dtype=float)
    if not np.all(np.isfinite(i)):
        raise ValueError("input current must be finite")
    return i


def _check_dt(dt: float) -> float:
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError("dt must be a positive finite number")
    return float(dt)


def _apply_refractory(state: NeuronState, spiked: np.ndarray, v_reset: float,
                      refractory_steps: int) -> None:
    if refractory_steps > 0:
        state.refractory_remaining[spiked] = refractory_steps


def step_if(state: NeuronState, p: IFParams, i_in, dt: float,
            refractory_steps: int = 0) -> StepResult:
    """One Euler step of the integrate-and-fire model: dV/dt = I."""
    dt = _check_dt(dt)
    i = _check_current(i_in)
    s = state.copy()
    held = s.refractory_remaining > 0
    s.v = np.where(held, p.v_reset, s.v + i * dt)
    spiked = (s.v >= p.v_th) & ~held
    s.v[spiked] = p.v_reset
    s.refractory_remaining = np.maximum(s.refractory_remaining - 1, 0)
    _apply_refractory(s, spiked, p.v_reset, refractory_steps)
    return StepResult(s, spiked)


def step_lif(state: NeuronState, p: LIFParams, i_in, dt: float,
             refractory_steps: int = 0) -> StepResult:
    """One Euler step of the leaky IF model: tau dV/dt = -V + R I.

    Emits a RuntimeWarning when dt exceeds tau (unstable integration).
    """
    dt = _check_dt(dt)
    if dt > p.tau:
        import warnings

        warnings.warn("dt exceeds membrane tau; Euler integration is unstable",
                      RuntimeWarning, stacklevel=2)
    i = _check_current(i_in)
    s = state.copy()
    held = s.refractory_remaining > 0
    s.v = np.where(held, p.v_reset, s.v + (dt / p.tau) * (-s.v + p.r_mem * i))
    spiked = (s.v >= p.v_th) & ~held
    s.v[spiked] = p.v_reset
    s.refractory_remaining = np.maximum(s.refractory_remaining - 1, 0)
    _apply_refractory(s, spiked, p.v_reset, refractory_steps)
    return StepResult(s, spiked)


def step_aeif(state: NeuronState, p: AEIFParams, i_in, dt: float,
              refractory_steps: int = 0) -> StepResult:
    """One Euler step of the adaptive exponential IF model."""
    dt = _check_dt(dt)
    i = _check_current(i_in)
    s = state.copy()
    held = s.refractory_remaining > 0
    exp_arg = np.minimum((s.v - p.v_th) / p.delta_t, _EXP_ARG_MAX)
    dv = (-p.g_l * (s.v - p.e_l) + p.g_l * np.exp(exp_arg) + i - s.w) / p.c_mem
    dw = (p.a * (s.v - p.e_l) - s.w) / p.tau_w
    s.v = np.where(held, p.v_reset, s.v + dv * dt)
    s.w = s.w + dw * dt
    spiked = (s.v >= p.v_th) & ~held
    s.v[spiked] = p.v_reset
    s.w[spiked] += p.b
    s.refractory_remaining = np.maximum(s.refractory_remaining - 1, 0)
    _apply_refractory(s, spiked, p.v_reset, refractory_steps)
    return StepResult(s, spiked)


_IZH_DIVERGENCE_BOUND = 1e6


def step_izhikevich(state: NeuronState, p: IzhikevichParams, i_in, dt: float,
                    refractory_steps: int = 0) -> StepResult:
    """One Euler step of the Izhikevich model.

    dv/dt = 0.04 v^2 + 5 v + 140 - u + I;  du/dt = a (b v - u).
    On v >= v_peak: v = c and u += d.
    """
    dt = _check_dt(dt)
    i = _check_current(i_in)
    s = state.copy()
    held = s.refractory_remaining > 0
    dv = 0.04 * s.v**2 + 5.0 * s.v + 140.0 - s.u + i
    du = p.a * (p.b * s.v - s.u)
    s.v = np.where(held, p.c, s.v + dv * dt)
    s.u = s.u + du * dt
    spiked = (s.v >= p.v_peak) & ~held
    s.v[spiked] = p.c
    s.u[spiked] += p.d
    if np.any(np.abs(s.v) > _IZH_DIVERGENCE_BOUND):
        raise FloatingPointError("Izhikevich state diverged without spiking; "
                                 "reduce dt or the input current")
    s.refractory_remaining = np.maximum(s.refractory_remaining - 1, 0)
    _apply_refractory(s, spiked, p.c, refractory_steps)
    return StepResult(s, spiked)


def run_trace(p: IzhikevichParams, i_in: float, dt: float,
              duration_ms: float) -> np.ndarray:
    """Drive one Izhikevich neuron from rest; returns spike times in ms."""
    state = NeuronState(v=np.array([-70.0]), u=np.array([p.b * -70.0]))
    n_steps = int(round(duration_ms / dt))
    times = []
    for k in range(n_steps):
        res = step_izhikevich(state, p, i_in, dt)
        state = res.state
        if res.spiked[0]:
            times.append((k + 1) * dt)
    return np.array(times)


def _alpha_n(v):
    return np.where(
        np.abs(10.0 - v) < 1e-7, 0.1, 0.01 * (10.0 - v) / (np.exp((10.0 - v) / 10.0) - 1.0)
    )


def _beta_n(v):
    return 0.125 * np.exp(-v / 80.0)


def _alpha_m(v):
    return np.where(
        np.abs(25.0 - v) < 1e-7, 1.0, 0.1 * (25.0 - v) / (np.exp((25.0 - v) / 10.0) - 1.0)
    )


def _beta_m(v):
    return 4.0 * np.exp(-v / 18.0)


def _alpha_h(v):
    return 0.07 * np.exp(-v / 20.0)


def _beta_h(v):
    return 1.0 / (np.exp((30.0 - v) / 10.0) + 1.0)


_HH_FULL_DT_MAX = 0.1


def step_hh(state: NeuronState, p: HHParams, i_in, dt: float,
            variant: str = "full", refractory_steps: int = 0) -> StepResult:
    """One Euler step of the Hodgkin-Huxley model.

    ``variant="full"`` detects a spike on the upward crossing of v_th and
    lets the membrane repolarize on its own; it rejects dt > 0.1 ms (the
    system is stiff).  ``variant="simplified"`` additionally hard-resets
    V to v_reset on threshold crossing.  Gating variables are clamped to
    [0, 1] after every step.
    """
    dt = _check_dt(dt)
    if variant not in ("full", "simplified"):
        raise ValueError(f"unknown H-H variant: {variant!r}")
    if variant == "full" and dt > _HH_FULL_DT_MAX:
        raise ValueError(f"dt={dt} too large for the full H-H variant "
                         f"(max {_HH_FULL_DT_MAX} ms)")
    i = _check_current(i_in)
    s = state.copy()
    held = s.refractory_remaining > 0
    v = s.v
    i_k = p.gbar_k * s.n**4 * (v - p.v_k)
    i_na = p.gbar_na * s.m**3 * s.h * (v - p.v_na)
    i_l = p.gbar_l * (v - p.v_l)
    dv = (i - i_k - i_na - i_l) / p.c_mem
    v_new = v + dv * dt
    s.n = np.clip(s.n + (_alpha_n(v) * (1 - s.n) - _beta_n(v) * s.n) * dt, 0.0, 1.0)
    s.m = np.clip(s.m + (_alpha_m(v) * (1 - s.m) - _beta_m(v) * s.m) * dt, 0.0, 1.0)
    s.h = np.clip(s.h + (_alpha_h(v) * (1 - s.h) - _beta_h(v) * s.h) * dt, 0.0, 1.0)
    spiked = (v_new >= p.v_th) & (v < p.v_th) & ~held
    s.v = np.where(held, s.v, v_new)
    if variant == "simplified":
        s.v[spiked] = p.v_reset
    s.refractory_remaining = np.maximum(s.refractory_remaining - 1, 0)
    _apply_refractory(s, spiked, p.v_reset, refractory_steps)
    return StepResult(s, spiked)


# Firing-pattern classifier rule thresholds (artifact conventions):
# bursting when ISI coefficient of variation > 1 and the shortest ISIs
# are < 10 ms; fast when the mean rate exceeds 100 Hz.
_BURST_CV = 1.0
_BURST_INTRA_ISI_MS = 10.0
_FAST_RATE_HZ = 100.0


def classify_firing_pattern(voltage_trace: np.ndarray, spike_times: np.ndarray,
                            dt: float = 1.0, rebound: bool = False) -> str:
    """Label a firing pattern from a recorded trace and its spike times.

    Returns one of ``silent``, ``bursting``, ``fast``, ``low_threshold``,
    ``regular``.  ``spike_times`` are in ms; the trace must cover at
    least 200 ms.  ``rebound=True`` marks the neuron as rebound-spiking
    (established by :func:`rebound_probe`) and yields ``low_threshold``.
    """
    trace = np.asarray(voltage_trace, dtype=float)
    duration_ms = trace.size * dt
    if duration_ms < 200.0:
        raise ValueError("trace must cover at least 200 ms")
    times = np.sort(np.asarray(spike_times, dtype=float))
    if times.size == 0:
        return "silent"
    if rebound:
        return "low_threshold"
    rate_hz = times.size / duration_ms * 1000.0
    if times.size >= 3:
        isi = np.diff(times)
        cv = isi.std() / isi.mean() if isi.mean() > 0 else 0.0
        if cv > _BURST_CV and isi.min() < _BURST_INTRA_ISI_MS:
            return "bursting"
    if rate_hz > _FAST_RATE_HZ:
        return "fast"
    return "regular"


def rebound_probe(p: IzhikevichParams, dt: float = 0.1,
                  hyper_current: float = -10.0, hyper_ms: float = 200.0,
                  release_ms: float = 100.0) -> bool:
    """Check for rebound spiking after release from hyperpolarization.

    Drives one neuron with a negative holding current, releases it, and
    reports whether any spike occurs during the release window with no
    depolarizing drive at all.
    """
    state = NeuronState(v=np.array([-70.0]), u=np.array([p.b * -70.0]))
    n_hyper = int(round(hyper_ms / dt))
    n_release = int(round(release_ms / dt))
    for _ in range(n_hyper):
        state = step_izhikevich(state, p, hyper_current, dt).state
    for _ in range(n_release):
        res = step_izhikevich(state, p, 0.0, dt)
        state = res.state
        if res.spiked.any():
            return True
    return False
