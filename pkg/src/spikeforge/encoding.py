"""Spike encoders and decoders: rate, phase, time-to-first-spike, population."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spiketrain import SpikeTrain

__all__ = [
    "PopulationCodeConfig",
    "encode_rate",
    "encode_phase",
    "decode_phase",
    "encode_ttfs",
    "population_tuning",
    "population_decode",
]


def encode_rate(x: float, t_steps: int, rng_seed: int = 0) -> SpikeTrain:
    """Bernoulli rate coding: spike at each step iff x > alpha, alpha ~ U[0, 1).

    Sampling alpha from [0, 1) makes x = 1 spike at every step.
    Reproducible for a given seed.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError("intensity must lie in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    alpha = rng.random(t_steps)
    return SpikeTrain((x > alpha).astype(np.uint8)[:, None])


def encode_phase(x: float, k_period: int, t_steps: int) -> SpikeTrain:
    """Phase coding: x quantized to K bits, emitted MSB-first each period.

    Bit k = K-1-(t mod K) of round(x * (2^K - 1)) is emitted at step t.
    If t_steps is not a multiple of K the train is padded to the next
    full period.
    """
    if k_period < 1:
        raise ValueError("K must be at least 1")
    if not 0.0 <= x <= 1.0:
        raise ValueError("intensity must lie in [0, 1]")
    code = int(round(x * (2**k_period - 1)))
    if t_steps % k_period:
        t_steps += k_period - (t_steps % k_period)
    t = np.arange(t_steps)
    shift = k_period - 1 - (t % k_period)
    bits = (code >> shift) & 1
    return SpikeTrain(bits.astype(np.uint8)[:, None])


def decode_phase(train: SpikeTrain, k_period: int, neuron: int = 0) -> float:
    """Reconstruct an intensity from a phase-coded train.

    Phase weights 2^-(1 + (t mod K)) over the first full period give
    code / 2^K; the result is rescaled by 2^K / (2^K - 1) to invert the
    encoder's quantization exactly, so the round-trip error is bounded
    by the quantization step 1 / (2^K - 1).
    """
    if train.duration_steps < k_period:
        raise ValueError("train shorter than one period")
    period = train.spikes[:k_period, neuron].astype(float)
    weights = 2.0 ** -(1 + np.arange(k_period))
    weighted_sum = float((period * weights).sum())
    return weighted_sum * 2**k_period / (2**k_period - 1)


def encode_ttfs(x: float, t_total: int) -> int:
    """Time-to-first-spike coding: t = T - round(T x).

    Stronger input spikes earlier; x = 0 maps to t = T, i.e. outside the
    simulation window, so the neuron stays silent.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError("intensity must lie in [0, 1]")
    if t_total < 1:
        raise ValueError("T must be at least 1")
    return t_total - int(round(t_total * x))


@dataclass(frozen=True)
class PopulationCodeConfig:
    """Gaussian tuning-curve layout over [i_min, i_max] with m neurons."""

    m: int = 10
    i_min: float = 0.0
    i_max: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.m <= 2:
            raise ValueError("population size m must exceed 2")
        if not self.i_min < self.i_max:
            raise ValueError("i_min must be below i_max")
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    def centers(self) -> np.ndarray:
        """Tuning-curve means: mu_i = I_min + (2i-3)/2 * (I_max-I_min)/(m-2)."""
        i = np.arange(1, self.m + 1, dtype=float)
        return self.i_min + (2 * i - 3) / 2 * (self.i_max - self.i_min) / (self.m - 2)

    def width(self) -> float:
        """Shared tuning width: sigma = (1/beta) * (I_max-I_min)/(m-2)."""
        return (self.i_max - self.i_min) / (self.beta * (self.m - 2))


def population_tuning(x: float, cfg: PopulationCodeConfig) -> np.ndarray:
    """Graded responses exp(-(x - mu_i)^2 / (2 sigma^2)) of all m neurons."""
    mu = cfg.centers()
    sigma = cfg.width()
    return np.exp(-((x - mu) ** 2) / (2.0 * sigma**2))


def population_decode(responses: np.ndarray, cfg: PopulationCodeConfig) -> float:
    """Center-of-mass estimate over the tuning-curve means."""
    r = np.asarray(responses, dtype=float)
    if r.shape != (cfg.m,):
        raise ValueError("response vector length must equal m")
    total = r.sum()
    if total <= 0:
        raise ValueError("cannot decode an all-zero response vector")
    return float((r * cfg.centers()).sum() / total)
