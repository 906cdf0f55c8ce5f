"""Binary spike trains over a (time step x neuron) grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SpikeTrain"]


@dataclass
class SpikeTrain:
    """Binary spike matrix of shape (duration_steps, n_neurons).

    Entries are 0/1; the time axis covers steps [0, T).
    """

    spikes: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.spikes)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("spike matrix must be 2-D (time x neuron)")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("spike matrix entries must be 0 or 1")
        self.spikes = arr.astype(np.uint8)

    @property
    def duration_steps(self) -> int:
        return self.spikes.shape[0]

    @property
    def n_neurons(self) -> int:
        return self.spikes.shape[1]

    @classmethod
    def zeros(cls, duration_steps: int, n_neurons: int = 1) -> "SpikeTrain":
        return cls(np.zeros((duration_steps, n_neurons), dtype=np.uint8))

    @classmethod
    def from_times(cls, times, duration_steps: int, n_neurons: int = 1,
                   neuron: int = 0) -> "SpikeTrain":
        """Build a train from integer spike step indices for one neuron."""
        mat = np.zeros((duration_steps, n_neurons), dtype=np.uint8)
        idx = np.asarray(times, dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= duration_steps):
            raise ValueError("spike times must lie in [0, duration_steps)")
        mat[idx, neuron] = 1
        return cls(mat)

    def spike_steps(self, neuron: int = 0) -> np.ndarray:
        """Step indices at which the given neuron spiked."""
        return np.flatnonzero(self.spikes[:, neuron])

    def counts(self) -> np.ndarray:
        """Total spike count per neuron."""
        return self.spikes.sum(axis=0)
