"""Unsupervised STDP layer for small digit images.

Rate-encoded pixel inputs drive a single excitatory layer whose
thresholds adapt (each spike raises a neuron's threshold, which then
decays back) and whose competition is a hard lateral-inhibition
winner-take-all per step.  Weights learn with the batch STDP rule: spike
trains are collected over a batch of samples and one summed update is
applied.  Class labels are assigned per neuron by majority response and
accuracy is scored on held-out items.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..plasticity import STDPParams, batch_stdp
from ..spiketrain import SpikeTrain

__all__ = [
    "UnsupervisedLayer",
    "build_unsupervised_layer",
    "train_unsupervised",
    "assign_labels_and_score",
]


@dataclass
class UnsupervisedLayer:
    """Weights, adaptive thresholds and the simulation hyperparameters."""

    weights: np.ndarray  # (n_inputs, n_neurons)
    theta: np.ndarray  # adaptive threshold offsets, one per neuron
    v_th: float = 6.0
    theta_inc: float = 0.3
    theta_decay: float = 0.9999
    norm_sum: float = 16.0
    tau: float = 10.0
    present_steps: int = 60
    stdp: STDPParams = field(default_factory=lambda: STDPParams(
        a_plus=0.012, a_minus=0.009, tau_plus=15.0, tau_minus=15.0,
        w_min=0.0, w_max=1.0))

    @property
    def n_inputs(self) -> int:
        return self.weights.shape[0]

    @property
    def n_neurons(self) -> int:
        return self.weights.shape[1]

    def present(self, x: np.ndarray, rng: np.random.Generator,
                learn_thresholds: bool = True
                ) -> tuple[SpikeTrain, SpikeTrain]:
        """Run one sample through the layer; returns (input, output) trains.

        The membrane integrates rate-coded input spikes; per step at
        most one neuron fires (hard lateral-inhibition winner-take-all)
        and, when threshold adaptation is on, the winner's threshold
        grows while all thresholds decay.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_inputs,):
            raise ValueError(f"sample must have shape ({self.n_inputs},)")
        if x.min() < 0 or x.max() > 1:
            raise ValueError("sample values must lie in [0, 1]")
        t_steps = self.present_steps
        in_spikes = (rng.random((t_steps, self.n_inputs)) < x).astype(np.uint8)
        out_spikes = np.zeros((t_steps, self.n_neurons), dtype=np.uint8)
        v = np.zeros(self.n_neurons)
        for t in range(t_steps):
            v += (-v + in_spikes[t] @ self.weights) / self.tau
            crossed = v - (self.v_th + self.theta)
            if crossed.max() >= 0:
                winner = int(np.argmax(crossed))
                out_spikes[t, winner] = 1
                v[:] = 0.0  # winner resets, the rest are inhibited
                if learn_thresholds:
                    self.theta[winner] += self.theta_inc
            if learn_thresholds:
                self.theta *= self.theta_decay
        return SpikeTrain(in_spikes), SpikeTrain(out_spikes)

    def response_counts(self, x: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray:
        """Spike count per neuron for one sample, thresholds frozen."""
        _, out = self.present(x, rng, learn_thresholds=False)
        return out.counts()


def build_unsupervised_layer(n_inputs: int, n_neurons: int,
                             seed: int = 0) -> UnsupervisedLayer:
    """Fresh layer with uniform random weights in [0, 0.5]."""
    if n_inputs < 1 or n_neurons < 1:
        raise ValueError("layer dimensions must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD16)))
    weights = rng.random((n_inputs, n_neurons)) * 0.5
    return UnsupervisedLayer(weights=weights, theta=np.zeros(n_neurons))


def train_unsupervised(layer: UnsupervisedLayer, dataset: np.ndarray,
                       epochs: int = 1, batch_size: int = 10,
                       seed: int = 0) -> UnsupervisedLayer:
    """Train on unlabeled samples with batched STDP updates."""
    dataset = np.asarray(dataset, dtype=float)
    if dataset.ndim != 2 or dataset.shape[0] == 0:
        raise ValueError("dataset must be a non-empty (n_samples, n_inputs) "
                         "array")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD17)))
    for _ in range(epochs):
        order = rng.permutation(len(dataset))
        for start in range(0, len(dataset), batch_size):
            batch = dataset[order[start:start + batch_size]]
            pre_trains, post_trains = [], []
            for x in batch:
                pre, post = layer.present(x, rng)
                pre_trains.append(pre)
                post_trains.append(post)
            delta = batch_stdp(pre_trains, post_trains, layer.stdp)
            layer.weights = np.clip(layer.weights + delta,
                                    layer.stdp.w_min, layer.stdp.w_max)
            # Divisive normalization keeps every neuron's total input
            # weight constant, so no single neuron can out-drive the
            # rest and monopolize the winner-take-all competition.
            col = layer.weights.sum(axis=0, keepdims=True)
            layer.weights = np.clip(
                layer.weights * layer.norm_sum / np.maximum(col, 1e-12),
                layer.stdp.w_min, layer.stdp.w_max)
    return layer


def assign_labels_and_score(layer: UnsupervisedLayer,
                            train_x: np.ndarray, train_y: np.ndarray,
                            test_x: np.ndarray, test_y: np.ndarray,
                            seed: int = 0) -> float:
    """Majority-vote label assignment, then held-out accuracy.

    Each neuron takes the label of the class it responds to most over
    the labeled set; a test item is classified by the strongest average
    per-class response.
    """
    train_x = np.asarray(train_x, dtype=float)
    test_x = np.asarray(test_x, dtype=float)
    if len(train_x) == 0 or len(test_x) == 0:
        raise ValueError("label assignment needs non-empty datasets")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD18)))
    classes = np.unique(train_y)
    response = np.zeros((classes.size, layer.n_neurons))
    for x, y in zip(train_x, train_y):
        cls = int(np.searchsorted(classes, y))
        response[cls] += layer.response_counts(x, rng)
    seen = response.sum(axis=1, keepdims=True)
    response = response / np.maximum(seen, 1)
    neuron_label = response.argmax(axis=0)
    correct = 0
    for x, y in zip(test_x, test_y):
        counts = layer.response_counts(x, rng)
        votes = np.zeros(classes.size)
        for cls in range(classes.size):
            members = neuron_label == cls
            if members.any():
                votes[cls] = counts[members].sum() / members.sum()
        predicted = classes[int(np.argmax(votes))]
        correct += int(predicted == y)
    return correct / len(test_x)
