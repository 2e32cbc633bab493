"""Feed-forward wavefunction: spins in, (log-magnitude, phase) out.

Hidden layers are rectified; the two real outputs are read as
log Psi = out_0 + i * out_1. Parameters are real, so gradients of the
complex log-amplitude are obtained by backpropagating the complex adjoint
(1, i) through the network.
"""

from __future__ import annotations

import numpy as np

from ..seeding import named_stream
from .base import ParametrizedWavefunction, uniform_init


class MlpWavefunction(ParametrizedWavefunction):
    kind = "mlp"

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if len(weights) != len(biases) or len(weights) < 2:
            raise ValueError("need at least one hidden layer plus the output layer")
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        if self.weights[-1].shape[0] != 2:
            raise ValueError("output layer must produce (log-magnitude, phase)")
        for w, b in zip(self.weights, self.biases):
            if w.shape[0] != b.shape[0]:
                raise ValueError("bias/weight shape mismatch")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError("MLP parameters must be finite")

    @property
    def n(self) -> int:
        return self.weights[0].shape[1]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.n] + [w.shape[0] for w in self.weights]

    @classmethod
    def random_init(cls, n: int, hidden: int = 34, layers: int = 1,
                    seed: int = 0, scale: float = 0.05) -> "MlpWavefunction":
        rng = named_stream(seed, "init/mlp")
        sizes = [n] + [hidden] * layers + [2]
        weights = [uniform_init(rng, (sizes[k + 1], sizes[k]), scale)
                   for k in range(len(sizes) - 1)]
        biases = [uniform_init(rng, sizes[k + 1], scale)
                  for k in range(len(sizes) - 1)]
        return cls(weights, biases)

    def _arrays(self):
        out = []
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            out.append((f"w{k}", w))
            out.append((f"b{k}", b))
        return out

    def _forward(self, X: np.ndarray):
        act = np.asarray(X, dtype=float)
        activations = [act]
        pre = []
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = act @ w.T + b[None, :]
            pre.append(z)
            act = np.maximum(z, 0.0) if k < len(self.weights) - 1 else z
            activations.append(act)
        return pre, activations

    def log_psi_batch(self, X: np.ndarray) -> np.ndarray:
        _, activations = self._forward(X)
        out = activations[-1]
        return out[:, 0] + 1j * out[:, 1]

    def log_psi_with_grad_batch(self, X: np.ndarray):
        pre, activations = self._forward(X)
        out = activations[-1]
        vals = out[:, 0] + 1j * out[:, 1]

        nbatch = out.shape[0]
        adj = np.broadcast_to(np.array([1.0, 1.0j]), (nbatch, 2))
        blocks = [None] * (2 * len(self.weights))
        for k in range(len(self.weights) - 1, -1, -1):
            gw = adj[:, :, None] * activations[k][:, None, :]
            blocks[2 * k] = gw.reshape(nbatch, -1)
            blocks[2 * k + 1] = adj
            if k > 0:
                adj = (adj @ self.weights[k]) * (pre[k - 1] > 0)
        return vals, np.concatenate(blocks, axis=1)
