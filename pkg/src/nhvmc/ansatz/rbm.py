"""Restricted Boltzmann machine wavefunction with complex parameters.

log Psi(x) = sum_i a_i x_i + sum_j log cosh(b_j + sum_i W_ij x_i)

The parameters are holomorphic, so the derivative with respect to the
imaginary part of any parameter is i times the derivative with respect to
its real part.
"""

from __future__ import annotations

import numpy as np

from ..seeding import named_stream
from .base import ParametrizedWavefunction, log_cosh, uniform_init


class RbmWavefunction(ParametrizedWavefunction):
    kind = "rbm"

    def __init__(self, a: np.ndarray, b: np.ndarray, w: np.ndarray):
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        w = np.asarray(w, dtype=complex)
        if w.shape != (a.shape[0], b.shape[0]):
            raise ValueError(f"weight shape {w.shape} inconsistent with biases")
        for arr in (a, b, w):
            if not np.all(np.isfinite(arr)):
                raise ValueError("RBM parameters must be finite")
        self.a = a
        self.b = b
        self.w = w

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def hidden(self) -> int:
        return self.b.shape[0]

    @classmethod
    def random_init(cls, n: int, hidden: int = 34, seed: int = 0,
                    scale: float = 0.05) -> "RbmWavefunction":
        """Small symmetric init on the real parts; imaginary parts start at 0
        so untrained amplitude ratios stay O(1)."""
        rng = named_stream(seed, "init/rbm")
        a = uniform_init(rng, n, scale).astype(complex)
        b = uniform_init(rng, hidden, scale).astype(complex)
        w = uniform_init(rng, (n, hidden), scale).astype(complex)
        return cls(a, b, w)

    def _arrays(self):
        return [("a", self.a), ("b", self.b), ("w", self.w)]

    def _theta(self, X: np.ndarray) -> np.ndarray:
        return self.b[None, :] + np.asarray(X, dtype=float) @ self.w

    def log_psi_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return X @ self.a + log_cosh(self._theta(X)).sum(axis=1)

    def log_psi_with_grad_batch(self, X: np.ndarray):
        X = np.asarray(X, dtype=float)
        theta = self._theta(X)
        vals = X @ self.a + log_cosh(theta).sum(axis=1)
        t = np.tanh(theta)  # (B, M), numpy's complex tanh saturates safely
        xt = (X[:, :, None] * t[:, None, :]).reshape(X.shape[0], -1)
        xc = X.astype(complex)
        grads = np.concatenate(
            [xc, 1j * xc, t, 1j * t, xt, 1j * xt], axis=1
        )
        return vals, grads
