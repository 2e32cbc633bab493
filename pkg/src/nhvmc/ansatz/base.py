"""Shared pieces of the wavefunction ansatze.

Every ansatz exposes the same small surface: ``log_psi_batch`` (complex
log-amplitudes for a batch of configs), ``log_psi_with_grad_batch`` (values
plus per-sample derivatives with respect to every real parameter component)
and a flat real parameter vector for the optimizer. Complex parameter
arrays contribute their real and imaginary parts as separate blocks, in
the order the arrays are declared.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
LOG_TWO = math.log(2.0)
# Sentinel log-magnitude for an exactly cancelled amplitude; far below the
# model's underflow floor, so downstream ratio checks flag the config.
LOG_ZERO = -745.0


@dataclass(frozen=True)
class LogAmplitude:
    """log Psi(x) split into log-magnitude and phase (radians)."""

    log_magnitude: float
    phase: float

    def __post_init__(self):
        if not (math.isfinite(self.log_magnitude) and math.isfinite(self.phase)):
            raise ValueError(
                f"log-amplitude must be finite, got ({self.log_magnitude}, {self.phase})"
            )

    @classmethod
    def from_complex(cls, z: complex) -> "LogAmplitude":
        z = complex(z)
        return cls(z.real, z.imag)

    def __complex__(self) -> complex:
        return complex(self.log_magnitude, self.phase)

    @property
    def canonical_phase(self) -> float:
        """Phase folded into [0, 2*pi) for comparisons."""
        return self.phase % TWO_PI

    def isclose(self, other: "LogAmplitude", tol: float = 1e-12) -> bool:
        dphi = (self.phase - other.phase) % TWO_PI
        dphi = min(dphi, TWO_PI - dphi)
        return abs(self.log_magnitude - other.log_magnitude) <= tol and dphi <= tol


def log_cosh(z: np.ndarray) -> np.ndarray:
    """Overflow-safe log cosh for complex arguments."""
    z = np.asarray(z)
    s = np.where(z.real >= 0, 1.0, -1.0)
    sz = s * z
    return sz - LOG_TWO + np.log(1.0 + np.exp(-2.0 * sz))


def softmax_pair(logits: np.ndarray) -> np.ndarray:
    """Softmax over the last axis (used for two-way conditionals)."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class ParametrizedWavefunction:
    """Flat-parameter plumbing shared by all ansatze.

    Subclasses declare their arrays via ``_arrays`` (name, array) in a fixed
    order; real arrays occupy one block of the parameter vector, complex
    arrays two (real parts then imaginary parts), both in C order.
    """

    def _arrays(self) -> list[tuple[str, np.ndarray]]:
        raise NotImplementedError

    @property
    def num_parameters(self) -> int:
        total = 0
        for _, arr in self._arrays():
            total += arr.size * (2 if np.iscomplexobj(arr) else 1)
        return total

    def parameter_vector(self) -> np.ndarray:
        blocks = []
        for _, arr in self._arrays():
            if np.iscomplexobj(arr):
                blocks.append(arr.real.ravel())
                blocks.append(arr.imag.ravel())
            else:
                blocks.append(arr.ravel())
        return np.concatenate(blocks).astype(float)

    def set_parameter_vector(self, vec: np.ndarray) -> None:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.num_parameters,):
            raise ValueError(
                f"expected {self.num_parameters} parameters, got {vec.shape}"
            )
        pos = 0
        for _, arr in self._arrays():
            if np.iscomplexobj(arr):
                re = vec[pos : pos + arr.size].reshape(arr.shape)
                pos += arr.size
                im = vec[pos : pos + arr.size].reshape(arr.shape)
                pos += arr.size
                arr[...] = re + 1j * im
            else:
                arr[...] = vec[pos : pos + arr.size].reshape(arr.shape)
                pos += arr.size

    def log_psi_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_psi(self, x: np.ndarray) -> complex:
        return complex(self.log_psi_batch(np.asarray(x)[None, :])[0])

    def log_amplitude(self, x: np.ndarray) -> LogAmplitude:
        return LogAmplitude.from_complex(self.log_psi(x))

    def copy(self):
        return copy.deepcopy(self)


def uniform_init(rng: np.random.Generator, shape, scale: float = 0.05) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)
