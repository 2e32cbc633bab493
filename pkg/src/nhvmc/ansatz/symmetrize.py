"""PT symmetrization of a wavefunction ansatz.

The symmetrized amplitude averages the raw network output with the complex
conjugate of its value on the spatially reflected configuration,

    Psi(x) = 1/2 * [F(x) + F*(Px)],      (Px)_i = x_{N-i+1},

which makes Psi(x) = Psi*(Px) hold identically. Everything is done in log
space with a shared shift, so amplitudes of very different magnitude
combine without overflow. An exact cancellation of the two terms leaves a
zero amplitude: the scalar entry point raises, the batched one returns the
``LOG_ZERO`` sentinel so downstream ratio checks flag the config.
"""

from __future__ import annotations

import numpy as np

from ..errors import ZeroAmplitudeError
from .base import LOG_TWO, LOG_ZERO, LogAmplitude

_CANCEL_TOL = 1e-14


def reflect(X: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(X)[..., ::-1])


def _combine(a: np.ndarray, b: np.ndarray):
    """log(1/2 (e^a + e^(b*))) with per-row stabilization.

    Returns (values, sa, sb, s); the shifted exponentials are reused by the
    gradient path. Cancelled rows get LOG_ZERO as the real part. Real inputs
    (probability-branch ansatz) stay real throughout.
    """
    a = np.asarray(a)
    bc = np.conj(np.asarray(b))
    m = np.maximum(a.real, bc.real)
    sa = np.exp(a - m)
    sb = np.exp(bc - m)
    s = sa + sb
    cancelled = np.abs(s) <= _CANCEL_TOL * (np.abs(sa) + np.abs(sb))
    safe = np.where(cancelled, 1.0, s)
    vals = m + np.log(safe) - LOG_TWO
    zero = LOG_ZERO if not np.iscomplexobj(vals) else LOG_ZERO + 0j
    vals = np.where(cancelled, zero, vals)
    return vals, sa, sb, s, cancelled


class PtSymmetrized:
    """Wrap any ansatz so its amplitudes satisfy Psi(x) = Psi*(Px)."""

    def __init__(self, inner):
        self.inner = inner
        self.n = inner.n

    @property
    def kind(self) -> str:
        return f"pt-{self.inner.kind}"

    @property
    def num_parameters(self) -> int:
        return self.inner.num_parameters

    def parameter_vector(self) -> np.ndarray:
        return self.inner.parameter_vector()

    def set_parameter_vector(self, vec: np.ndarray) -> None:
        self.inner.set_parameter_vector(vec)

    def copy(self) -> "PtSymmetrized":
        return PtSymmetrized(self.inner.copy())

    def log_psi_batch(self, X: np.ndarray) -> np.ndarray:
        a = self.inner.log_psi_batch(X)
        b = self.inner.log_psi_batch(reflect(X))
        vals, *_ = _combine(a, b)
        return vals

    def log_psi(self, x: np.ndarray) -> complex:
        z = complex(self.log_psi_batch(np.asarray(x)[None, :])[0])
        if z.real <= LOG_ZERO:
            raise ZeroAmplitudeError("symmetrized amplitude cancelled exactly")
        return z

    def log_amplitude(self, x: np.ndarray) -> LogAmplitude:
        return LogAmplitude.from_complex(self.log_psi(x))

    def log_psi_with_grad_batch(self, X: np.ndarray):
        va, ga = self.inner.log_psi_with_grad_batch(X)
        vb, gb = self.inner.log_psi_with_grad_batch(reflect(X))
        vals, sa, sb, s, cancelled = _combine(va, vb)
        safe = np.where(cancelled, 1.0, s)
        grads = (sa[:, None] * ga + sb[:, None] * np.conj(gb)) / safe[:, None]
        return vals, grads


def pt_symmetrize(f, x: np.ndarray) -> LogAmplitude:
    """Symmetrized log-amplitude of a bare evaluation callable at one config.

    ``f`` maps a configuration to anything convertible to complex
    (``LogAmplitude`` included) and is interpreted as log F.
    """
    x = np.asarray(x)
    a = complex(f(x))
    b = complex(f(x[::-1]))
    vals, *_ , cancelled = _combine(np.array([a]), np.array([b]))
    if bool(cancelled[0]):
        raise ZeroAmplitudeError(
            f"symmetrized amplitude is exactly zero at config {x.tolist()}"
        )
    return LogAmplitude.from_complex(complex(vals[0]))


def pt_residual(wavefunction, X: np.ndarray) -> float:
    """max |Psi(x) - Psi*(Px)| over the batch, with amplitudes rescaled by
    the largest magnitude so the residual is meaningful in linear space."""
    a = np.asarray(wavefunction.log_psi_batch(X), dtype=complex)
    b = np.asarray(wavefunction.log_psi_batch(reflect(X)), dtype=complex)
    shift = max(float(a.real.max()), float(b.real.max()))
    return float(np.abs(np.exp(a - shift) - np.conj(np.exp(b - shift))).max())
