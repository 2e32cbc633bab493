"""Variational training loop: sample, local energy, real-part loss, Adam.

Per step the engine draws a batch, evaluates log Psi with per-sample
parameter derivatives, forms the biorthogonal local energies, and descends
the surrogate

    L = < log Psi(x) f(E_loc(x)) - log Psi(x) <f(E_loc(x))> >,

with f = Re by default (selectable). The local energies are constants with
respect to differentiation; the parameter gradient applied is

    grad_k = 2 Re < conj(d log Psi / d theta_k) (f - <f>) >,

which is the exact score-function gradient of the sampled expectation of f
under |Psi|^2 (the batch averages are importance-weighted when sampling and
target densities differ, i.e. for the symmetrized autoregressive ansatz).
A penalty alpha * |<Im E_loc>| steers the optimizer toward dynamically
stable, real-energy states; its score gradient enters the same way.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TrainingAbortedError
from .model import ModelParams, enumerate_configs, local_energy_batch

_MAX_DIVERGENT_FRACTION = 0.10


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 1000
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    alpha: float = 0.1  # cost-function regularization factor
    regularization: str = "abs-im"  # "abs-im" | "var-im" | "none"
    seed: int = 111
    target: str = "min-re"
    clip_norm: float = 10.0
    max_bad_steps: int = 10

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.regularization not in ("abs-im", "var-im", "none"):
            raise ConfigError(f"unknown regularization {self.regularization!r}")
        target_functional(self.target)  # validate selector early


@dataclass(frozen=True)
class TrainingRecord:
    step: int
    mean_re: float
    mean_im: float
    var_re: float
    wall_ms: float

    def __post_init__(self):
        if self.var_re < 0:
            raise ValueError("variance must be >= 0")


def target_functional(selector):
    """Map a selector to the real functional of E_loc that is minimized.

    Selectors: min-re, max-re, min-im, max-im, min-abs, max-abs, or
    ``weighted:a,b`` for a*Re + b*Im.
    """
    table = {
        "min-re": lambda e: e.real,
        "max-re": lambda e: -e.real,
        "min-im": lambda e: e.imag,
        "max-im": lambda e: -e.imag,
        "min-abs": lambda e: np.abs(e),
        "max-abs": lambda e: -np.abs(e),
    }
    if isinstance(selector, str) and selector in table:
        return table[selector]
    if isinstance(selector, str) and selector.startswith("weighted:"):
        try:
            a, b = (float(part) for part in selector.split(":", 1)[1].split(","))
        except ValueError as exc:
            raise ConfigError(f"bad weighted selector {selector!r}") from exc
        return lambda e: a * e.real + b * e.imag
    raise ConfigError(f"unknown target functional {selector!r}")


# -- Adam ---------------------------------------------------------------------


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "AdamState":
        return cls(m=np.zeros(dim), v=np.zeros(dim))


def adam_step(params: np.ndarray, grad: np.ndarray, state: AdamState,
              lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update on a flat real parameter vector."""
    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * grad
    v = beta2 * state.v + (1 - beta2) * grad**2
    m_hat = m / (1 - beta1**t)
    v_hat = v / (1 - beta2**t)
    new_params = params - lr * m_hat / (np.sqrt(v_hat) + eps)
    return new_params, AdamState(m=m, v=v, t=t)


# -- loss and gradient --------------------------------------------------------


def _normalized(weights, size):
    if weights is None:
        return np.full(size, 1.0 / size)
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must have positive mass")
    return w / total


def loss_real(batch_logpsi, batch_eloc, weights=None, selector="min-re") -> float:
    """Surrogate value <log Psi * (f - <f>)> over the batch (diagnostic).

    The gradient actually applied comes from :func:`surrogate_gradient`;
    this value reproduces the pseudocode formula for real log Psi.
    """
    logpsi = np.asarray(batch_logpsi, dtype=complex)
    eloc = np.asarray(batch_eloc, dtype=complex)
    if logpsi.shape[0] != eloc.shape[0]:
        raise ValueError("batch length mismatch")
    if logpsi.shape[0] < 2:
        raise ValueError("batch too small: centered loss needs >= 2 samples")
    w = _normalized(weights, logpsi.shape[0])
    f = target_functional(selector)(eloc)
    centered = f - w @ f
    return float(w @ (centered * logpsi.real))


def regularize(loss: float, batch_eloc, alpha: float, weights=None,
               kind: str = "abs-im") -> float:
    """Total loss with the stability penalty on the imaginary part."""
    eloc = np.asarray(batch_eloc, dtype=complex)
    w = _normalized(weights, eloc.shape[0])
    mean_im = w @ eloc.imag
    if kind == "none" or alpha == 0.0:
        return float(loss)
    if kind == "abs-im":
        return float(loss + alpha * abs(mean_im))
    if kind == "var-im":
        return float(loss + alpha * (w @ (eloc.imag - mean_im) ** 2))
    raise ConfigError(f"unknown regularization {kind!r}")


def surrogate_gradient(grads, batch_eloc, weights=None, selector="min-re",
                       alpha: float = 0.0, reg_kind: str = "abs-im") -> np.ndarray:
    """Score-function gradient of the (regularized) target expectation.

    ``grads`` holds per-sample derivatives of log Psi with respect to every
    real parameter. E_loc is detached: gradients flow only through log Psi.
    """
    grads = np.asarray(grads)
    eloc = np.asarray(batch_eloc, dtype=complex)
    w = _normalized(weights, eloc.shape[0])
    f = target_functional(selector)(eloc)
    coeff = f - w @ f
    if alpha > 0.0 and reg_kind != "none":
        im = eloc.imag
        mean_im = w @ im
        if reg_kind == "abs-im":
            coeff = coeff + alpha * np.sign(mean_im) * (im - mean_im)
        elif reg_kind == "var-im":
            centered = im - mean_im
            coeff = coeff + alpha * (centered**2 - w @ centered**2)
        else:
            raise ConfigError(f"unknown regularization {reg_kind!r}")
    return 2.0 * np.real(grads.conj().T @ (w * coeff))


def clip_gradient(grad: np.ndarray, max_norm: float) -> np.ndarray:
    norm = float(np.linalg.norm(grad))
    if max_norm > 0 and norm > max_norm:
        return grad * (max_norm / norm)
    return grad


# -- training loop ------------------------------------------------------------


def _batch_weights(vals, log_draw, divergent):
    """Normalized batch weights: importance ratios |Psi|^2 / P_draw when the
    draw probabilities are available, else uniform; divergent rows get 0."""
    nbatch = vals.shape[0]
    if log_draw is None:
        w = np.ones(nbatch)
    else:
        logw = 2.0 * np.real(vals) - np.asarray(log_draw)
        logw = logw - logw[~divergent].max()
        w = np.exp(logw)
    w[divergent] = 0.0
    return w / w.sum()


def train(ansatz, model: ModelParams, sampler, config: TrainConfig,
          checkpoint_every: int = 0, checkpoint_path=None):
    """Run the sampling/descent loop; returns (ansatz, records).

    The ansatz is updated in place. Steps whose gradient is non-finite are
    skipped (bounded count), and a batch with more than 10% divergent
    amplitude ratios aborts training with a diagnostic.
    """
    if ansatz.n != model.n:
        raise ConfigError(f"ansatz is for N={ansatz.n}, model for N={model.n}")
    params = ansatz.parameter_vector()
    state = AdamState.zeros(params.shape[0])
    records: list[TrainingRecord] = []
    bad_steps = 0

    for step in range(1, config.steps + 1):
        t0 = time.perf_counter()
        X, log_draw = sampler.next_batch()
        vals, grads = ansatz.log_psi_with_grad_batch(X)
        eloc, divergent = local_energy_batch(X, ansatz.log_psi_batch, model,
                                             base=vals)
        frac = float(divergent.mean())
        if frac > _MAX_DIVERGENT_FRACTION:
            raise TrainingAbortedError(
                f"step {step}: {frac:.0%} of the batch has divergent amplitude "
                f"ratios; the ansatz has collapsed or the learning rate is too high"
            )
        weights = _batch_weights(vals, log_draw, divergent)
        keep = ~divergent
        eloc_k = eloc[keep]
        w_k = weights[keep]

        mean = complex(w_k @ eloc_k)
        var_re = float(w_k @ (eloc_k.real - mean.real) ** 2)

        grad = surrogate_gradient(grads[keep], eloc_k, weights=w_k,
                                  selector=config.target, alpha=config.alpha,
                                  reg_kind=config.regularization)
        if np.all(np.isfinite(grad)):
            grad = clip_gradient(grad, config.clip_norm)
            params, state = adam_step(params, grad, state, config.learning_rate,
                                      config.beta1, config.beta2, config.adam_eps)
            ansatz.set_parameter_vector(params)
        else:
            bad_steps += 1
            if bad_steps > config.max_bad_steps:
                raise TrainingAbortedError(
                    f"step {step}: non-finite gradient {bad_steps} times"
                )

        records.append(TrainingRecord(
            step=step,
            mean_re=mean.real,
            mean_im=mean.imag,
            var_re=var_re,
            wall_ms=(time.perf_counter() - t0) * 1e3,
        ))
        if checkpoint_every and checkpoint_path and step % checkpoint_every == 0:
            from .ansatz.checkpoint import save_checkpoint

            save_checkpoint(checkpoint_path, ansatz, model, config.seed, step)
    return ansatz, records


# -- full-enumeration diagnostics ---------------------------------------------


def enumeration_statistics(ansatz, model: ModelParams):
    """Exact |Psi|^2-weighted statistics over all 2^N configurations.

    Returns (weights, eloc, vals, grads); the weighted mean of ``eloc``
    equals <Psi|H|Psi>/<Psi|Psi> up to the ansatz's own arithmetic.
    """
    X = enumerate_configs(model.n)
    vals, grads = ansatz.log_psi_with_grad_batch(X)
    logw = 2.0 * np.real(vals)
    logw -= logw.max()
    w = np.exp(logw)
    w /= w.sum()
    eloc, divergent = local_energy_batch(X, ansatz.log_psi_batch, model, base=vals)
    if divergent.any():
        w = np.where(divergent, 0.0, w)
        w /= w.sum()
        eloc = np.where(divergent, 0.0, eloc)
    return w, eloc, vals, grads


def enumeration_energy(ansatz, model: ModelParams) -> complex:
    w, eloc, _, _ = enumeration_statistics(ansatz, model)
    return complex(w @ eloc)


def enumeration_gradient(ansatz, model: ModelParams, selector="min-re",
                         alpha: float = 0.0, reg_kind: str = "abs-im") -> np.ndarray:
    w, eloc, _, grads = enumeration_statistics(ansatz, model)
    return surrogate_gradient(grads, eloc, weights=w, selector=selector,
                              alpha=alpha, reg_kind=reg_kind)
