"""Configuration samplers matched to the three ansatze.

* autoregressive: exact independent draws from the RNN's conditional
  product, one network pass per sample;
* Gibbs: site-wise heat-bath updates whose conditionals come from the
  exact density |Psi(x)|^2 (used with the RBM);
* Metropolis: uniform single-spin-flip proposals with the usual
  |Psi'/Psi|^2 acceptance (used with the MLP).

The chain samplers run one persistent chain per batch slot; a call yields
the current state of every chain after a fixed number of decorrelation
sweeps, and the chain state survives across calls (and across warm-started
sweep points). All draws are reproducible from the config seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroAmplitudeError
from .model import LOG_FLOOR
from .seeding import named_stream

_REINIT_RETRIES = 100


def _stable_sigmoid(d: np.ndarray) -> np.ndarray:
    out = np.empty(d.shape, dtype=float)
    pos = d >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-d[pos]))
    ed = np.exp(d[~pos])
    out[~pos] = ed / (1.0 + ed)
    return out


@dataclass(frozen=True)
class SamplerConfig:
    batch: int = 1024
    seed: int = 111
    burn_in: int = 100  # sweeps before the first kept batch (chain samplers)
    thinning: int = 1  # sweeps (N site updates) between kept batches

    def __post_init__(self):
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")


class AutoregressiveSampler:
    """Exact sampler for the autoregressive RNN (symmetrized or bare).

    Draws come from the bare conditional product, never from the
    symmetrized density; ``next_batch`` therefore also returns the exact
    log draw probabilities so the caller can reweight.
    """

    def __init__(self, wavefunction, config: SamplerConfig):
        rnn = getattr(wavefunction, "inner", wavefunction)
        if not hasattr(rnn, "conditional_step"):
            raise TypeError("autoregressive sampling needs an RNN ansatz")
        self.rnn = rnn
        self.config = config
        self.rng = named_stream(config.seed, "sampler/autoregressive")
        self.network_passes = 0

    def next_batch(self):
        nbatch, n = self.config.batch, self.rnn.n
        state = self.rnn.initial_state(nbatch)
        X = np.empty((nbatch, n), dtype=np.int8)
        log_draw = np.zeros(nbatch)
        for t in range(n):
            probs, hidden = self.rnn.conditional_step(state)
            u = self.rng.random(nbatch)
            spins = np.where(u < probs[:, 0], 1, -1).astype(np.int8)
            X[:, t] = spins
            chosen = np.where(spins == 1, probs[:, 0], probs[:, 1])
            log_draw += np.log(chosen)
            state = (hidden, spins)
        self.network_passes += nbatch
        return X, log_draw

    def sample(self, num_samples: int) -> np.ndarray:
        batches = []
        drawn = 0
        while drawn < num_samples:
            X, _ = self.next_batch()
            batches.append(X)
            drawn += X.shape[0]
        return np.concatenate(batches)[:num_samples]


class _ChainSampler:
    def __init__(self, wavefunction, config: SamplerConfig, x0=None, name="chain"):
        self.wavefunction = wavefunction
        self.config = config
        self.rng = named_stream(config.seed, f"sampler/{name}")
        self._burned_in = False
        n = wavefunction.n
        if x0 is not None:
            x0 = np.asarray(x0, dtype=np.int8)
            self.chains = np.tile(x0, (config.batch, 1))
        else:
            self.chains = (1 - 2 * self.rng.integers(
                0, 2, size=(config.batch, n))).astype(np.int8)
        self._log_cur = None
        self._ensure_live_start()

    def _ensure_live_start(self):
        """Replace chains starting on a vanishing amplitude, bounded retries."""
        for _ in range(_REINIT_RETRIES):
            logs = np.asarray(self.wavefunction.log_psi_batch(self.chains))
            dead = logs.real < LOG_FLOOR
            if not dead.any():
                self._log_cur = logs
                return
            repl = (1 - 2 * self.rng.integers(
                0, 2, size=(int(dead.sum()), self.chains.shape[1]))).astype(np.int8)
            self.chains[dead] = repl
        raise ZeroAmplitudeError(
            "could not find a starting configuration with nonzero amplitude"
        )

    @property
    def chain_state(self) -> np.ndarray:
        return self.chains.copy()

    @chain_state.setter
    def chain_state(self, value: np.ndarray) -> None:
        value = np.asarray(value, dtype=np.int8)
        if value.shape != self.chains.shape:
            raise ValueError(f"chain state shape {value.shape} != {self.chains.shape}")
        self.chains = value.copy()
        self._log_cur = np.asarray(self.wavefunction.log_psi_batch(self.chains))

    def _sweep(self):
        raise NotImplementedError

    def next_batch(self):
        if not self._burned_in:
            for _ in range(self.config.burn_in):
                self._sweep()
            self._burned_in = True
        for _ in range(self.config.thinning):
            self._sweep()
        return self.chains.copy(), None

    def sample(self, num_samples: int) -> np.ndarray:
        batches = []
        drawn = 0
        while drawn < num_samples:
            X, _ = self.next_batch()
            batches.append(X)
            drawn += X.shape[0]
        return np.concatenate(batches)[:num_samples]


class GibbsSampler(_ChainSampler):
    """Site-wise heat-bath sampler targeting |Psi(x)|^2 exactly.

    Each sweep visits the sites in order and redraws every site from its
    exact conditional given the rest, P(flip) = |Psi'|^2 / (|Psi|^2 + |Psi'|^2).
    With complex RBM parameters the hidden-unit conditionals are no longer
    real, so the update works directly on the density instead of the usual
    visible/hidden block alternation; for real parameters the two coincide
    in distribution.
    """

    def __init__(self, wavefunction, config: SamplerConfig, x0=None):
        super().__init__(wavefunction, config, x0=x0, name="gibbs")

    def flip_probabilities(self, chains: np.ndarray, site: int,
                           log_cur: np.ndarray | None = None) -> np.ndarray:
        if log_cur is None:
            log_cur = np.asarray(self.wavefunction.log_psi_batch(chains))
        flipped = chains.copy()
        flipped[:, site] = -flipped[:, site]
        log_new = np.asarray(self.wavefunction.log_psi_batch(flipped))
        return _stable_sigmoid(2.0 * (log_new.real - log_cur.real))

    def _sweep(self):
        nbatch, n = self.chains.shape
        for site in range(n):
            flipped = self.chains.copy()
            flipped[:, site] = -flipped[:, site]
            log_new = np.asarray(self.wavefunction.log_psi_batch(flipped))
            p_flip = _stable_sigmoid(2.0 * (log_new.real - self._log_cur.real))
            do_flip = self.rng.random(nbatch) < p_flip
            self.chains[do_flip, site] = -self.chains[do_flip, site]
            self._log_cur = np.where(do_flip, log_new, self._log_cur)


class MetropolisSampler(_ChainSampler):
    """Single-flip Metropolis sampler with acceptance min(1, |Psi'/Psi|^2)."""

    def __init__(self, wavefunction, config: SamplerConfig, x0=None):
        self.proposal_counts = np.zeros(wavefunction.n, dtype=np.int64)
        self.accepted = 0
        self.proposed = 0
        super().__init__(wavefunction, config, x0=x0, name="metropolis")

    def _sweep(self):
        nbatch, n = self.chains.shape
        for _ in range(n):
            sites = self.rng.integers(0, n, size=nbatch)
            np.add.at(self.proposal_counts, sites, 1)
            proposal = self.chains.copy()
            rows = np.arange(nbatch)
            proposal[rows, sites] = -proposal[rows, sites]
            log_new = np.asarray(self.wavefunction.log_psi_batch(proposal))
            log_ratio = 2.0 * (log_new.real - self._log_cur.real)
            with np.errstate(divide="ignore"):
                accept = np.log(self.rng.random(nbatch)) < log_ratio
            self.chains[accept] = proposal[accept]
            self._log_cur = np.where(accept, log_new, self._log_cur)
            self.accepted += int(accept.sum())
            self.proposed += nbatch
