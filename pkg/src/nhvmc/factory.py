"""Construction helpers binding architectures to their samplers."""

from __future__ import annotations

from .ansatz import MlpWavefunction, PtSymmetrized, RbmWavefunction, RnnWavefunction
from .errors import ConfigError
from .sampling import AutoregressiveSampler, GibbsSampler, MetropolisSampler, SamplerConfig

ARCHITECTURES = ("rnn", "rbm", "mlp")


def build_ansatz(arch: str, n: int, *, hidden: int = 34, layers: int = 1,
                 cell: str = "gru", phase_head: bool = False,
                 log_offset: float = 1e-15, seed: int = 0, pt: bool = True):
    if arch == "rnn":
        ansatz = RnnWavefunction.random_init(
            n, cell=cell, hidden=hidden, phase_head=phase_head,
            seed=seed, log_offset=log_offset)
    elif arch == "rbm":
        ansatz = RbmWavefunction.random_init(n, hidden=hidden, seed=seed)
    elif arch == "mlp":
        ansatz = MlpWavefunction.random_init(n, hidden=hidden, layers=layers,
                                             seed=seed)
    else:
        raise ConfigError(f"unknown architecture {arch!r}")
    return PtSymmetrized(ansatz) if pt else ansatz


def build_sampler(ansatz, config: SamplerConfig, x0=None):
    """Sampler matched to the ansatz family: autoregressive for the RNN,
    heat-bath Gibbs for the RBM, single-flip Metropolis for the MLP."""
    kind = ansatz.kind.removeprefix("pt-")
    if kind == "rnn":
        return AutoregressiveSampler(ansatz, config)
    if kind == "rbm":
        return GibbsSampler(ansatz, config, x0=x0)
    if kind == "mlp":
        return MetropolisSampler(ansatz, config, x0=x0)
    raise ConfigError(f"no sampler for ansatz kind {ansatz.kind!r}")
