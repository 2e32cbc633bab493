"""Wavefunction ansatze: autoregressive RNN, RBM, MLP, and PT symmetrization."""

from .base import LOG_ZERO, LogAmplitude
from .checkpoint import load_checkpoint, save_checkpoint
from .mlp import MlpWavefunction
from .rbm import RbmWavefunction
from .rnn import RnnWavefunction
from .symmetrize import PtSymmetrized, pt_residual, pt_symmetrize, reflect

__all__ = [
    "LOG_ZERO",
    "LogAmplitude",
    "MlpWavefunction",
    "PtSymmetrized",
    "RbmWavefunction",
    "RnnWavefunction",
    "load_checkpoint",
    "pt_residual",
    "pt_symmetrize",
    "reflect",
    "save_checkpoint",
]
