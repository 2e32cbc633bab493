"""Neural-network variational Monte Carlo for a PT-symmetric non-Hermitian
transverse-field Ising chain, with exact-diagonalization and series-expansion
oracles, transfer-learning sweeps, and exceptional-point detection."""

from .model import ModelParams

__version__ = "0.1.0"
__all__ = ["ModelParams", "__version__"]
