"""Non-Hermitian transverse-field Ising chain in the z-basis.

The chain couples nearest-neighbour ``sigma^z`` pairs with strength J and
applies a staggered complex transverse field: ``g = eta + i*xi`` on
sublattice A (odd sites, 1-indexed) and its conjugate on sublattice B
(even sites). Internally sites are 0-indexed, so A is the even internal
indices. The model is PT-symmetric (reflection times complex conjugation)
but not Hermitian for ``xi != 0``.

Spin configurations are length-N integer arrays over {+1, -1}. Amplitude
ratios are always handled in log space with a hard cap on the real part of
the log-ratio, so an untrained ansatz fails loudly instead of overflowing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DivergentRatioError, InvalidSpinConfigError

# |Re(delta log psi)| above this is treated as divergent rather than exp'd.
RATIO_CAP = 60.0
# log-magnitude below this counts as a vanishing amplitude.
LOG_FLOOR = -300.0


@dataclass(frozen=True)
class ModelParams:
    """Couplings, staggered field and geometry of the chain.

    ``boundary`` is ``"pbc"`` or ``"obc"``. Under PBC the bond sum runs over
    all N bonds (site N couples back to site 1), which for N=2 counts the
    single physical bond twice; under OBC it runs over N-1 bonds. Odd N under
    PBC is rejected: the staggered field pattern is not bipartite on an odd
    ring.
    """

    n: int
    eta: float
    xi: float
    j: float = 1.0
    boundary: str = "pbc"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need at least two sites, got n={self.n}")
        for name in ("eta", "xi", "j"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.boundary not in ("pbc", "obc"):
            raise ValueError(f"boundary must be 'pbc' or 'obc', got {self.boundary!r}")
        if self.boundary == "pbc" and self.n % 2 == 1:
            raise ValueError("odd N under PBC breaks the sublattice pattern")

    @classmethod
    def from_eta(cls, n: int, eta: float, j: float = 1.0, boundary: str = "pbc",
                 xi_ratio: float = 0.1) -> "ModelParams":
        """Single-knob constructor for the weak non-Hermiticity regime xi = eta/10."""
        return cls(n=n, eta=eta, xi=xi_ratio * eta, j=j, boundary=boundary)

    @property
    def g(self) -> complex:
        return complex(self.eta, self.xi)

    @property
    def num_bonds(self) -> int:
        return self.n if self.boundary == "pbc" else self.n - 1

    def field_coefficients(self) -> np.ndarray:
        """Off-diagonal coefficient per site: -g on sublattice A, -g* on B."""
        coeffs = np.empty(self.n, dtype=complex)
        coeffs[0::2] = -self.g
        coeffs[1::2] = -np.conj(self.g)
        return coeffs


@dataclass(frozen=True)
class Connection:
    """One off-diagonal matrix element reachable from a source config."""

    target: np.ndarray  # source with exactly one spin flipped
    coefficient: complex


def as_config(spins: Sequence[int] | np.ndarray) -> np.ndarray:
    x = np.asarray(spins, dtype=np.int8)
    if x.ndim != 1 or not np.all(np.abs(x) == 1):
        raise InvalidSpinConfigError(f"not a +/-1 spin configuration: {spins!r}")
    return x


def validate_config(x: np.ndarray, params: ModelParams) -> np.ndarray:
    x = as_config(x)
    if x.shape[0] != params.n:
        raise InvalidSpinConfigError(
            f"config length {x.shape[0]} does not match N={params.n}"
        )
    return x


def random_config(n: int, rng: np.random.Generator) -> np.ndarray:
    return (1 - 2 * rng.integers(0, 2, size=n)).astype(np.int8)


def config_index(x: np.ndarray) -> int:
    """Lexicographic z-basis index; all-up is 0, site 1 is the leading bit."""
    bits = (1 - np.asarray(x, dtype=np.int64)) // 2
    n = bits.shape[0]
    return int(bits @ (1 << np.arange(n - 1, -1, -1, dtype=np.int64)))


def index_config(index: int, n: int) -> np.ndarray:
    bits = (index >> np.arange(n - 1, -1, -1)) & 1
    return (1 - 2 * bits).astype(np.int8)


def enumerate_configs(n: int) -> np.ndarray:
    """All 2^n configurations, row k being the config with index k."""
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return (1 - 2 * bits).astype(np.int8)


def diagonal_energy(x: np.ndarray, params: ModelParams) -> float:
    """Ising part -J * sum_j x_j x_{j+1} over the boundary's bond range."""
    x = validate_config(x, params)
    if params.boundary == "pbc":
        bonds = x * np.roll(x, -1)
    else:
        bonds = x[:-1] * x[1:]
    return float(-params.j * bonds.sum())


def diagonal_energy_batch(X: np.ndarray, params: ModelParams) -> np.ndarray:
    X = np.asarray(X)
    if params.boundary == "pbc":
        bonds = X * np.roll(X, -1, axis=1)
    else:
        bonds = X[:, :-1] * X[:, 1:]
    return -params.j * bonds.sum(axis=1).astype(float)


def connections(x: np.ndarray, params: ModelParams) -> list[Connection]:
    """All single-flip connections of ``x`` with their field coefficients."""
    x = validate_config(x, params)
    coeffs = params.field_coefficients()
    out = []
    for i in range(params.n):
        target = x.copy()
        target[i] = -target[i]
        out.append(Connection(target=target, coefficient=complex(coeffs[i])))
    return out


def _checked_log(value, x: np.ndarray) -> complex:
    z = complex(value)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise DivergentRatioError(f"non-finite log-amplitude at config {x.tolist()}", x)
    if z.real < LOG_FLOOR:
        raise DivergentRatioError(
            f"amplitude magnitude underflow (log|psi|={z.real:.1f}) at config {x.tolist()}",
            x,
        )
    return z


def local_energy(x: np.ndarray, logpsi: Callable[[np.ndarray], complex],
                 params: ModelParams) -> complex:
    """Config-wise energy <x|H|Psi> / <x|Psi> for the right-state ansatz.

    ``logpsi`` may return anything convertible to ``complex`` (the package's
    ``LogAmplitude`` qualifies). Each ratio is exp(delta log psi) with
    |Re(delta)| capped at ``RATIO_CAP``; beyond the cap the configuration is
    reported divergent so the caller can resample it.
    """
    x = validate_config(x, params)
    base = _checked_log(logpsi(x), x)
    total = complex(diagonal_energy(x, params))
    for conn in connections(x, params):
        delta = complex(logpsi(conn.target)) - base
        if not np.isfinite(delta.real) or abs(delta.real) > RATIO_CAP:
            raise DivergentRatioError(
                f"divergent amplitude ratio (Re delta={delta.real:.1f}) "
                f"from config {x.tolist()}",
                x,
            )
        total += conn.coefficient * np.exp(delta)
    return total


def local_energy_left(x: np.ndarray, logpsi_left: Callable[[np.ndarray], complex],
                      params: ModelParams) -> complex:
    """Mirror of :func:`local_energy` using the left state, <Psi_L|H|x>/<Psi_L|x>.

    The matrix elements are read row-wise; for this Hamiltonian the flip
    structure is symmetric in the z-basis, so the same coefficient table
    applies and only the ansatz changes.
    """
    return local_energy(x, logpsi_left, params)


def local_energy_batch(
    X: np.ndarray,
    log_psi_batch: Callable[[np.ndarray], np.ndarray],
    params: ModelParams,
    base: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized local energies for a batch of configs.

    Returns ``(eloc, divergent)`` where ``divergent`` marks rows whose
    amplitude vanished or whose ratio exceeded the cap; their energies are
    NaN and the caller decides whether to drop or resample them.
    """
    X = np.asarray(X, dtype=np.int8)
    nb, n = X.shape
    if n != params.n:
        raise InvalidSpinConfigError(f"batch width {n} does not match N={params.n}")
    if base is None:
        base = log_psi_batch(X)
    base = np.asarray(base, dtype=complex)

    flips = np.repeat(X[:, None, :], n, axis=1)
    site = np.arange(n)
    flips[:, site, site] = -flips[:, site, site]
    flip_vals = np.asarray(log_psi_batch(flips.reshape(nb * n, n)), dtype=complex)
    delta = flip_vals.reshape(nb, n) - base[:, None]

    divergent = (
        ~np.isfinite(base.real)
        | (base.real < LOG_FLOOR)
        | ~np.isfinite(delta.real).all(axis=1)
        | (np.abs(delta.real) > RATIO_CAP).any(axis=1)
    )
    safe_delta = np.where(np.isfinite(delta.real) & (np.abs(delta.real) <= RATIO_CAP),
                          delta, 0.0)
    coeffs = params.field_coefficients()
    eloc = diagonal_energy_batch(X, params) + (np.exp(safe_delta) @ coeffs)
    eloc = np.where(divergent, np.nan + 0j, eloc)
    return eloc, divergent
