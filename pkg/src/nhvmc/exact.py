"""Dense exact diagonalization with biorthogonal left/right eigenvectors.

The Hamiltonian is built in the lexicographic z-basis (all-up is index 0,
site 1 carries the leading bit). It is complex symmetric but not Hermitian
for ``xi != 0``, so the full spectrum comes from a general eigensolver and
left eigenvectors have to be paired with the right ones explicitly.

Left vectors are stored as bra coefficients: ``left_vectors[i]`` is the row
l_i with ``l_i @ right_vectors[:, j] = delta_ij`` after normalization, i.e.
the biorthogonal pairing is the plain bilinear product, no conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NearEPError, SizeCapError
from .model import ModelParams

DEFAULT_SIZE_CAP = 14
_SELF_ORTHOGONALITY_FLOOR = 1e-12
_INVERSION_COND_LIMIT = 1e10


def build_dense(params: ModelParams, size_cap: int = DEFAULT_SIZE_CAP) -> np.ndarray:
    """Dense 2^N x 2^N matrix of the chain Hamiltonian."""
    if params.n > size_cap:
        raise SizeCapError(f"N={params.n} exceeds dense cap {size_cap}")
    n = params.n
    dim = 1 << n
    idx = np.arange(dim)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    spins = 1 - 2 * bits
    h = np.zeros((dim, dim), dtype=complex)

    nb = params.num_bonds
    diag = np.zeros(dim)
    for b in range(nb):
        diag -= params.j * spins[:, b] * spins[:, (b + 1) % n]
    h[idx, idx] = diag

    coeffs = params.field_coefficients()
    for i in range(n):
        target = idx ^ (1 << (n - 1 - i))
        h[target, idx] += coeffs[i]
    return h


@dataclass
class Spectrum:
    """Full eigensystem with biorthonormalized left/right pairs.

    ``degenerate_clusters`` lists index groups where the left/right pairing
    could not be normalized (self-orthogonal, i.e. at or next to an EP);
    inside such a cluster the biorthogonality invariant is declared failed
    rather than silently wrong.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray  # column k is the k-th right eigenvector
    left_vectors: np.ndarray  # row k is the k-th left bra, l_k @ r_k = 1
    params: ModelParams | None = None
    degenerate_clusters: list[tuple[int, ...]] = field(default_factory=list)
    left_method: str = "inverse"

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def flagged_indices(self) -> set[int]:
        return {i for cluster in self.degenerate_clusters for i in cluster}


def _cluster_flagged(eigenvalues: np.ndarray, flagged: np.ndarray) -> list[tuple[int, ...]]:
    """Group self-orthogonal indices with their nearest-eigenvalue partners."""
    scale = max(1.0, float(np.abs(eigenvalues).max()))
    tol = 1e-6 * scale
    clusters: list[tuple[int, ...]] = []
    used: set[int] = set()
    for i in np.flatnonzero(flagged):
        if i in used:
            continue
        members = np.flatnonzero(np.abs(eigenvalues - eigenvalues[i]) < tol)
        group = tuple(sorted(set(members.tolist()) | {int(i)}))
        used.update(group)
        clusters.append(group)
    return clusters


def eigendecompose(h: np.ndarray, params: ModelParams | None = None) -> Spectrum:
    """Full complex eigensystem of ``h`` with paired left vectors.

    Left rows come from inverting the right-eigenvector matrix while it is
    well conditioned (biorthogonality then holds by construction); near an
    EP the inversion is replaced by an independent decomposition of the
    conjugate transpose with greedy conjugate-eigenvalue pairing, and pairs
    whose bilinear product vanishes are reported as degenerate clusters.
    """
    h = np.asarray(h, dtype=complex)
    if not np.all(np.isfinite(h)):
        raise ValueError("Hamiltonian has non-finite entries")
    w, r = np.linalg.eig(h)

    cond = np.linalg.cond(r)
    if cond < _INVERSION_COND_LIMIT:
        left = np.linalg.inv(r)
        resid = np.abs(left @ r - np.eye(w.shape[0])).max()
        if resid > 1e-10:  # one Newton polish of the inverse
            left = left @ (2.0 * np.eye(w.shape[0]) - r @ left)
        return Spectrum(w, r, left, params=params, left_method="inverse")

    mu, u = np.linalg.eig(h.conj().T)
    candidates = np.conj(mu)
    order = np.argsort(w.real, kind="stable")
    taken = np.zeros(w.shape[0], dtype=bool)
    left = np.zeros((w.shape[0], w.shape[0]), dtype=complex)
    for i in order:
        dist = np.abs(candidates - w[i])
        dist[taken] = np.inf
        k = int(np.argmin(dist))
        taken[k] = True
        left[i] = u[:, k].conj()

    pair = np.einsum("ij,ji->i", left, r)
    flagged = np.abs(pair) < _SELF_ORTHOGONALITY_FLOOR
    safe = ~flagged
    left[safe] /= pair[safe, None]
    clusters = _cluster_flagged(w, flagged)
    return Spectrum(w, r, left, params=params,
                    degenerate_clusters=clusters, left_method="adjoint-pairing")


def exact_spectrum(params: ModelParams, size_cap: int = DEFAULT_SIZE_CAP) -> Spectrum:
    return eigendecompose(build_dense(params, size_cap), params)


def select_ground(spectrum: Spectrum) -> int:
    """Index of the generalized ground state: minimal Re(E), ties broken by
    smallest |Im(E)|, then smallest Im(E), then lowest index."""
    w = spectrum.eigenvalues
    if w.shape[0] == 0:
        raise ValueError("empty spectrum")
    order = np.lexsort((w.imag, np.abs(w.imag), w.real))
    return int(order[0])


def ground_energy(params: ModelParams, size_cap: int = DEFAULT_SIZE_CAP) -> complex:
    spec = exact_spectrum(params, size_cap)
    return complex(spec.eigenvalues[select_ground(spec)])


class ZBasisOperator:
    """Operator given by a z-basis diagonal plus a list of flip actions.

    ``flips`` is a sequence of ``(site, coefficient)`` pairs, each adding
    ``coefficient * sigma^x_site``. Matches how the chain's own operators
    decompose, and avoids materializing a dense matrix for diagonals.
    """

    def __init__(self, n: int, diagonal=None, flips=()):
        self.n = n
        self.diagonal = None if diagonal is None else np.asarray(diagonal, dtype=complex)
        self.flips = list(flips)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros_like(vec)
        if self.diagonal is not None:
            out += self.diagonal * vec
        idx = np.arange(vec.shape[0])
        for site, coeff in self.flips:
            out[idx ^ (1 << (self.n - 1 - site))] += coeff * vec
        return out


def magnetization_diagonal(n: int) -> np.ndarray:
    """z-basis diagonal of m = N^-1 sum_i sigma_i^z."""
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return (1 - 2 * bits).mean(axis=1)


def biorthogonal_expectation(spectrum: Spectrum, index: int, operator) -> complex:
    """<Psi_L|O|Psi_R> / <Psi_L|Psi_R> for eigenstate ``index``.

    ``operator`` may be a dense matrix, a 1-D array (z-basis diagonal), or a
    :class:`ZBasisOperator`.
    """
    l = spectrum.left_vectors[index]
    r = spectrum.right_vectors[:, index]
    denom = l @ r
    if abs(denom) < _SELF_ORTHOGONALITY_FLOOR:
        raise NearEPError(
            f"self-orthogonal state {index}: |<L|R>|={abs(denom):.2e}"
        )
    if isinstance(operator, ZBasisOperator):
        applied = operator.apply(r)
    else:
        op = np.asarray(operator)
        applied = op * r if op.ndim == 1 else op @ r
    return complex((l @ applied) / denom)


def max_overlap(spectrum: Spectrum) -> float:
    """Largest |v_i^dag v_j| over distinct right eigenvectors (unit norm).

    In the Hermitian limit ``xi == 0`` exactly degenerate pairs are excluded:
    the eigensolver may return any basis of a degenerate subspace, and that
    freedom must not register as an exceptional point.
    """
    v = spectrum.right_vectors
    v = v / np.linalg.norm(v, axis=0)
    g = np.abs(v.conj().T @ v)
    np.fill_diagonal(g, 0.0)
    if spectrum.params is not None and spectrum.params.xi == 0.0:
        w = spectrum.eigenvalues
        scale = max(1.0, float(np.abs(w).max()))
        degenerate = np.abs(w[:, None] - w[None, :]) < 1e-9 * scale
        g[degenerate] = 0.0
    return float(g.max())


@dataclass
class ScanPoint:
    parameter: float
    eigenvalues: np.ndarray  # sorted by (Re, Im) for band continuity
    max_overlap: float
    degenerate_clusters: list[tuple[int, ...]]


def spectral_scan(params: ModelParams, vary: str, values,
                  size_cap: int = DEFAULT_SIZE_CAP) -> list[ScanPoint]:
    """Eigenvalues and max overlap along a grid in ``eta`` or ``xi``."""
    if vary not in ("eta", "xi"):
        raise ValueError(f"can only scan 'eta' or 'xi', got {vary!r}")
    values = np.asarray(values, dtype=float)
    if values.size and not (np.all(np.diff(values) > 0) or np.all(np.diff(values) < 0)):
        raise ValueError("scan grid must be strictly monotone")
    points = []
    for val in values:
        p = replace(params, **{vary: float(val)})
        spec = exact_spectrum(p, size_cap)
        w = spec.eigenvalues
        order = np.lexsort((w.imag, w.real))
        points.append(
            ScanPoint(
                parameter=float(val),
                eigenvalues=w[order],
                max_overlap=max_overlap(spec),
                degenerate_clusters=spec.degenerate_clusters,
            )
        )
    return points


def refine_overlap_peak(params: ModelParams, vary: str, lo: float, hi: float,
                        iters: int = 60, size_cap: int = DEFAULT_SIZE_CAP) -> tuple[float, float]:
    """Ternary search for the overlap maximum inside [lo, hi].

    Exceptional points are located by overlap peaks; exact coalescence is
    measure zero on any grid, so the bracket from the scan is refined until
    the peak position converges.
    """

    def f(x: float) -> float:
        return max_overlap(exact_spectrum(replace(params, **{vary: x}), size_cap))

    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) < f(m2):
            lo = m1
        else:
            hi = m2
        if hi - lo < 1e-12:
            break
    x = 0.5 * (lo + hi)
    return x, f(x)


def find_exceptional_points(
    params: ModelParams,
    vary: str,
    values,
    detect_threshold: float = 0.9,
    ep_threshold: float = 1.0 - 1e-3,
    size_cap: int = DEFAULT_SIZE_CAP,
    scan: list[ScanPoint] | None = None,
) -> list[tuple[float, float]]:
    """Refined overlap peaks that qualify as exceptional points.

    Local maxima of the scanned overlap above ``detect_threshold`` are
    refined by ternary search; peaks whose refined overlap reaches
    ``ep_threshold`` are returned as ``(location, overlap)`` pairs.
    """
    if scan is None:
        scan = spectral_scan(params, vary, values, size_cap)
    xs = np.array([pt.parameter for pt in scan])
    ov = np.array([pt.max_overlap for pt in scan])
    peaks = []
    for i in range(1, len(xs) - 1):
        if ov[i] < detect_threshold:
            continue
        if ov[i] > ov[i - 1] and ov[i] >= ov[i + 1]:
            x, v = refine_overlap_peak(params, vary, xs[i - 1], xs[i + 1],
                                       size_cap=size_cap)
            if v >= ep_threshold:
                peaks.append((x, v))
    return peaks
