"""Exact diagonalization: dense build, biorthogonal pairs, EP detection."""

import numpy as np
import pytest
import scipy.linalg

from nhvmc import exact
from nhvmc.errors import NearEPError, SizeCapError
from nhvmc.exact import (
    Spectrum,
    ZBasisOperator,
    biorthogonal_expectation,
    build_dense,
    eigendecompose,
    exact_spectrum,
    find_exceptional_points,
    magnetization_diagonal,
    max_overlap,
    select_ground,
    spectral_scan,
)
from nhvmc.model import ModelParams


def characteristic_coefficients(h):
    """Independent oracle: Faddeev-LeVerrier recursion (trace powers only)."""
    n = h.shape[0]
    coeffs = [1.0 + 0j]
    m = np.zeros_like(h)
    for k in range(1, n + 1):
        m = h @ (m + coeffs[-1] * np.eye(n))
        coeffs.append(-np.trace(m) / k)
    return np.array(coeffs)


def match_multisets(a, b, tol):
    """Greedy nearest matching; robust to conjugate-pair sort flips."""
    a = list(np.asarray(a))
    b = list(np.asarray(b))
    worst = 0.0
    for x in a:
        k = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b.pop(k)))
    return worst < tol


class TestBuildDense:
    def test_two_site_field_free_diagonal(self):
        h = build_dense(ModelParams(n=2, eta=0.0, xi=0.0))
        assert np.allclose(h, np.diag([-2.0, 2.0, 2.0, -2.0]))

    def test_two_site_flip_entry(self):
        h = build_dense(ModelParams(n=2, eta=0.5, xi=0.05))
        # all-up is index 0; flipping site 1 lands on index 2 (leading bit)
        assert h[2, 0] == pytest.approx(-(0.5 + 0.05j))
        assert h[1, 0] == pytest.approx(-(0.5 - 0.05j))

    def test_symmetric_but_not_hermitian(self):
        h = build_dense(ModelParams(n=4, eta=0.5, xi=0.3, boundary="obc"))
        assert np.allclose(h, h.T)
        assert not np.allclose(h, h.conj().T)

    def test_size_cap(self):
        with pytest.raises(SizeCapError):
            build_dense(ModelParams(n=16, eta=0.5, xi=0.05), size_cap=14)

    @pytest.mark.parametrize("boundary,xi", [("pbc", 0.05), ("obc", 0.3)])
    def test_spectrum_against_characteristic_polynomial(self, boundary, xi):
        h = build_dense(ModelParams(n=4, eta=0.5, xi=xi, boundary=boundary))
        w = np.linalg.eigvals(h)
        coeffs = characteristic_coefficients(h)
        # coefficient-level comparison is immune to multiple-root blowup
        from_eig = np.poly(w)
        scale = np.abs(coeffs).max()
        assert np.abs(from_eig - coeffs).max() < 1e-8 * scale
        # root-level comparison: an m-fold root is conditioned as eps^(1/m);
        # the PBC point has a fourfold zero, hence the loose tolerance
        assert match_multisets(w, np.roots(coeffs), 5e-3)
        # every reported eigenvalue makes H - lambda I numerically singular
        hnorm = np.linalg.norm(h, 2)
        for lam in w:
            smin = scipy.linalg.svdvals(h - lam * np.eye(16))[-1]
            assert smin < 1e-10 * hnorm


class TestEigendecompose:
    def test_hermitian_limit_real_spectrum_conjugate_left(self):
        spec = exact_spectrum(ModelParams(n=4, eta=0.7, xi=0.0, boundary="obc"))
        assert np.abs(spec.eigenvalues.imag).max() < 1e-10
        # left rows are collinear with conjugated right columns
        for i in range(spec.dim):
            l = spec.left_vectors[i]
            r = np.conj(spec.right_vectors[:, i])
            cos = abs(np.vdot(l, r)) / (np.linalg.norm(l) * np.linalg.norm(r))
            assert cos == pytest.approx(1.0, abs=1e-8)

    def test_diagonal_case(self):
        spec = exact_spectrum(ModelParams(n=2, eta=0.0, xi=0.0))
        assert sorted(spec.eigenvalues.real) == pytest.approx([-2, -2, 2, 2])
        assert np.abs(spec.eigenvalues.imag).max() < 1e-14

    def test_obc_spectrum_vs_oracle(self):
        p = ModelParams(n=4, eta=0.5, xi=0.3, boundary="obc")
        spec = exact_spectrum(p)
        roots = np.roots(characteristic_coefficients(build_dense(p)))
        assert match_multisets(spec.eigenvalues, roots, 1e-8)

    def test_defective_matrix_takes_fallback_and_flags_cluster(self):
        jordan = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
        spec = eigendecompose(jordan)
        assert spec.left_method == "adjoint-pairing"
        assert spec.degenerate_clusters
        with pytest.raises(NearEPError):
            biorthogonal_expectation(spec, spec.degenerate_clusters[0][0],
                                     np.eye(2, dtype=complex))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            eigendecompose(np.array([[np.nan, 0], [0, 1]], dtype=complex))


class TestSelectGround:
    def _spectrum(self, eigenvalues):
        dim = len(eigenvalues)
        eye = np.eye(dim, dtype=complex)
        return Spectrum(np.array(eigenvalues, dtype=complex), eye, eye.copy())

    def test_minimal_real_part(self):
        assert select_ground(self._spectrum([5, -2, 3])) == 1

    def test_tie_breaks_toward_smallest_im(self):
        assert select_ground(self._spectrum([-1 + 1j, -1 - 1j, 0])) == 1

    def test_empty_spectrum(self):
        with pytest.raises(ValueError):
            select_ground(self._spectrum([]))

    def test_benchmark_ground_energy_purely_real(self):
        spec = exact_spectrum(ModelParams(n=10, eta=1.6, xi=0.16, boundary="pbc"))
        e0 = spec.eigenvalues[select_ground(spec)]
        assert abs(e0.imag) < 1e-8
        assert e0.real == pytest.approx(-17.605760956539406, abs=1e-8)


class TestBiorthogonalExpectation:
    @pytest.fixture(scope="class")
    def spec(self):
        return exact_spectrum(ModelParams(n=4, eta=0.5, xi=0.05, boundary="pbc"))

    def test_identity_is_one(self, spec):
        k = select_ground(spec)
        val = biorthogonal_expectation(spec, k, np.eye(16, dtype=complex))
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_hamiltonian_gives_eigenvalue(self, spec):
        h = build_dense(spec.params)
        for k in (select_ground(spec), 3, 11):
            val = biorthogonal_expectation(spec, k, h)
            assert val == pytest.approx(spec.eigenvalues[k], abs=1e-10)

    def test_classical_point_magnetization(self):
        spec = exact_spectrum(ModelParams(n=4, eta=0.0, xi=0.0))
        m = magnetization_diagonal(4)
        ground_indices = np.flatnonzero(
            np.abs(spec.eigenvalues - (-4)) < 1e-12)
        values = sorted(
            biorthogonal_expectation(spec, int(k), m).real
            for k in ground_indices)
        assert values == pytest.approx([-1.0, 1.0], abs=1e-10)

    def test_flip_list_operator_matches_dense(self, spec):
        op = ZBasisOperator(4, diagonal=magnetization_diagonal(4),
                            flips=[(1, 0.3 - 0.2j)])
        dense = np.diag(magnetization_diagonal(4)).astype(complex)
        idx = np.arange(16)
        dense[idx ^ (1 << 2), idx] += 0.3 - 0.2j
        k = select_ground(spec)
        assert biorthogonal_expectation(spec, k, op) == pytest.approx(
            biorthogonal_expectation(spec, k, dense), abs=1e-12)


class TestMaxOverlap:
    def test_hermitian_obc_nearly_orthogonal(self):
        spec = exact_spectrum(ModelParams(n=4, eta=0.7, xi=0.0, boundary="obc"))
        assert max_overlap(spec) < 1e-6

    def test_duplicate_vector_gives_one(self):
        v = np.array([[1, 1, 0], [1j, 1j, 1], [0.5, 0.5, 2]], dtype=complex)
        spec = Spectrum(np.array([1.0, 2.0, 3.0], dtype=complex), v,
                        np.linalg.pinv(v))
        assert max_overlap(spec) == pytest.approx(1.0, abs=1e-12)

    def test_pbc_hermitian_degenerate_pairs_excluded(self):
        spec = exact_spectrum(ModelParams(n=6, eta=0.7, xi=0.0, boundary="pbc"))
        assert max_overlap(spec) < 1e-6


class TestSpectralScan:
    def test_requires_monotone_grid(self):
        p = ModelParams(n=4, eta=0.5, xi=0.0, boundary="obc")
        with pytest.raises(ValueError):
            spectral_scan(p, "xi", [0.1, 0.3, 0.2])
        with pytest.raises(ValueError):
            spectral_scan(p, "gamma", [0.1, 0.2])

    def test_pbc_breaks_pt_immediately(self):
        p = ModelParams(n=4, eta=0.5, xi=0.0, boundary="pbc")
        scan = spectral_scan(p, "xi", np.arange(0.05, 0.51, 0.05))
        for pt in scan:
            assert np.abs(pt.eigenvalues.imag).max() > 1e-10

    def test_obc_real_until_first_ep(self):
        p = ModelParams(n=4, eta=0.5, xi=0.0, boundary="obc")
        scan = spectral_scan(p, "xi", [0.05, 0.15, 0.22, 0.25, 0.40])
        real = [np.abs(pt.eigenvalues.imag).max() < 1e-10 for pt in scan]
        # first exceptional point sits at xi ~ 0.2309
        assert real == [True, True, True, False, False]

    def test_bands_sorted_for_continuity(self):
        p = ModelParams(n=4, eta=0.5, xi=0.0, boundary="obc")
        (pt,) = spectral_scan(p, "xi", [0.3])
        keys = [(z.real, z.imag) for z in pt.eigenvalues]
        assert keys == sorted(keys)


class TestExceptionalPoints:
    def test_n4_two_refined_peaks(self):
        p = ModelParams(n=4, eta=0.5, xi=0.0, boundary="obc")
        peaks = find_exceptional_points(p, "xi", np.arange(0.01, 1.0001, 0.01))
        assert len(peaks) == 2
        locations = sorted(x for x, _ in peaks)
        assert locations[0] == pytest.approx(0.230942, abs=1e-4)
        assert locations[1] == pytest.approx(0.699586, abs=1e-4)
        assert all(v >= 0.999 for _, v in peaks)


class TestSpectrumInvariants:
    @pytest.mark.parametrize("params", [
        ModelParams(n=4, eta=0.5, xi=0.05, boundary="pbc"),
        ModelParams(n=4, eta=0.5, xi=0.4, boundary="obc"),
        ModelParams(n=6, eta=1.2, xi=0.12, boundary="pbc"),
        # even N only: reflection maps A<->B, odd-N OBC is not PT-symmetric
        ModelParams(n=6, eta=0.8, xi=0.2, boundary="obc"),
    ])
    def test_trace_closure_biorthonormality_residual(self, params):
        h = build_dense(params)
        spec = exact_spectrum(params)
        w = spec.eigenvalues
        dim = spec.dim

        assert abs(w.sum()) < 1e-8 * dim

        closure = np.abs(w[:, None] - np.conj(w)[None, :]).min(axis=1).max()
        assert closure < 1e-8

        if not spec.degenerate_clusters:
            resid = np.abs(spec.left_vectors @ spec.right_vectors - np.eye(dim))
            assert resid.max() < 1e-8

        hnorm = np.linalg.norm(h)
        for k in range(dim):
            r = spec.right_vectors[:, k]
            assert np.linalg.norm(h @ r - w[k] * r) < 1e-8 * hnorm
