"""Shared test utilities: gradient checks, enumeration distributions."""

import numpy as np

from nhvmc.model import enumerate_configs


def gradient_vs_finite_differences(ansatz, X, step=1e-6, rtol=1e-5, atol=1e-8):
    """Worst violation of |analytic - fd| <= rtol*scale + atol, as a multiple
    of the allowance.

    The absolute term sits far above central-difference roundoff (~1e-10 for
    O(1) amplitudes) and far below any meaningful gradient, so numerically
    zero components cannot drown the relative comparison.
    """
    _, grads = ansatz.log_psi_with_grad_batch(X)
    base = ansatz.parameter_vector()
    worst = 0.0
    max_abs = 0.0
    for k in range(base.size):
        up = base.copy()
        up[k] += step
        ansatz.set_parameter_vector(up)
        f_up = np.asarray(ansatz.log_psi_batch(X), dtype=complex)
        down = base.copy()
        down[k] -= step
        ansatz.set_parameter_vector(down)
        f_down = np.asarray(ansatz.log_psi_batch(X), dtype=complex)
        fd = (f_up - f_down) / (2.0 * step)
        err = np.abs(np.asarray(grads[:, k], dtype=complex) - fd)
        max_abs = max(max_abs, float(err.max()))
        allowance = rtol * np.maximum(np.abs(grads[:, k]), np.abs(fd)) + atol
        worst = max(worst, float((err / allowance).max()))
    ansatz.set_parameter_vector(base)
    return worst, max_abs


def assert_gradients_match(ansatz, X, rtol=1e-5):
    worst, max_abs = gradient_vs_finite_differences(ansatz, X, rtol=rtol)
    assert worst <= 1.0, (
        f"gradient mismatch: worst violation {worst:.2f}x allowance "
        f"(max abs err {max_abs:.2e})"
    )


def born_distribution(ansatz, n):
    """Normalized |Psi(x)|^2 over all configurations."""
    X = enumerate_configs(n)
    logs = np.asarray(ansatz.log_psi_batch(X), dtype=complex)
    w = np.exp(2.0 * (logs.real - logs.real.max()))
    return w / w.sum()


def empirical_distribution(samples, n):
    bits = (1 - samples.astype(np.int64)) // 2
    idx = bits @ (1 << np.arange(n - 1, -1, -1, dtype=np.int64))
    counts = np.bincount(idx, minlength=1 << n)
    return counts / counts.sum()


def total_variation(p, q):
    return 0.5 * float(np.abs(p - q).sum())
