"""Brute-force spectral-projection oracle for cross-checking the fft imputer.

Deliberately independent of the package internals: the transform is a direct
O(T^2) DFT evaluated from its definition (explicit twiddle matrix, no FFT
algorithm), and the iteration is rewritten from scratch. Slow but trustworthy
at desk scale (T <= 256, ~100 iterations).
"""

import numpy as np


def dft_direct(x):
    """Direct O(T^2) discrete Fourier transform via the explicit matrix."""
    x = np.asarray(x, dtype=complex)
    T = len(x)
    n = np.arange(T)
    W = np.exp(-2j * np.pi * np.outer(n, n) / T)
    return W @ x


def idft_direct(X):
    """Direct O(T^2) inverse DFT via the explicit matrix."""
    X = np.asarray(X, dtype=complex)
    T = len(X)
    n = np.arange(T)
    W = np.exp(2j * np.pi * np.outer(n, n) / T)
    return (W @ X) / T


def project_top_pairs(X, top_k):
    """Zero all spectrum bins except the top_k conjugate pairs by magnitude.

    A pair is represented by its bin index in [0, T//2]; DC and (for even T)
    Nyquist are self-conjugate and count as one pair each. Ties in magnitude
    resolve to the lower bin index.
    """
    T = len(X)
    reps = list(range(T // 2 + 1))
    mags = np.abs(X)
    order = sorted(reps, key=lambda k: (-mags[k], k))
    keep = set()
    for k in order[:top_k]:
        keep.add(k)
        partner = (T - k) % T
        if partner != k:
            keep.add(partner)
    Y = np.zeros_like(X)
    for k in sorted(keep):
        Y[k] = X[k]
    return Y


def impute_spectral_bruteforce(values, missing, top_k=10, max_iters=100, tol=1e-6):
    """Reference iteration: mean-init, DFT, keep top pairs, write back missing.

    Returns (imputed, iterations, converged).
    """
    x = np.asarray(values, dtype=float).copy()
    miss = np.asarray(missing, dtype=bool)
    if miss.all():
        raise ValueError("no observed points")
    x[miss] = x[~miss].mean()
    converged = False
    iterations = 0
    for it in range(1, max_iters + 1):
        iterations = it
        X = dft_direct(x)
        r = idft_direct(project_top_pairs(X, top_k))
        assert np.max(np.abs(r.imag)) < 1e-9
        r = r.real
        delta = np.max(np.abs(r[miss] - x[miss])) if miss.any() else 0.0
        x[miss] = r[miss]
        if delta < tol:
            converged = True
            break
    return x, iterations, converged
