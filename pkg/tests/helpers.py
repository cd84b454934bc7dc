"""Shared oracles for the test suite."""

import numpy as np


def taylor_expm(A, t=1.0, terms=200):
    """Independent matrix-exponential oracle: straight Taylor series with
    compensated (Kahan) accumulation, valid for moderate ||A t||."""
    A = np.asarray(A, dtype=complex) * t
    n = A.shape[0]
    total = np.eye(n, dtype=complex)
    comp = np.zeros_like(total)
    term = np.eye(n, dtype=complex)
    for k in range(1, terms + 1):
        term = term @ A / k
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


def jordan_block(lam, size):
    J = lam * np.eye(size, dtype=complex)
    for i in range(size - 1):
        J[i, i + 1] = 1.0
    return J


def random_similarity(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    while True:
        S = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        S *= scale
        if np.linalg.cond(S) < 50:
            return S


def multi_exp(t, poles_coeffs):
    """Evaluate sum of c * t^j * exp(s t) terms given [(s, j, c), ...]."""
    out = np.zeros_like(t, dtype=complex)
    for s, j, c in poles_coeffs:
        out += c * t**j * np.exp(s * t)
    return out
