"""NumPy fallback for the compiled contraction kernels.

Mirrors the semantics of ``_ckernels`` exactly; the power recurrence is the
same, only the summation order inside reductions differs (NumPy uses
pairwise summation), so results agree with the compiled backend to roundoff.
"""

import numpy as np


def pattern_forward(coeffs: np.ndarray, base: np.ndarray) -> np.ndarray:
    """out[i, j] = sum_m coeffs[i, m] * base[i, j]**m."""
    h, n = coeffs.shape
    out = np.broadcast_to(coeffs[:, 0][:, None], base.shape).copy()
    power = base.copy()
    for m in range(1, n):
        out += coeffs[:, m][:, None] * power
        if m + 1 < n:
            power *= base
    return out


def pattern_adjoint(weights: np.ndarray, base: np.ndarray, n: int) -> np.ndarray:
    """out[i, m] = sum_j weights[i, j] * base[i, j]**m."""
    h = base.shape[0]
    out = np.empty((h, n), dtype=np.complex128)
    term = weights.astype(np.complex128, copy=True)
    for m in range(n):
        out[:, m] = term.sum(axis=1)
        if m + 1 < n:
            term *= base
    return out
