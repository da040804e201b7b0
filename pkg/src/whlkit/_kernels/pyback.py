"""NumPy implementations of the hot kernels.

This is the fallback backend; the Cython module ``_cyk`` implements the same
four functions. Both backends must return bit-identical results, so every
floating-point operation here is written in the exact order the compiled
loop performs it (no FMA, sequential cumulative sums, stable value/index
sort order).
"""

import numpy as np

# Tolerance band for the cumulative-weight boundary of the weighted-median
# selection rule: a prefix within one part in 1e9 of 1/2 is treated as
# exactly 1/2, so that weights meant to be exact rationals (e.g. m copies of
# 1/m) select the same element they would under exact arithmetic.
SELECT_BAND = 0.5 * (1.0 + 1e-9)

BACKEND_NAME = "python"

# scheme codes shared with the compiled backend
STRICT, WITH_DIAGONAL, ALL = 0, 1, 2


def pair_indices(n: int, scheme: int):
    if scheme == STRICT:
        return np.triu_indices(n, k=1)
    if scheme == WITH_DIAGONAL:
        return np.triu_indices(n, k=0)
    idx = np.arange(n)
    return np.repeat(idx, n), np.tile(idx, n)


def pair_arrays(x: np.ndarray, w: np.ndarray, scheme: int):
    """Pairwise weighted averages and raw pair-weight sums, row-major order.

    The pair value is computed as ``x_i*(w_i/s) + x_j*(w_j/s)`` with
    ``s = w_i + w_j``; for equal weights ``w_i/s`` is exactly 0.5, which makes
    the equal-weight pair value bit-identical to the plain average.
    Returned weights are the unnormalized sums ``w_i + w_j``.
    """
    i, j = pair_indices(x.shape[0], scheme)
    xi, xj = x[i], x[j]
    wi, wj = w[i], w[j]
    s = wi + wj
    values = xi * (wi / s) + xj * (wj / s)
    # the rounded convex coefficients can overshoot 1 by an ulp; a weighted
    # average must stay inside its own pair's range
    np.clip(values, np.minimum(xi, xj), np.maximum(xi, xj), out=values)
    return values, s


def walsh_values(x: np.ndarray, scheme: int) -> np.ndarray:
    """Plain pairwise averages ``(x_i + x_j)/2`` in row-major order."""
    i, j = pair_indices(x.shape[0], scheme)
    return (x[i] + x[j]) * 0.5


def median(values: np.ndarray) -> float:
    """Median with the average-of-middles convention for even counts."""
    m = values.shape[0]
    h = m // 2
    if m % 2:
        return float(np.partition(values, h)[h])
    part = np.partition(values, (h - 1, h))
    return float((part[h - 1] + part[h]) * 0.5)


def weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Weighted median of ``values`` under normalized ``weights``.

    Sorts stably by value (ties keep input order), accumulates weights left
    to right, and returns the first value whose cumulative weight exceeds
    1/2; a prefix equal to 1/2 (within SELECT_BAND) does not yet stop the
    scan, so the upper of two straddling values is returned.
    """
    order = np.argsort(values, kind="stable")
    sv = values[order]
    cum = np.cumsum(weights[order])
    hit = np.nonzero(cum > SELECT_BAND)[0]
    if hit.size == 0:
        return float(sv[-1])
    return float(sv[hit[0]])
