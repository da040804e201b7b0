# cython: language_level=3
"""Compiled implementations of the hot kernels.

Mirror of ``pyback`` with identical arithmetic: same operation order in the
pair-value expression, the same (value, original index) sort order, and
sequential cumulative sums. The build disables FMA contraction so results
stay bit-identical to the NumPy backend.

Selection is callback-free: the median uses an in-place Hoare quickselect
and the weighted median an inline median-of-three quicksort over
(value, weight, index) entries, so ties resolve by original index exactly
like NumPy's stable argsort.
"""

import numpy as np

from libc.stdlib cimport free, malloc

cdef double _SELECT_BAND_C = 0.5 * (1.0 + 1e-9)

SELECT_BAND = _SELECT_BAND_C
BACKEND_NAME = "cython"

STRICT, WITH_DIAGONAL, ALL = 0, 1, 2

cdef struct Entry:
    double v
    double w
    Py_ssize_t idx


cdef inline bint _entry_less(Entry a, Entry b) noexcept nogil:
    if a.v != b.v:
        return a.v < b.v
    return a.idx < b.idx


cdef inline void _entry_swap(Entry* a, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Entry t = a[i]
    a[i] = a[j]
    a[j] = t


cdef void _entry_sort(Entry* a, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    """Iterative quicksort on the (value, index) total order; no ties exist
    in that order, so the result is the unique stable-by-index ordering."""
    cdef Py_ssize_t stack_lo[64]
    cdef Py_ssize_t stack_hi[64]
    cdef int top = 0
    cdef Py_ssize_t i, j, mid
    cdef Entry pivot, key
    while True:
        while hi - lo > 16:
            mid = lo + (hi - lo) // 2
            # median-of-three pivot moved to lo
            if _entry_less(a[mid], a[lo]):
                _entry_swap(a, mid, lo)
            if _entry_less(a[hi], a[lo]):
                _entry_swap(a, hi, lo)
            if _entry_less(a[hi], a[mid]):
                _entry_swap(a, hi, mid)
            pivot = a[mid]
            i = lo
            j = hi
            while i <= j:
                while _entry_less(a[i], pivot):
                    i += 1
                while _entry_less(pivot, a[j]):
                    j -= 1
                if i <= j:
                    _entry_swap(a, i, j)
                    i += 1
                    j -= 1
            # recurse into the smaller side, loop on the larger
            if j - lo < hi - i:
                if i < hi:
                    stack_lo[top] = i
                    stack_hi[top] = hi
                    top += 1
                hi = j
            else:
                if lo < j:
                    stack_lo[top] = lo
                    stack_hi[top] = j
                    top += 1
                lo = i
        # insertion sort for the short range
        for i in range(lo + 1, hi + 1):
            key = a[i]
            j = i - 1
            while j >= lo and _entry_less(key, a[j]):
                a[j + 1] = a[j]
                j -= 1
            a[j + 1] = key
        if top == 0:
            return
        top -= 1
        lo = stack_lo[top]
        hi = stack_hi[top]


cdef inline void _dswap(double* a, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double t = a[i]
    a[i] = a[j]
    a[j] = t


cdef void _select_kth(double* a, Py_ssize_t m, Py_ssize_t k) noexcept nogil:
    """Hoare quickselect: place the k-th smallest at a[k] with everything
    left of it no larger."""
    cdef Py_ssize_t lo = 0, hi = m - 1, i, j, mid
    cdef double pivot
    while lo < hi:
        mid = lo + (hi - lo) // 2
        if a[mid] < a[lo]:
            _dswap(a, mid, lo)
        if a[hi] < a[lo]:
            _dswap(a, hi, lo)
        if a[hi] < a[mid]:
            _dswap(a, hi, mid)
        pivot = a[mid]
        i = lo - 1
        j = hi + 1
        while True:
            i += 1
            while a[i] < pivot:
                i += 1
            j -= 1
            while a[j] > pivot:
                j -= 1
            if i >= j:
                break
            _dswap(a, i, j)
        if k <= j:
            hi = j
        else:
            lo = j + 1


cdef Py_ssize_t _pair_count(Py_ssize_t n, int scheme):
    if scheme == 0:
        return (n * n - n) // 2
    if scheme == 1:
        return (n * n + n) // 2
    return n * n


def pair_arrays(const double[::1] x, const double[::1] w, int scheme):
    """Pairwise weighted averages and raw pair-weight sums, row-major order."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = _pair_count(n, scheme)
    values = np.empty(m, dtype=np.float64)
    sums = np.empty(m, dtype=np.float64)
    cdef double[::1] pv = values
    cdef double[::1] pw = sums
    cdef Py_ssize_t i, j, k = 0, j0
    cdef double s, v, lo, hi
    for i in range(n):
        if scheme == 0:
            j0 = i + 1
        elif scheme == 1:
            j0 = i
        else:
            j0 = 0
        for j in range(j0, n):
            s = w[i] + w[j]
            v = x[i] * (w[i] / s) + x[j] * (w[j] / s)
            # rounded convex coefficients can overshoot 1 by an ulp; keep
            # the weighted average inside its own pair's range
            if x[i] < x[j]:
                lo, hi = x[i], x[j]
            else:
                lo, hi = x[j], x[i]
            if v < lo:
                v = lo
            elif v > hi:
                v = hi
            pv[k] = v
            pw[k] = s
            k += 1
    return values, sums


def walsh_values(const double[::1] x, int scheme):
    """Plain pairwise averages ``(x_i + x_j)/2`` in row-major order."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = _pair_count(n, scheme)
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] pv = out
    cdef Py_ssize_t i, j, k = 0, j0
    for i in range(n):
        if scheme == 0:
            j0 = i + 1
        elif scheme == 1:
            j0 = i
        else:
            j0 = 0
        for j in range(j0, n):
            pv[k] = (x[i] + x[j]) * 0.5
            k += 1
    return out


def median(const double[::1] values):
    """Median with the average-of-middles convention for even counts."""
    cdef Py_ssize_t m = values.shape[0]
    cdef Py_ssize_t h = m // 2
    if m == 0:
        raise ValueError("median of an empty array")
    cdef double* buf = <double*> malloc(m * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    cdef double res, lower
    try:
        for i in range(m):
            buf[i] = values[i]
        _select_kth(buf, m, h)
        if m % 2:
            res = buf[h]
        else:
            lower = buf[0]
            for i in range(1, h):
                if buf[i] > lower:
                    lower = buf[i]
            res = (lower + buf[h]) * 0.5
    finally:
        free(buf)
    return res


def weighted_median(const double[::1] values, const double[::1] weights):
    """Weighted median under normalized weights; see the NumPy backend."""
    cdef Py_ssize_t m = values.shape[0]
    if m == 0:
        raise ValueError("weighted median of an empty array")
    cdef Entry* buf = <Entry*> malloc(m * sizeof(Entry))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    cdef double cum = 0.0
    cdef double res
    try:
        for i in range(m):
            buf[i].v = values[i]
            buf[i].w = weights[i]
            buf[i].idx = i
        _entry_sort(buf, 0, m - 1)
        res = buf[m - 1].v
        for i in range(m):
            cum += buf[i].w
            if cum > _SELECT_BAND_C:
                res = buf[i].v
                break
    finally:
        free(buf)
    return res
