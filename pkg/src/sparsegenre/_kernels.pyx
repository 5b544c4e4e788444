# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  Same contracts as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

cdef double RANK_EPS = 1e-10


def normalized_row_stats(const double[:, ::1] mags):
    cdef Py_ssize_t n_rows = mags.shape[0], n_cols = mags.shape[1]
    cdef Py_ssize_t t, k
    cdef double peak, acc, v
    row_sums_arr = np.zeros(n_rows)
    col_acc_arr = np.zeros(n_cols)
    cdef double[::1] row_sums = row_sums_arr
    cdef double[::1] col_acc = col_acc_arr
    with nogil:
        for t in range(n_rows):
            peak = 0.0
            for k in range(n_cols):
                if mags[t, k] > peak:
                    peak = mags[t, k]
            if peak <= 0.0:
                continue
            acc = 0.0
            for k in range(n_cols):
                v = mags[t, k] / peak
                acc += v
                col_acc[k] += v
            row_sums[t] = acc
        if n_rows > 0:
            for k in range(n_cols):
                col_acc[k] /= n_rows
    return row_sums_arr, col_acc_arr


cdef void _forward(double[:, ::1] L, double[::1] rhs, double[::1] out, Py_ssize_t s) nogil:
    # solve L[:s,:s] out = rhs[:s]
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(s):
        acc = rhs[i]
        for k in range(i):
            acc -= L[i, k] * out[k]
        out[i] = acc / L[i, i]


cdef void _backward(double[:, ::1] L, double[::1] rhs, double[::1] out, Py_ssize_t s) nogil:
    # solve L[:s,:s]^T out = rhs[:s]
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(s - 1, -1, -1):
        acc = rhs[i]
        for k in range(i + 1, s):
            acc -= L[k, i] * out[k]
        out[i] = acc / L[i, i]


def omp_kernel(const double[:, ::1] A, const double[::1] y, Py_ssize_t k_max, double abs_tol):
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t s = 0, i, j, jbest, q
    cdef double best, c, ajj, d, acc, rnorm
    cdef bint rank_deficient = False

    L_arr = np.zeros((k_max, k_max))
    cdef double[:, ::1] L = L_arr
    cdef double[::1] b = np.zeros(k_max)
    cdef double[::1] z = np.zeros(k_max)
    cdef double[::1] w = np.zeros(k_max)
    cdef double[::1] v = np.zeros(k_max)
    coef_arr = np.zeros(k_max)
    cdef double[::1] coef = coef_arr
    support_arr = np.zeros(k_max, dtype=np.int64)
    cdef cnp.int64_t[::1] support = support_arr
    r_arr = np.array(y, dtype=np.float64)
    cdef double[::1] r = r_arr
    cdef double[::1] corr = np.zeros(n)
    cdef unsigned char[::1] selected = np.zeros(n, dtype=np.uint8)
    hist_arr = np.zeros(k_max + 1)
    cdef double[::1] hist = hist_arr

    with nogil:
        acc = 0.0
        for i in range(m):
            acc += r[i] * r[i]
        rnorm = sqrt(acc)
        hist[0] = rnorm

        while s < k_max:
            if rnorm <= abs_tol:
                break
            for j in range(n):
                corr[j] = 0.0
            for i in range(m):
                c = r[i]
                for j in range(n):
                    corr[j] += A[i, j] * c
            jbest = -1
            best = 0.0
            for j in range(n):
                if selected[j]:
                    continue
                c = fabs(corr[j])
                if c > best:
                    best = c
                    jbest = j
            if jbest < 0:
                break

            ajj = 0.0
            for i in range(m):
                ajj += A[i, jbest] * A[i, jbest]
            for q in range(s):
                acc = 0.0
                for i in range(m):
                    acc += A[i, support[q]] * A[i, jbest]
                v[q] = acc
            _forward(L, v, w, s)
            d = ajj
            for q in range(s):
                d -= w[q] * w[q]
            if d <= RANK_EPS * ajj:
                rank_deficient = True
                break
            for q in range(s):
                L[s, q] = w[q]
            L[s, s] = sqrt(d)
            acc = 0.0
            for i in range(m):
                acc += A[i, jbest] * y[i]
            b[s] = acc
            support[s] = jbest
            selected[jbest] = 1
            s += 1

            _forward(L, b, z, s)
            _backward(L, z, coef, s)
            for i in range(m):
                acc = y[i]
                for q in range(s):
                    acc -= A[i, support[q]] * coef[q]
                r[i] = acc
            acc = 0.0
            for i in range(m):
                acc += r[i] * r[i]
            rnorm = sqrt(acc)
            hist[s] = rnorm

    return (
        support_arr[:s].copy(),
        coef_arr[:s].copy(),
        r_arr,
        hist_arr[: s + 1].copy(),
        bool(rank_deficient),
    )
