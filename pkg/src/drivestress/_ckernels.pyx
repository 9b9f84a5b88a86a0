# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_pykernels``.

Same arithmetic, same operation order: results must match the pure-Python
backend exactly (tests/test_kernels.py checks this).
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def lfilter(b, a, x, zi):
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z_arr = np.array(zi, dtype=np.float64)
    cdef double[::1] z = z_arr
    cdef Py_ssize_t order = av.shape[0] - 1
    cdef Py_ssize_t n_samples = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y_arr = np.empty(n_samples)
    cdef double[::1] y = y_arr
    cdef Py_ssize_t n, i
    cdef double xn, yn
    for n in range(n_samples):
        xn = xv[n]
        yn = bv[0] * xn + z[0]
        for i in range(order - 1):
            z[i] = bv[i + 1] * xn + z[i + 1] - av[i + 1] * yn
        z[order - 1] = bv[order] * xn - av[order] * yn
        y[n] = yn
    return y_arr, z_arr


cdef inline double _gini(const long[::1] counts, Py_ssize_t k, double total) noexcept nogil:
    cdef double s = 0.0
    cdef double p
    cdef Py_ssize_t c
    for c in range(k):
        p = counts[c] / total
        s = s + p * p
    return 1.0 - s


def best_split(X, y, Py_ssize_t n_classes, candidates, double min_decrease):
    cdef double[:, :] xv = np.asarray(X, dtype=np.float64)
    cdef Py_ssize_t[::1] yv = np.ascontiguousarray(y, dtype=np.intp)
    cdef Py_ssize_t n = yv.shape[0]
    cdef long[::1] total = np.zeros(n_classes, dtype=np.int_)
    cdef long[::1] left = np.zeros(n_classes, dtype=np.int_)
    cdef long[::1] right = np.zeros(n_classes, dtype=np.int_)
    cdef double[::1] v = np.empty(n)
    cdef Py_ssize_t[::1] lab = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] order
    cdef Py_ssize_t i, c, f
    cdef double parent, dec, nl, nr, mid, dn = <double>n
    cdef Py_ssize_t best_f = -1
    cdef double best_t = np.nan
    cdef double best_d = min_decrease
    cdef double feat_d, feat_t
    cdef bint found

    for i in range(n):
        total[yv[i]] += 1
    parent = _gini(total, n_classes, dn)
    if n < 2:
        return -1, np.nan, 0.0

    for f in candidates:
        col = np.asarray(xv[:, f])
        order = np.argsort(col, kind="stable").astype(np.intp)
        for i in range(n):
            v[i] = xv[order[i], f]
            lab[i] = yv[order[i]]
        for c in range(n_classes):
            left[c] = 0
        feat_d = best_d
        feat_t = np.nan
        found = False
        with nogil:
            for i in range(n - 1):
                left[lab[i]] += 1
                if not v[i] < v[i + 1]:
                    continue
                for c in range(n_classes):
                    right[c] = total[c] - left[c]
                nl = <double>(i + 1)
                nr = <double>(n - i - 1)
                dec = parent - (nl / dn) * _gini(left, n_classes, nl) - (nr / dn) * _gini(right, n_classes, nr)
                if dec > feat_d:
                    feat_d = dec
                    mid = (v[i] + v[i + 1]) / 2.0
                    if not mid < v[i + 1]:
                        mid = v[i]
                    feat_t = mid
                    found = True
        if found:
            best_f = f
            best_t = feat_t
            best_d = feat_d
    if best_f < 0:
        return -1, np.nan, 0.0
    return best_f, best_t, best_d
