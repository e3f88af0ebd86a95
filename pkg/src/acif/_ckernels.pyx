# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid kernels; same contract as :mod:`acif._pykernels`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


cdef inline Py_ssize_t _upper_bound(const double[::1] pts, double x) noexcept nogil:
    # number of points <= x
    cdef Py_ssize_t lo = 0, hi = pts.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if pts[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline double _env(double x, Py_ssize_t pos, const double[:, ::1] pref,
                        const double[:, ::1] suf, const double[::1] slopes,
                        Py_ssize_t n) noexcept nogil:
    cdef double best = -INFINITY, v, k
    cdef Py_ssize_t c
    for c in range(slopes.shape[0]):
        k = slopes[c]
        if pos > 0:
            v = pref[c, pos - 1] - k * x
            if v > best:
                best = v
        if pos < n:
            v = suf[c, pos] + k * x
            if v > best:
                best = v
    return best


def cone_envelope(grid_x, pts_x, pref, suf, slopes):
    cdef const double[::1] gx = np.ascontiguousarray(grid_x, dtype=np.float64)
    cdef const double[::1] px = np.ascontiguousarray(pts_x, dtype=np.float64)
    cdef const double[:, ::1] pr = np.ascontiguousarray(pref, dtype=np.float64)
    cdef const double[:, ::1] su = np.ascontiguousarray(suf, dtype=np.float64)
    cdef const double[::1] ks = np.ascontiguousarray(slopes, dtype=np.float64)
    cdef Py_ssize_t N = gx.shape[0], n = px.shape[0], i, pos
    out = np.empty(N, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        pos = 0
        for i in range(N):
            if i == 0 or gx[i] < gx[i - 1]:
                pos = _upper_bound(px, gx[i])
            else:
                while pos < n and px[pos] <= gx[i]:
                    pos += 1
            o[i] = _env(gx[i], pos, pr, su, ks, n)
    return out


def envelope_interval_minima(grid_x, j_grid, nu_grid, lo, hi, nubar,
                             pts_x, pref, suf, slopes):
    cdef const double[::1] gx = np.ascontiguousarray(grid_x, dtype=np.float64)
    cdef const double[::1] jg = np.ascontiguousarray(j_grid, dtype=np.float64)
    cdef const cnp.int64_t[::1] ng = np.ascontiguousarray(nu_grid, dtype=np.int64)
    cdef const cnp.int64_t[::1] lo_ = np.ascontiguousarray(lo, dtype=np.int64)
    cdef const cnp.int64_t[::1] hi_ = np.ascontiguousarray(hi, dtype=np.int64)
    cdef const cnp.int64_t[::1] nb = np.ascontiguousarray(nubar, dtype=np.int64)
    cdef const double[::1] px = np.ascontiguousarray(pts_x, dtype=np.float64)
    cdef const double[:, ::1] pr = np.ascontiguousarray(pref, dtype=np.float64)
    cdef const double[:, ::1] su = np.ascontiguousarray(suf, dtype=np.float64)
    cdef const double[::1] ks = np.ascontiguousarray(slopes, dtype=np.float64)
    cdef Py_ssize_t q = lo_.shape[0], n = px.shape[0], s, i, pos
    cdef double best, v, x
    out = np.empty(q, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for s in range(q):
            best = INFINITY
            if hi_[s] >= lo_[s]:
                pos = _upper_bound(px, gx[lo_[s]])
                for i in range(lo_[s], hi_[s] + 1):
                    # max(env, J) >= J, so nodes with J >= best cannot win
                    if ng[i] < nb[s] or jg[i] >= best:
                        continue
                    x = gx[i]
                    while pos < n and px[pos] <= x:
                        pos += 1
                    v = _env(x, pos, pr, su, ks, n)
                    if jg[i] > v:
                        v = jg[i]
                    if v < best:
                        best = v
            o[s] = best
    return out
