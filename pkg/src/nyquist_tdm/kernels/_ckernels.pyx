# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; signatures mirror ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, tgamma

cnp.import_array()


def lfsr_fill(unsigned long long state, unsigned long long mask, Py_ssize_t count):
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.empty(count, dtype=np.uint8)
    cdef cnp.uint8_t[::1] ov = out
    cdef unsigned long long s = state
    cdef unsigned long long b
    cdef Py_ssize_t i
    for i in range(count):
        b = s & 1
        ov[i] = <cnp.uint8_t>b
        s >>= 1
        if b:
            s ^= mask
    return out, int(s)


def frac_integral_uniform(f, double h, double beta):
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t n_pts = fv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_pts)
    cdef double[::1] ov = out
    if n_pts < 2:
        return out
    cdef double b1 = beta + 1.0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kp_arr = np.empty(n_pts + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_arr = np.empty(n_pts)
    cdef double[::1] kp = kp_arr
    cdef double[::1] a = a_arr
    cdef Py_ssize_t i, n, j
    for i in range(n_pts + 1):
        kp[i] = pow(<double>i, b1)
    a[0] = 1.0
    for i in range(1, n_pts):
        a[i] = kp[i + 1] - 2.0 * kp[i] + kp[i - 1]
    cdef double scale = pow(h, beta) / tgamma(beta + 2.0)
    cdef double acc
    for n in range(1, n_pts):
        acc = (kp[n - 1] - (n - 1.0 - beta) * pow(<double>n, beta)) * fv[0]
        for j in range(1, n + 1):
            acc += a[n - j] * fv[j]
        ov[n] = scale * acc
    return out


def frame_statistics(bits, templates, noise, weights):
    cdef const cnp.uint8_t[:, ::1] bv = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef const double[:, ::1] nv = np.ascontiguousarray(noise, dtype=np.float64)
    cdef const double[:, ::1] wv = np.ascontiguousarray(weights, dtype=np.float64)
    # the link is linear: project templates once, then only the noise per frame
    proj = np.ascontiguousarray(
        np.asarray(templates, dtype=np.float64) @ np.asarray(weights, dtype=np.float64).T
    )
    cdef const double[:, ::1] pv = proj
    cdef Py_ssize_t n_frames = bv.shape[0]
    cdef Py_ssize_t n_br = bv.shape[1]
    cdef Py_ssize_t n_w = wv.shape[0]
    cdef Py_ssize_t n_s = wv.shape[1]
    # nonzero taps per weight row (a sampling receiver has one or two)
    cdef cnp.ndarray[cnp.intp_t, ndim=2] idx_arr = np.zeros((n_w, n_s), dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] cnt_arr = np.zeros(n_w, dtype=np.intp)
    cdef cnp.intp_t[:, ::1] idx = idx_arr
    cdef cnp.intp_t[::1] cnt = cnt_arr
    cdef Py_ssize_t f, s, k, m
    for k in range(n_w):
        for s in range(n_s):
            if wv[k, s] != 0.0:
                idx[k, cnt[k]] = s
                cnt[k] += 1
    for k in range(n_w):
        if cnt[k] * 4 >= n_s:
            # dense taps (matched filter): BLAS beats any scalar loop
            out_dense = np.asarray(bits, dtype=np.float64) @ proj
            out_dense += np.asarray(nv) @ np.asarray(wv).T
            return out_dense
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n_frames, n_w))
    cdef double[:, ::1] ov = out
    cdef double b
    for f in range(n_frames):
        # random bits defeat branch prediction; multiply instead of testing
        for m in range(n_br):
            b = <double>bv[f, m]
            for k in range(n_w):
                ov[f, k] += b * pv[m, k]
        for k in range(n_w):
            for m in range(cnt[k]):
                s = idx[k, m]
                ov[f, k] += nv[f, s] * wv[k, s]
    return out
