# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sparse gate kernels.

Same contract as ``_kernels_py``; see that module for the batch layout.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef double complex c128


def swap_digits(const i64[::1] keys, i64 si, i64 sj, i64 d, bint keep_vacuum=True):
    cdef Py_ssize_t n = keys.shape[0]
    cdef Py_ssize_t t
    cdef i64 k, di, dj
    cdef bint hit
    out = np.empty(n, dtype=np.int64)
    mask = np.zeros(n, dtype=np.uint8)
    cdef i64[::1] o = out
    cdef unsigned char[::1] m = mask
    for t in range(n):
        k = keys[t]
        di = (k // si) % d
        dj = (k // sj) % d
        if keep_vacuum:
            hit = di > 0 and dj > 0
        else:
            hit = di != dj
        if hit:
            o[t] = k + (dj - di) * (si - sj)
            m[t] = 1
        else:
            o[t] = k
    return out, mask.view(np.bool_)


def apply_phase(const i64[::1] keys, const c128[::1] amps, i64 s, i64 d, const c128[::1] phases):
    cdef Py_ssize_t n = keys.shape[0]
    cdef Py_ssize_t t
    out = np.empty(n, dtype=np.complex128)
    cdef c128[::1] o = out
    for t in range(n):
        o[t] = amps[t] * phases[(keys[t] // s) % d]
    return out


def coalesce(keys, amps):
    """Sort by key, sum duplicates in input order, drop exact zeros."""
    cdef Py_ssize_t n = keys.shape[0]
    if n == 0:
        return keys, amps
    order_arr = np.argsort(keys, kind="stable")
    cdef const i64[::1] k = keys
    cdef const c128[::1] a = amps
    cdef const cnp.intp_t[::1] order = order_arr
    uk_arr = np.empty(n, dtype=np.int64)
    ua_arr = np.empty(n, dtype=np.complex128)
    cdef i64[::1] uk = uk_arr
    cdef c128[::1] ua = ua_arr
    cdef Py_ssize_t t, w = 0
    cdef i64 cur = k[order[0]]
    cdef c128 acc = a[order[0]]
    for t in range(1, n):
        if k[order[t]] == cur:
            acc = acc + a[order[t]]
        else:
            if acc != 0:
                uk[w] = cur
                ua[w] = acc
                w += 1
            cur = k[order[t]]
            acc = a[order[t]]
    if acc != 0:
        uk[w] = cur
        ua[w] = acc
        w += 1
    return uk_arr[:w].copy(), ua_arr[:w].copy()


def apply_power_swap(const i64[::1] keys, const c128[::1] amps, i64 si, i64 sj, i64 d,
                     c128 alpha, c128 beta, bint keep_vacuum=True):
    cdef Py_ssize_t n = keys.shape[0]
    cdef Py_ssize_t t, extra = 0
    cdef i64 k, di, dj
    cdef bint hit
    new_keys = np.empty(2 * n, dtype=np.int64)
    new_amps = np.empty(2 * n, dtype=np.complex128)
    cdef i64[::1] nk = new_keys
    cdef c128[::1] na = new_amps
    # unswapped copies first, swapped branches appended in input order, which
    # matches the concatenation order of the numpy kernel
    for t in range(n):
        k = keys[t]
        di = (k // si) % d
        dj = (k // sj) % d
        nk[t] = k
        if keep_vacuum:
            hit = di > 0 and dj > 0
        else:
            hit = di != dj
        if hit:
            na[t] = alpha * amps[t]
            nk[n + extra] = k + (dj - di) * (si - sj)
            na[n + extra] = beta * amps[t]
            extra += 1
        else:
            na[t] = amps[t]
    return coalesce(new_keys[:n + extra], new_amps[:n + extra])
