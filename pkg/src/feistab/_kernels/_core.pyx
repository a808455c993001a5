# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_pyref``; see that module for the semantics."""

from libc.math cimport pow as c_pow
from libc.math cimport sqrt as c_sqrt
from libc.stdint cimport uint64_t
from libc.string cimport memcpy

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF TO_UNIT = 1.0 / 9007199254740992.0  # 2 ** -53


cdef inline uint64_t _splitmix64(uint64_t x) nogil:
    x = x + <uint64_t> 0x9E3779B97F4A7C15ULL
    x = (x ^ (x >> 30)) * <uint64_t> 0xBF58476D1CE4E5B9ULL
    x = (x ^ (x >> 27)) * <uint64_t> 0x94D049BB133111EBULL
    return x ^ (x >> 31)


cdef inline uint64_t _dbits(double v) nogil:
    cdef double w = v + 0.0  # normalize -0.0
    cdef uint64_t u
    memcpy(&u, &w, 8)
    return u


cdef inline double _atom_pow(double t, double alpha) nogil:
    # fast paths for the common exponents, matching numpy's pow loop
    if alpha == 2.0:
        return t * t
    if alpha == 1.0:
        return t
    if alpha == 0.5:
        return c_sqrt(t)
    if alpha == 3.0:
        return t * t * t
    return c_pow(t, alpha)


def mult_eval(const signed char[::1] kinds, const double[::1] alphas,
              const double[:, ::1] pts):
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t k = pts.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            acc = 1.0
            for j in range(k):
                if kinds[j] == 0:
                    acc *= _atom_pow(pts[i, j], alphas[j])
                elif kinds[j] == 2:
                    acc = 0.0
                    break
            out[i] = acc
    return out_arr


def noise_eval(seed, int kind, double amplitude, const double[:, ::1] keys):
    cdef Py_ssize_t n = keys.shape[0]
    cdef Py_ssize_t m = keys.shape[1]
    cdef Py_ssize_t i, j
    cdef uint64_t s = <uint64_t> (<unsigned long long> (int(seed) & 0xFFFFFFFFFFFFFFFF))
    cdef uint64_t h
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            h = s
            for j in range(m):
                h = _splitmix64(h ^ _dbits(keys[i, j]))
            if kind == 1:
                out[i] = amplitude if (h & 1) else -amplitude
            else:
                out[i] = amplitude * (2.0 * ((h >> 11) * TO_UNIT) - 1.0)
    return out_arr
