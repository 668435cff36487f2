# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels (real float64 only).

Mirrors :mod:`deltagreen._pykernels`; see there for the algorithms.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, cos, floor, ceil, fabs, M_PI

cnp.import_array()

NAME = "cython"

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double K0_STEP = 0.2
cdef int K0_NODES = 34


cdef double _i0_series(double z) nogil:
    cdef double q = 0.25 * z * z
    cdef double term = 1.0, total = 1.0
    cdef int k
    for k in range(1, 200):
        term = term * q / (k * k)
        total += term
        if term <= 1e-17 * total:
            break
    return total


cdef double _i0_trap(double z) nogil:
    cdef int n = <int>sqrt(80.0 * z) + 16
    cdef int j
    cdef double s = 0.0
    for j in range(n):
        s += exp(-z * (1.0 - cos(2.0 * M_PI * j / n)))
    return exp(z) * s / n


cdef double _i0(double z) nogil:
    z = fabs(z)
    if z <= 15.0:
        return _i0_series(z)
    return _i0_trap(z)


cdef double _k0(double z) nogil:
    cdef double q, term, i0, acc, harmonic, w2, s
    cdef int k
    if z <= 2.0:
        q = 0.25 * z * z
        term = 1.0
        i0 = 1.0
        acc = 0.0
        harmonic = 0.0
        for k in range(1, 60):
            term = term * q / (k * k)
            harmonic += 1.0 / k
            i0 += term
            acc += term * harmonic
            if term * harmonic <= 1e-18 * i0:
                break
        return -(log(0.5 * z) + EULER_GAMMA) * i0 + acc
    if z >= 740.0:
        return 0.0
    s = 0.5
    for k in range(1, K0_NODES):
        w2 = (k * K0_STEP) * (k * K0_STEP)
        s += exp(-w2) / sqrt(1.0 + w2 / (2.0 * z))
    return sqrt(2.0 / z) * exp(-z) * K0_STEP * s


def i0(z):
    cdef cnp.ndarray[double, ndim=1] zf = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty(zf.shape[0])
    cdef Py_ssize_t i
    with nogil:
        for i in range(zf.shape[0]):
            out[i] = _i0(zf[i])
    return out.reshape(np.shape(z))


def k0(z):
    cdef cnp.ndarray[double, ndim=1] zf = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty(zf.shape[0])
    cdef Py_ssize_t i
    with nogil:
        for i in range(zf.shape[0]):
            out[i] = _k0(zf[i])
    return out.reshape(np.shape(z))


def border(const double[:, ::1] W, const double[::1] u, double scale):
    cdef Py_ssize_t n = W.shape[0], i, j
    out_arr = np.empty((n + 1, n + 1))
    cdef double[:, ::1] out = out_arr
    cdef double su
    with nogil:
        for i in range(n):
            su = scale * u[i]
            for j in range(n):
                out[i, j] = W[i, j] + su * u[j]
            out[i, n] = su
            out[n, i] = su
        out[n, n] = scale
    return out_arr


def legendre_table(x, int lmax):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t m = xv.shape[0], i
    cdef int l
    out_arr = np.empty((m, lmax + 1))
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(m):
            out[i, 0] = 1.0
            if lmax >= 1:
                out[i, 1] = xv[i]
            for l in range(1, lmax):
                out[i, l + 1] = ((2 * l + 1) * xv[i] * out[i, l] - l * out[i, l - 1]) / (l + 1)
    return out_arr


cdef double _theta_one(double d, double t, double L, bint subtract_mean) nogil:
    cdef int n_img, n_four, n, k
    cdef double s = 0.0, x, w
    d = d - L * floor(d / L + 0.5)
    n_img = <int>ceil(sqrt(160.0 * t) / L) + 2
    n_four = <int>ceil(L * sqrt(40.0 / t) / (2.0 * M_PI)) + 2
    if n_img <= n_four:
        for n in range(-n_img, n_img + 1):
            x = d + n * L
            s += exp(-x * x / (4.0 * t))
        s /= sqrt(4.0 * M_PI * t)
        return s - 1.0 / L if subtract_mean else s
    for k in range(1, n_four + 1):
        w = 2.0 * M_PI * k / L
        s += exp(-w * w * t) * cos(w * d)
    s = 2.0 * s / L
    return s if subtract_mean else s + 1.0 / L


def periodic_heat_1d(d, t, double L, bint subtract_mean):
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64).ravel()
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64).ravel()
    cdef Py_ssize_t m = dv.shape[0], i
    out_arr = np.empty(m)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(m):
            out[i] = _theta_one(dv[i], tv[i], L, subtract_mean)
    return out_arr
