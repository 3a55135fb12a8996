# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-grid kernels. Same contract as ``_pykernels``."""

import numpy as np

from libc.math cimport cos, exp, fabs, hypot, lgamma, log, sin, sqrt, INFINITY

cdef double LOG_CAP = log(1e300)
cdef int SERIES_TERMS = 96


cdef inline double complex cexp_(double complex z) nogil:
    cdef double r = exp(z.real)
    return r * cos(z.imag) + 1j * (r * sin(z.imag))


cdef inline double cabs_(double complex z) nogil:
    return hypot(z.real, z.imag)


cdef double _coef_max(const double complex[:, :, ::1] orbits, Py_ssize_t j, Py_ssize_t k) nogil:
    cdef double best = 0.0, a
    cdef Py_ssize_t i
    for i in range(orbits.shape[2]):
        a = cabs_(orbits[j, k, i])
        if a > best:
            best = a
    return best


def trajectory_grid(const double complex[::1] lams,
                    const double complex[:, :, ::1] orbits,
                    const long long[::1] orders,
                    const double[::1] times):
    cdef Py_ssize_t T = times.shape[0], m = lams.shape[0], n = orbits.shape[2]
    Y = np.zeros((T, n), dtype=complex)
    flags = np.zeros(T, dtype=bool)
    cdef double complex[:, ::1] Yv = Y
    cdef unsigned char[::1] fv = flags.view(np.uint8)
    cdef double[:, ::1] cmax = np.zeros((m, max(1, orbits.shape[1])))
    cdef Py_ssize_t a, j, k, i
    cdef double t, logt, tk, lf
    cdef double complex g, w
    for j in range(m):
        for k in range(orders[j]):
            cmax[j, k] = _coef_max(orbits, j, k)
    with nogil:
        for a in range(T):
            t = times[a]
            logt = log(t) if t > 0 else -INFINITY
            for j in range(m):
                g = cexp_(t * lams[j])
                tk = 1.0
                lf = 0.0
                for k in range(orders[j]):
                    if k > 0:
                        tk = tk * t / k
                        lf = lf + log(<double>k)
                    if cmax[j, k] == 0.0:
                        continue
                    if t * lams[j].real + k * logt - lf + log(cmax[j, k]) > LOG_CAP:
                        fv[a] = 1
                        continue
                    w = g * tk
                    for i in range(n):
                        Yv[a, i] = Yv[a, i] + w * orbits[j, k, i]
            if fv[a]:
                for i in range(n):
                    Yv[a, i] = INFINITY
    return Y, flags


cdef double complex _series(double complex z, int k) nogil:
    # sum_n z^n / (n! (n+k+1)) / k!, stopped once terms fall below double precision
    cdef double tr = 1.0, ti = 0.0, sr = 0.0, si = 0.0, zr = z.real, zi = z.imag, inv, nr
    cdef int n
    cdef double kfact = exp(lgamma(k + 1.0))
    for n in range(SERIES_TERMS):
        inv = 1.0 / (n + k + 1)
        sr = sr + tr * inv
        si = si + ti * inv
        if fabs(tr) + fabs(ti) < 1e-18 * (fabs(sr) + fabs(si)):
            break
        inv = 1.0 / (n + 1)
        nr = (tr * zr - ti * zi) * inv
        ti = (tr * zi + ti * zr) * inv
        tr = nr
    return (sr + 1j * si) / kfact


def cesaro_grid(const double complex[::1] lams,
                const double complex[:, :, ::1] orbits,
                const long long[::1] orders,
                const double[::1] times):
    cdef Py_ssize_t T = times.shape[0], m = lams.shape[0], n = orbits.shape[2]
    M = np.zeros((T, n), dtype=complex)
    flags = np.zeros(T, dtype=bool)
    cdef double complex[:, ::1] Mv = M
    cdef unsigned char[::1] fv = flags.view(np.uint8)
    cdef double[:, ::1] cmax = np.zeros((m, max(1, orbits.shape[1])))
    cdef Py_ssize_t a, j, k, i
    cdef double t, logt, tk, lf, absz, kfact
    cdef double complex z, ez, F, Fk, w
    for j in range(m):
        for k in range(orders[j]):
            cmax[j, k] = _coef_max(orbits, j, k)
    with nogil:
        for a in range(T):
            t = times[a]
            logt = log(t)
            for j in range(m):
                z = t * lams[j]
                absz = cabs_(z)
                ez = cexp_(z)
                F = (ez - 1.0) / z if absz > 0 else 1.0
                tk = 1.0
                lf = 0.0
                kfact = 1.0
                for k in range(orders[j]):
                    if k > 0:
                        tk = tk * t
                        kfact = kfact * k
                        lf = lf + log(<double>k)
                        if absz > 0:
                            F = (ez / kfact - F) / z
                    if cmax[j, k] == 0.0:
                        continue
                    if t * lams[j].real + k * logt - lf + log(cmax[j, k]) > LOG_CAP:
                        fv[a] = 1
                        continue
                    if absz <= 2.0 + 0.5 * k:
                        Fk = _series(z, <int>k)
                    else:
                        Fk = F
                    w = tk * Fk
                    for i in range(n):
                        Mv[a, i] = Mv[a, i] + w * orbits[j, k, i]
            if fv[a]:
                for i in range(n):
                    Mv[a, i] = INFINITY
    return M, flags
