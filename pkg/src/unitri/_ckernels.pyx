# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-draw kernels; same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, atan, sin, NAN, M_PI
from scipy.special.cython_special cimport ndtri

cnp.import_array()

cdef double HALF_LN2 = 0.34657359027997264
cdef double SQRT3 = 1.7320508075688772
cdef double ISO_C_OVER_R = 2.0 / 3.0 ** 0.25
cdef double DEGENERATE_RTOL = 1e-15


cdef inline double _heron(double a, double b, double c) noexcept nogil:
    cdef double x, y, z, t, gap, tol
    x = a; y = b; z = c
    if x < y:
        t = x; x = y; y = t
    if y < z:
        t = y; y = z; z = t
    if x < y:
        t = x; x = y; y = t
    gap = z - (x - y)
    tol = DEGENERATE_RTOL * (x + y + z)
    if gap < -tol:
        return NAN
    if gap <= tol:
        return 0.0
    return 0.25 * sqrt((x + (y + z)) * gap * (z + (x - y)) * (x + (y - z)))


cdef inline double _c_from_ab(double a, double b, bint plus) noexcept nogil:
    cdef double ab = a * b
    cdef double q = (ab - 2.0) * (ab + 2.0)
    cdef double root = sqrt(q) if q > 0.0 else 0.0
    cdef double d
    if plus:
        return sqrt(a * a + b * b + 2.0 * root)
    d = a - b
    return sqrt(d * d + 8.0 / (ab + root))


def heron(a, b, c):
    a, b, c = np.broadcast_arrays(np.asarray(a, dtype=np.float64),
                                  np.asarray(b, dtype=np.float64),
                                  np.asarray(c, dtype=np.float64))
    shape = a.shape
    cdef double[::1] av = np.ascontiguousarray(a).ravel()
    cdef double[::1] bv = np.ascontiguousarray(b).ravel()
    cdef double[::1] cv = np.ascontiguousarray(c).ravel()
    out = np.empty(av.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(av.shape[0]):
            ov[i] = _heron(av[i], bv[i], cv[i])
    return out.reshape(shape)


def right(const double[::1] u, double mu, double sigma):
    cdef Py_ssize_t n = u.shape[0], i
    a = np.empty(n); b = np.empty(n); c = np.empty(n); alpha = np.empty(n)
    cdef double[::1] av = a, bv = b, cv = c, alv = alpha
    cdef double x, y
    with nogil:
        for i in range(n):
            x = exp(mu + sigma * ndtri(u[i]))
            y = 2.0 / x
            av[i] = x
            bv[i] = y
            cv[i] = sqrt(x * x + y * y)
            alv[i] = atan(x / y)
    return a, b, c, alpha


def isosceles(const double[::1] u, double mu, double sigma):
    cdef Py_ssize_t n = u.shape[0], i
    r = np.empty(n); a = np.empty(n); b = np.empty(n); c = np.empty(n)
    cdef double[::1] rv = r, av = a, bv = b, cv = c
    cdef double x, x2
    with nogil:
        for i in range(n):
            x = exp(mu + sigma * ndtri(u[i]))
            x2 = x * x
            rv[i] = x
            av[i] = sqrt(x2 / SQRT3 + SQRT3 / x2)
            bv[i] = av[i]
            cv[i] = x * ISO_C_OVER_R
    return r, a, b, c


def c_from_ab(a, b, plus):
    a, b, plus = np.broadcast_arrays(np.asarray(a, dtype=np.float64),
                                     np.asarray(b, dtype=np.float64),
                                     np.asarray(plus, dtype=np.uint8))
    shape = a.shape
    cdef double[::1] av = np.ascontiguousarray(a).ravel()
    cdef double[::1] bv = np.ascontiguousarray(b).ravel()
    cdef const unsigned char[::1] pv = np.ascontiguousarray(plus).ravel()
    out = np.empty(av.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(av.shape[0]):
            ov[i] = _c_from_ab(av[i], bv[i], pv[i])
    return out.reshape(shape)


def arbitrary(const double[:, ::1] uvw, double sigma):
    cdef Py_ssize_t n = uvw.shape[0], i
    a = np.empty(n); b = np.empty(n); c = np.empty(n)
    branch = np.empty(n, dtype=np.int8)
    folded = np.empty(n, dtype=np.bool_)
    cdef double[::1] av = a, bv = b, cv = c
    cdef signed char[::1] brv = branch
    cdef cnp.npy_bool[::1] fv = folded
    cdef double u, v, t
    cdef bint plus
    with nogil:
        for i in range(n):
            u = sigma * ndtri(uvw[i, 0])
            v = sigma * ndtri(uvw[i, 1])
            fv[i] = (u + v) < 0.0
            if fv[i]:
                t = u
                u = -v
                v = -t
            av[i] = exp(u + HALF_LN2)
            bv[i] = exp(v + HALF_LN2)
            plus = uvw[i, 2] >= 0.5
            brv[i] = 1 if plus else -1
            cv[i] = _c_from_ab(av[i], bv[i], plus)
    return a, b, c, branch, folded


def stick_twice(const double[:, ::1] uv):
    cdef Py_ssize_t n = uv.shape[0], i
    area = np.empty(n)
    cdef double[::1] arv = area
    cdef double lo, hi, s
    with nogil:
        for i in range(n):
            lo = uv[i, 0]
            hi = uv[i, 1]
            if lo > hi:
                lo, hi = hi, lo
            s = _heron(sqrt(lo), sqrt(hi - lo), sqrt(1.0 - hi))
            arv[i] = s if s > 0.0 else NAN
    return area


def stick_once(const double[:, ::1] uv):
    cdef Py_ssize_t n = uv.shape[0], i
    area = np.empty(n)
    cdef double[::1] arv = area
    cdef double cut
    with nogil:
        for i in range(n):
            cut = uv[i, 0]
            arv[i] = 0.5 * sqrt(cut) * sqrt(1.0 - cut) * sin(M_PI * uv[i, 1])
    return area
