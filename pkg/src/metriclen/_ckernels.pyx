# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Kind codes and semantics mirror ``_fallback``."""

import numpy as np

from libc.math cimport atan2, fabs, pow, sin, sqrt

NAME = "cython"

cdef enum:
    EUCLIDEAN = 0
    PNORM = 1
    SUP = 2
    DISCRETE = 3
    SPHERICAL = 4


cdef double _scaled(const double[:, ::1] a, Py_ssize_t i,
                    const double[:, ::1] b, Py_ssize_t j, double p) noexcept nogil:
    cdef Py_ssize_t k, n = a.shape[1]
    cdef double s = 0.0, m = 0.0, d
    for k in range(n):
        d = fabs(a[i, k] - b[j, k])
        if d > m:
            m = d
    if m == 0.0:
        return 0.0
    for k in range(n):
        s += pow(fabs(a[i, k] - b[j, k]) / m, p)
    return m * pow(s, 1.0 / p)


cdef inline double _dist(const double[:, ::1] a, Py_ssize_t i,
                         const double[:, ::1] b, Py_ssize_t j,
                         int kind, double p) noexcept nogil:
    cdef Py_ssize_t k, n = a.shape[1]
    cdef double s = 0.0, t = 0.0, m = 0.0, d
    if kind == EUCLIDEAN:
        for k in range(n):
            d = a[i, k] - b[j, k]
            s += d * d
        if s < 1e-280 or s > 1e280:
            # squares under/overflow or go subnormal
            return _scaled(a, i, b, j, 2.0)
        return sqrt(s)
    elif kind == SUP:
        for k in range(n):
            d = fabs(a[i, k] - b[j, k])
            if d > m:
                m = d
        return m
    elif kind == PNORM:
        return _scaled(a, i, b, j, p)
    elif kind == DISCRETE:
        for k in range(n):
            if a[i, k] != b[j, k]:
                return 1.0
        return 0.0
    else:
        for k in range(n):
            d = a[i, k] - b[j, k]
            s += d * d
            d = a[i, k] + b[j, k]
            t += d * d
        return 2.0 * atan2(sqrt(s), sqrt(t))


def chord_lengths(const double[:, ::1] pts, int kind, double p=2.0):
    cdef Py_ssize_t i, m = pts.shape[0]
    out = np.zeros(max(m - 1, 0))
    cdef double[::1] o = out
    with nogil:
        for i in range(m - 1):
            o[i] = _dist(pts, i, pts, i + 1, kind, p)
    return out


def chord_sum(const double[:, ::1] pts, int kind, double p=2.0):
    cdef Py_ssize_t i, m = pts.shape[0]
    cdef double total = 0.0
    with nogil:
        for i in range(m - 1):
            total += _dist(pts, i, pts, i + 1, kind, p)
    return total


def row_distances(const double[:, ::1] a, const double[:, ::1] b, int kind, double p=2.0):
    cdef Py_ssize_t i, m = a.shape[0]
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            o[i] = _dist(a, i, b, i, kind, p)
    return out


def pairwise_max(const double[:, ::1] pts, int kind, double p=2.0):
    cdef Py_ssize_t i, j, m = pts.shape[0]
    cdef Py_ssize_t bi = 0, bj = 0
    cdef double best = 0.0, d
    with nogil:
        for i in range(m):
            for j in range(i + 1, m):
                d = _dist(pts, i, pts, j, kind, p)
                if d > best:
                    best = d
                    bi = i
                    bj = j
    return best, bi, bj


def relax_half(double[:, ::1] pts, int parity, bint sphere):
    cdef Py_ssize_t i, k, m = pts.shape[0], n = pts.shape[1]
    cdef double s
    with nogil:
        i = 2 if parity == 0 else 1
        while i < m - 1:
            s = 0.0
            for k in range(n):
                pts[i, k] = 0.5 * (pts[i - 1, k] + pts[i + 1, k])
                s += pts[i, k] * pts[i, k]
            if sphere and s > 0.0:
                s = sqrt(s)
                for k in range(n):
                    pts[i, k] /= s
            i += 2


def respace(const double[:, ::1] pts, const double[::1] seglens, bint sphere):
    cdef Py_ssize_t m = pts.shape[0], n = pts.shape[1]
    cdef Py_ssize_t i, j = 0, k
    cdef double total = 0.0, target, f, th, sth, wa, wb, s, cum = 0.0
    out = np.array(pts, copy=True)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(m - 1):
            total += seglens[i]
        for i in range(1, m - 1):
            target = total * i / (m - 1)
            while j < m - 2 and cum + seglens[j] <= target:
                cum += seglens[j]
                j += 1
            if seglens[j] > 0.0:
                f = (target - cum) / seglens[j]
                if f < 0.0:
                    f = 0.0
                elif f > 1.0:
                    f = 1.0
            else:
                f = 0.0
            th = seglens[j]
            if sphere and th > 1e-8:
                sth = sin(th)
                wa = sin((1.0 - f) * th) / sth
                wb = sin(f * th) / sth
            else:
                wa = 1.0 - f
                wb = f
            s = 0.0
            for k in range(n):
                o[i, k] = wa * pts[j, k] + wb * pts[j + 1, k]
                s += o[i, k] * o[i, k]
            if sphere and s > 0.0:
                s = sqrt(s)
                for k in range(n):
                    o[i, k] /= s
    return out
