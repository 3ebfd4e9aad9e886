# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, tan, M_PI, isfinite
from numpy.random cimport bitgen_t
from scipy.special.cython_special cimport ndtri

cdef enum:
    GAUSS = 0
    CAUCHY = 1
    UNIFORM = 2

cdef struct Desc:
    int kind
    double loc
    double scale
    double norm
    double lo
    double hi


cdef Desc _unpack(tuple d):
    cdef Desc out
    out.kind = d[0]
    out.loc = d[1]
    out.scale = d[2]
    out.norm = d[3]
    out.lo = d[4]
    out.hi = d[5]
    return out


cdef inline double _density(double x, Desc* d) noexcept nogil:
    cdef double z = (x - d.loc) / d.scale
    if d.kind == GAUSS:
        return d.norm * exp(-0.5 * z * z)
    if d.kind == CAUCHY:
        return d.norm / (1.0 + z * z)
    if 0.0 <= z <= 1.0:
        return d.norm
    return 0.0


cdef inline double _draw(double v, Desc* d) noexcept nogil:
    if d.kind == GAUSS:
        return d.loc + d.scale * ndtri(d.lo + (d.hi - d.lo) * v)
    if d.kind == CAUCHY:
        return d.loc + d.scale * tan(M_PI * (v - 0.5))
    return d.loc + d.scale * v


cdef inline double _poly(double t, const double[::1] coeffs) noexcept nogil:
    cdef Py_ssize_t k
    cdef double q = 0.0
    for k in range(coeffs.shape[0] - 1, -1, -1):
        q = q * t + coeffs[k]
    return q


def rational_pdf(const double[::1] u, tuple ref, const double[::1] coeffs,
                 double center, double scale):
    cdef Desc d = _unpack(ref)
    cdef Py_ssize_t i, n = u.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _density(u[i], &d) / _poly((u[i] - center) / scale, coeffs)
    return out


def rejection_sample(list bitgens, tuple ref, const double[::1] coeffs,
                     double center, double scale, double lo, double hi,
                     tuple cand, double c, long max_rejections):
    cdef Desc dr = _unpack(ref)
    cdef Desc dc = _unpack(cand)
    cdef Py_ssize_t i, n = len(bitgens)
    cdef long k
    cdef int accepted
    cdef double r, x, g
    cdef bitgen_t* rng
    samples = np.empty(n)
    trials = np.zeros(n, dtype=np.int64)
    cdef double[::1] s = samples
    cdef long long[::1] tr = trials
    for i in range(n):
        bg = bitgens[i]
        rng = <bitgen_t*> PyCapsule_GetPointer(bg.capsule, "BitGenerator")
        k = 0
        accepted = 0
        with bg.lock, nogil:
            while k < max_rejections:
                k += 1
                r = rng.next_double(rng.state)
                x = _draw(rng.next_double(rng.state), &dc)
                if not (lo <= x <= hi):
                    continue
                g = _density(x, &dc)
                if g <= 0.0 or not isfinite(x):
                    continue
                if r <= (_density(x, &dr) / _poly((x - center) / scale, coeffs)) / (c * g):
                    accepted = 1
                    break
        if not accepted:
            return samples[:i], trials[:i], i
        s[i] = x
        tr[i] = k
    return samples, trials, n
