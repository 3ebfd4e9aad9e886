"""Pure-Python reference implementation of the kernels in ``_ckernels.pyx``."""
import math

import numpy as np
from scipy.special import ndtri

GAUSS, CAUCHY, UNIFORM = 0, 1, 2


def rational_pdf(u, ref, coeffs, center, scale):
    kind, loc, rscale, norm, _, _ = ref
    z = (u - loc) / rscale
    if kind == GAUSS:
        r = norm * np.exp(-0.5 * z * z)
    elif kind == CAUCHY:
        r = norm / (1.0 + z * z)
    else:
        r = np.where((z >= 0.0) & (z <= 1.0), norm, 0.0)
    t = (u - center) / scale
    q = np.zeros_like(u)
    for c in coeffs[::-1]:
        q = q * t + c
    return r / q


def _density(x, desc):
    kind, loc, scale, norm, _, _ = desc
    z = (x - loc) / scale
    if kind == GAUSS:
        return norm * math.exp(-0.5 * z * z)
    if kind == CAUCHY:
        return norm / (1.0 + z * z)
    return norm if 0.0 <= z <= 1.0 else 0.0


def _draw(v, desc):
    kind, loc, scale, _, lo, hi = desc
    if kind == GAUSS:
        return loc + scale * float(ndtri(lo + (hi - lo) * v))
    if kind == CAUCHY:
        return loc + scale * math.tan(math.pi * (v - 0.5))
    return loc + scale * v


def _target(x, ref, coeffs, center, scale):
    t = (x - center) / scale
    q = 0.0
    for c in coeffs[::-1]:
        q = q * t + c
    return _density(x, ref) / q


def rejection_sample(bitgens, ref, coeffs, center, scale, lo, hi, cand, c, max_rejections):
    coeffs = [float(v) for v in coeffs]
    n = len(bitgens)
    samples = np.empty(n)
    trials = np.zeros(n, dtype=np.int64)
    for i, bg in enumerate(bitgens):
        gen = np.random.Generator(bg)
        k = 0
        while True:
            if k >= max_rejections:
                return samples[:i], trials[:i], i
            k += 1
            r = gen.random()
            x = _draw(gen.random(), cand)
            if not (lo <= x <= hi):
                continue
            g = _density(x, cand)
            if g <= 0.0 or not math.isfinite(x):
                continue
            if r <= _target(x, ref, coeffs, center, scale) / (c * g):
                break
        samples[i] = x
        trials[i] = k
    return samples, trials, n
