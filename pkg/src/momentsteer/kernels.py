"""Hot-loop kernels with a compiled backend and a pure-Python fallback.

The compiled extension ``_ckernels`` is used when it imports; setting
``MOMENTSTEER_PURE_PYTHON=1`` forces the fallback in ``_pykernels``. Both
backends draw from the same numpy bit generators in the same order and use
the C library's ``exp``/``tan`` so their samples agree bit for bit.

Densities cross into the kernels as a flat descriptor
``(kind, loc, scale, norm, cdf_lo, cdf_hi)``:

- ``GAUSS``: ``norm * exp(-z^2/2)``; sampled by inverse CDF restricted to
  ``[cdf_lo, cdf_hi]`` (this covers truncated Gaussians),
- ``CAUCHY``: ``norm / (1 + z^2)``,
- ``UNIFORM``: constant ``norm`` on ``[loc, loc + scale]``.
"""
from __future__ import annotations

import math
import os

import numpy as np
from scipy import special

from . import _pykernels

GAUSS, CAUCHY, UNIFORM = 0, 1, 2

_force_python = os.environ.get("MOMENTSTEER_PURE_PYTHON", "") not in ("", "0")
try:
    if _force_python:
        raise ImportError("pure-Python backend requested")
    from . import _ckernels as _backend
    BACKEND = "cython"
except ImportError:
    _backend = _pykernels
    BACKEND = "python"


def backends():
    """Every importable backend, keyed by name (used by tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def descriptor(spec):
    """Flatten a reference/candidate :class:`DensitySpec` for the kernels."""
    p = spec.params
    fam = spec.family
    if fam == "gaussian":
        return (GAUSS, p["mu"], p["sigma"], 1.0 / (p["sigma"] * math.sqrt(2 * math.pi)), 0.0, 1.0)
    if fam == "truncated_gaussian":
        a, b = spec.support
        lo = float(special.ndtr((a - p["mu"]) / p["sigma"]))
        hi = float(special.ndtr((b - p["mu"]) / p["sigma"]))
        norm = 1.0 / (p["sigma"] * math.sqrt(2 * math.pi) * (hi - lo))
        return (GAUSS, p["mu"], p["sigma"], norm, lo, hi)
    if fam == "cauchy":
        return (CAUCHY, p["loc"], p["scale"], 1.0 / (math.pi * p["scale"]), 0.0, 1.0)
    if fam == "uniform":
        a, b = spec.support
        return (UNIFORM, a, b - a, 1.0 / (b - a), 0.0, 1.0)
    raise ValueError(f"family {fam!r} is not supported by the kernels")


def rational_pdf(u, reference, coeffs_t, center, scale, backend=None):
    """``r(u) / q((u - center)/scale)`` on an array of points."""
    be = _backend if backend is None else backend
    u = np.ascontiguousarray(u, dtype=float)
    flat = u.ravel()
    out = be.rational_pdf(flat, descriptor(reference),
                          np.ascontiguousarray(coeffs_t, dtype=float), float(center), float(scale))
    return np.asarray(out).reshape(u.shape)


def rejection_sample(bitgens, target, candidate, c, max_rejections, backend=None):
    """Acceptance-rejection draws, one per bit generator.

    Parameters
    ----------
    bitgens : sequence of numpy BitGenerator
        One independent stream per draw.
    target : RationalDensity
    candidate : DensitySpec
    c : float
        Envelope constant; must bound ``target / candidate``.
    max_rejections : int
        Consecutive rejections tolerated before giving up on one draw.

    Returns
    -------
    samples : ndarray
    trials : ndarray of int
        Candidate draws consumed per sample.
    completed : int
        Number of draws finished; less than ``len(bitgens)`` when one stream
        hit *max_rejections*, in which case the outputs are truncated there.
    """
    be = _backend if backend is None else backend
    lo, hi = target.support if target.support is not None else (-math.inf, math.inf)
    return be.rejection_sample(
        list(bitgens),
        descriptor(target.reference),
        np.ascontiguousarray(target.coeffs_t, dtype=float),
        float(target.center), float(target.scale), float(lo), float(hi),
        descriptor(candidate), float(c), int(max_rejections),
    )
