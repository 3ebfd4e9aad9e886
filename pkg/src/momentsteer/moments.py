"""Truncated power-moment sequences and their Hankel matrices."""
from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np

from .densities import DensitySpec
from .errors import EmptyEnsemble, OrderMismatch, UnsupportedFamily
from .quadrature import composite_gauss_legendre

#: default threshold for strict Hankel positivity
POSITIVITY_TOL = 1e-10


class MomentSequence:
    """Raw moments ``m_1..m_{2n}`` of a distribution; ``m_0 = 1`` is implicit.

    Instances are immutable and behave like a read-only float array of
    length ``2 * order``.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        v = np.array(values, dtype=float).ravel()
        if v.size == 0 or v.size % 2:
            raise ValueError(f"moment sequence needs an even, nonzero length, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("moment values must be finite")
        v.setflags(write=False)
        self._values = v

    @property
    def values(self):
        return self._values

    @property
    def order(self):
        return self._values.size // 2

    def with_zeroth(self):
        """The sequence ``[1, m_1, ..., m_{2n}]``."""
        return np.concatenate(([1.0], self._values))

    def __array__(self, dtype=None, copy=None):
        return self._values if dtype is None else self._values.astype(dtype)

    def __len__(self):
        return self._values.size

    def __getitem__(self, item):
        return self._values[item]

    def __iter__(self):
        return iter(self._values)

    def __eq__(self, other):
        if isinstance(other, MomentSequence):
            return np.array_equal(self._values, other._values)
        return NotImplemented

    def __hash__(self):
        return hash(self._values.tobytes())

    def __repr__(self):
        return f"MomentSequence({self._values.tolist()})"


def as_moments(m):
    return m if isinstance(m, MomentSequence) else MomentSequence(m)


def check_same_order(*seqs):
    orders = {s.order for s in seqs}
    if len(orders) != 1:
        raise OrderMismatch(f"moment sequences have different orders {sorted(orders)}")


def hankel_of(m):
    """Hankel matrix ``H[i, j] = m_{i+j}`` of size ``(n+1) x (n+1)``, ``m_0 = 1``."""
    full = as_moments(m).with_zeroth()
    n = (full.size - 1) // 2
    idx = np.add.outer(np.arange(n + 1), np.arange(n + 1))
    return full[idx]


def is_strictly_positive(h, tol=POSITIVITY_TOL):
    """Whether ``h - tol * I`` admits a Cholesky factorization.

    Matrices on the positive-semidefinite boundary are rejected.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    h = np.asarray(h, dtype=float)
    if not np.all(np.isfinite(h)):
        return False
    try:
        np.linalg.cholesky(h - tol * np.eye(h.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


def in_positive_cone(m, tol=POSITIVITY_TOL):
    """Membership of a moment vector in the Hankel-positive set."""
    return is_strictly_positive(hankel_of(m), tol)


def moments_of_samples(xs, order):
    """Empirical raw moments ``(1/N) sum x_i^l`` for ``l = 1..2*order``."""
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise EmptyEnsemble("cannot take moments of an empty ensemble")
    powers = np.ones_like(xs)
    out = np.empty(2 * order)
    for l in range(2 * order):
        powers = powers * xs
        out[l] = powers.mean()
    return MomentSequence(out)


@lru_cache(maxsize=None)
def binomial_table(L):
    """``C(l, j)`` for ``0 <= j <= l <= L``, exact integers cast once to float."""
    table = np.zeros((L + 1, L + 1))
    for l in range(L + 1):
        for j in range(l + 1):
            table[l, j] = float(comb(l, j))
    table.setflags(write=False)
    return table


def standardized_moments(m_full, center, scale):
    """Moments of ``t = (u - center) / scale`` from those of ``u``."""
    L = len(m_full) - 1
    C = binomial_table(L)
    out = np.empty(L + 1)
    for l in range(L + 1):
        j = np.arange(l + 1)
        out[l] = np.sum(C[l, : l + 1] * m_full[: l + 1] * (-center) ** (l - j)) / scale ** l
    return out


def poly_in_u(coeffs_t, center, scale):
    """Re-express ``sum c_k t^k`` with ``t = (u - center)/scale`` as a polynomial in ``u``."""
    L = len(coeffs_t) - 1
    C = binomial_table(L)
    out = np.zeros(L + 1)
    for k in range(L + 1):
        # ((u - center)/scale)^k = scale^-k sum_j C(k,j) u^j (-center)^(k-j)
        for j in range(k + 1):
            out[j] += coeffs_t[k] * C[k, j] * (-center) ** (k - j) / scale ** k
    return out


def density_window(d: DensitySpec):
    """Interval and node count on which quadrature of *d* is accurate.

    Bounded supports are used as they are. On the real line the window
    reaches 80 component scales past the extreme locations, with panels half
    a component scale wide.
    """
    if d.support is not None:
        return d.support, 4096
    p = d.params
    if d.family == "gaussian":
        locs, scales = np.array([p["mu"]]), np.array([p["sigma"]])
    elif d.family in ("cauchy", "point_mass"):
        raise UnsupportedFamily(f"{d.family} has no finite quadrature window")
    else:
        locs = np.asarray(p["locs"])
        scales = np.asarray(p["scales"])
    # exponential tails: e^{-80} * 80^16 is far below double precision
    lo = float(np.min(locs - 80.0 * scales))
    hi = float(np.max(locs + 80.0 * scales))
    panels = int(np.ceil((hi - lo) / (0.5 * scales.min())))
    return (lo, hi), 16 * panels


def moments_of_density(d: DensitySpec, order):
    """Raw moments of an analytic density up to order ``2 * order``.

    Gaussian, Laplace, uniform and point-mass families use exact binomial
    expansions. Generalized-logistic and truncated families are integrated
    with composite Gauss-Legendre quadrature.
    """
    if d.family == "cauchy":
        raise UnsupportedFamily("cauchy has no finite moments")
    closed = d.closed_form_moments(order)
    if closed is not None:
        return MomentSequence(closed)
    (a, b), nodes = density_window(d)
    x, w = composite_gauss_legendre(a, b, nodes)
    f = d.pdf(x) * w
    mass = f.sum()
    powers = x[:, None] ** np.arange(1, 2 * order + 1)
    return MomentSequence(f @ powers / mass)
