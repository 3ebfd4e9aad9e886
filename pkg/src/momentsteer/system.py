"""The moment system of ``x(k+1) = a(k) x(k) + u(k)``.

Stacking ``E[x^l(k)]`` for ``l = 1..2n`` gives a linear system whose matrix
depends on the control moments. When the control is drawn independently of
the state, ``E[x^j u^(l-j)] = E[x^j] E[u^(l-j)]`` and the binomial expansion
of ``(a x + u)^l`` is exact.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .moments import MomentSequence, as_moments, binomial_table, check_same_order


class StabilityWarning(UserWarning):
    """Raised when a coefficient ``a(k)`` leaves the open interval (0, 1)."""


def _check_coefficient(a):
    if not 0.0 < a < 1.0:
        warnings.warn(f"coefficient a={a} is outside (0, 1)", StabilityWarning, stacklevel=3)


@dataclass(frozen=True)
class SystemSchedule:
    """Horizon ``K``, moment order ``n`` and coefficients ``a(0..K-1)``."""

    horizon: int
    order: int
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.coeffs)
        if self.horizon < 1 or self.order < 1:
            raise ValueError("horizon and order must be positive")
        if len(coeffs) != self.horizon:
            raise ValueError(f"expected {self.horizon} coefficients, got {len(coeffs)}")
        for a in coeffs:
            _check_coefficient(a)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def uniform(cls, horizon, order, lo=0.5, hi=0.7, seed=0):
        """Coefficients drawn i.i.d. from ``U[lo, hi]`` on a dedicated stream."""
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xA0,)))
        return cls(horizon, order, tuple(rng.uniform(lo, hi, horizon)))


def build_system_matrix(u_moms, a, order=None):
    """Lower-triangular ``2n x 2n`` matrix with entries ``C(l,j) a^j E[u^(l-j)]``."""
    u = as_moments(u_moms)
    n = u.order if order is None else order
    L = 2 * n
    um = np.concatenate(([1.0], u.values[:L]))
    C = binomial_table(L)
    A = np.zeros((L, L))
    for l in range(1, L + 1):
        for j in range(1, l + 1):
            A[l - 1, j - 1] = C[l, j] * a ** j * um[l - j]
    return A


def propagate(x_moms, u_moms, a):
    """Moments of ``a x + u`` for independent ``x`` and ``u``."""
    x, u = as_moments(x_moms), as_moments(u_moms)
    check_same_order(x, u)
    _check_coefficient(a)
    return MomentSequence(build_system_matrix(u, a) @ x.values + u.values)


def propagate_uncontrolled(x_moms, a):
    """Moments of ``a x``: each ``m_l`` scaled by ``a^l``."""
    x = as_moments(x_moms)
    return MomentSequence(x.values * a ** np.arange(1, len(x) + 1))


def solve_control_moments(x_now, x_next, a):
    """The control moments carrying ``x_now`` to ``x_next`` in one step.

    Solves the triangular recursion
    ``E[u^l] = E[x^l(k+1)] - sum_{j=1}^{l} C(l,j) a^j E[x^j(k)] E[u^(l-j)]``
    for ascending ``l``. The result is not guaranteed to be Hankel-positive.
    """
    x, y = as_moments(x_now), as_moments(x_next)
    check_same_order(x, y)
    _check_coefficient(a)
    L = len(x)
    C = binomial_table(L)
    xm = np.concatenate(([1.0], x.values))
    um = np.zeros(L + 1)
    um[0] = 1.0
    for l in range(1, L + 1):
        acc = 0.0
        for j in range(1, l + 1):
            acc += C[l, j] * a ** j * xm[j] * um[l - j]
        um[l] = y.values[l - 1] - acc
    return MomentSequence(um[1:])
