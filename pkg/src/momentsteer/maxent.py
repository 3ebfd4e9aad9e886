"""Maximum-entropy fits and the total-variation error bound.

The density ``exp(-sum_i lam_i x^i)`` with the largest Shannon entropy among
all densities sharing the first ``2n`` moments bounds how far two densities
with those moments can be apart:

    V(p, q) <= 3 sqrt(-1 + sqrt(1 + 4/9 KL)),   KL(p || q_me) = H[q_me] - H[p].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special, stats

from .densities import DensitySpec
from .errors import EntropyOrderViolated, MaxIterations, MomentsInfeasible
from .moments import (
    MomentSequence,
    as_moments,
    density_window,
    hankel_of,
    is_strictly_positive,
    moments_of_density,
    poly_in_u,
    standardized_moments,
)
from .quadrature import DEFAULT_NODES, QuadratureGrid, composite_gauss_legendre, make_grid
from .realizer import RationalDensity

#: slack allowed on the max-entropy property before it counts as a broken fit
ENTROPY_TOL = 1e-9
MAX_HALVINGS = 60


@dataclass(frozen=True)
class MaxEntDensity:
    """``exp(-sum_i lambdas[i] x^i)`` on ``support``.

    The fit is carried out in ``t = (x - center) / scale``; :attr:`coeffs_t`
    is the exponent as a polynomial in ``t`` (still a density in ``x``) and
    :attr:`lambdas` the same exponent as a polynomial in ``x``.
    """

    lambdas: np.ndarray
    support: tuple
    grid: QuadratureGrid
    center: float
    scale: float
    coeffs_t: np.ndarray
    iterations: int = 0

    @property
    def order(self):
        return (len(self.lambdas) - 1) // 2

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        t = (x - self.center) / self.scale
        out = np.exp(-np.polynomial.polynomial.polyval(t, self.coeffs_t))
        a, b = self.support
        return np.where((x >= a) & (x <= b), out, 0.0)

    def moments(self, order=None):
        order = self.order if order is None else order
        full = self.grid.moments(self.pdf(self.grid.nodes), order)
        return MomentSequence(full[1:])


def _default_grid(mean, std, support, node_count):
    if support is not None:
        a, b = float(support[0]), float(support[1])
        x, w = composite_gauss_legendre(a, b, 2 * node_count)
        return QuadratureGrid(x, w, (a, b))
    # the window the realizer uses for its default Gaussian reference
    return make_grid(None, DensitySpec.gaussian(mean, 2.0 * std), node_count)


def _integrable_on_line(theta, tol=1e-9):
    # standardized coefficients below tol are roundoff (a Gaussian fit at
    # n >= 2 has exactly zero higher terms)
    big = np.flatnonzero(np.abs(theta) > tol)
    if big.size == 0:
        return False
    lead = big[-1]
    return lead % 2 == 1 and theta[lead] > 0


def fit_maxent(m, support=None, tol=1e-10, max_iter=200, grid=None,
               node_count=DEFAULT_NODES):
    """Maximum-entropy density matching the moments *m*.

    Minimizes the convex dual ``log integral exp(-sum_{i>=1} lam_i t^i) +
    sum_{i>=1} lam_i mu_i`` by damped Newton in the standardized variable.

    Parameters
    ----------
    m : MomentSequence or array_like
    support : tuple, optional
        Bounded support. On the real line the integrals run on the truncated
        window of the realizer and the leading coefficient must come out
        positive.
    tol : float
        Bound on the max-abs standardized moment residual.

    Raises
    ------
    MomentsInfeasible
        If the Hankel matrix of *m* is not positive definite, or no proper
        maximum-entropy density exists on the real line.
    MaxIterations
    """
    m = as_moments(m)
    if not is_strictly_positive(hankel_of(m)):
        raise MomentsInfeasible("Hankel matrix of the moments is not positive definite")
    m_full = m.with_zeroth()
    mean = m_full[1]
    std = math.sqrt(m_full[2] - mean * mean)
    if grid is None:
        grid = _default_grid(mean, std, support, node_count)
    a, b = grid.support if support is None else support
    L = len(m_full) - 1

    mu = standardized_moments(m_full, mean, std)[1:]
    T = ((grid.nodes - mean) / std)[:, None] ** np.arange(1, L + 1)
    logw = np.log(grid.weights)

    def dual(theta):
        expo = logw - T @ theta
        logz = special.logsumexp(expo)
        return logz + theta @ mu, np.exp(expo - logz), logz

    theta = np.zeros(L)
    theta[1] = 0.5
    f, p, logz = dual(theta)
    for it in range(max_iter + 1):
        ET = p @ T
        g = mu - ET
        if np.max(np.abs(g)) < tol:
            break
        if it == max_iter:
            raise MaxIterations(f"max-entropy fit did not converge in {max_iter} iterations")
        H = (T * p[:, None]).T @ T - np.outer(ET, ET)
        try:
            d = -linalg.solve(H, g, assume_a="pos")
        except (linalg.LinAlgError, ValueError):
            d = -linalg.lstsq(H, g)[0]
        slope = g @ d
        step = 1.0
        for _ in range(MAX_HALVINGS):
            f_new, p_new, logz_new = dual(theta + step * d)
            if np.isfinite(f_new) and f_new <= f + 1e-4 * step * slope:
                break
            # roundoff floor: accept if the residual still shrinks
            if np.isfinite(f_new) and abs(f_new - f) <= 1e-14 * (1.0 + abs(f)) and \
                    np.max(np.abs(mu - p_new @ T)) < np.max(np.abs(g)):
                break
            step *= 0.5
        else:
            raise MaxIterations("max-entropy line search stalled")
        theta = theta + step * d
        f, p, logz = f_new, p_new, logz_new

    if support is None and not _integrable_on_line(theta):
        raise MomentsInfeasible(
            "no max-entropy density on the real line for these moments; give a bounded support"
        )
    coeffs_t = np.concatenate(([logz], theta))
    lambdas = poly_in_u(coeffs_t, mean, std)
    return MaxEntDensity(lambdas, (a, b), grid, mean, std, coeffs_t, it)


def _grid_for(density):
    if isinstance(density, MaxEntDensity):
        return density.grid
    if isinstance(density, RationalDensity):
        return make_grid(density.support, density.reference)
    (a, b), nodes = density_window(density)
    x, w = composite_gauss_legendre(a, b, nodes)
    return QuadratureGrid(x, w, (a, b))


def shannon_entropy(density, grid=None):
    """``-integral q log q`` by quadrature; ``0 log 0`` counts as 0."""
    if grid is None:
        grid = _grid_for(density)
    q = density.pdf(grid.nodes)
    return float(-grid.integrate(special.xlogy(q, q))) + 0.0


def kl_via_entropy(target_entropy, maxent_entropy, tol=ENTROPY_TOL):
    """``H[q_me] - H[target]``, clipped at 0.

    Raises
    ------
    EntropyOrderViolated
        If the max-entropy density has lower entropy by more than *tol*.
    """
    kl = maxent_entropy - target_entropy
    if kl < -tol:
        raise EntropyOrderViolated(
            f"max-entropy fit has entropy {maxent_entropy:.12g} below target {target_entropy:.12g}"
        )
    return max(kl, 0.0)


def tv_from_kl(kl):
    """``3 sqrt(-1 + sqrt(1 + 4 kl / 9))``."""
    if kl < 0:
        raise ValueError("kl must be non-negative")
    x = 4.0 * kl / 9.0
    # sqrt(1 + x) - 1 without cancellation for small x
    return 3.0 * math.sqrt(x / (math.sqrt(1.0 + x) + 1.0))


@dataclass(frozen=True)
class ErrorReport:
    H_maxent: float
    H_terminal: float
    H_desired: float
    KL_terminal: float
    KL_desired: float
    TV_bound: float

    def lines(self):
        return [f"{k} = {getattr(self, k):.17g}" for k in self.__dataclass_fields__]


def error_report(terminal, desired: DensitySpec, order, support=None):
    """Entropies, KL terms and the chained TV bound between *terminal* and *desired*.

    *terminal* is an array of samples or any density accepted by
    :func:`shannon_entropy`. Sample entropy comes from a spacing estimator
    whose noise can push it above the max-entropy value; that KL term is
    clipped at zero rather than treated as a broken fit.
    """
    fit = fit_maxent(moments_of_density(desired, order), support)
    h_me = shannon_entropy(fit)
    h_des = shannon_entropy(desired)
    if isinstance(terminal, (DensitySpec, RationalDensity, MaxEntDensity)):
        h_term = shannon_entropy(terminal)
        kl_term = kl_via_entropy(h_term, h_me)
    else:
        h_term = float(stats.differential_entropy(np.asarray(terminal, dtype=float)))
        kl_term = max(h_me - h_term, 0.0)
    kl_des = kl_via_entropy(h_des, h_me)
    return ErrorReport(h_me, h_term, h_des, kl_term, kl_des,
                       tv_from_kl(kl_term) + tv_from_kl(kl_des))


def terminal_error_bound(terminal, desired: DensitySpec, order, support=None):
    """Upper bound on the total-variation distance between terminal and desired."""
    return error_report(terminal, desired, order, support).TV_bound
