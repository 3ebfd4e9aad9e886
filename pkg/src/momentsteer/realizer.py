"""Realize a control moment sequence as an analytic density.

Given a Hankel-positive ``Sigma`` and a reference density ``r``, the density
closest to ``r`` in Kullback-Leibler distance with moments ``Sigma`` is

    p(u) = r(u) / (B(u)^T Lambda B(u)),    B(u) = [1, u, ..., u^n]^T,

where ``Lambda`` minimizes the convex objective

    J(Lambda) = tr(Lambda Sigma) - integral r(u) log(B^T Lambda B) du.

``B^T Lambda B`` only depends on the anti-diagonal sums of ``Lambda``, i.e. on
the coefficients of a degree-2n polynomial, so the Newton iteration in
:func:`minimize` runs on those coefficients. It works in a standardized
variable ``t = (u - c) / s`` to keep the Hessian well conditioned.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from . import kernels
from .densities import DensitySpec
from .errors import (
    LineSearchStalled,
    MaxIterations,
    NotInteriorPoint,
    OutOfSupport,
    SigmaNotPD,
)
from .moments import (
    MomentSequence,
    as_moments,
    hankel_of,
    is_strictly_positive,
    poly_in_u,
    standardized_moments,
)
from .quadrature import DEFAULT_NODES, QuadratureGrid, make_grid

log = logging.getLogger(__name__)

NORMALIZATION_TOL = 5e-7
MAX_HALVINGS = 60
ARMIJO = 1e-4


def _basis(u, n):
    return np.asarray(u, dtype=float)[..., None] ** np.arange(n + 1)


def _quadratic_form(lam, u):
    n = lam.shape[0] - 1
    B = _basis(u, n)
    return np.einsum("...i,ij,...j->...", B, lam, B)


def lambda_from_poly(coeffs):
    """Symmetric matrix whose quadratic form in ``B(u)`` is ``sum c_k u^k``.

    Each coefficient is spread evenly over its anti-diagonal.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    n = (len(coeffs) - 1) // 2
    idx = np.add.outer(np.arange(n + 1), np.arange(n + 1))
    counts = np.bincount(idx.ravel(), minlength=2 * n + 1)
    return coeffs[idx] / counts[idx]


def poly_from_lambda(lam):
    """Coefficients ``c_k`` of ``B(u)^T Lambda B(u)`` (anti-diagonal sums)."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[0] - 1
    flipped = np.fliplr(lam)
    return np.array([np.trace(flipped, offset=n - k) for k in range(2 * n + 1)])


@dataclass(frozen=True)
class RationalDensity:
    """``r(u) / q(u)`` with ``q`` a positive polynomial of degree ``2n``.

    ``q`` is stored as coefficients in ``t = (u - center) / scale``;
    :attr:`lam` gives the equivalent symmetric matrix acting on ``B(u)``.
    """

    reference: DensitySpec
    lam: np.ndarray
    support: tuple | None
    center: float
    scale: float
    coeffs_t: np.ndarray
    normalization_check: float
    iterations: int = 0

    @property
    def order(self):
        return (len(self.coeffs_t) - 1) // 2

    def denominator(self, u):
        t = (np.asarray(u, dtype=float) - self.center) / self.scale
        return np.polynomial.polynomial.polyval(t, self.coeffs_t)

    def pdf(self, u):
        """Vectorized density; zero outside the support."""
        u = np.asarray(u, dtype=float)
        out = kernels.rational_pdf(u, self.reference, self.coeffs_t, self.center, self.scale)
        if self.support is not None:
            a, b = self.support
            out = np.where((u >= a) & (u <= b), out, 0.0)
        return out


def default_reference(sigma, support=None, heavy_tail=False):
    """Gaussian (or Cauchy) reference centred on the target mean, 2x its spread.

    With a bounded *support* the reference is a Gaussian truncated to it.
    """
    sigma = np.asarray(sigma, dtype=float)
    mean = sigma[0, 1]
    std = math.sqrt(max(sigma[1, 1] - mean * mean, 1e-12))
    if support is not None:
        a, b = support
        return DensitySpec.truncated_gaussian(min(max(mean, a), b), 2.0 * std, a, b)
    if heavy_tail:
        return DensitySpec.cauchy(mean, 2.0 * std)
    return DensitySpec.gaussian(mean, 2.0 * std)


def objective(lam, sigma, reference, grid: QuadratureGrid):
    """``tr(Lambda Sigma) - integral r log(B^T Lambda B)``."""
    lam = np.asarray(lam, dtype=float)
    q = _quadratic_form(lam, grid.nodes)
    if np.any(q <= 0):
        raise NotInteriorPoint("B^T Lambda B is not positive on the grid")
    r = reference.pdf(grid.nodes)
    return float(np.sum(lam * np.asarray(sigma).T) - grid.integrate(r * np.log(q)))


def gradient(lam, sigma, reference, grid: QuadratureGrid):
    """``Sigma - integral r B B^T / (B^T Lambda B)`` as an ``(n+1) x (n+1)`` matrix."""
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[0] - 1
    q = _quadratic_form(lam, grid.nodes)
    if np.any(q <= 0):
        raise NotInteriorPoint("B^T Lambda B is not positive on the grid")
    r = reference.pdf(grid.nodes)
    B = _basis(grid.nodes, n)
    return np.asarray(sigma, dtype=float) - np.einsum("k,ki,kj->ij", grid.weights * r / q, B, B)


class _Problem:
    """Objective, gradient and Hessian on standardized polynomial coefficients."""

    def __init__(self, mom_t, t_nodes, wr):
        self.mom_t = mom_t
        self.T = t_nodes[:, None] ** np.arange(len(mom_t))
        self.wr = wr

    def q(self, theta):
        return self.T @ theta

    def value(self, theta, q):
        return float(theta @ self.mom_t - self.wr @ np.log(q))

    def grad_hess(self, q):
        a = self.wr / q
        g = self.mom_t - a @ self.T
        H = (self.T * (a / q)[:, None]).T @ self.T
        return g, H


def _newton_direction(g, H):
    try:
        # near the cone boundary H is badly conditioned; the line search
        # rejects any direction that does not decrease the objective
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            return -linalg.solve(H, g, assume_a="pos")
    except (linalg.LinAlgError, ValueError):
        ridge = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(H)))))
        return -linalg.solve(H + ridge * np.eye(len(g)), g, assume_a="sym")


def positive_on_line(coeffs):
    """Whether ``sum c_k t^k`` is strictly positive for every real ``t``."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size == 0 or c[-1] <= 0 or (c.size - 1) % 2:
        return False
    if c.size == 1:
        return True
    crit = np.roots(np.polynomial.polynomial.polyder(c)[::-1])
    real = crit.real[np.abs(crit.imag) <= 1e-7 * (1.0 + np.abs(crit.real))]
    return bool(np.all(np.polynomial.polynomial.polyval(real, c) > 0))


def _initial_coeffs(n, bounded):
    # q = 1 is interior on an interval; on the real line it sits on the
    # boundary of the positive cone, so start from (1 + t^2/4)^n instead
    if bounded:
        theta = np.zeros(2 * n + 1)
        theta[0] = 1.0
        return theta
    return np.polynomial.polynomial.polypow([1.0, 0.0, 0.25], n)


def minimize(sigma, reference=None, grid=None, tol=1e-9, max_iter=200,
             support=None, node_count=DEFAULT_NODES, heavy_tail=False):
    """Fit the rational density whose moments equal the Hankel matrix *sigma*.

    Parameters
    ----------
    sigma : array_like or MomentSequence
        Target Hankel matrix (or the moment sequence generating it).
    reference : DensitySpec, optional
        Defaults to :func:`default_reference`.
    grid : QuadratureGrid, optional
        Defaults to :func:`make_grid` on *support* with *node_count* nodes.
    tol : float
        Stop once every realized moment is within *tol* of its target,
        which is the max-abs entry of :func:`gradient`.

    Notes
    -----
    Every accepted step keeps ``q`` positive at the grid nodes and, on an
    unbounded support, positive on the whole real line, starting from the
    interior point ``(1 + t^2/4)^n``. Checking the nodes alone lets the
    iteration escape to polynomials that turn negative past the quadrature
    window. If that iteration stalls against the boundary of the cone, a
    second pass starts from ``q = 1`` with the node check only.

    A Gaussian reference cannot reach every target: when the higher moments
    are heavy relative to the lower ones the optimum escapes to the boundary
    of the cone. When the default Gaussian reference stalls this way, the fit
    is redone with the heavy-tail (Cauchy) reference, which is recorded on the
    result. An explicit *reference* is never replaced.

    Raises
    ------
    SigmaNotPD, LineSearchStalled, MaxIterations
    """
    if reference is None and support is None and not heavy_tail:
        try:
            return _minimize(sigma, None, grid, tol, max_iter, None, node_count, False)
        except (LineSearchStalled, MaxIterations) as exc:
            log.info("Gaussian reference stalled (%s); using the heavy-tail reference", exc)
            return _minimize(sigma, None, None, tol, max_iter, None, node_count, True)
    return _minimize(sigma, reference, grid, tol, max_iter, support, node_count, heavy_tail)


def _minimize(sigma, reference, grid, tol, max_iter, support, node_count, heavy_tail):
    if isinstance(sigma, MomentSequence) or np.ndim(sigma) == 1:
        sigma = hankel_of(as_moments(sigma))
    sigma = np.asarray(sigma, dtype=float)
    if not is_strictly_positive(sigma, 0.0):
        raise SigmaNotPD("target Hankel matrix is not positive definite")
    n = sigma.shape[0] - 1
    m_full = np.concatenate((sigma[0, :], sigma[1:, n]))
    if reference is None:
        reference = default_reference(sigma, support, heavy_tail)
    if support is None:
        support = reference.support
    if grid is None:
        grid = make_grid(support, reference, node_count)
    bounded = support is not None

    mean = m_full[1]
    std = math.sqrt(max(m_full[2] - mean * mean, 1e-300))
    center, scale = mean, std
    t_nodes = (grid.nodes - center) / scale
    r = reference.pdf(grid.nodes)
    wr = grid.weights * r
    problem = _Problem(standardized_moments(m_full, center, scale), t_nodes, wr)
    U = grid.nodes[:, None] ** np.arange(2 * n + 1)
    uw = grid.weights[:, None] * U

    def residual(q):
        return (r / q) @ uw - m_full

    def newton(theta, whole_line):
        q = problem.q(theta)
        f = problem.value(theta, q)
        for it in range(max_iter + 1):
            res = residual(q)
            worst = float(np.max(np.abs(res)))
            if worst < tol:
                return theta, res, it
            if it == max_iter:
                raise MaxIterations(
                    f"no convergence in {max_iter} iterations (max residual {worst:.3e})"
                )
            g, H = problem.grad_hess(q)
            d = _newton_direction(g, H)
            slope = float(g @ d)
            step = 1.0
            for _ in range(MAX_HALVINGS):
                theta_new = theta + step * d
                q_new = problem.q(theta_new)
                if np.all(q_new > 0) and (not whole_line or positive_on_line(theta_new)):
                    f_new = problem.value(theta_new, q_new)
                    if f_new <= f + ARMIJO * step * slope:
                        break
                    # at roundoff level the objective stops resolving progress
                    if abs(f_new - f) <= 1e-13 * (1.0 + abs(f)) and \
                            np.max(np.abs(residual(q_new))) < worst:
                        break
                step *= 0.5
            else:
                raise LineSearchStalled(
                    f"no acceptable step after {MAX_HALVINGS} halvings (max residual {worst:.3e})"
                )
            theta, q, f = theta_new, q_new, f_new

    try:
        theta, res, it = newton(_initial_coeffs(n, bounded), not bounded)
    except (LineSearchStalled, MaxIterations) as exc:
        if bounded:
            raise
        # the solution sits on a lower-degree face of the positive cone
        # (e.g. q = 1 when sigma holds the reference's own moments), which
        # the whole-line iteration can only approach from inside; finish
        # from q = 1 with positivity enforced on the grid only
        try:
            theta, res, it = newton(_initial_coeffs(n, True), False)
        except (LineSearchStalled, MaxIterations):
            raise exc from None

    coeffs_u = poly_in_u(theta, center, scale)
    return RationalDensity(
        reference=reference,
        lam=lambda_from_poly(coeffs_u),
        support=support,
        center=center,
        scale=scale,
        coeffs_t=theta.copy(),
        normalization_check=float(m_full[0] + res[0]),
        iterations=it,
    )


def realized_moments(p: RationalDensity, order=None, grid=None, node_count=DEFAULT_NODES):
    """Quadrature moments ``integral u^l p(u) du`` for ``l = 1..2*order``."""
    order = p.order if order is None else order
    if grid is None:
        grid = make_grid(p.support, p.reference, node_count)
    full = grid.moments(p.pdf(grid.nodes), order)
    return MomentSequence(full[1:])


def normalization(p: RationalDensity, grid=None, node_count=DEFAULT_NODES):
    if grid is None:
        grid = make_grid(p.support, p.reference, node_count)
    return float(grid.integrate(p.pdf(grid.nodes)))


def evaluate(p: RationalDensity, u):
    """``r(u) / (B(u)^T Lambda B(u))`` at a point of the support."""
    if p.support is not None:
        a, b = p.support
        if not a <= u <= b:
            raise OutOfSupport(f"u={u} outside support [{a}, {b}]")
    return float(p.pdf(np.array([u]))[0])


def density_table(p: RationalDensity, node_count=DEFAULT_NODES):
    """``(u, p(u))`` columns on the realizer grid, for plotting."""
    grid = make_grid(p.support, p.reference, node_count)
    return np.column_stack((grid.nodes, p.pdf(grid.nodes)))


def from_lambda(lam, reference, support=None):
    """Wrap an explicit ``Lambda`` as a :class:`RationalDensity` (no fitting)."""
    lam = np.asarray(lam, dtype=float)
    support = reference.support if support is None else support
    p = RationalDensity(reference, lam, support, 0.0, 1.0, poly_from_lambda(lam), float("nan"))
    grid = make_grid(support, reference)
    if np.any(p.denominator(grid.nodes) <= 0):
        raise NotInteriorPoint("B^T Lambda B is not positive on the grid")
    return RationalDensity(reference, lam, support, 0.0, 1.0, p.coeffs_t, normalization(p, grid))
