"""Composite Gauss-Legendre quadrature shared by the realizer and diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

#: two-sided reference tail mass left outside an unbounded window
TAIL_MASS = 1e-12
POINTS_PER_PANEL = 16
DEFAULT_NODES = 512


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and weights with ``sum(weights * f(nodes)) ~ integral of f``."""

    nodes: np.ndarray
    weights: np.ndarray
    support: tuple

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values):
        """Integrate sampled values; a leading axis of nodes is summed out."""
        return np.tensordot(self.weights, values, axes=(0, 0))

    def moments(self, density_values, order):
        """Raw moments ``l = 0..2*order`` of a density sampled on the nodes."""
        powers = self.nodes[:, None] ** np.arange(2 * order + 1)
        return self.weights @ (density_values[:, None] * powers)


@lru_cache(maxsize=None)
def _leggauss(m):
    x, w = leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gauss_legendre(a, b, node_count, points_per_panel=POINTS_PER_PANEL):
    """Equal-width panels on ``[a, b]``, each with a Gauss-Legendre rule."""
    panels = max(1, node_count // points_per_panel)
    counts = np.full(panels, node_count // panels)
    counts[: node_count - counts.sum()] += 1
    edges = np.linspace(a, b, panels + 1)
    nodes, weights = [], []
    for lo, hi, m in zip(edges[:-1], edges[1:], counts):
        x, w = _leggauss(int(m))
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def tail_radius(reference, tail_mass=TAIL_MASS):
    """Smallest radius about the reference centre leaving ``tail_mass`` outside."""
    fam = reference.family
    p = reference.params
    if fam == "gaussian":
        return -p["sigma"] * float(special.ndtri(0.5 * tail_mass))
    if fam == "cauchy":
        return p["scale"] * math.tan(0.5 * math.pi * (1.0 - tail_mass))
    raise ValueError(f"no unbounded window rule for reference family {fam!r}")


def make_grid(support, reference, node_count=DEFAULT_NODES):
    """Build the quadrature grid the realizer integrates on.

    Parameters
    ----------
    support : tuple or None
        Interval ``(a, b)`` for constrained controls, ``None`` for the real
        line.
    reference : DensitySpec
        Reference density; fixes the window when *support* is unbounded.
    node_count : int
        Total number of nodes, at least 64.

    Notes
    -----
    A Gaussian reference on the real line is integrated on
    ``[c - L, c + L]`` where ``L`` leaves a two-sided reference tail mass of
    :data:`TAIL_MASS`. A Cauchy reference cannot be truncated sensibly, so
    its grid maps Gauss-Legendre nodes through ``u = c + s tan(theta)``,
    which integrates the whole line.
    """
    if node_count < 64:
        raise ValueError("node_count must be at least 64")
    if support is None and reference.support is not None:
        support = reference.support
    if support is not None:
        a, b = float(support[0]), float(support[1])
        x, w = composite_gauss_legendre(a, b, node_count)
        return QuadratureGrid(x, w, (a, b))
    if reference.family == "cauchy":
        c, s = reference.params["loc"], reference.params["scale"]
        theta, wt = composite_gauss_legendre(-0.5 * math.pi, 0.5 * math.pi, node_count)
        x = c + s * np.tan(theta)
        w = wt * s / np.cos(theta) ** 2
        return QuadratureGrid(x, w, (-math.inf, math.inf))
    c = reference.location
    L = tail_radius(reference)
    x, w = composite_gauss_legendre(c - L, c + L, node_count)
    return QuadratureGrid(x, w, (c - L, c + L))
