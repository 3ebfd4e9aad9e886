"""Generators shared by the property tests and the acceptance suite."""
import numpy as np

from momentsteer.densities import DensitySpec


def random_mixture(rng):
    """A two- or three-component Gaussian or Laplace mixture."""
    k = int(rng.integers(2, 4))
    w = rng.uniform(0.2, 1.0, k)
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    locs = rng.uniform(-3.0, 3.0, k)
    scales = rng.uniform(0.3, 2.0, k)
    if rng.random() < 0.5:
        return DensitySpec.gaussian_mixture(w, locs, scales)
    return DensitySpec.laplace_mixture(w, locs, scales)


def random_spd(rng, dim, jitter=0.3):
    """A symmetric positive definite matrix near the identity."""
    M = rng.normal(size=(dim, dim)) * jitter
    return np.eye(dim) + M @ M.T
