"""Declarative analytic densities used as initial, terminal and reference laws.

A :class:`DensitySpec` names a family and its parameters. It knows how to
evaluate its pdf, draw samples and produce raw power moments, either in
closed form or by composite Gauss-Legendre quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import special

from .errors import UnsupportedFamily

FAMILIES = (
    "gaussian",
    "gaussian_mixture",
    "laplace_mixture",
    "generalized_logistic_mixture",
    "truncated_gaussian",
    "uniform",
    "cauchy",
    "point_mass",
)

_MIXTURES = ("gaussian_mixture", "laplace_mixture", "generalized_logistic_mixture")


def _as_tuple(v):
    return tuple(float(x) for x in np.atleast_1d(np.asarray(v, dtype=float)))


@dataclass(frozen=True)
class DensitySpec:
    """An analytic probability density on the real line or on ``[a, b]``.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES`.
    params : dict
        Family parameters. Single-component families use scalars
        (``mu``/``sigma``, ``loc``/``scale``, ``x0``); mixtures use tuples
        ``weights``, ``locs``, ``scales`` and, for the generalized logistic
        family, ``shapes``.
    support : tuple of float or None
        ``None`` for the whole real line, else a closed interval ``(a, b)``.
    """

    family: str
    params: dict = field(default_factory=dict)
    support: tuple | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnsupportedFamily(f"unknown density family {self.family!r}")
        p = dict(self.params)
        if self.family in _MIXTURES:
            for key in ("weights", "locs", "scales"):
                p[key] = _as_tuple(p[key])
            if self.family == "generalized_logistic_mixture":
                p["shapes"] = _as_tuple(p["shapes"])
                if len(p["shapes"]) != len(p["weights"]) or min(p["shapes"]) <= 0:
                    raise ValueError("shapes must be positive, one per component")
            w = np.array(p["weights"])
            if not (len(w) == len(p["locs"]) == len(p["scales"])):
                raise ValueError("mixture parameter lengths differ")
            if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("mixture weights must be positive and sum to 1")
            if min(p["scales"]) <= 0:
                raise ValueError("scales must be strictly positive")
        else:
            p = {k: float(v) for k, v in p.items()}
            scale_key = {"gaussian": "sigma", "truncated_gaussian": "sigma",
                         "cauchy": "scale"}.get(self.family)
            if scale_key is not None and p[scale_key] <= 0:
                raise ValueError("scales must be strictly positive")
        support = self.support
        if self.family == "truncated_gaussian":
            support = (p.pop("a", None), p.pop("b", None)) if support is None else support
        if self.family == "uniform":
            support = (p["a"], p["b"])
        if support is not None:
            a, b = (float(s) for s in support)
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ValueError(f"support bounds must be finite with a < b, got {support}")
            support = (a, b)
        elif self.family == "truncated_gaussian":
            raise ValueError("truncated_gaussian needs a finite support")
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "support", support)

    # -- constructors -----------------------------------------------------
    @classmethod
    def gaussian(cls, mu=0.0, sigma=1.0):
        return cls("gaussian", {"mu": mu, "sigma": sigma})

    @classmethod
    def gaussian_mixture(cls, weights, mus, sigmas):
        return cls("gaussian_mixture", {"weights": weights, "locs": mus, "scales": sigmas})

    @classmethod
    def laplace_mixture(cls, weights, locs, scales):
        return cls("laplace_mixture", {"weights": weights, "locs": locs, "scales": scales})

    @classmethod
    def generalized_logistic_mixture(cls, weights, locs, shapes, scales=None):
        if scales is None:
            scales = [1.0] * len(np.atleast_1d(weights))
        return cls(
            "generalized_logistic_mixture",
            {"weights": weights, "locs": locs, "shapes": shapes, "scales": scales},
        )

    @classmethod
    def truncated_gaussian(cls, mu, sigma, a, b):
        return cls("truncated_gaussian", {"mu": mu, "sigma": sigma}, (a, b))

    @classmethod
    def uniform(cls, a, b):
        return cls("uniform", {"a": a, "b": b})

    @classmethod
    def cauchy(cls, loc=0.0, scale=1.0):
        return cls("cauchy", {"loc": loc, "scale": scale})

    @classmethod
    def point_mass(cls, x0):
        return cls("point_mass", {"x0": x0})

    # -- properties -------------------------------------------------------
    @property
    def is_degenerate(self):
        return self.family == "point_mass"

    @property
    def location(self):
        """A representative centre, used to place quadrature windows."""
        p = self.params
        if self.family in ("gaussian", "truncated_gaussian"):
            return p["mu"]
        if self.family == "cauchy":
            return p["loc"]
        if self.family == "point_mass":
            return p["x0"]
        if self.family == "uniform":
            return 0.5 * (p["a"] + p["b"])
        return float(np.dot(p["weights"], p["locs"]))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        fam = self.family
        if fam == "gaussian":
            out = _norm_pdf(x, p["mu"], p["sigma"])
        elif fam == "truncated_gaussian":
            a, b = self.support
            mass = _norm_mass(a, b, p["mu"], p["sigma"])
            out = np.where((x >= a) & (x <= b), _norm_pdf(x, p["mu"], p["sigma"]) / mass, 0.0)
        elif fam == "uniform":
            a, b = self.support
            out = np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0)
        elif fam == "cauchy":
            z = (x - p["loc"]) / p["scale"]
            out = 1.0 / (math.pi * p["scale"] * (1.0 + z * z))
        elif fam == "point_mass":
            raise UnsupportedFamily("point_mass has no density")
        else:
            out = np.zeros_like(x)
            shapes = p.get("shapes", (None,) * len(p["weights"]))
            for w, loc, s, alpha in zip(p["weights"], p["locs"], p["scales"], shapes):
                z = (x - loc) / s
                if fam == "gaussian_mixture":
                    comp = _norm_pdf(x, loc, s)
                elif fam == "laplace_mixture":
                    comp = np.exp(-np.abs(z)) / (2.0 * s)
                else:
                    # alpha e^{-z} / (1 + e^{-z})^{alpha+1}, written overflow-free
                    comp = alpha * special.expit(z) ** alpha * special.expit(-z) / s
                out = out + w * comp
        if self.support is not None and fam not in ("truncated_gaussian", "uniform"):
            a, b = self.support
            out = np.where((x >= a) & (x <= b), out, 0.0)
        return out

    def sample(self, rng, size):
        """Draw ``size`` i.i.d. samples using the numpy ``Generator`` *rng*."""
        p = self.params
        fam = self.family
        if fam == "gaussian":
            return rng.normal(p["mu"], p["sigma"], size)
        if fam == "uniform":
            return rng.uniform(p["a"], p["b"], size)
        if fam == "cauchy":
            return p["loc"] + p["scale"] * rng.standard_cauchy(size)
        if fam == "point_mass":
            return np.full(size, p["x0"])
        if fam == "truncated_gaussian":
            a, b = self.support
            lo = special.ndtr((a - p["mu"]) / p["sigma"])
            hi = special.ndtr((b - p["mu"]) / p["sigma"])
            u = lo + (hi - lo) * rng.random(size)
            return np.clip(p["mu"] + p["sigma"] * special.ndtri(u), a, b)
        if self.support is not None:
            raise UnsupportedFamily(f"sampling a truncated {fam} is not supported")
        comp = rng.choice(len(p["weights"]), size=size, p=np.array(p["weights"]))
        locs = np.array(p["locs"])[comp]
        scales = np.array(p["scales"])[comp]
        if fam == "gaussian_mixture":
            z = rng.standard_normal(size)
        elif fam == "laplace_mixture":
            z = rng.laplace(0.0, 1.0, size)
        else:
            alpha = np.array(p["shapes"])[comp]
            u = rng.random(size)
            # inverse of F(z) = (1 + e^{-z})^{-alpha}
            z = -np.log(np.expm1(-np.log(u) / alpha))
        return locs + scales * z

    def closed_form_moments(self, order):
        """Raw moments ``E[x^l]`` for ``l = 1..2*order`` or ``None``.

        ``None`` means the family has no finite formula here and the
        moments must come from quadrature.
        """
        L = 2 * order
        p = self.params
        fam = self.family
        if self.support is not None and fam not in ("uniform", "truncated_gaussian"):
            return None
        if fam == "point_mass":
            return np.array([p["x0"] ** l for l in range(1, L + 1)])
        if fam == "uniform":
            a, b = self.support
            return np.array([(b ** (l + 1) - a ** (l + 1)) / ((l + 1) * (b - a))
                             for l in range(1, L + 1)])
        if fam == "gaussian":
            return _shifted_moments(p["mu"], p["sigma"], _std_normal_moments(L))
        if fam in ("gaussian_mixture", "laplace_mixture"):
            std = _std_normal_moments(L) if fam == "gaussian_mixture" else _std_laplace_moments(L)
            out = np.zeros(L)
            for w, loc, s in zip(p["weights"], p["locs"], p["scales"]):
                out += w * _shifted_moments(loc, s, std)
            return out
        return None


def _norm_pdf(x, mu, sigma):
    z = (x - mu) / sigma
    return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))


def _norm_mass(a, b, mu, sigma):
    return float(special.ndtr((b - mu) / sigma) - special.ndtr((a - mu) / sigma))


def _std_normal_moments(L):
    # E[Z^j] = (j-1)!! for even j, 0 for odd j; index 0 holds E[Z^0]
    out = [1.0]
    for j in range(1, L + 1):
        out.append(0.0 if j % 2 else out[j - 2] * (j - 1))
    return out


def _std_laplace_moments(L):
    return [0.0 if j % 2 else float(math.factorial(j)) for j in range(L + 1)]


def _shifted_moments(loc, scale, std):
    """Moments of ``loc + scale * Y`` given ``E[Y^j]`` for ``j = 0..L``."""
    L = len(std) - 1
    return np.array([
        sum(comb(l, j) * loc ** (l - j) * scale ** j * std[j] for j in range(l + 1))
        for l in range(1, L + 1)
    ])
