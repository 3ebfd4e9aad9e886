"""Acceptance-rejection sampling of control inputs from realized densities.

Every draw owns a bit generator derived from ``(master_seed, step, agent)``,
so a sample does not depend on how many other agents were sampled before it
or on which thread drew it.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .densities import DensitySpec
from .errors import AcceptanceStalled, UnboundedRatio
from .quadrature import make_grid
from .realizer import RationalDensity

SAFETY_FACTOR = 1.1
MAX_REJECTIONS = 10 ** 6
#: fraction of nodes at each end where a ratio maximum signals a heavy target tail
TAIL_FRACTION = 0.05
CANDIDATE_FAMILIES = ("cauchy", "gaussian", "uniform", "truncated_gaussian")

_SAMPLER_TAG = 0x5A


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by a master seed and an id path."""

    master_seed: int
    stream_id: tuple = ()

    def bit_generator(self):
        ss = np.random.SeedSequence(self.master_seed, spawn_key=tuple(self.stream_id))
        return np.random.PCG64(ss)

    def generator(self):
        return np.random.Generator(self.bit_generator())

    def child(self, *ids):
        return RngStream(self.master_seed, tuple(self.stream_id) + tuple(ids))


def agent_stream(master_seed, step, agent):
    """Stream for the control of *agent* at *step*."""
    return RngStream(master_seed, (_SAMPLER_TAG, step, agent))


def default_candidate(target: RationalDensity):
    """Uniform on a bounded support, else Cauchy at the mean with twice the spread."""
    if target.support is not None:
        return DensitySpec.uniform(*target.support)
    return DensitySpec.cauchy(target.center, 2.0 * target.scale)


def _check_candidate(candidate):
    if candidate.family not in CANDIDATE_FAMILIES:
        raise ValueError(f"candidate family must be one of {CANDIDATE_FAMILIES}")


def rejection_constant(target: RationalDensity, candidate: DensitySpec, grid=None):
    """``1.1 * max target/candidate`` over the grid nodes.

    Raises
    ------
    UnboundedRatio
        If the candidate vanishes where the target does not, or, on an
        unbounded support, the maximum sits in the outer 5% of nodes at
        either end.
    """
    _check_candidate(candidate)
    if grid is None:
        grid = make_grid(target.support, target.reference)
    p = target.pdf(grid.nodes)
    g = candidate.pdf(grid.nodes)
    live = p > 0
    if np.any(live & (g <= 0)):
        raise UnboundedRatio("candidate does not cover the target support")
    ratio = np.zeros_like(p)
    ratio[live] = p[live] / g[live]
    k = int(np.argmax(ratio))
    if target.support is None:
        edge = max(1, int(TAIL_FRACTION * len(ratio)))
        order = np.argsort(grid.nodes)
        rank = int(np.flatnonzero(order == k)[0])
        if rank < edge or rank >= len(ratio) - edge:
            raise UnboundedRatio(
                f"target/candidate ratio peaks at u={grid.nodes[k]:.4g} in the tail; "
                "use a heavier-tailed candidate"
            )
    return SAFETY_FACTOR * float(ratio[k])


def _draw(streams, target, candidate, c, max_rejections):
    bitgens = [s.bit_generator() for s in streams]
    samples, trials, done = kernels.rejection_sample(bitgens, target, candidate, c, max_rejections)
    if done < len(streams):
        raise AcceptanceStalled(
            f"{max_rejections} consecutive rejections on stream {streams[done].stream_id}; "
            "the rejection constant is probably far too large"
        )
    return samples, trials


def sample_one(target, candidate, c, rng: RngStream, max_rejections=MAX_REJECTIONS):
    """One draw from *target*."""
    samples, _ = _draw([rng], target, candidate, c, max_rejections)
    return float(samples[0])


def sample_ensemble(target, candidate=None, n_agents=1, rng_master=0, step=0, c=None,
                    workers=1, return_trials=False, max_rejections=MAX_REJECTIONS):
    """``n_agents`` independent draws, agent ``i`` using :func:`agent_stream`.

    Parameters
    ----------
    candidate : DensitySpec, optional
        Defaults to :func:`default_candidate`.
    c : float, optional
        Defaults to :func:`rejection_constant`.
    workers : int
        Threads to split the agents over. Results do not depend on it.
    """
    if n_agents < 1:
        raise ValueError("n_agents must be at least 1")
    if candidate is None:
        candidate = default_candidate(target)
    if c is None:
        c = rejection_constant(target, candidate)
    streams = [agent_stream(rng_master, step, i) for i in range(n_agents)]
    if workers <= 1:
        samples, trials = _draw(streams, target, candidate, c, max_rejections)
    else:
        chunks = np.array_split(np.arange(n_agents), workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(
                lambda idx: _draw([streams[i] for i in idx], target, candidate, c, max_rejections),
                [ch for ch in chunks if len(ch)],
            ))
        samples = np.concatenate([s for s, _ in parts])
        trials = np.concatenate([t for _, t in parts])
    return (samples, trials) if return_trials else samples
