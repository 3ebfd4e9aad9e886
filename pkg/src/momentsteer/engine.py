"""Density-mode and occupation-mode steering runs.

Density mode plans the moment trajectory once and realizes every control as
an analytic density. Occupation mode does the same starting from the
empirical moments of a finite ensemble, then samples one control input per
agent and step and moves the agents.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import realizer
from .densities import DensitySpec
from .errors import LengthMismatch, RealizationError, SteeringError, StepError
from .moments import MomentSequence, moments_of_density, moments_of_samples
from .planner import SteeringPlan, derive_plan
from .quadrature import DEFAULT_NODES
from .sampler import RngStream, default_candidate, rejection_constant, sample_ensemble

#: realized control moments must match the plan this closely (relative to max(1, |m|))
MATCH_TOL = 1e-6

REALIZE_TOL = 1e-9

_INITIAL_TAG = 0x1A


@dataclass(frozen=True)
class Snapshot:
    step: int
    states: np.ndarray
    controls: np.ndarray


@dataclass(frozen=True)
class AgentEnsemble:
    """Agent positions at one step, with optional per-step history.

    ``history`` is ``None`` when snapshots are off; otherwise it holds one
    :class:`Snapshot` per completed step (states before the step and the
    controls applied).
    """

    states: np.ndarray
    step: int = 0
    history: tuple | None = None

    @classmethod
    def from_states(cls, states, keep_history=False):
        states = np.array(states, dtype=float)
        return cls(states, 0, () if keep_history else None)

    @property
    def size(self):
        return len(self.states)

    def moments(self, order):
        return moments_of_samples(self.states, order)


def propagate_agents(ens: AgentEnsemble, controls, a):
    """``x_i(k+1) = a x_i(k) + u_i(k)`` for every agent."""
    controls = np.asarray(controls, dtype=float)
    if controls.shape != ens.states.shape:
        raise LengthMismatch(f"{controls.size} controls for {ens.size} agents")
    history = ens.history
    if history is not None:
        history = history + (Snapshot(ens.step, ens.states, controls),)
    return AgentEnsemble(a * ens.states + controls, ens.step + 1, history)


@dataclass(frozen=True)
class SteeringRun:
    """A planned and realized steering problem.

    ``realized_controls[i]`` realizes ``plan.controls[i]``, the control at
    step ``plan.k0 + i``.
    """

    schedule: object
    plan: SteeringPlan
    realized_controls: tuple
    mode: str
    constraint: tuple | None
    desired: DensitySpec | None = None
    target_moments: MomentSequence | None = None
    rejection_constants: tuple = field(default=())

    def realized_at(self, k):
        """Realized density of the control at step ``k``, ``None`` before ``k0``."""
        if k < self.plan.k0:
            return None
        return self.realized_controls[k - self.plan.k0]


def realize_plan(plan: SteeringPlan, constraint=None, node_count=DEFAULT_NODES, heavy_tail=False,
                 tol=REALIZE_TOL):
    """Realize every planned control; failures carry their step index."""
    out = []
    for i, u in enumerate(plan.controls):
        k = plan.k0 + i
        try:
            p = realizer.minimize(u, support=constraint, node_count=node_count,
                                  heavy_tail=heavy_tail, tol=tol)
            got = realizer.realized_moments(p, node_count=node_count).values
            err = np.abs(got - u.values) / np.maximum(1.0, np.abs(u.values))
            if np.max(err) > MATCH_TOL:
                raise RealizationError(
                    f"realized moments miss the plan by {np.max(err):.3e} (relative)"
                )
        except RealizationError as exc:
            raise StepError(k, exc) from exc
        out.append(p)
    return tuple(out)


def run_density_steering(q0: DensitySpec, tau: DensitySpec, sched, constraint=None,
                         node_count=DEFAULT_NODES, heavy_tail=False, weights=None,
                         realize=True, tol=REALIZE_TOL):
    """Plan from ``q0`` to ``tau`` in moment space and realize every control.

    With ``realize=False`` only the plan is computed (a feasibility probe).
    """
    n = sched.order
    x0 = moments_of_density(q0, n)
    x_T = moments_of_density(tau, n)
    plan = derive_plan(x0, x_T, sched, weights=weights)
    realized = realize_plan(plan, constraint, node_count, heavy_tail, tol) if realize else ()
    return SteeringRun(sched, plan, realized, "density", constraint, tau, x_T)


def initial_ensemble(initial, n_agents=None, rng_master=0, keep_history=False):
    """Agents from explicit states, or *n_agents* draws of a :class:`DensitySpec`."""
    if isinstance(initial, DensitySpec):
        if n_agents is None:
            raise ValueError("n_agents is required when the initial condition is a density")
        gen = RngStream(rng_master, (_INITIAL_TAG,)).generator()
        states = initial.sample(gen, int(n_agents))
    else:
        states = np.asarray(initial, dtype=float).ravel()
    return AgentEnsemble.from_states(states, keep_history)


def run_occupation_steering(initial, tau: DensitySpec, sched, constraint=None, rng_master=0,
                            n_agents=None, node_count=DEFAULT_NODES, heavy_tail=False,
                            weights=None, keep_history=False, workers=1, tol=REALIZE_TOL):
    """Steer a finite ensemble towards ``tau``.

    The plan starts from the empirical moments of the initial agents. Every
    controlled step draws one input per agent from the realized control
    density, independently of the agent states; uncontrolled steps apply 0.

    Returns
    -------
    run : SteeringRun
    ensemble : AgentEnsemble
        The agents after the last step.
    """
    ens = initial_ensemble(initial, n_agents, rng_master, keep_history)
    n = sched.order
    x0 = moments_of_samples(ens.states, n)
    x_T = moments_of_density(tau, n)
    plan = derive_plan(x0, x_T, sched, weights=weights)
    realized = realize_plan(plan, constraint, node_count, heavy_tail, tol)
    consts = []
    for k in range(sched.horizon):
        p = realized[k - plan.k0] if k >= plan.k0 else None
        if p is None:
            u = np.zeros(ens.size)
        else:
            try:
                cand = default_candidate(p)
                c = rejection_constant(p, cand)
                consts.append(c)
                u = sample_ensemble(p, cand, ens.size, rng_master, step=k, c=c, workers=workers)
            except SteeringError as exc:
                raise StepError(k, exc) from exc
        ens = propagate_agents(ens, u, sched.coeffs[k])
    run = SteeringRun(sched, plan, realized, "occupation", constraint, tau, x_T, tuple(consts))
    return run, ens


__all__ = [
    "AgentEnsemble",
    "Snapshot",
    "SteeringRun",
    "initial_ensemble",
    "propagate_agents",
    "realize_plan",
    "run_density_steering",
    "run_occupation_steering",
]

