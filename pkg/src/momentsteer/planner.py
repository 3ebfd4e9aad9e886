"""Moment-space trajectory planning.

The ensemble is left uncontrolled until the moment error ``x_T - X(k)`` is
Hankel-positive at some step ``k0``. From there the state moves along the
segment towards the target in positive convex-combination increments, so
every planned state stays Hankel-positive. Each control moment vector is
solved from consecutive states. Any control that is not Hankel-positive
triggers a reshaping of the increment weights.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ControlInfeasible, NoFeasibleStart, RetryBudgetExceeded, WeightSumInvalid
from .moments import (
    POSITIVITY_TOL,
    MomentSequence,
    as_moments,
    check_same_order,
    in_positive_cone,
)
from .system import propagate_uncontrolled, solve_control_moments

log = logging.getLogger(__name__)

MAX_WEIGHT_ATTEMPTS = 20
WEIGHT_BUMP = 1.5


@dataclass(frozen=True)
class SteeringPlan:
    """Planned moment trajectory.

    Attributes
    ----------
    k0 : int
        First controlled step; controls before it are zero.
    weights : tuple of float
        Increment weights for steps ``k0..K-1``.
    states : tuple of MomentSequence
        ``X(0..K)``.
    controls : tuple of MomentSequence
        ``U(k0..K-1)``.
    """

    k0: int
    weights: tuple
    states: tuple
    controls: tuple

    @property
    def horizon(self):
        return len(self.states) - 1

    def control_at(self, k):
        """Control moments at step ``k``, all zeros before ``k0``."""
        if k < self.k0:
            return MomentSequence(np.zeros(len(self.states[0])))
        return self.controls[k - self.k0]

    def all_controls(self):
        return [self.control_at(k) for k in range(self.horizon)]


def error_moments(x_T, x_k):
    x_T, x_k = as_moments(x_T), as_moments(x_k)
    check_same_order(x_T, x_k)
    return MomentSequence(x_T.values - x_k.values)


def find_k0(x0, x_T, sched, k_max=None, tol=POSITIVITY_TOL):
    """First step whose uncontrolled moment error is Hankel-positive.

    Returns
    -------
    k0 : int
    x_at_k0 : MomentSequence
        Uncontrolled state moments at ``k0``.
    """
    x, x_T = as_moments(x0), as_moments(x_T)
    check_same_order(x, x_T)
    if k_max is None:
        k_max = sched.horizon - 1
    if k_max >= sched.horizon:
        raise ValueError("k_max must leave at least one controlled step")
    for k in range(k_max + 1):
        if in_positive_cone(error_moments(x_T, x), tol):
            return k, x
        if k < k_max:
            x = propagate_uncontrolled(x, sched.coeffs[k])
    raise NoFeasibleStart(
        f"moment error never becomes Hankel-positive for k <= {k_max}"
    )


def _check_weights(weights):
    w = np.asarray(weights, dtype=float)
    if w.size == 0 or np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise WeightSumInvalid(f"weights must be positive and sum to 1, got {w.tolist()}")
    return w


def plan_states(x_at_k0, x_T, weights):
    """States ``X(k0+1..K)`` from cumulative weighted steps along ``e(k0)``.

    The last state is set to ``x_T`` exactly rather than accumulated.
    """
    w = _check_weights(weights)
    x0, x_T = as_moments(x_at_k0), as_moments(x_T)
    e = error_moments(x_T, x0).values
    cum = np.cumsum(w)
    states = [MomentSequence(x0.values + c * e) for c in cum[:-1]]
    states.append(x_T)
    return states


def adjust_weights(weights, failing_step, attempt):
    """Enlarge the first or last weight by 1.5 and renormalize.

    ``failing_step`` is an index into the weight window; a failure in the
    first half bumps the first weight, otherwise the last.
    """
    if attempt > MAX_WEIGHT_ATTEMPTS:
        raise RetryBudgetExceeded(f"no feasible weights after {MAX_WEIGHT_ATTEMPTS} attempts")
    w = np.array(_check_weights(weights))
    if failing_step < len(w) / 2:
        w[0] *= WEIGHT_BUMP
    else:
        w[-1] *= WEIGHT_BUMP
    return w / w.sum()


def _controls_for(states, coeffs):
    return [solve_control_moments(states[i], states[i + 1], coeffs[i])
            for i in range(len(states) - 1)]


def derive_plan(x0, x_T, sched, weights=None, tol=POSITIVITY_TOL, k_max=None):
    """Plan states and control moments from ``x0`` to ``x_T``.

    Starts from equal weights ``1/(K-k0)`` (or *weights* if given) and
    reshapes them with :func:`adjust_weights` until every control moment
    vector is Hankel-positive.

    Raises
    ------
    NoFeasibleStart
        If either endpoint is not Hankel-positive (an ensemble needs at least
        ``2n + 1`` distinct states) or the moment error never becomes
        Hankel-positive.
    ControlInfeasible
        If the retry budget runs out with some control still infeasible.
    """
    x0, x_T = as_moments(x0), as_moments(x_T)
    check_same_order(x0, x_T)
    if x0.order != sched.order:
        raise ValueError(f"schedule order {sched.order} != moment order {x0.order}")
    for name, x in (("initial", x0), ("terminal", x_T)):
        if not in_positive_cone(x, tol):
            raise NoFeasibleStart(f"{name} moments are not Hankel-positive")
    K = sched.horizon
    k0, x_at_k0 = find_k0(x0, x_T, sched, k_max=k_max, tol=tol)

    prefix = [x0]
    for k in range(k0):
        prefix.append(propagate_uncontrolled(prefix[-1], sched.coeffs[k]))

    steps = K - k0
    w = np.full(steps, 1.0 / steps) if weights is None else _check_weights(weights)
    coeffs = sched.coeffs[k0:]
    attempt = 0
    while True:
        planned = [x_at_k0] + plan_states(x_at_k0, x_T, w)
        controls = _controls_for(planned, coeffs)
        bad_states = [i for i, s in enumerate(planned) if not in_positive_cone(s, tol)]
        if bad_states:
            # convexity should make this impossible; floating point can still bite
            raise ControlInfeasible(f"planned state {k0 + bad_states[0]} left the positive cone")
        bad = [i for i, u in enumerate(controls) if not in_positive_cone(u, tol)]
        if not bad:
            break
        attempt += 1
        log.debug("control at step %d infeasible, reshaping weights (attempt %d)",
                  k0 + bad[0], attempt)
        try:
            w = adjust_weights(w, bad[0], attempt)
        except RetryBudgetExceeded as exc:
            raise ControlInfeasible(
                f"control at step {k0 + bad[0]} is not Hankel-positive: {exc}"
            ) from exc

    states = tuple(prefix[:-1] + planned)
    return SteeringPlan(k0=k0, weights=tuple(w), states=states, controls=tuple(controls))
