"""Exact optimal scheduling of one or two clients.

The joint problem tracks every client's (a, d) pair, clamped at an age cap, and
chooses between idling and serving one client. It is solved by relative value
iteration over the product state space, which limits it to tiny networks.

"""

from __future__ import annotations

import functools
import logging

import attrs
import numpy as np
import numpy.typing as npt

from freshcast.errors import NonConvergenceError
from freshcast.model import ClientParams
from freshcast.oracle.decoupled import DEFAULT_DAMPING, DEFAULT_MAX_ITER

_logger = logging.getLogger(__name__)

IDLE_ACTION = 0
"""Action number of idling; action k > 0 serves client k - 1."""

MAX_JOINT_CLIENTS = 2


def _check_clients(_: object, __: object, value: tuple[ClientParams, ...]) -> None:
    if not 1 <= len(value) <= MAX_JOINT_CLIENTS:
        raise ValueError(
            f"The joint problem supports 1 to {MAX_JOINT_CLIENTS} clients, "
            f"got {len(value)}."
        )


@attrs.define(frozen=True)
class JointProblem:
    """A network of at most two clients with every age clamped at ``age_cap``."""

    clients: tuple[ClientParams, ...] = attrs.field(
        converter=tuple, validator=_check_clients
    )
    """Per-client statistics."""
    age_cap: int = attrs.field(default=16, validator=attrs.validators.ge(4))
    """Largest queuing delay and AoI reduction tracked per client."""

    @property
    def n_clients(self) -> int:
        return len(self.clients)

    @property
    def client_states(self) -> int:
        """Number of (a, d) pairs per client."""
        return self.age_cap * (self.age_cap + 1)

    def state_index(self, a: int, d: int) -> int:
        """Position of a clamped (a, d) pair in a client's state list."""
        a = min(a, self.age_cap)
        d = min(d, self.age_cap)
        return (a - 1) * (self.age_cap + 1) + d


@attrs.define(frozen=True, eq=False)
class JointSolution:
    """Optimal average cost and decision table of a joint problem."""

    problem: JointProblem
    """The solved problem."""
    J_opt: float
    """Optimal average AoI per client."""
    policy: npt.NDArray[np.int8]
    """Optimal action per joint state, one axis per client."""
    q: npt.NDArray[np.float64]
    """Action values, action first, then one axis per client."""
    iterations: int
    """Value iteration sweeps performed."""
    saturated: bool
    """True when the optimal policy idles while some client sits on the cap."""

    def action_for(self, ad_pairs: list[tuple[int, int]]) -> int:
        """Optimal action for the given per-client (a, d) pairs."""
        index = tuple(self.problem.state_index(a, d) for a, d in ad_pairs)
        return int(self.policy[index])


def _client_kernels(
    params: ClientParams, cap: int
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Passive and active transition matrices plus the AoI of each state."""
    size = cap * (cap + 1)
    passive = np.zeros((size, size))
    served = np.zeros((size, size))
    cost = np.zeros(size)
    lam, p = params.lam, params.p

    def index(a: int, d: int) -> int:
        return (min(a, cap) - 1) * (cap + 1) + min(d, cap)

    for a in range(1, cap + 1):
        for d in range(cap + 1):
            s = index(a, d)
            cost[s] = a + d
            passive[s, index(a + 1, d)] += 1.0 - lam
            passive[s, index(1, a + d)] += lam
            served[s, index(a + 1, 0)] += 1.0 - lam
            served[s, index(1, a)] += lam

    active = (1.0 - p) * passive + p * served
    return passive, active, cost


def solve_joint_optimal(
    prob: JointProblem,
    tol: float = 1e-9,
    max_iter: int = DEFAULT_MAX_ITER,
    damping: float = DEFAULT_DAMPING,
    tie_tol: float = 1e-9,
) -> JointSolution:
    """Solve the joint scheduling problem by relative value iteration.

    Parameters
    ----------
    prob
        The network to schedule.
    tol
        Stop once the span of the bias update falls below this value.
    max_iter
        Maximum number of sweeps.
    damping
        Weight of the Bellman update, in (0, 1].
    tie_tol
        Actions within this distance of the best are tied; ties go to the
        lowest action number.

    Returns
    -------
    JointSolution
        The optimal per-client average AoI and decision table.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}.")

    kernels = [_client_kernels(params, prob.age_cap) for params in prob.clients]
    n = prob.n_clients

    if n == 1:
        (passive, active, cost), = kernels
        total_cost = cost

        def q_values(h: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
            return np.stack([cost + passive @ h, cost + active @ h])

    else:
        (passive1, active1, cost1), (passive2, active2, cost2) = kernels
        total_cost = cost1[:, None] + cost2[None, :]

        def q_values(h: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
            idle_first = passive1 @ h
            served_first = active1 @ h
            return np.stack(
                [
                    total_cost + idle_first @ passive2.T,
                    total_cost + served_first @ passive2.T,
                    total_cost + idle_first @ active2.T,
                ]
            )

    h = np.zeros(total_cost.shape)
    reference = (0,) * n
    span = np.inf
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        target = q_values(h).min(axis=0)
        updated = (1.0 - damping) * h + damping * (target - target[reference])
        change = updated - h
        span = float(change.max() - change.min())
        h = updated
        if span < tol:
            break
    else:
        raise NonConvergenceError(iterations, span, tol)

    q = q_values(h)
    best = q.min(axis=0)
    J = float(best[reference] - h[reference])
    policy = np.argmax(q <= best + tie_tol, axis=0).astype(np.int8)

    saturated = _idles_at_cap(prob, policy)
    if saturated:
        _logger.warning(
            "Optimal joint policy idles at the age cap %d; consider a larger cap.",
            prob.age_cap,
        )

    _logger.debug(
        "Solved joint problem %s with cap %d: J/N=%.9g after %d sweeps.",
        [str(params) for params in prob.clients],
        prob.age_cap,
        J / n,
        iterations,
    )

    return JointSolution(
        problem=prob,
        J_opt=J / n,
        policy=policy,
        q=q,
        iterations=iterations,
        saturated=saturated,
    )


def _idles_at_cap(prob: JointProblem, policy: npt.NDArray[np.int8]) -> bool:
    cap = prob.age_cap
    d_of_state = np.tile(np.arange(cap + 1), cap)
    at_cap = d_of_state == cap
    if prob.n_clients == 1:
        touching = at_cap
    else:
        touching = at_cap[:, None] | at_cap[None, :]
    return bool(np.any(touching & (policy == IDLE_ACTION)))


@functools.lru_cache(maxsize=16)
def cached_joint_solution(prob: JointProblem) -> JointSolution:
    """Solve a joint problem once per process."""
    return solve_joint_optimal(prob)
