"""Decoupled single-client MDP with a subsidy for passivity.

A single client is scheduled in isolation. Every passive slot earns a subsidy W and
the optimal average cost is found by relative value iteration on a truncated grid
of states (a, d), 1 <= a <= a_max and 0 <= d <= d_max. Successor coordinates that
leave the grid are clamped onto its edge, which keeps every row of the kernel a
probability distribution.

"""

from __future__ import annotations

import logging
import math
from typing import Optional

import attrs
import numpy as np
import numpy.typing as npt
from ordered_set import OrderedSet

from freshcast.errors import NonConvergenceError, TruncationError
from freshcast.index import d1_upper, dstar
from freshcast.model import ClientParams

_logger = logging.getLogger(__name__)

PASSIVE = 0
ACTIVE = 1

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10**6
DEFAULT_DAMPING = 0.5
DEFAULT_TIE_TOL = 1e-7
DEFAULT_BOUNDARY_EPS = 1e-10

FloatTable = npt.NDArray[np.float64]


def _geometric_margin(q: float, eps: float) -> int:
    """Smallest n with q**n <= eps (1 when q is zero)."""
    if q <= 0.0:
        return 1
    return max(1, math.ceil(math.log(eps) / math.log(q)))


def _min_a_max(w: float, params: ClientParams) -> int:
    return 2 * math.ceil(dstar(w, params)) + 4


def _min_d_max(w: float, params: ClientParams) -> int:
    return 2 * math.ceil(d1_upper(w, params)) + math.ceil(dstar(w, params)) + 4


@attrs.define(frozen=True)
class DecoupledProblem:
    """One client, one subsidy, one truncation of the state space."""

    params: ClientParams
    """The client's statistics."""
    w: float = attrs.field(converter=float, validator=attrs.validators.ge(0.0))
    """Subsidy earned by every passive slot."""
    a_max: int = attrs.field(validator=attrs.validators.ge(2))
    """Largest queuing delay kept on the grid."""
    d_max: int = attrs.field(validator=attrs.validators.ge(1))
    """Largest AoI reduction kept on the grid."""
    strict: bool = True
    """Enforce the truncation margins at construction and after solving."""
    boundary_eps: float = DEFAULT_BOUNDARY_EPS
    """Probability mass allowed to reach the clamped edge from interior states."""

    def __attrs_post_init__(self) -> None:
        if not self.strict:
            return
        need_a = _min_a_max(self.w, self.params)
        need_d = _min_d_max(self.w, self.params)
        if self.a_max < need_a or self.d_max < need_d:
            raise TruncationError(
                f"Truncation a_max={self.a_max}, d_max={self.d_max} is too small "
                f"for W={self.w:.9g} {self.params}; need a_max >= {need_a} and "
                f"d_max >= {need_d}."
            )

    @classmethod
    def with_default_truncation(
        cls,
        params: ClientParams,
        w: float,
        boundary_eps: float = DEFAULT_BOUNDARY_EPS,
        a_interior_min: int = 0,
        k_interior_min: int = 0,
    ) -> DecoupledProblem:
        """Size the grid so that interior states do not feel the clamping.

        Parameters
        ----------
        params
            The client's statistics.
        w
            The subsidy.
        boundary_eps
            Bound on the probability of reaching the edge from the interior.
        a_interior_min
            Smallest queuing delay that must be interior.
        k_interior_min
            Smallest value of a + d that must be interior.

        Returns
        -------
        DecoupledProblem
            A strict problem whose interior covers the threshold region.
        """
        a_interior = max(_min_a_max(w, params), a_interior_min)
        k_interior = max(_min_d_max(w, params) + a_interior, k_interior_min)
        probe = cls(
            params=params,
            w=w,
            a_max=a_interior,
            d_max=k_interior,
            strict=False,
            boundary_eps=boundary_eps,
        )
        return cls(
            params=params,
            w=w,
            a_max=a_interior + probe.margin_a,
            d_max=k_interior + probe.margin_k,
            boundary_eps=boundary_eps,
        )

    @property
    def margin_a(self) -> int:
        """Slots without an arrival needed to push a from the interior to a_max."""
        return _geometric_margin(1.0 - self.params.lam, self.boundary_eps)

    @property
    def margin_k(self) -> int:
        """Slots without a delivery needed to push a + d to d_max."""
        q = max(1.0 - self.params.lam, 1.0 - self.params.p)
        free_steps = 2 * math.ceil(dstar(self.w, self.params))
        return _geometric_margin(q, self.boundary_eps) + free_steps

    @property
    def a_interior(self) -> int:
        """Largest queuing delay considered free of boundary effects."""
        return max(1, self.a_max - self.margin_a)

    @property
    def k_interior(self) -> int:
        """Largest a + d considered free of boundary effects."""
        return max(1, self.d_max - self.margin_k)

    @property
    def shape(self) -> tuple[int, int]:
        """Shape of the (a, d) tables; row a-1, column d."""
        return self.a_max, self.d_max + 1

    def interior_mask(self) -> npt.NDArray[np.bool_]:
        """Boolean table of states free of boundary effects."""
        a = np.arange(1, self.a_max + 1)[:, None]
        d = np.arange(0, self.d_max + 1)[None, :]
        return (a <= self.a_interior) & (a + d <= self.k_interior)


class _Kernel:
    """Precomputed successor indices of the truncated grid."""

    __slots__ = ("a_col", "d_row", "a_next", "k_next", "a_as_d", "lam", "p", "w")

    def __init__(self, problem: DecoupledProblem) -> None:
        a = np.arange(1, problem.a_max + 1)
        d = np.arange(0, problem.d_max + 1)
        self.a_col = a[:, None].astype(np.float64)
        self.d_row = d[None, :].astype(np.float64)
        # Row index of a + 1, clamped at a_max
        self.a_next = np.minimum(a + 1, problem.a_max) - 1
        # Column index of a + d, clamped at d_max (reached after an arrival)
        self.k_next = np.minimum(a[:, None] + d[None, :], problem.d_max)
        # Column index of a, clamped at d_max (a delivery followed by an arrival)
        self.a_as_d = np.minimum(a, problem.d_max)
        self.lam = problem.params.lam
        self.p = problem.params.p
        self.w = problem.w

    def q_values(self, h: FloatTable) -> tuple[FloatTable, FloatTable]:
        lam, p = self.lam, self.p
        stay = lam * h[0, self.k_next] + (1.0 - lam) * h[self.a_next, :]
        fresh = lam * h[0, self.a_as_d] + (1.0 - lam) * h[self.a_next, 0]
        mu0 = self.a_col + self.d_row - self.w + stay
        mu1 = self.a_col + (1.0 - p) * self.d_row + (1.0 - p) * stay + p * fresh[:, None]
        return mu0, mu1


def bellman_q(problem: DecoupledProblem, h: FloatTable) -> tuple[FloatTable, FloatTable]:
    """Evaluate the passive and active action values for a bias table.

    Parameters
    ----------
    problem
        The decoupled problem.
    h
        A bias table of shape ``problem.shape``.

    Returns
    -------
    tuple[FloatTable, FloatTable]
        The tables mu0 (passive) and mu1 (active).
    """
    return _Kernel(problem).q_values(h)


@attrs.define(frozen=True, eq=False)
class MdpSolution:
    """Optimal average cost, bias and policy of a decoupled problem."""

    problem: DecoupledProblem
    """The solved problem."""
    J: float
    """Optimal average cost per slot (subsidy included)."""
    h: FloatTable
    """Bias table normalised so that h(1, 0) = 0; row a-1, column d."""
    action: npt.NDArray[np.int8]
    """Optimal action per state, ties resolved to ACTIVE."""
    thresholds: tuple[int, ...]
    """D_a = smallest active d for each a (d_max + 1 when none)."""
    iterations: int
    """Value iteration sweeps performed."""
    span: float
    """Span of the last bias update."""
    tol: float
    """Convergence tolerance used."""

    def h_at(self, a: int, d: int) -> float:
        """Bias of state (a, d)."""
        return float(self.h[a - 1, d])

    def action_at(self, a: int, d: int) -> int:
        """Optimal action of state (a, d)."""
        return int(self.action[a - 1, d])

    def threshold(self, a: int) -> int:
        """Threshold of queuing-delay level ``a``."""
        return self.thresholds[a - 1]


def solve_decoupled(
    problem: DecoupledProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    damping: float = DEFAULT_DAMPING,
    tie_tol: float = DEFAULT_TIE_TOL,
    h0: Optional[FloatTable] = None,
) -> MdpSolution:
    """Solve a decoupled problem by relative value iteration.

    Each sweep applies ``h <- (1 - damping) * h + damping * (T h - T h(1, 0))``
    where ``T`` is the Bellman operator. Damping does not move the fixed point
    but removes the oscillation of periodic instances.

    Parameters
    ----------
    problem
        The problem to solve.
    tol
        Stop once the span of the bias update falls below this value.
    max_iter
        Maximum number of sweeps.
    damping
        Weight of the Bellman update, in (0, 1].
    tie_tol
        States with mu1 <= mu0 + tie_tol are active.
    h0
        Optional starting bias (e.g. the solution of a nearby subsidy).

    Returns
    -------
    MdpSolution
        The converged solution.

    Raises
    ------
    NonConvergenceError
        If the span is still above ``tol`` after ``max_iter`` sweeps.
    TruncationError
        If a strict problem has a threshold touching the d_max edge.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}.")
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {damping}.")

    kernel = _Kernel(problem)

    h = np.zeros(problem.shape) if h0 is None else np.array(h0, dtype=np.float64)
    if h.shape != problem.shape:
        raise ValueError(f"h0 has shape {h.shape}, expected {problem.shape}.")
    h -= h[0, 0]

    span = math.inf
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        mu0, mu1 = kernel.q_values(h)
        target = np.minimum(mu0, mu1)
        updated = (1.0 - damping) * h + damping * (target - target[0, 0])
        change = updated - h
        span = float(change.max() - change.min())
        h = updated
        if span < tol:
            break
    else:
        raise NonConvergenceError(iterations, span, tol)

    mu0, mu1 = kernel.q_values(h)
    J = float(min(mu0[0, 0], mu1[0, 0]) - h[0, 0])

    action = np.where(mu1 <= mu0 + tie_tol, ACTIVE, PASSIVE).astype(np.int8)
    active_rows = action == ACTIVE
    thresholds = tuple(
        int(np.argmax(row)) if row.any() else problem.d_max + 1 for row in active_rows
    )

    _logger.debug(
        "Solved W=%.9g %s on %dx%d grid: J=%.9g after %d sweeps (span %.3e).",
        problem.w,
        problem.params,
        problem.a_max,
        problem.d_max + 1,
        J,
        iterations,
        span,
    )

    touching = [a for a, d in enumerate(thresholds, start=1) if d >= problem.d_max]
    if touching:
        message = (
            f"Thresholds reach the d_max={problem.d_max} edge at a={touching[:5]} "
            f"for W={problem.w:.9g} {problem.params}."
        )
        if problem.strict:
            raise TruncationError(message)
        _logger.warning(message)

    return MdpSolution(
        problem=problem,
        J=J,
        h=h,
        action=action,
        thresholds=thresholds,
        iterations=iterations,
        span=span,
        tol=tol,
    )


def extract_active_passive(
    solution: MdpSolution,
) -> tuple[OrderedSet[tuple[int, int]], OrderedSet[tuple[int, int]]]:
    """Split the grid into its active and passive states.

    Returns
    -------
    tuple[OrderedSet[tuple[int, int]], OrderedSet[tuple[int, int]]]
        The active and the passive (a, d) states, in row-major grid order.
    """
    active: OrderedSet[tuple[int, int]] = OrderedSet()
    passive: OrderedSet[tuple[int, int]] = OrderedSet()

    for (row, d), value in np.ndenumerate(solution.action):
        state = (row + 1, d)
        if value == ACTIVE:
            active.add(state)
        else:
            passive.add(state)

    return active, passive
