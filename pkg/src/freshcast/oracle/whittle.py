"""Whittle index of a state found by bisection on the subsidy.

"""

from __future__ import annotations

import logging
from typing import Optional

import attrs
import numpy as np

from freshcast.errors import BracketError, IndexabilityError
from freshcast.index import approx_index
from freshcast.model import ClientParams
from freshcast.oracle.decoupled import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    PASSIVE,
    DecoupledProblem,
    MdpSolution,
    solve_decoupled,
)

_logger = logging.getLogger(__name__)

MAX_BRACKET_EXPANSIONS = 8
"""Times an automatic upper bracket is doubled before giving up."""

CONFIRMATION_PROBES = 4
"""Extra probes on each side of the final bracket that must agree with it."""


@attrs.define(frozen=True)
class WhittleProbe:
    """The action taken at the indexed state under one subsidy."""

    w: float
    """The subsidy probed."""
    passive: bool
    """True when the state is passive under that subsidy."""


class _Prober:
    """Solves the decoupled problem at successive subsidies on one grid."""

    __slots__ = ("problem", "state", "probes", "_tol", "_max_iter", "_last")

    problem: DecoupledProblem
    """Problem sized for the top of the bracket."""
    state: tuple[int, int]
    """The (a, d) state being indexed."""
    probes: list[WhittleProbe]
    """Every probe made so far, in order."""
    _tol: float
    _max_iter: int
    _last: Optional[MdpSolution]

    def __init__(
        self, problem: DecoupledProblem, state: tuple[int, int], tol: float, max_iter: int
    ) -> None:
        self.problem = problem
        self.state = state
        self.probes = []
        self._tol = tol
        self._max_iter = max_iter
        self._last = None

    def passive_at(self, w: float) -> bool:
        h0 = self._last.h if self._last is not None else None
        solution = solve_decoupled(
            attrs.evolve(self.problem, w=w, strict=False),
            tol=self._tol,
            max_iter=self._max_iter,
            h0=h0,
        )
        self._last = solution
        passive = solution.action_at(*self.state) == PASSIVE
        self.probes.append(WhittleProbe(w=w, passive=passive))
        return passive


def _grid_for(a: int, d: int, params: ClientParams, w_hi: float) -> DecoupledProblem:
    return DecoupledProblem.with_default_truncation(
        params, w_hi, a_interior_min=a, k_interior_min=a + d
    )


def numeric_whittle(
    a: int,
    d: int,
    params: ClientParams,
    w_hi: Optional[float] = None,
    tol_w: float = 1e-4,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """Find the smallest subsidy that makes state (a, d) passive.

    Parameters
    ----------
    a
        Queuing delay of the state.
    d
        AoI reduction of the state.
    params
        The client's statistics.
    w_hi
        Top of the search bracket. When omitted, a bracket is started at twice
        the larger of the approximate index and p * d and doubled until the
        state turns passive.
    tol_w
        Width of the final bracket.
    tol
        Convergence tolerance of each decoupled solve.
    max_iter
        Sweep limit of each decoupled solve.

    Returns
    -------
    float
        The top of the final bracket, a subsidy at which (a, d) is passive.

    Raises
    ------
    BracketError
        If the state is still active at the top of the bracket.
    IndexabilityError
        If the state is passive at some subsidy and active at a larger one.
    """
    if a < 1 or d < 0:
        raise ValueError(f"Index needs a >= 1 and d >= 0, got a={a}, d={d}.")
    if tol_w <= 0:
        raise ValueError(f"tol_w must be positive, got {tol_w}.")

    if d == 0:
        return 0.0

    state = (a, d)
    automatic = w_hi is None
    if w_hi is None:
        w_hi = 2.0 * max(approx_index(a, d, params).w, params.p * d, 1.0)
    elif w_hi <= 0:
        raise ValueError(f"w_hi must be positive, got {w_hi}.")

    prober = _Prober(_grid_for(a, d, params, w_hi), state, tol, max_iter)
    expansions = 0
    while not prober.passive_at(w_hi):
        if not automatic or expansions >= MAX_BRACKET_EXPANSIONS:
            raise BracketError(state, w_hi)
        w_hi *= 2.0
        expansions += 1
        prober = _Prober(_grid_for(a, d, params, w_hi), state, tol, max_iter)

    # Every state with d >= 1 is active without a subsidy
    lo, hi = 0.0, w_hi
    while hi - lo > tol_w:
        mid = 0.5 * (lo + hi)
        if prober.passive_at(mid):
            hi = mid
        else:
            lo = mid

    for w in np.linspace(hi, w_hi, CONFIRMATION_PROBES + 2)[1:-1]:
        prober.passive_at(float(w))
    for w in np.linspace(0.0, lo, CONFIRMATION_PROBES + 2)[1:-1]:
        prober.passive_at(float(w))

    _check_monotone(state, prober.probes)

    _logger.debug(
        "Whittle index of (a=%d, d=%d) %s: %.9g after %d probes.",
        a,
        d,
        params,
        hi,
        len(prober.probes),
    )

    return hi


def _check_monotone(state: tuple[int, int], probes: list[WhittleProbe]) -> None:
    """Raise if some passive probe lies below an active one."""
    ordered = sorted(probes, key=lambda probe: probe.w)
    seen_passive = False
    for probe in ordered:
        if probe.passive:
            seen_passive = True
        elif seen_passive:
            raise IndexabilityError(state, [(p.w, p.passive) for p in probes])
