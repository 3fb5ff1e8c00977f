"""Closed-form scheduling quantities.

This module holds the approximate Whittle index and the quantities it is built from:
the effective refresh interval Delta, the bounds on the thresholds of the optimal
decoupled policy, the limiting threshold D*, and the lower bound on the average AoI
of any policy. Everything here is a pure function of its arguments.

"""

from __future__ import annotations

import math
from typing import Sequence, Union

import attrs
import numpy as np
import numpy.typing as npt

from freshcast.model import ClientParams

ArrayLike = Union[float, npt.NDArray[np.float64], npt.NDArray[np.int64]]

QUADRATIC = "quadratic"
LINEAR = "linear"


@attrs.define(frozen=True)
class IndexValue:
    """An approximate index value with the pieces it was computed from."""

    w: float
    """The index, in units of per-slot AoI cost."""
    x: float
    """The auxiliary quantity the quadratic branch is evaluated at."""
    branch: str
    """Which branch of the index produced ``w``."""
    condition_lhs: float
    """Left side of the branch condition, d * Delta / a."""
    condition_rhs: float
    """Right side of the branch condition, (a - 1) / 2 + Delta."""

    def __float__(self) -> float:
        return self.w


def delta(params: ClientParams) -> float:
    """Expected slots per effective refresh opportunity, 1/lambda + (1-p)/p."""
    return 1.0 / params.lam + (1.0 - params.p) / params.p


def approx_index(a: int, d: int, params: ClientParams) -> IndexValue:
    """Compute the approximate Whittle index of a client state.

    Parameters
    ----------
    a
        Queuing delay of the buffered packet (a >= 1).
    d
        AoI reduction a delivery would achieve (d >= 0).
    params
        The client's statistics.

    Returns
    -------
    IndexValue
        The index and the branch that produced it.
    """
    if a < 1 or d < 0:
        raise ValueError(f"Index needs a >= 1 and d >= 0, got a={a}, d={d}.")

    a_f = float(a)
    d_f = float(d)
    big_delta = delta(params)
    p = params.p

    x = (d_f * big_delta + a_f * (a_f - 1.0) / 2.0) / (a_f - 1.0 + big_delta)
    lhs = d_f * big_delta / a_f
    rhs = (a_f - 1.0) / 2.0 + big_delta

    if lhs >= rhs:
        w = (p / 2.0) * x * x + p * (big_delta - 0.5) * x
        branch = QUADRATIC
    else:
        w = p * d_f * big_delta
        branch = LINEAR

    return IndexValue(w=w, x=x, branch=branch, condition_lhs=lhs, condition_rhs=rhs)


def approx_index_array(
    a: ArrayLike, d: ArrayLike, lam: ArrayLike, p: ArrayLike
) -> npt.NDArray[np.float64]:
    """Element-wise approximate index over arrays of states and parameters.

    Produces exactly the values of approx_index; the per-slot policies use it to
    score every client at once.
    """
    a_f = np.asarray(a, dtype=np.float64)
    d_f = np.asarray(d, dtype=np.float64)
    lam_f = np.asarray(lam, dtype=np.float64)
    p_f = np.asarray(p, dtype=np.float64)

    big_delta = 1.0 / lam_f + (1.0 - p_f) / p_f
    x = (d_f * big_delta + a_f * (a_f - 1.0) / 2.0) / (a_f - 1.0 + big_delta)
    quadratic = (p_f / 2.0) * x * x + p_f * (big_delta - 0.5) * x
    linear = p_f * d_f * big_delta

    return np.where(
        d_f * big_delta / a_f >= (a_f - 1.0) / 2.0 + big_delta, quadratic, linear
    )


def d1_upper(w: float, params: ClientParams) -> float:
    """Upper bound on the threshold of the a = 1 states under subsidy ``w``."""
    if w < 0:
        raise ValueError(f"Subsidy must be nonnegative, got {w}.")
    shift = delta(params) - 0.5
    return math.sqrt(2.0 * w / params.p + shift * shift) - shift


def dstar(w: float, params: ClientParams) -> float:
    """The limiting threshold lambda * W / (lambda + p - p * lambda)."""
    if w < 0:
        raise ValueError(f"Subsidy must be nonnegative, got {w}.")
    lam, p = params.lam, params.p
    return lam * w / (lam + p - p * lam)


def threshold_upper(a: int, w: float, params: ClientParams) -> float:
    """Upper bound on the threshold of the queuing-delay level ``a``.

    The bound has three regimes: levels at or below the a = 1 threshold bound
    interpolate from that bound, and every higher level is bounded by (and
    eventually equal to) W / (p * Delta).
    """
    if a < 1:
        raise ValueError(f"Queuing delay must be positive, got {a}.")

    d1 = d1_upper(w, params)
    if a == 1:
        return d1

    big_delta = delta(params)
    limit = w / (params.p * big_delta)

    if a <= d1:
        return (a - 1) / big_delta * (
            w / (params.p * d1) + (d1 + 1 - a) / 2.0 - big_delta
        ) + d1

    return limit


@attrs.define(frozen=True)
class ThresholdBounds:
    """Threshold bounds of the optimal decoupled policy at one subsidy."""

    w: float
    """The subsidy for passivity."""
    params: ClientParams
    """The client's statistics."""
    d1_upper: float
    """Bound on the a = 1 threshold."""
    dstar: float
    """Limiting threshold."""

    def per_a_upper(self, a: int) -> float:
        """Upper bound on the threshold of level ``a``."""
        return threshold_upper(a, self.w, self.params)


def threshold_bounds(w: float, params: ClientParams) -> ThresholdBounds:
    """Bundle the threshold bounds for subsidy ``w``."""
    return ThresholdBounds(
        w=w, params=params, d1_upper=d1_upper(w, params), dstar=dstar(w, params)
    )


def lower_bound(ps: Sequence[float], n_clients: int) -> float:
    """Lower bound on the average AoI achievable by any policy.

    Parameters
    ----------
    ps
        Channel success probability of every client.
    n_clients
        Number of clients; must equal ``len(ps)``.

    Returns
    -------
    float
        (1 / 2N) * (sum_i 1 / sqrt(p_i))^2 + 1/2.
    """
    if n_clients < 1 or len(ps) != n_clients:
        raise ValueError(
            f"Expected {n_clients} success probabilities, got {len(ps)}."
        )
    for p in ps:
        if not 0.0 < p <= 1.0:
            raise ValueError(f"Success probabilities must lie in (0, 1], got {p}.")

    total = math.fsum(1.0 / math.sqrt(p) for p in ps)
    return total * total / (2.0 * n_clients) + 0.5


@attrs.define(frozen=True)
class PSensitivity:
    """The index of one state evaluated across channel success probabilities."""

    ps: tuple[float, ...]
    """Channel success probabilities evaluated."""
    values: tuple[float, ...]
    """Index value at each probability."""
    slope: float
    """Slope of the least-squares line through the values."""
    intercept: float
    """Intercept of the least-squares line."""
    max_residual: float
    """Largest absolute deviation from that line."""


def p_sensitivity(a: int, d: int, lam: float, ps: Sequence[float]) -> PSensitivity:
    """Fit the index of state (a, d) as a linear function of p.

    Close to p = 1 the index is nearly linear in p; the residual of the fit
    measures how nearly.
    """
    if len(ps) < 2:
        raise ValueError("A linear fit needs at least two probabilities.")

    values = [approx_index(a, d, ClientParams(lam, p)).w for p in ps]
    slope, intercept = np.polyfit(np.asarray(ps), np.asarray(values), 1)
    fitted = slope * np.asarray(ps) + intercept

    return PSensitivity(
        ps=tuple(float(p) for p in ps),
        values=tuple(values),
        slope=float(slope),
        intercept=float(intercept),
        max_residual=float(np.max(np.abs(fitted - np.asarray(values)))),
    )
