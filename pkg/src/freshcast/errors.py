"""Freshcast exceptions.

Every error raised on purpose by the library derives from FreshcastError so that
front ends can map whole families of failures onto exit codes.

"""

from __future__ import annotations

from typing import Any, Sequence


class FreshcastError(Exception):
    """Base class for all library errors."""

    __slots__ = ("message",)

    message: str
    """An error message."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return self.message

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(message={self.message!r})"


class ConfigError(FreshcastError, ValueError):
    """Exception raised when an experiment configuration is malformed."""

    __slots__ = ("source",)

    source: str
    """Where the offending configuration came from (file path or key)."""

    def __init__(self, message: str, source: str = "") -> None:
        """
        Parameters
        ----------
        message
            What is wrong with the configuration.
        source
            The file or key that holds the bad value.
        """
        super().__init__(f"{source}: {message}" if source else message)
        self.source = source


class UnknownPolicyError(FreshcastError, KeyError):
    """Exception raised when a policy name is not registered."""

    __slots__ = ("policy_name", "known")

    policy_name: str
    """The requested policy name."""
    known: tuple[str, ...]
    """Registered policy names."""

    def __init__(self, policy_name: str, known: Sequence[str]) -> None:
        self.policy_name = policy_name
        self.known = tuple(known)
        super().__init__(
            f"Could not find policy with name: {policy_name}. "
            f"Known policies: {', '.join(self.known)}."
        )

    def __str__(self) -> str:
        return self.message

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(policy_name={self.policy_name!r})"


class HorizonOverflowError(FreshcastError, ValueError):
    """Exception raised when a horizon exceeds the supported slot count."""

    __slots__ = ("horizon", "limit")

    horizon: int
    """The requested horizon."""
    limit: int
    """The largest supported horizon."""

    def __init__(self, horizon: int, limit: int) -> None:
        self.horizon = horizon
        self.limit = limit
        super().__init__(
            f"Horizon of {horizon} slots exceeds the supported maximum of {limit}."
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(horizon={self.horizon})"


class NonConvergenceError(FreshcastError):
    """Exception raised when value iteration fails to reach its tolerance."""

    __slots__ = ("iterations", "span")

    iterations: int
    """Iterations performed before giving up."""
    span: float
    """Span of the last bias update."""

    def __init__(self, iterations: int, span: float, tol: float) -> None:
        self.iterations = iterations
        self.span = span
        super().__init__(
            f"Value iteration did not converge after {iterations} iterations "
            f"(span {span:.3e} >= tol {tol:.3e})."
        )

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}(iterations={self.iterations}, "
            f"span={self.span})"
        )


class TruncationError(FreshcastError):
    """Exception raised when a truncated state space is too small."""


class BracketError(FreshcastError):
    """Exception raised when a state stays active at the top of the W bracket."""

    __slots__ = ("state", "w_hi")

    state: tuple[int, int]
    """The (a, d) state being indexed."""
    w_hi: float
    """Upper end of the bracket."""

    def __init__(self, state: tuple[int, int], w_hi: float) -> None:
        self.state = state
        self.w_hi = w_hi
        super().__init__(
            f"State (a={state[0]}, d={state[1]}) is still active at W={w_hi:.9g}."
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(state={self.state}, w_hi={self.w_hi})"


class IndexabilityError(FreshcastError):
    """Exception raised when the passive set is not monotone in the subsidy."""

    __slots__ = ("state", "probes")

    state: tuple[int, int]
    """The (a, d) state being indexed."""
    probes: tuple[tuple[float, bool], ...]
    """Probe sequence as (W, passive) pairs."""

    def __init__(self, state: tuple[int, int], probes: Sequence[Any]) -> None:
        self.state = state
        self.probes = tuple((float(w), bool(passive)) for w, passive in probes)
        super().__init__(
            f"State (a={state[0]}, d={state[1]}) is passive at a lower subsidy "
            f"but active at a higher one; probes={list(self.probes)}."
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(state={self.state})"
