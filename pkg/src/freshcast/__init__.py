"""Freshcast: Age-of-Information Scheduling for Broadcast Networks.

Freshcast schedules status updates from a base station to many clients over
unreliable links when fresh packets arrive at random. It ships the approximate
Whittle index policy and the closed-form quantities around it, an exact
average-cost MDP oracle that checks the structure of the optimal decoupled
policy, and a reproducible slotted simulator with experiment presets.

"""

from freshcast.__version__ import VERSION

__all__ = [
    "VERSION",
]
