"""Strong-stability-preserving Runge-Kutta integration.

The four-stage third-order SSP scheme in Shu-Osher form, with stage
times (0, 1/2, 1, 1/2)*dt. A post-stage callback runs after every stage
so positivity limiting and dry-node fixes apply to each intermediate
state, which keeps every convex building block admissible.
"""

import numpy as np


def ssprk43_step(u, t, dt, rhs, post=None):
    """Advance one step: u may be any ndarray state; rhs(u, t) returns
    du/dt; post(u) mutates a stage state in place. Returns the new state
    (input is never modified)."""

    def fix(w):
        if post is not None:
            post(w)
        return w

    u1 = fix(u + 0.5 * dt * rhs(u, t))
    u2 = fix(u1 + 0.5 * dt * rhs(u1, t + 0.5 * dt))
    u3 = fix((2.0 / 3.0) * u + (1.0 / 3.0) * (u2 + 0.5 * dt * rhs(u2, t + dt)))
    return fix(u3 + 0.5 * dt * rhs(u3, t + 0.5 * dt))


def clamp_dt(dt, t, target):
    """Shrink dt to land exactly on target (next output time or t_end).

    Splits the final interval in two when one stretched step would
    overshoot by less than half a step, avoiding sliver steps.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    remaining = target - t
    if remaining <= 0.0:
        return 0.0
    if dt >= remaining:
        return remaining
    if 1.5 * dt >= remaining:
        return 0.5 * remaining
    return dt
