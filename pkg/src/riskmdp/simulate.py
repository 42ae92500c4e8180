"""Monte Carlo estimates of finite-horizon expected utilities.

Only finite horizons are sampled: a finite sample cannot tell a large value
from an infinite one, or a slow oscillation from convergence.

Randomness comes from a Philox counter-based generator keyed by
``(seed, step)``; within a step, trajectory ``i`` consumes the ``i``-th
output. An estimate therefore depends only on ``(inputs, seed)`` and not on
platform or evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import induced_chain
from .mdp import Mdp
from .policy import StationaryPolicy
from .utility import UtilitySpec, evaluate_utility


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    stderr: float
    n: int
    T: int
    seed: int


def _step_uniforms(seed: int, t: int, n: int) -> np.ndarray:
    key = np.array([seed, t], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key)).random(n)


def _tables(mdp: Mdp, pi: StationaryPolicy):
    """Padded per-state CDF, successor and reward tables for the induced chain."""
    chain = induced_chain(mdp, pi)
    n = chain.n
    width = max(int(np.max(np.bincount(chain.src, minlength=n))), 1)
    cdf = np.full((n, width), 2.0)  # padding is never <= a uniform in [0, 1)
    dst = np.zeros((n, width), dtype=np.int64)
    rew = np.zeros((n, width))
    for s in range(n):
        rows = np.flatnonzero(chain.src == s)
        c = np.cumsum(chain.share[rows])
        c[-1] = 1.0
        # entry k holds the CDF *before* outcome k+1, so counting entries <= u picks it
        cdf[s, : len(rows) - 1] = c[:-1]
        dst[s, : len(rows)] = chain.dst[rows]
        rew[s, : len(rows)] = chain.reward[rows]
    return cdf, dst, rew


def rollout(mdp: Mdp, pi: StationaryPolicy, start: str, T: int, n: int, seed: int,
            record_states: bool = False):
    """Simulate ``n`` trajectories of length ``T`` from ``start``.

    Returns the total rewards ``w_T`` and, if ``record_states``, the
    ``(T + 1, n)`` matrix of visited state indices.
    """
    cdf, dst, rew = _tables(mdp, pi)
    state = np.full(n, mdp.index[start], dtype=np.int64)
    wealth = np.zeros(n)
    path = np.empty((T + 1, n), dtype=np.int64) if record_states else None
    if record_states:
        path[0] = state
    for t in range(T):
        u = _step_uniforms(seed, t, n)
        k = np.count_nonzero(cdf[state] <= u[:, None], axis=1)
        wealth += rew[state, k]
        state = dst[state, k]
        if record_states:
            path[t + 1] = state
    return wealth, path


def sample_eu(mdp: Mdp, pi: StationaryPolicy, s: str, u: UtilitySpec, T: int, n: int,
              seed: int) -> SimEstimate:
    """Estimate ``E[U(w_T)]`` from state ``s`` with ``n`` seeded rollouts.

    ``stderr`` is the sample standard deviation (``ddof=1``) over ``sqrt(n)``.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    if T < 1:
        raise ValueError("horizon T must be >= 1")
    wealth, _ = rollout(mdp, pi, s, T, n, seed)
    utils = np.asarray(evaluate_utility(u, wealth), dtype=float)
    mean = float(np.mean(utils))
    stderr = float(np.std(utils, ddof=1)) / math.sqrt(n)
    return SimEstimate(mean, stderr, n, T, seed)


def transient_fraction(mdp: Mdp, pi: StationaryPolicy, s: str, T: int, n: int, seed: int,
                       recurrent: np.ndarray) -> np.ndarray:
    """Fraction of rollouts outside the recurrent states at each step ``0..T``."""
    _, path = rollout(mdp, pi, s, T, n, seed, record_states=True)
    return (~recurrent[path]).mean(axis=1)
