"""Infinite-horizon expected total reward ``lim_T E[w_T]`` (linear utility)."""

from __future__ import annotations

import math

import numpy as np

from .chain import ChainAnalysis, ClassType, InducedChain, analyze_chain, induced_chain
from .errors import SingularMatrixError
from .expo import COND_LIMIT
from .mdp import Mdp
from .outcome import ValueOutcome
from .policy import StationaryPolicy
from .probe import limit_probe
from .utility import UtilitySpec

#: Gains (and drift coefficients) with magnitude below this count as zero.
GAIN_TOL = 1e-10


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Stationary law of an irreducible stochastic matrix."""
    n = P.shape[0]
    M = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return pi


def class_gains(chain: InducedChain, analysis: ChainAnalysis) -> list[float]:
    """Long-run average reward of each recurrent class."""
    rbar = chain.expected_reward()
    gains = []
    for comp, kind in zip(analysis.classes, analysis.class_types):
        if kind is ClassType.ZERO:
            gains.append(0.0)
            continue
        idx = list(comp)
        pi = stationary_distribution(chain.P[np.ix_(idx, idx)])
        gains.append(float(pi @ rbar[idx]))
    return gains


def _sign(x: float, scale: float) -> int:
    if x > GAIN_TOL * scale:
        return 1
    if x < -GAIN_TOL * scale:
        return -1
    return 0


def linear_infinite_value(mdp: Mdp, pi: StationaryPolicy, *, T_max: int | None = None,
                          eps: float = 1e-8) -> dict[str, ValueOutcome]:
    """Per-state ``lim_T E[w_T]`` as an extended real, or non-existence.

    States that only reach zero-reward classes get the finite expected
    transient reward ``((I - Q)^-1 r)(s)``. Otherwise ``E[w_T]`` grows like
    ``c(s) * T`` with ``c(s) = sum_k h_k(s) g_k`` (absorption probabilities
    times class gains); ``c(s) != 0`` decides ``+-inf``. The remaining
    states (``c(s) = 0`` with rewarding classes reachable) are probed
    numerically.
    """
    chain = induced_chain(mdp, pi)
    analysis = analyze_chain(chain)
    gains = class_gains(chain, analysis)
    rbar = chain.expected_reward()
    scale = max(1.0, float(np.max(np.abs(chain.reward))) if chain.reward.size else 1.0)
    n = chain.n
    T = list(analysis.transient)
    if T:
        M = np.eye(len(T)) - chain.P[np.ix_(T, T)]
        if np.linalg.cond(M) > COND_LIMIT:
            raise SingularMatrixError("fundamental matrix (I - Q) is numerically singular")
        fund_r = np.linalg.solve(M, rbar[T])
        into = np.stack([chain.P[np.ix_(T, list(c))].sum(axis=1) for c in analysis.classes],
                        axis=1)
        absorb = np.linalg.solve(M, into)
    result: list[ValueOutcome | None] = [None] * n
    for s in range(n):
        k = analysis.class_of[s]
        if k >= 0:
            kind = analysis.class_types[k]
            sg = _sign(gains[k], scale)
            if kind is ClassType.ZERO:
                result[s] = ValueOutcome.of(0.0)
            elif sg:
                result[s] = ValueOutcome.of(sg * math.inf)
            continue
        reached = analysis.reach[s]
        pos = T.index(s)
        if all(analysis.class_types[j] is ClassType.ZERO for j in reached):
            result[s] = ValueOutcome.of(float(fund_r[pos]))
            continue
        drift = sum(absorb[pos, j] * gains[j] for j in reached)
        sg = _sign(drift, scale)
        if sg:
            result[s] = ValueOutcome.of(sg * math.inf)
    if any(r is None for r in result):
        probed = limit_probe(mdp, pi, UtilitySpec.linear(), T_max, eps)
        for s in range(n):
            if result[s] is None:
                result[s] = probed[mdp.states[s]]
    return dict(zip(mdp.states, result))
