"""Largest and smallest total reward reachable along a policy's support graph.

Rewards are converted to exact fractions (via their shortest decimal
representation) so that cycle signs are decided without rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chain import induced_chain
from .linalg import reachable_from, strong_components
from .mdp import Mdp
from .policy import StationaryPolicy


@dataclass(frozen=True)
class ExtremeRewards:
    states: tuple[str, ...]
    v_max: dict[str, float]
    v_min: dict[str, float]


def _exact(r: float) -> Fraction:
    return Fraction(repr(float(r)))


def _has_positive_cycle(comp, edges) -> bool:
    """Bellman-Ford (longest path) inside one strongly connected component."""
    members = set(comp)
    inner = [(i, j, w) for i, j, w in edges if i in members and j in members]
    if not inner:
        return False
    dist = {i: Fraction(0) for i in comp}
    for _ in range(len(comp)):
        changed = False
        for i, j, w in inner:
            if dist[i] + w > dist[j]:
                dist[j] = dist[i] + w
                changed = True
        if not changed:
            return False
    return any(dist[i] + w > dist[j] for i, j, w in inner)


def _sup_walk(n, edges, adj) -> list[float]:
    """``sup`` of the total reward over all walks with at least one step."""
    bad = np.zeros(n, dtype=bool)
    for comp in strong_components(adj):
        if _has_positive_cycle(comp, edges):
            bad[comp] = True
    reach = reachable_from(adj)
    unbounded = (reach & bad[None, :]).any(axis=1)
    ok = [i for i in range(n) if not unbounded[i]]
    out = {i: math.inf for i in range(n) if unbounded[i]}
    if ok:
        okset = set(ok)
        succ = {i: [(j, w) for a, j, w in edges if a == i] for i in ok}
        assert all(j in okset for i in ok for j, _ in succ[i])
        # V_t(i): best total over walks of exactly t steps; walks of <= n steps suffice
        V = {i: max(w for _, w in succ[i]) for i in ok}
        best = dict(V)
        for _ in range(n - 1):
            V = {i: max(w + V[j] for j, w in succ[i]) for i in ok}
            for i in ok:
                if V[i] > best[i]:
                    best[i] = V[i]
        for i in ok:
            out[i] = float(best[i])
    return [out[i] for i in range(n)]


def extreme_total_reward(mdp: Mdp, pi: StationaryPolicy) -> ExtremeRewards:
    """``v_max(s)`` and ``v_min(s)`` over trajectories of any finite length >= 1.

    ``v_max(s) = +inf`` iff a cycle with positive total reward is reachable
    from ``s``; otherwise the best walk has at most ``|S|`` steps (any longer
    walk is a path plus non-positive cycles). ``v_min`` is symmetric.
    """
    chain = induced_chain(mdp, pi)
    n = chain.n
    edges = [(int(i), int(j), _exact(r)) for i, j, r in zip(chain.src, chain.dst, chain.reward)]
    adj = chain.support
    vmax = _sup_walk(n, edges, adj)
    neg = [(i, j, -w) for i, j, w in edges]
    vmin = [-v for v in _sup_walk(n, neg, adj)]
    return ExtremeRewards(mdp.states, dict(zip(mdp.states, vmax)),
                          dict(zip(mdp.states, vmin)))
