"""Markov chains induced by stationary policies.

Recurrent classes are found structurally: in a finite chain they are exactly
the closed strongly connected components of the support graph, so no
numerical tolerance is involved. Each class is typed by an exact sign scan
of the rewards on its internal transitions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linalg import reachable_from, spectral_radius, strong_components
from .mdp import Mdp, RewardSign, classify_rewards
from .policy import StationaryPolicy


class ClassType(enum.Enum):
    ZERO = "zero"
    POSITIVE = "positive"
    NEGATIVE = "negative"
    MIXED = "mixed"


_SIGN_TO_TYPE = {
    RewardSign.ALL_ZERO: ClassType.ZERO,
    RewardSign.POSITIVE: ClassType.POSITIVE,
    RewardSign.NEGATIVE: ClassType.NEGATIVE,
    RewardSign.MIXED: ClassType.MIXED,
}


@dataclass(frozen=True)
class InducedChain:
    """Transition matrix of ``mdp`` under ``pi`` plus unaggregated edge data.

    The edge arrays hold one entry per (action, transition) pair with
    positive weight: ``share = pi(s, a) * P(s'|s, a)``.
    """

    states: tuple[str, ...]
    P: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    share: np.ndarray
    reward: np.ndarray

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def support(self) -> np.ndarray:
        return self.P > 0

    def expected_reward(self) -> np.ndarray:
        """Expected immediate reward ``r_bar(s)`` of each state."""
        return np.bincount(self.src, weights=self.share * self.reward, minlength=self.n)

    def contributions(self) -> dict[tuple[str, str], list[tuple[float, float]]]:
        """``(s, s') -> [(probability share, reward), ...]``."""
        out: dict[tuple[str, str], list[tuple[float, float]]] = {}
        for i, j, p, r in zip(self.src, self.dst, self.share, self.reward):
            out.setdefault((self.states[i], self.states[j]), []).append((float(p), float(r)))
        return out


def induced_chain(mdp: Mdp, pi: StationaryPolicy) -> InducedChain:
    pi.check(mdp)
    idx = mdp.index
    src, dst, share, reward = [], [], [], []
    for s in mdp.states:
        for a, pa in pi.distribution(s).items():
            for t in mdp.transitions[(s, a)]:
                src.append(idx[s])
                dst.append(idx[t.target])
                share.append(pa * t.prob)
                reward.append(t.reward)
    n = mdp.n_states
    src_a = np.array(src, dtype=np.intp)
    dst_a = np.array(dst, dtype=np.intp)
    share_a = np.array(share, dtype=float)
    P = np.zeros((n, n))
    np.add.at(P, (src_a, dst_a), share_a)
    return InducedChain(mdp.states, P, src_a, dst_a, share_a, np.array(reward, dtype=float))


@dataclass(frozen=True)
class ChainAnalysis:
    """Recurrent/transient structure of an induced chain (state indices)."""

    states: tuple[str, ...]
    classes: tuple[tuple[int, ...], ...]
    transient: tuple[int, ...]
    class_types: tuple[ClassType, ...]
    class_of: tuple[int, ...]  # -1 for transient states
    reach: tuple[frozenset[int], ...]  # reachable class indices per state
    reach_states: np.ndarray  # boolean reachability between states

    def class_names(self) -> list[frozenset[str]]:
        return [frozenset(self.states[i] for i in c) for c in self.classes]

    def transient_names(self) -> frozenset[str]:
        return frozenset(self.states[i] for i in self.transient)

    def type_of(self, state: str) -> ClassType | None:
        k = self.class_of[self.states.index(state)]
        return None if k < 0 else self.class_types[k]

    @property
    def recurrent_mask(self) -> np.ndarray:
        return np.array(self.class_of) >= 0


def analyze_chain(chain: InducedChain) -> ChainAnalysis:
    adj = chain.support
    n = chain.n
    comps = strong_components(adj)
    classes = []
    for comp in comps:
        members = set(comp)
        closed = all(members.issuperset(np.flatnonzero(adj[i])) for i in comp)
        if closed:
            classes.append(tuple(comp))
    class_of = [-1] * n
    for k, comp in enumerate(classes):
        for i in comp:
            class_of[i] = k
    types = []
    for k, comp in enumerate(classes):
        inside = np.array([class_of[i] == k for i in chain.src], dtype=bool)
        types.append(_SIGN_TO_TYPE[classify_rewards(chain.reward[inside])])
    reach_states = reachable_from(adj)
    reach = tuple(
        frozenset(class_of[j] for j in np.flatnonzero(reach_states[i]) if class_of[j] >= 0)
        for i in range(n)
    )
    transient = tuple(i for i in range(n) if class_of[i] < 0)
    return ChainAnalysis(chain.states, tuple(classes), transient, tuple(types),
                         tuple(class_of), reach, reach_states)


@dataclass(frozen=True)
class DecayDiagnostics:
    """Empirical constants for geometric decay of the transient mass.

    ``max_s P(s_t transient) <= a * rho**t`` holds for every probed ``t``;
    ``b`` bounds the probability of entering the recurrent states at step
    ``t + 1`` and ``entry[k]`` the probability of entering class ``k``.
    """

    rho: float
    a: float
    b: float
    entry: dict[int, float]
    t_probe: int
    mass: np.ndarray  # (t_probe + 1, n) transient mass per start state


def _fit(values: np.ndarray, rho: float) -> float:
    """Smallest ``c`` with ``values[t] <= c * rho**t`` for all ``t``."""
    best = 0.0
    for t, v in enumerate(values):
        if v <= 0:
            continue
        best = max(best, math.exp(math.log(v) - t * math.log(rho)))
    return best


def transient_decay(chain: InducedChain, analysis: ChainAnalysis,
                    t_probe: int = 200) -> DecayDiagnostics:
    """Rate ``rho`` and constant ``a`` of the geometric transient-mass decay.

    ``rho`` is the spectral radius of the transient block of ``P``. When
    that block is nilpotent any rate in (0, 1) is valid and 0.5 is reported.
    Without transient states the result is ``rho = 0, a = 1`` by convention.
    """
    n = chain.n
    T = list(analysis.transient)
    if not T:
        return DecayDiagnostics(0.0, 1.0, 0.0, {}, t_probe, np.zeros((t_probe + 1, n)))
    Q = chain.P[np.ix_(T, T)]
    rho = spectral_radius(Q)
    if rho < 1e-12:
        rho = 0.5
    rho = min(rho, 1.0 - 1e-15)
    # mass[t, s] = P^s(s_t transient); entries[t, s, k] = P^s(s_t trans., s_{t+1} in class k)
    into = np.stack([chain.P[np.ix_(T, list(c))].sum(axis=1) for c in analysis.classes], axis=1)
    x = np.eye(len(T))
    mass = np.zeros((t_probe + 1, n))
    entries = np.zeros((t_probe + 1, n, len(analysis.classes)))
    for t in range(t_probe + 1):
        # rows of x: start states; columns: transient state occupied at time t
        mass[t, T] = x.sum(axis=1)
        entries[t, T, :] = x @ into
        x = x @ Q
    a = max(_fit(mass[:, s], rho) for s in range(n))
    total_entry = entries.sum(axis=2)
    b = max(_fit(total_entry[:, s], rho) for s in range(n))
    entry = {k: max(_fit(entries[:, s, k], rho) for s in range(n))
             for k in range(len(analysis.classes))}
    return DecayDiagnostics(rho, a, b, entry, t_probe, mass)
