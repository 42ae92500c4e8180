"""Exact finite-horizon expected utilities ``E[U(w_T)]`` for stationary policies.

Three exact routes exist:

* ``matrix``: exponential utilities, via powers of the gamma-weighted matrix;
* ``atoms``: any utility, by propagating the joint law of (state, total
  reward) and merging equal atoms;
* ``enumerate``: any utility, by listing every length-T trajectory.

``linear`` utilities additionally use the recursion ``v_T = r + P v_{T-1}``.
"""

from __future__ import annotations

import math

import numpy as np

from .chain import InducedChain, induced_chain
from .errors import BudgetExceededError
from .mdp import Mdp
from .outcome import ValueVector
from .policy import StationaryPolicy
from .utility import UtilitySpec, evaluate_utility

DEFAULT_BUDGET = 10**7


def _out_edges(chain: InducedChain):
    out = [[] for _ in range(chain.n)]
    for i, j, p, r in zip(chain.src, chain.dst, chain.share, chain.reward):
        out[i].append((int(j), float(p), float(r)))
    return out


def enumerate_trajectories(chain: InducedChain, start: int, T: int):
    """Yield ``(probability, total reward, final state)`` for every trajectory."""
    out = _out_edges(chain)

    def walk(s, t, p, w):
        if t == T:
            yield p, w, s
            return
        for j, q, r in out[s]:
            yield from walk(j, t + 1, p * q, w + r)

    yield from walk(start, 0, 1.0, 0.0)


def enumeration_cost(chain: InducedChain, T: int) -> int:
    branching = max(np.bincount(chain.src, minlength=chain.n))
    return T * int(branching) ** T


def wealth_distribution(chain: InducedChain, start: int, T: int,
                        budget: int = DEFAULT_BUDGET):
    """Law of ``(s_t, w_t)`` for ``t = 0..T`` as a list of ``{(s, w): p}`` dicts."""
    out = _out_edges(chain)
    dist = {(start, 0.0): 1.0}
    laws = [dist]
    work = 0
    for _ in range(T):
        nxt: dict[tuple[int, float], float] = {}
        for (s, w), p in dist.items():
            for j, q, r in out[s]:
                key = (j, w + r)
                nxt[key] = nxt.get(key, 0.0) + p * q
        work += len(nxt)
        if work > budget:
            raise BudgetExceededError(
                f"wealth distribution exceeds the budget of {budget} atoms; "
                "use the simulate module for an estimate"
            )
        dist = nxt
        laws.append(dist)
    return laws


def _expected_utility(u, law) -> float:
    if not law:
        return 0.0
    probs = np.fromiter(law.values(), float)
    wealth = np.fromiter((w for _, w in law), float)
    return float(np.dot(probs, evaluate_utility(u, wealth)))


def linear_series(chain: InducedChain, T_max: int) -> np.ndarray:
    """``E[w_T]`` for ``T = 1..T_max`` (rows) and every start state (columns)."""
    rbar = chain.expected_reward()
    v = np.zeros(chain.n)
    out = np.empty((T_max, chain.n))
    for t in range(T_max):
        v = rbar + chain.P @ v
        out[t] = v
    return out


def finite_horizon_eu(mdp: Mdp, pi: StationaryPolicy, u: UtilitySpec, T: int,
                      method: str = "auto", budget: int = DEFAULT_BUDGET) -> ValueVector:
    """Exact ``v_{U,T}(s)`` for every state.

    Parameters
    ----------
    method : {"auto", "matrix", "atoms", "enumerate", "linear"}
        ``auto`` picks ``matrix`` for exponential, ``linear`` for linear and
        ``atoms`` for piecewise utilities.
    budget : int
        Work limit in trajectory-steps (``enumerate``) or atoms (``atoms``).

    Raises
    ------
    BudgetExceededError
        If the chosen enumeration would exceed ``budget``.
    """
    if T < 1:
        raise ValueError("horizon T must be >= 1")
    if method == "auto":
        method = {"exponential": "matrix", "linear": "linear"}.get(u.form, "atoms")
    chain = induced_chain(mdp, pi)
    if method == "matrix":
        if u.form != "exponential":
            raise ValueError("the matrix method needs an exponential utility")
        from .expo import exp_finite_horizon, exp_matrix

        return exp_finite_horizon(exp_matrix(mdp, pi, u.gamma), T)
    if method == "linear":
        if u.form != "linear":
            raise ValueError("the linear method needs a linear utility")
        vals = linear_series(chain, T)[-1]
    elif method == "atoms":
        vals = np.array([
            _expected_utility(u, _collapse(wealth_distribution(chain, s, T, budget)[-1]))
            for s in range(chain.n)
        ])
    elif method == "enumerate":
        cost = enumeration_cost(chain, T) * chain.n
        if cost > budget:
            raise BudgetExceededError(
                f"enumerating {cost} trajectory-steps exceeds the budget of {budget}; "
                "use the simulate module for an estimate"
            )
        vals = np.empty(chain.n)
        for s in range(chain.n):
            acc = math.fsum(p * evaluate_utility(u, w) for p, w, _ in
                            enumerate_trajectories(chain, s, T))
            vals[s] = acc
    else:
        raise ValueError(f"unknown method {method!r}")
    return ValueVector(mdp.states, vals, T, u.describe())


def _collapse(law):
    """Marginalize the state out of a ``{(s, w): p}`` law, keyed as ``{(None, w): p}``."""
    out: dict[tuple[None, float], float] = {}
    for (_, w), p in law.items():
        out[(None, w)] = out.get((None, w), 0.0) + p
    return out


def horizon_series(mdp: Mdp, pi: StationaryPolicy, u: UtilitySpec, T_max: int,
                   budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """``v_{U,T}(s)`` for ``T = 1..T_max`` as a ``(T_max, n)`` array.

    Exponential sequences stop early (remaining rows set to ``+-inf``) once
    the matrix powers overflow.
    """
    chain = induced_chain(mdp, pi)
    if u.form == "linear":
        return linear_series(chain, T_max)
    if u.form == "exponential":
        from .expo import exp_matrix

        D = exp_matrix(mdp, pi, u.gamma).D
        x = np.ones(chain.n)
        out = np.empty((T_max, chain.n))
        with np.errstate(over="ignore", invalid="ignore"):
            for t in range(T_max):
                x = D @ x
                x[np.isnan(x)] = np.inf
                out[t] = u.iota * x
        return out
    out = np.empty((T_max, chain.n))
    for s in range(chain.n):
        laws = wealth_distribution(chain, s, T_max, budget)
        for t in range(1, T_max + 1):
            out[t - 1, s] = _expected_utility(u, _collapse(laws[t]))
    return out
