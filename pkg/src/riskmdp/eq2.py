"""Split ``v_{U,T}(s)`` by when trajectories first enter a recurrent state.

For every horizon ``T`` the expected utility is the sum of

1. the transient term: trajectories still outside the recurrent states;
2. the entry term: utility of the total reward at first entry;
3. the post-entry term: utility gained (or lost) after the first entry.

Exponential utilities get analytic limits for each term; bounded piecewise
utilities are classified numerically from the horizon series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ClassType, analyze_chain, induced_chain
from .errors import IncompatibleUtilityError
from .expo import ETA, _class_limits, _solve, exp_infinite_value, exp_matrix, hat_decompose
from .horizon import DEFAULT_BUDGET, _out_edges
from .errors import BudgetExceededError
from .linalg import spectral_radius
from .mdp import Mdp
from .outcome import ValueOutcome
from .policy import StationaryPolicy
from .probe import classify_sequence, limit_probe
from .utility import UtilitySpec, evaluate_utility

TERMS = ("transient", "entry", "post_entry")


@dataclass(frozen=True)
class Eq2Decomposition:
    """Per-horizon terms and their limits.

    ``series[T-1, i, k]`` is term ``k`` at horizon ``T`` for state ``i``.
    ``limits[state]`` is the triple of term limits; ``recombined[state]`` is
    their sum when all three exist (and do not cancel as ``inf - inf``),
    otherwise the directly computed value.
    """

    states: tuple[str, ...]
    series: np.ndarray
    limits: dict[str, tuple[ValueOutcome, ValueOutcome, ValueOutcome]]
    recombined: dict[str, ValueOutcome]
    from_terms: dict[str, bool]


def _add(outcomes):
    vals = [o.value for o in outcomes]
    if math.inf in vals and -math.inf in vals:
        return None
    return sum(vals)


def _exp_series(mdp, pi, u, T_probe):
    m = exp_matrix(mdp, pi, u.gamma)
    analysis = analyze_chain(induced_chain(mdp, pi))
    hat = hat_decompose(m, analysis)
    rec = analysis.recurrent_mask
    n = len(mdp.states)
    out = np.empty((T_probe, n, 3))
    H = np.eye(n)
    x = np.ones(n)
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T_probe):
            H = H @ hat.hat
            x = m.D @ x
            t1 = u.iota * H[:, ~rec].sum(axis=1)
            t2 = u.iota * H[:, rec].sum(axis=1)
            out[t, :, 0] = t1
            out[t, :, 1] = t2
            out[t, :, 2] = u.iota * x - t1 - t2
    return m, analysis, out


def _exp_limits(m, analysis, s, eta, series):
    """Analytic limits of the three terms for state index ``s`` (None = numeric)."""
    iota = m.iota
    limits = _class_limits(m, analysis, eta)
    k = analysis.class_of[s]

    def post(L, weight):
        if L is None:
            return None
        if L == math.inf:
            return iota * math.inf if weight > 0 else 0.0
        return iota * weight * (L - 1.0)

    if k >= 0:
        p = post(limits[k], 1.0)
        return 0.0, float(iota), p
    rec = analysis.recurrent_mask
    T_s = np.flatnonzero(analysis.reach_states[s] & ~rec)
    A = m.D[np.ix_(T_s, T_s)]
    rho = spectral_radius(A)
    if rho > 1 + eta:
        return iota * math.inf, iota * math.inf, None
    if rho >= 1 - eta:
        return None, None, None
    R = np.flatnonzero(rec)
    M = _solve(A, m.D[np.ix_(T_s, R)])
    row = M[int(np.flatnonzero(T_s == s)[0])]
    entry = iota * float(row.sum())
    parts = []
    for j, w in zip(R, row):
        if w == 0:
            continue
        p = post(limits[analysis.class_of[j]], w)
        if p is None:
            return 0.0, entry, None
        parts.append(p)
    if any(p == math.inf for p in parts) or any(p == -math.inf for p in parts):
        total = next(p for p in parts if math.isinf(p))
    else:
        total = math.fsum(parts)
    return 0.0, entry, total


def _piecewise_series(mdp, pi, u, T_probe, budget):
    chain = induced_chain(mdp, pi)
    analysis = analyze_chain(chain)
    rec = analysis.recurrent_mask
    out_edges = _out_edges(chain)
    n = chain.n
    out = np.zeros((T_probe, n, 3))
    work = 0
    for s in range(n):
        dist = {(s, 0.0, 0.0 if rec[s] else None): 1.0}
        for t in range(T_probe):
            nxt: dict = {}
            for (i, w, wt), p in dist.items():
                for j, q, r in out_edges[i]:
                    w2 = w + r
                    wt2 = wt if wt is not None else (w2 if rec[j] else None)
                    key = (j, w2, wt2)
                    nxt[key] = nxt.get(key, 0.0) + p * q
            work += len(nxt)
            if work > budget:
                raise BudgetExceededError(f"decomposition exceeds the budget of {budget} atoms")
            dist = nxt
            probs = np.fromiter(dist.values(), float)
            w_now = np.array([k[1] for k in dist])
            entered = np.array([k[2] is not None for k in dist])
            w_tau = np.array([k[2] if k[2] is not None else 0.0 for k in dist])
            u_now = evaluate_utility(u, w_now)
            u_tau = evaluate_utility(u, w_tau)
            out[t, s, 0] = probs[~entered] @ u_now[~entered]
            out[t, s, 1] = probs[entered] @ u_tau[entered]
            out[t, s, 2] = probs[entered] @ (u_now - u_tau)[entered]
    return analysis, out


def decompose_eq2(mdp: Mdp, pi: StationaryPolicy, u: UtilitySpec, T_probe: int = 200,
                  *, eta: float = ETA, eps: float = 1e-8,
                  budget: int = DEFAULT_BUDGET) -> Eq2Decomposition:
    """Three-term decomposition of the expected utility by first recurrent entry.

    Raises
    ------
    IncompatibleUtilityError
        Unless ``u`` is exponential or piecewise with two constant tails.
    """
    if T_probe < 1:
        raise ValueError("T_probe must be >= 1")
    tail = min(50, max(2, T_probe // 2))
    if u.form == "exponential":
        m, analysis, series = _exp_series(mdp, pi, u, T_probe)
        direct = exp_infinite_value(mdp, pi, u.gamma, eta=eta, eps=eps)
        analytic = True
    elif u.form == "piecewise" and u.left_tail == "constant" and u.right_tail == "constant":
        analysis, series = _piecewise_series(mdp, pi, u, T_probe, budget)
        direct = limit_probe(mdp, pi, u, T_probe, eps)
        analytic = False
    else:
        raise IncompatibleUtilityError(
            "decomposition supports exponential and bounded piecewise utilities only"
        )
    limits = {}
    recombined = {}
    from_terms = {}
    for i, s in enumerate(mdp.states):
        exact = _exp_limits(m, analysis, i, eta, series) if analytic else (None, None, None)
        triple = []
        for k in range(3):
            if exact[k] is not None:
                triple.append(ValueOutcome.of(exact[k]))
            else:
                triple.append(classify_sequence(series[:, i, k], eps, tail=tail))
        limits[s] = tuple(triple)
        total = _add(triple) if all(o.exists for o in triple) else None
        if total is None:
            recombined[s] = direct[s]
            from_terms[s] = False
        else:
            recombined[s] = ValueOutcome.of(total, numeric=any(o.numeric for o in triple))
            from_terms[s] = True
    return Eq2Decomposition(mdp.states, series, limits, recombined, from_terms)
