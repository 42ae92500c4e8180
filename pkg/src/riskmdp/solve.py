"""Optimal stationary deterministic policies for exponential utilities on
positive and negative MDPs, by multiplicative value iteration."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, PreconditionError, UtilityRangeError
from .expo import exp_infinite_value
from .mdp import Mdp, RewardSign, reward_sign
from .outcome import ValueVector
from .policy import StationaryPolicy, enumerate_sd_policies
from .utility import EXP_LIMIT

#: Upper bound on tied-action combinations tried when repairing a greedy policy.
TIE_GUARD = 10**4


@dataclass(frozen=True)
class Solution:
    policy: StationaryPolicy
    values: ValueVector
    residual: float
    iterations: int
    exact: bool  # values come from an exact evaluation of ``policy``


def _finite_over_sd(mdp, gamma, quantifier, guard):
    """(holds, witness policy) for C8 (``all``) or C9 (``any``)."""
    witness = None
    for pi in enumerate_sd_policies(mdp, guard):
        vals = exp_infinite_value(mdp, pi, gamma)
        ok = all(v.is_finite for v in vals.values())
        if quantifier == "all" and not ok:
            return False, pi
        if quantifier == "any" and ok:
            return True, pi
        witness = pi
    return quantifier == "all", witness


def check_solve_precondition(mdp: Mdp, gamma: float, guard: int | None = None) -> str:
    """Return a description of the applicable finiteness case or raise."""
    sign = reward_sign(mdp)
    if sign is RewardSign.ALL_ZERO:
        return "all rewards are zero"
    if sign is RewardSign.MIXED:
        raise PreconditionError("rewards of both signs: optimal SD policies are not guaranteed")
    if sign is RewardSign.POSITIVE:
        if gamma < 1:
            return "positive MDP with 0 < gamma < 1"
        holds, pi = _finite_over_sd(mdp, gamma, "all", guard)
        if not holds:
            raise PreconditionError(
                f"positive MDP with gamma > 1 but C8 fails (policy {pi.describe()} "
                "has an infinite value)"
            )
        return "positive MDP with gamma > 1 and C8"
    if gamma > 1:
        return "negative MDP with gamma > 1"
    holds, _ = _finite_over_sd(mdp, gamma, "any", guard)
    if not holds:
        raise PreconditionError(
            "negative MDP with 0 < gamma < 1 but C9 fails (every SD policy has an "
            "infinite value)"
        )
    return "negative MDP with 0 < gamma < 1 and C9"


def _tables(mdp: Mdp, gamma: float):
    """Per (state, action): successor indices and gamma**r-weighted probabilities."""
    idx = mdp.index
    lg = math.log(gamma)
    table = []
    for s in mdp.states:
        row = []
        for a in mdp.enabled[s]:
            succ = mdp.transitions[(s, a)]
            if any(abs(t.reward * lg) > EXP_LIMIT for t in succ):
                raise UtilityRangeError(f"gamma**r out of range in state {s!r}")
            j = np.array([idx[t.target] for t in succ])
            w = np.array([t.prob * math.exp(t.reward * lg) for t in succ])
            row.append((a, j, w))
        table.append(row)
    return table


def _backup(table, u, opt):
    q = [np.array([w @ u[j] for _, j, w in row]) for row in table]
    best = np.array([opt(qs) for qs in q])
    return q, best


def _residual(table, u, opt):
    _, best = _backup(table, u, opt)
    return float(np.max(np.abs(best - u)))


def risk_vi_solve(mdp: Mdp, gamma: float, tol: float = 1e-10, max_iter: int = 100_000,
                  guard: int | None = None) -> Solution:
    """Optimal SD policy and values ``v*(s) = iota * u(s)``.

    Iterates ``u_{k+1}(s) = opt_a sum_s' P(s'|s,a) gamma**r u_k(s')`` from
    ``u_0 = 1`` with ``opt = max`` for ``gamma > 1`` and ``min`` otherwise,
    until the sup-norm change drops below ``tol``. The greedy policy is then
    evaluated exactly; if the exact value disagrees with the iterate (ties in
    zero-reward loops), tied actions are searched for a policy that attains it.

    Raises
    ------
    PreconditionError
        Mixed rewards, or the finiteness condition for the sign case fails.
    ConvergenceError
        If ``max_iter`` sweeps do not reach ``tol``.
    """
    check_solve_precondition(mdp, gamma, guard)
    iota = 1 if gamma > 1 else -1
    opt = np.max if iota > 0 else np.min
    table = _tables(mdp, gamma)
    u = np.ones(mdp.n_states)
    trace = []
    res = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        _, nxt = _backup(table, u, opt)
        res = float(np.max(np.abs(nxt - u)))
        u = nxt
        if it % 1000 == 0 or res < tol:
            trace.append(res)
        if not np.all(np.isfinite(u)):
            raise ConvergenceError("value iteration diverged", trace)
        if res < tol:
            break
    else:
        raise ConvergenceError(f"no convergence after {max_iter} sweeps (residual {res:.3g})",
                               trace)
    q, best = _backup(table, u, opt)
    scale = max(1.0, float(np.max(np.abs(u))))
    ties = [[row[k][0] for k in np.flatnonzero(np.abs(qs - b) <= 10 * tol * scale)]
            for row, qs, b in zip(table, q, best)]
    candidates = itertools.islice(itertools.product(*ties), TIE_GUARD)
    for combo in candidates:
        pi = StationaryPolicy.deterministic(dict(zip(mdp.states, combo)))
        exact = exp_infinite_value(mdp, pi, gamma)
        if not all(v.is_finite for v in exact.values()):
            continue
        vals = np.array([iota * exact[s].value for s in mdp.states])
        close = max(10 * tol, 1e-6) * scale
        if np.max(np.abs(vals - u)) <= close and _residual(table, vals, opt) < tol:
            return Solution(pi, ValueVector(mdp.states, iota * vals, None,
                                            f"exponential(gamma={gamma:.12g})"),
                            _residual(table, vals, opt), it, True)
    pi = StationaryPolicy.deterministic(
        {s: t[0] for s, t in zip(mdp.states, ties)}
    )
    return Solution(pi, ValueVector(mdp.states, iota * u, None,
                                    f"exponential(gamma={gamma:.12g})"),
                    _residual(table, u, opt), it, False)
