"""Exponential utilities ``U(w) = iota * gamma**w`` under stationary policies.

The gamma-weighted matrix ``D(s, s') = sum_a pi(s,a) P(s'|s,a) gamma**r(s,a,s')``
turns finite-horizon values into matrix powers: ``v_T = iota * D^T 1``.
Replacing the recurrent rows of ``D`` by identity rows freezes the weight of
a trajectory at its first recurrent state, which separates the transient
contribution (``A^T``) from the entry contribution (``sum_t A^t B``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainAnalysis, ClassType, analyze_chain, induced_chain
from .errors import SingularMatrixError, UtilityRangeError
from .linalg import spectral_radius
from .mdp import Mdp
from .outcome import ValueOutcome, ValueVector
from .policy import StationaryPolicy
from .probe import limit_probe
from .utility import EXP_LIMIT, UtilitySpec

#: Spectral radii within ETA of one are not decided analytically.
ETA = 1e-7
#: Condition number above which (I - A) counts as singular.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class ExpMatrix:
    states: tuple[str, ...]
    gamma: float
    iota: int
    D: np.ndarray


@dataclass(frozen=True)
class HatDecomposition:
    """``hat`` with recurrent rows replaced by identity rows, and its blocks.

    ``order`` lists transient states first; in that order
    ``hat = [[A, B], [0, I]]``.
    """

    hat: np.ndarray
    A: np.ndarray
    B: np.ndarray
    order: np.ndarray
    n_transient: int


def exp_matrix(mdp: Mdp, pi: StationaryPolicy, gamma: float) -> ExpMatrix:
    """Build ``D`` for ``pi`` and ``gamma``.

    Raises
    ------
    UtilityRangeError
        If some ``|r * ln(gamma)|`` exceeds 700.
    """
    if not (gamma > 0 and gamma != 1):
        raise ValueError(f"gamma must be positive and != 1, got {gamma!r}")
    chain = induced_chain(mdp, pi)
    expo = chain.reward * math.log(gamma)
    if np.any(np.abs(expo) > EXP_LIMIT):
        raise UtilityRangeError(f"gamma**r out of range for gamma={gamma!r}")
    D = np.zeros((chain.n, chain.n))
    np.add.at(D, (chain.src, chain.dst), chain.share * np.exp(expo))
    return ExpMatrix(mdp.states, float(gamma), 1 if gamma > 1 else -1, D)


def exp_finite_horizon(m: ExpMatrix, T: int) -> ValueVector:
    """``iota`` times the row sums of ``D^T``.

    Raises
    ------
    UtilityRangeError
        If the powers overflow; the message names the largest finite horizon.
    """
    if T < 1:
        raise ValueError("horizon T must be >= 1")
    x = np.ones(len(m.states))
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, T + 1):
            nxt = m.D @ x
            if not np.all(np.isfinite(nxt)):
                raise UtilityRangeError(
                    f"D^T overflows at T={t}; largest finite horizon is {t - 1}"
                )
            x = nxt
    return ValueVector(m.states, m.iota * x, T, f"exponential(gamma={m.gamma:.12g})")


def hat_decompose(m: ExpMatrix, analysis: ChainAnalysis) -> HatDecomposition:
    n = len(m.states)
    if m.D.shape != (n, n) or len(analysis.states) != n:
        raise ValueError("matrix and chain analysis have different dimensions")
    rec = analysis.recurrent_mask
    hat = m.D.copy()
    hat[rec, :] = 0.0
    hat[rec, rec] = 1.0
    T = np.flatnonzero(~rec)
    R = np.flatnonzero(rec)
    order = np.concatenate([T, R])
    return HatDecomposition(hat, hat[np.ix_(T, T)], hat[np.ix_(T, R)], order, len(T))


def _class_limits(m: ExpMatrix, analysis: ChainAnalysis, eta: float):
    """Limit of ``(D^T 1)(s)`` for states inside each recurrent class.

    Returns one of ``1.0``, ``0.0``, ``inf`` or ``None`` (undecided) per class.
    """
    convex = m.gamma > 1
    out = []
    for comp, kind in zip(analysis.classes, analysis.class_types):
        if kind is ClassType.ZERO:
            out.append(1.0)
        elif kind is ClassType.POSITIVE:
            out.append(math.inf if convex else 0.0)
        elif kind is ClassType.NEGATIVE:
            out.append(0.0 if convex else math.inf)
        else:
            lam = spectral_radius(m.D[np.ix_(comp, comp)])
            if lam > 1 + eta:
                out.append(math.inf)
            elif lam < 1 - eta:
                out.append(0.0)
            else:
                out.append(None)
    return out


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    M = np.eye(A.shape[0]) - A
    if np.linalg.cond(M) > COND_LIMIT:
        raise SingularMatrixError("I - A is numerically singular although rho(A) < 1")
    return np.linalg.solve(M, b)


def exp_infinite_value(mdp: Mdp, pi: StationaryPolicy, gamma: float, *,
                       eta: float = ETA, T_max: int | None = None,
                       eps: float = 1e-8) -> dict[str, ValueOutcome]:
    """Infinite-horizon exponential utility ``lim_T v_{e,T}(s)`` for every state.

    Recurrent states take the limit of their class: ``iota`` for zero-reward
    classes, ``+inf`` or ``0`` for positive classes (convex / concave) and
    ``0`` or ``-inf`` for negative ones. A transient state ``s`` diverges if
    it reaches a class whose weight diverges or if the transient block
    restricted to states reachable from ``s`` has spectral radius above one;
    with spectral radius below one its value is ``iota * ((I - A)^-1 B c)(s)``
    where ``c`` holds the class limits. Everything else (spectral radius
    within ``eta`` of one, or undecided mixed classes) goes to
    :func:`limit_probe` and is labelled numeric.
    """
    m = exp_matrix(mdp, pi, gamma)
    analysis = analyze_chain(induced_chain(mdp, pi))
    iota = m.iota
    limits = _class_limits(m, analysis, eta)
    rec = analysis.recurrent_mask
    n = len(mdp.states)
    result: list[ValueOutcome | None] = [None] * n
    need_probe = False
    for s in range(n):
        k = analysis.class_of[s]
        if k >= 0:
            L = limits[k]
            if L is None:
                need_probe = True
            else:
                result[s] = ValueOutcome.of(iota * L if L else 0.0)
            continue
        reach_lim = [limits[j] for j in analysis.reach[s]]
        if any(L == math.inf for L in reach_lim):
            result[s] = ValueOutcome.of(iota * math.inf)
            continue
        T_s = np.flatnonzero(analysis.reach_states[s] & ~rec)
        rho = spectral_radius(m.D[np.ix_(T_s, T_s)])
        if rho > 1 + eta:
            result[s] = ValueOutcome.of(iota * math.inf)
        elif rho < 1 - eta and all(L is not None for L in reach_lim):
            R = np.flatnonzero(analysis.reach_states[s] & rec)
            c = np.array([limits[analysis.class_of[j]] for j in R], dtype=float)
            rhs = m.D[np.ix_(T_s, R)] @ c
            x = _solve(m.D[np.ix_(T_s, T_s)], rhs)
            pos = int(np.flatnonzero(T_s == s)[0])
            result[s] = ValueOutcome.of(iota * float(x[pos]) if x[pos] else 0.0)
        else:
            need_probe = True
    if need_probe:
        probed = limit_probe(mdp, pi, UtilitySpec.exponential(gamma), T_max, eps)
        for s in range(n):
            if result[s] is None:
                result[s] = probed[mdp.states[s]]
    return dict(zip(mdp.states, result))
