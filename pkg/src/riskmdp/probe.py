"""Numerical classification of finite-horizon value sequences.

Used where no analytic verdict is available: the sequence ``v_{U,T}(s)``
is computed for ``T = 1..T_max`` and its tail is classified as converged,
diverged, oscillating between several accumulation points, or undetermined.
Every verdict from here carries ``numeric=True``.
"""

from __future__ import annotations

import math

import numpy as np

from .horizon import horizon_series
from .mdp import Mdp
from .outcome import OSCILLATION, UNDETERMINED, ValueOutcome
from .policy import StationaryPolicy
from .utility import UtilitySpec

TAIL = 50
MAX_PERIOD = 12
#: Per-window decay below which increments count as "not shrinking".
_FLAT_RATIO = 1.0 - 1e-6


def _settled(xs: np.ndarray, eps: float):
    m = float(xs.mean())
    return float(np.max(np.abs(xs - m))) <= eps * max(1.0, abs(m)), m


def _growth_sign(xs: np.ndarray, period: int, eps: float) -> int:
    """+1/-1 if every residue subsequence grows without shrinking steps, else 0."""
    signs = set()
    for r in range(period):
        sub = xs[r::period]
        d = np.diff(sub)
        scale = eps * max(1.0, float(np.max(np.abs(sub))))
        if np.all(d > 10 * scale):
            signs.add(1)
        elif np.all(d < -10 * scale):
            signs.add(-1)
        else:
            return 0
        if abs(d[-1]) < abs(d[0]) * _FLAT_RATIO ** len(d):
            return 0
    return signs.pop() if len(signs) == 1 else 0


def classify_sequence(seq, eps: float = 1e-8, tail: int = TAIL,
                      max_period: int = MAX_PERIOD) -> ValueOutcome:
    """Classify the limiting behaviour of a finite sequence.

    Parameters
    ----------
    seq : array_like
        ``v_1 .. v_Tmax``; infinite entries mean the computation overflowed.
    eps : float
        Convergence tolerance (relative for magnitudes above one).
    tail : int
        Number of trailing values (per residue class) that are inspected.
    max_period : int
        Largest oscillation period that is searched for.
    """
    xs = np.asarray(seq, dtype=float)
    if xs.size == 0:
        return ValueOutcome.nonexistent(UNDETERMINED, numeric=True)
    finite = np.isfinite(xs)
    if not finite.all():
        first = int(np.argmin(finite))
        return ValueOutcome.of(math.copysign(math.inf, xs[first]), numeric=True)
    if xs.size < tail:
        return ValueOutcome.nonexistent(UNDETERMINED, numeric=True)
    ok, m = _settled(xs[-tail:], eps)
    if ok:
        return ValueOutcome.of(m, numeric=True)
    last = xs[-tail:]
    steps = np.diff(last)
    if abs(last[-1]) > 1.0 / eps and (np.all(steps >= 0) or np.all(steps <= 0)):
        return ValueOutcome.of(math.copysign(math.inf, last[-1]), numeric=True)
    for p in range(1, max_period + 1):
        n = tail * p
        if n + p > xs.size:
            break
        sign = _growth_sign(xs[-(n + p):], p, eps)
        if sign:
            return ValueOutcome.of(sign * math.inf, numeric=True)
        if p == 1:
            continue
        window = xs[-n:]
        points = []
        for r in range(p):
            ok, m = _settled(window[r::p], eps)
            if not ok:
                break
            points.append(m)
        else:
            if max(points) - min(points) > 10 * eps:
                return ValueOutcome.nonexistent(OSCILLATION, numeric=True)
            return ValueOutcome.of(float(np.mean(points)), numeric=True)
    return ValueOutcome.nonexistent(UNDETERMINED, numeric=True)


def default_t_max(u: UtilitySpec) -> int:
    return 1000 if u.form in ("exponential", "linear") else 200


def limit_probe(mdp: Mdp, pi: StationaryPolicy, u: UtilitySpec, T_max: int | None = None,
                eps: float = 1e-8) -> dict[str, ValueOutcome]:
    """Numerically classify ``lim_T v_{U,T}(s)`` for every state.

    Raises
    ------
    BudgetExceededError
        If a piecewise utility needs more wealth atoms than the budget allows.
    """
    T_max = default_t_max(u) if T_max is None else T_max
    series = horizon_series(mdp, pi, u, T_max)
    return {s: classify_sequence(series[:, i], eps) for i, s in enumerate(mdp.states)}
