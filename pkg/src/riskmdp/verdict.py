"""Existence and finiteness verdicts assembled from the condition checks.

Each verdict field is decided independently by the first rule that fires.
Rules are keyed to the known theorems for positive MDPs, negative MDPs,
exponential utilities and utilities of bounded growth; for general MDPs and
piecewise utilities the Table 2 cell (row = growth class of the utility,
column = strongest of C16, C15, C5 that holds) is reported alongside.

When no rule fires, every SD policy is evaluated directly: if all values
exist the verdict is ``numeric-only``, and a policy whose value oscillates
is a counterexample (``not-guaranteed``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .conditions import ConditionContext, ConditionReport, check_condition
from .errors import BudgetExceededError, UtilityRangeError
from .expo import exp_infinite_value
from .linear import linear_infinite_value
from .mdp import Mdp, RewardSign, reward_sign
from .probe import limit_probe
from .utility import Growth, UtilitySpec

ALL_POLICIES = "all-policies"
STATIONARY_ONLY = "stationary-only-conjectured-all"
NUMERIC_ONLY = "numeric-only"
NOT_GUARANTEED = "not-guaranteed"
UNKNOWN = "unknown"

YES = "yes"
YES_IF_EXIST = "yes-if-exist"

#: Table 2 markers by utility row and condition column.
TABLE2 = {
    Growth.BOUNDED: {"C16": "—", "C15": "—", "C5": "✓?"},
    Growth.LINEARLY_BOUNDED: {"C16": "—", "C15": "—", "C5": "✓?"},
    Growth.EXPONENTIALLY_BOUNDED: {"C16": "—", "C15": "?", "C5": "✗"},
    "general": {"C16": "✓", "C15": "(✗)", "C5": "✗"},
}


@dataclass
class ExistenceVerdict:
    values_exist: str = UNKNOWN
    optimal_values_exist: str = UNKNOWN
    optimal_values_finite: str = UNKNOWN
    citations: list[tuple[str, str]] = field(default_factory=list)
    table2_cell: str | None = None
    notes: list[str] = field(default_factory=list)
    conditions: dict[str, ConditionReport] = field(default_factory=dict)

    def cite(self, ref: str, why: str):
        if (ref, why) not in self.citations:
            self.citations.append((ref, why))


class _Conditions:
    """Lazy, cached condition lookups for one (mdp, utility) pair."""

    def __init__(self, mdp, u, guard, sink):
        self.mdp, self.u = mdp, u
        self.ctx = ConditionContext(mdp, guard)
        self.sink = sink
        self._alt: dict = {}

    def __call__(self, cid: str, u: UtilitySpec | None = None) -> bool:
        u = self.u if u is None else u
        key = (cid, u)
        if key not in self.sink and key not in self._alt:
            rep = check_condition(self.mdp, u, cid, context=self.ctx)
            if u is self.u:
                self.sink[cid] = rep
            else:
                self._alt[key] = rep
        rep = self.sink.get(cid) if u is self.u else self._alt[key]
        return rep.holds


def _lower_linear(u: UtilitySpec) -> bool:
    """``U(w) >= -C|w| - D`` for ``w <= 0``: true for every piecewise-linear utility."""
    return u.form in ("linear", "piecewise")


def _upper_linear(u: UtilitySpec) -> bool:
    return u.form in ("linear", "piecewise")


def _linear_rules(v, c, sign):
    if sign in (RewardSign.POSITIVE, RewardSign.ALL_ZERO):
        v.values_exist = v.optimal_values_exist = ALL_POLICIES
        v.cite("C1", "all rewards nonnegative, so expected total rewards are monotone in T")
        if c("C2"):
            v.optimal_values_finite = YES
            v.cite("C2", "every SD policy has finite values")
        else:
            v.optimal_values_finite = NOT_GUARANTEED
            v.cite("C2", "violated: some SD policy has an infinite or nonexistent value")
        return
    if sign is RewardSign.NEGATIVE:
        v.values_exist = v.optimal_values_exist = ALL_POLICIES
        v.cite("C3", "all rewards nonpositive, so expected total rewards are monotone in T")
        if c("C4"):
            v.optimal_values_finite = YES
            v.cite("C4", "some SD policy has finite values in every state")
        else:
            v.optimal_values_finite = NOT_GUARANTEED
            v.cite("C4", "violated: no SD policy is finite in every state")
        return
    if c("C5"):
        v.values_exist = v.optimal_values_exist = ALL_POLICIES
        v.cite("C5", "positive and negative parts never both infinite")
        if c("C6") and c("C7"):
            v.optimal_values_finite = YES
            v.cite("C6+C7", "positive part bounded above, negative part bounded below")
        else:
            v.optimal_values_finite = NOT_GUARANTEED
            v.cite("C5", "existence only; C6 and C7 do not both hold")
    else:
        v.notes.append("C5 fails; C5 is sufficient but not necessary, so values may still exist")


def _exponential_rules(v, c, sign, u):
    g = u.gamma
    if sign in (RewardSign.POSITIVE, RewardSign.ALL_ZERO):
        v.values_exist = v.optimal_values_exist = ALL_POLICIES
        v.cite("C1", "positive MDP: exponential utilities are monotone in T")
        if g < 1:
            v.optimal_values_finite = YES
            v.cite("C1", "positive MDP with 0 < gamma < 1")
        elif c("C8"):
            v.optimal_values_finite = YES
            v.cite("C8", "positive MDP with gamma > 1 and every SD policy finite")
        else:
            v.optimal_values_finite = NOT_GUARANTEED
            v.cite("C8", "violated for a positive MDP with gamma > 1")
        return
    if sign is RewardSign.NEGATIVE:
        v.values_exist = v.optimal_values_exist = ALL_POLICIES
        v.cite("C3", "negative MDP: exponential utilities are monotone in T")
        if g > 1:
            v.optimal_values_finite = YES
            v.cite("C3", "negative MDP with gamma > 1")
        elif c("C9"):
            v.optimal_values_finite = YES
            v.cite("C9", "negative MDP with 0 < gamma < 1 and some SD policy finite")
        else:
            v.optimal_values_finite = NOT_GUARANTEED
            v.cite("C9", "violated for a negative MDP with 0 < gamma < 1")
        return
    exist_id, thm, bound_id = ("C10", "Theorem 8", "C11") if g > 1 else ("C12", "Theorem 9", "C13")
    if c(exist_id):
        v.values_exist = STATIONARY_ONLY
        v.cite(thm, f"{exist_id} holds; proven for stationary policies, conjectured for all")
        v.notes.append("optimal values exist only if the conjecture holds for all policies")
        if c(bound_id):
            v.optimal_values_finite = YES_IF_EXIST
            v.cite(bound_id, "bounds the optimal values")


def _growth_rules(v, c, u, growth):
    """Existence rules from the Table 2 rows; returns True if one fired."""
    kind = growth.kind
    if kind is Growth.BOUNDED or kind is Growth.LINEARLY_BOUNDED:
        if not c("C5"):
            v.notes.append("C5 fails, so no Table 2 column applies")
            return False
        v.table2_cell = TABLE2[kind]["C5"]
        v.values_exist = STATIONARY_ONLY
        if kind is Growth.BOUNDED:
            v.cite("Theorem 14", "bounded utility and C5; proven for stationary policies")
            v.cite("Table 2", "bounded row, C5 column")
        else:
            v.cite("Theorem 15", "linearly bounded utility and C5; proven for stationary "
                                 "policies, conjectured for all")
            v.cite("Table 2", "linearly bounded row, C5 column")
        return True
    # exponentially bounded
    if c("C14"):
        v.table2_cell = TABLE2[kind]["C15"]
        v.values_exist = STATIONARY_ONLY
        v.cite("Theorem 16", "exponentially bounded utility and C14; proven for stationary "
                             "policies")
        v.cite("Table 2", "exponentially bounded row, C15 column (C14 is stronger)")
        return True
    if c("C15"):
        v.table2_cell = TABLE2[kind]["C15"]
        v.cite("Table 2", "exponentially bounded row, C15 column: open even for "
                          "stationary policies")
        return True
    if c("C5"):
        v.table2_cell = TABLE2[kind]["C5"]
        v.values_exist = NOT_GUARANTEED
        v.cite("Table 2", "exponentially bounded row, C5 column: optimal values known not "
                          "to exist in some MDPs")
        return True
    return False


def _growth_finiteness(v, c, u, growth, sign):
    kind = growth.kind
    # all-policy results for signed MDPs first
    if sign in (RewardSign.POSITIVE, RewardSign.ALL_ZERO):
        if _upper_linear(u) and c("C2"):
            v.optimal_values_exist = ALL_POLICIES
            v.optimal_values_finite = YES
            v.cite("Theorem 10", "C1, C2 and U(w) <= Cw + D for w >= 0")
            return
        if kind is Growth.EXPONENTIALLY_BOUNDED:
            up = UtilitySpec.exponential(growth.gamma_plus)
            if c("C8", up):
                v.optimal_values_exist = ALL_POLICIES
                v.optimal_values_finite = YES
                v.cite("Theorem 11", "C1, C8 at gamma_plus and U(w) <= C gamma_plus^w + D")
                return
    if sign in (RewardSign.NEGATIVE, RewardSign.ALL_ZERO):
        if _lower_linear(u) and c("C4"):
            v.optimal_values_exist = ALL_POLICIES
            v.optimal_values_finite = YES
            v.cite("Theorem 12", "C3, C4 and U(w) >= -C|w| - D for w <= 0")
            return
        if kind is Growth.EXPONENTIALLY_BOUNDED:
            down = UtilitySpec.exponential(growth.gamma_minus)
            if c("C9", down):
                v.optimal_values_finite = YES
                v.cite("Theorem 13", "C3, C9 at gamma_minus and U(w) >= -C gamma_minus^w - D")
                return
    if kind is Growth.BOUNDED and v.values_exist == STATIONARY_ONLY:
        v.optimal_values_finite = YES_IF_EXIST
        v.cite("Theorem 14", "a bounded utility has finite values wherever they exist")
    elif kind is Growth.LINEARLY_BOUNDED and c("C6") and c("C7"):
        v.optimal_values_finite = YES_IF_EXIST
        v.cite("C6+C7", "bound the optimal values of a linearly bounded utility")
    elif kind is Growth.EXPONENTIALLY_BOUNDED and c("C11") and c("C13"):
        v.optimal_values_finite = YES_IF_EXIST
        v.cite("C11+C13", "at gamma_plus and gamma_minus bound the optimal values")
    elif kind is Growth.EXPONENTIALLY_BOUNDED and v.values_exist == STATIONARY_ONLY:
        v.optimal_values_finite = YES_IF_EXIST
        v.cite("Theorem 16", "C14 makes stationary values finite")


def _general_rules(v, c, sign, growth):
    """Rules that hold for every monotone utility."""
    if c("C16"):
        v.values_exist = v.optimal_values_exist = ALL_POLICIES
        v.cite("Theorem 17", "C16 holds: one side of the total reward is bounded")
        if growth is None and v.table2_cell is None and sign is RewardSign.MIXED:
            v.table2_cell = TABLE2["general"]["C16"]
        if c("C17") and c("C18"):
            v.optimal_values_finite = YES
            v.cite("C17+C18", "total rewards bounded above for all and below for some policy")
        return True
    return False


def _numeric_scan(v, mdp, u, ctx):
    """Evaluate every SD policy directly when no theorem applies."""
    oscillating = None
    undetermined = False
    for pi in ctx.policies:
        try:
            if u.form == "linear":
                vals = linear_infinite_value(mdp, pi)
            elif u.form == "exponential":
                vals = exp_infinite_value(mdp, pi, u.gamma)
            else:
                vals = limit_probe(mdp, pi, u)
        except (BudgetExceededError, UtilityRangeError) as exc:
            v.notes.append(f"numeric scan stopped: {exc}")
            return
        for s, o in vals.items():
            if not o.exists and not o.undetermined:
                oscillating = (pi, s, o)
                break
            undetermined |= o.undetermined
        if oscillating:
            break
    if oscillating:
        pi, s, o = oscillating
        v.values_exist = NOT_GUARANTEED
        v.cite("counterexample", f"policy {pi.describe()} has {o.token()} at state {s}")
    elif not undetermined:
        v.values_exist = NUMERIC_ONLY
        v.cite("numeric scan", f"values exist for all {len(ctx.policies)} SD policies; "
                               "no theorem certifies other policies")


def analyze(mdp: Mdp, u: UtilitySpec, guard: int | None = None) -> ExistenceVerdict:
    """Decide whether values and optimal values exist and are finite.

    Raises
    ------
    GuardExceededError
        If the SD policies cannot be enumerated within ``guard``.
    """
    v = ExistenceVerdict()
    c = _Conditions(mdp, u, guard, v.conditions)
    sign = reward_sign(mdp)
    growth = None
    if u.form == "linear":
        _linear_rules(v, c, sign)
    elif u.form == "exponential":
        _exponential_rules(v, c, sign, u)
    else:
        growth = u.growth
        fired = _growth_rules(v, c, u, growth)
        _growth_finiteness(v, c, u, growth, sign)
        if fired and c("C16"):
            v.notes.append("C16 also holds, so Theorem 17 gives existence for all policies "
                           "under any monotone utility")
    if v.values_exist == UNKNOWN:
        if not _general_rules(v, c, sign, growth):
            _numeric_scan(v, mdp, u, c.ctx)
    if v.table2_cell == "(✗)":
        v.notes.append("the parenthesized cross is not defined further; shown as printed")
    if v.values_exist == UNKNOWN:
        failed = [cid for cid, rep in v.conditions.items() if rep.violated]
        if failed:
            v.notes.append("nearest failed conditions: " + ", ".join(failed))
    if any(rep.quantifier_note for rep in v.conditions.values()):
        v.notes.append("policy-quantified conditions were checked over SD policies only")
    return v
