"""Decision procedures for the finiteness and sign conditions C1..C18.

Every condition that quantifies over policies is decided over the finite
set of stationary deterministic (SD) policies; reports carry a note saying
so. Per-policy values come from the value engines, and a single
:class:`ConditionContext` caches them so that checking many conditions on
one MDP evaluates each (engine, reward part, gamma, policy) only once.

Gamma conventions for the exponential conditions:

* C8 and C9 use the utility's own ``gamma`` on the full MDP.
* C10..C13 evaluate the positive part with the convex parameter
  ``max(gamma, 1/gamma)`` and the negative part with the concave parameter
  ``min(gamma, 1/gamma)``. A positive part is only ever unbounded upwards
  and a negative part downwards, so these are the only choices under which
  either finiteness test has content; as a consequence C10 and C12 see the
  same raw data.
* C14 and C15 (and C11/C13 for exponentially bounded utilities) use the
  declared ``gamma_plus`` and ``gamma_minus``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import IncompatibleUtilityError
from .expo import exp_infinite_value
from .extreme import extreme_total_reward
from .linear import linear_infinite_value
from .mdp import Mdp, RewardSign, reward_sign, signed_part
from .outcome import ValueOutcome
from .policy import StationaryPolicy, enumerate_sd_policies
from .utility import Growth, UtilitySpec

CONDITION_IDS = tuple(f"C{i}" for i in range(1, 19))
QUANTIFIER_NOTE = ("verified over Π^SD (stationary deterministic policies); "
                   "randomized and history-dependent policies are not enumerated")

HOLDS = "holds"
VIOLATED = "violated"
UNKNOWN = "unknown"

_LINEAR_IDS = {"C2", "C4", "C5", "C6", "C7"}
_EXTREME_IDS = {"C16", "C17", "C18"}


@dataclass(frozen=True)
class Witness:
    """A policy and state at which a condition fails, with the offending values."""

    policy: StationaryPolicy | None  # None for the reward-scan conditions
    state: str
    values: dict[str, ValueOutcome]

    def describe(self) -> str:
        vals = ", ".join(f"{k} = {v.token()}" for k, v in self.values.items())
        where = f"state {self.state}" if self.policy is None else (
            f"policy {self.policy.describe()}, state {self.state}")
        return f"{where}: {vals}"


@dataclass(frozen=True)
class ConditionReport:
    id: str
    status: str
    quantifier_note: str | None
    witness: Witness | None = None
    parameters: dict = field(default_factory=dict)
    numeric: bool = False

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def violated(self) -> bool:
        return self.status == VIOLATED


class ConditionContext:
    """Enumerated SD policies plus a cache of per-policy value vectors."""

    def __init__(self, mdp: Mdp, guard: int | None = None):
        self.mdp = mdp
        self.guard = guard
        self._policies = None
        self._parts = {"full": mdp}
        self._cache: dict = {}

    @property
    def policies(self) -> list[StationaryPolicy]:
        if self._policies is None:
            self._policies = list(enumerate_sd_policies(self.mdp, self.guard))
        return self._policies

    def part(self, name: str) -> Mdp:
        if name not in self._parts:
            self._parts[name] = signed_part(self.mdp, name)
        return self._parts[name]

    def values(self, engine: str, part: str, k: int, gamma: float | None = None):
        """Per-state outcomes of ``engine`` on ``part`` for policy number ``k``."""
        key = (engine, part, gamma, k)
        if key not in self._cache:
            mdp, pi = self.part(part), self.policies[k]
            if engine == "linear":
                out = linear_infinite_value(mdp, pi)
            elif engine == "exp":
                out = exp_infinite_value(mdp, pi, gamma)
            elif engine in ("max", "min"):
                ext = extreme_total_reward(mdp, pi)
                src = ext.v_max if engine == "max" else ext.v_min
                out = {s: ValueOutcome.of(v) for s, v in src.items()}
            else:
                raise ValueError(f"unknown engine {engine!r}")
            self._cache[key] = out
        return self._cache[key]


def _finite(o: ValueOutcome):
    """True / False, or None when the engine could not decide."""
    if o.undetermined:
        return None
    return o.is_finite


def _one_of(a, b):
    fa, fb = _finite(a), _finite(b)
    if fa or fb:
        return True
    if fa is None or fb is None:
        return None
    return False


def _both(a, b):
    fa, fb = _finite(a), _finite(b)
    if fa is False or fb is False:
        return False
    if fa is None or fb is None:
        return None
    return True


# Each quantity is (label, engine, part, gamma); a test combines the outcomes.
def _scan(ctx, quantities, test, quantifier):
    """Decide a Pi-quantified condition over the SD policies in ``ctx``.

    ``quantifier`` is ``"all"`` (for all policies and states) or ``"any"``
    (some policy is good in every state). Returns (status, witness, numeric).
    """
    mdp = ctx.mdp
    numeric = False
    first_bad = None
    undecided = False
    for k, pi in enumerate(ctx.policies):
        vecs = [(label, ctx.values(eng, part, k, g)) for label, eng, part, g in quantities]
        policy_ok = True
        for s in mdp.states:
            outs = {label: vec[s] for label, vec in vecs}
            numeric |= any(o.numeric for o in outs.values())
            verdict = test(*outs.values())
            if verdict is False:
                if first_bad is None:
                    first_bad = Witness(pi, s, outs)
                policy_ok = False
                break
            if verdict is None:
                policy_ok = None
        if quantifier == "all":
            if policy_ok is False:
                return VIOLATED, first_bad, numeric
            if policy_ok is None:
                undecided = True
        else:
            if policy_ok is True:
                return HOLDS, None, numeric
            if policy_ok is None:
                undecided = True
    if quantifier == "all":
        return (UNKNOWN if undecided else HOLDS), None, numeric
    return (UNKNOWN if undecided else VIOLATED), (None if undecided else first_bad), numeric


def _exp_params(u: UtilitySpec, cid: str):
    """(gamma_plus, gamma_minus) for the exponential conditions C10..C15."""
    g = u.growth
    if cid in ("C14", "C15"):
        if g.kind is not Growth.EXPONENTIALLY_BOUNDED:
            raise IncompatibleUtilityError(f"{cid} needs an exponentially bounded utility "
                                           "(declared exp_bounds)")
        return g.gamma_plus, g.gamma_minus
    if u.form == "exponential":
        gp = max(u.gamma, 1.0 / u.gamma)
        return gp, 1.0 / gp
    if cid in ("C11", "C13") and g.kind is Growth.EXPONENTIALLY_BOUNDED:
        return g.gamma_plus, g.gamma_minus
    raise IncompatibleUtilityError(f"{cid} needs an exponential utility")


def compatible_ids(u: UtilitySpec) -> list[str]:
    """Conditions that can be checked with utility ``u``."""
    ids = ["C1", "C2", "C3", "C4", "C5", "C6", "C7"]
    if u.form == "exponential":
        ids += ["C8", "C9", "C10", "C11", "C12", "C13"]
    elif u.growth.kind is Growth.EXPONENTIALLY_BOUNDED:
        ids += ["C11", "C13", "C14", "C15"]
    ids += ["C16", "C17", "C18"]
    return ids


def check_condition(mdp: Mdp, u: UtilitySpec, cid: str, *, guard: int | None = None,
                    context: ConditionContext | None = None) -> ConditionReport:
    """Decide condition ``cid`` ("C1".."C18") for ``mdp``.

    Parameters
    ----------
    u : UtilitySpec
        Supplies gamma for the exponential conditions; ignored by the others.
    guard : int, optional
        Limit on the number of SD policies enumerated.
    context : ConditionContext, optional
        Shared cache; pass the same one when checking several conditions.

    Raises
    ------
    IncompatibleUtilityError
        If ``cid`` needs a gamma that ``u`` does not provide.
    GuardExceededError
        If the MDP has more SD policies than ``guard``.
    """
    cid = cid.upper()
    if cid not in CONDITION_IDS:
        raise ValueError(f"unknown condition {cid!r}; expected one of C1..C18")
    if cid in ("C1", "C3"):
        sign = reward_sign(mdp)
        bad = RewardSign.NEGATIVE if cid == "C1" else RewardSign.POSITIVE
        ok = sign not in (bad, RewardSign.MIXED)
        witness = None
        if not ok:
            want = (lambda r: r < 0) if cid == "C1" else (lambda r: r > 0)
            s, a, t, _, r = next(rec for rec in mdp.records() if want(rec[4]))
            witness = Witness(None, s, {f"r({s},{a},{t})": ValueOutcome.of(r)})
        return ConditionReport(cid, HOLDS if ok else VIOLATED, None, witness,
                               {"reward_sign": sign.value})

    if context is None:
        context = ConditionContext(mdp, guard)
    elif context.mdp is not mdp:
        raise ValueError("context belongs to a different MDP")

    params: dict = {}
    if cid in _LINEAR_IDS:
        params["engine"] = "linear"
        vfull = ("value", "linear", "full", None)
        vpos = ("positive_part", "linear", "positive", None)
        vneg = ("negative_part", "linear", "negative", None)
        quantities, test, quant = {
            "C2": ([vfull], _finite, "all"),
            "C4": ([vfull], _finite, "any"),
            "C5": ([vpos, vneg], _one_of, "all"),
            "C6": ([vpos], _finite, "all"),
            "C7": ([vneg], _finite, "any"),
        }[cid]
    elif cid in _EXTREME_IDS:
        params["engine"] = "extreme"
        vmax = ("max_positive_part", "max", "positive", None)
        vmin = ("min_negative_part", "min", "negative", None)
        quantities, test, quant = {
            "C16": ([vmax, vmin], _one_of, "all"),
            "C17": ([vmax], _finite, "all"),
            "C18": ([vmin], _finite, "any"),
        }[cid]
    elif cid in ("C8", "C9"):
        if u.form != "exponential":
            raise IncompatibleUtilityError(f"{cid} needs an exponential utility")
        params.update(engine="exponential", gamma=u.gamma)
        quantities = [("value", "exp", "full", u.gamma)]
        test, quant = _finite, "all" if cid == "C8" else "any"
    else:
        gp, gm = _exp_params(u, cid)
        params.update(engine="exponential", gamma_plus=gp, gamma_minus=gm)
        vpos = ("positive_part", "exp", "positive", gp)
        vneg = ("negative_part", "exp", "negative", gm)
        quantities, test, quant = {
            "C10": ([vpos, vneg], _one_of, "all"),
            "C12": ([vpos, vneg], _one_of, "all"),
            "C11": ([vpos], _finite, "all"),
            "C13": ([vneg], _finite, "any"),
            "C14": ([vpos, vneg], _both, "all"),
            "C15": ([vpos, vneg], _one_of, "all"),
        }[cid]
    params["policies"] = len(context.policies)
    status, witness, numeric = _scan(context, quantities, test, quant)
    return ConditionReport(cid, status, QUANTIFIER_NOTE, witness, params, numeric)


def check_conditions(mdp: Mdp, u: UtilitySpec, ids=None, *, guard: int | None = None,
                     context: ConditionContext | None = None) -> list[ConditionReport]:
    """Check several conditions with one shared cache (default: all compatible ones)."""
    ids = compatible_ids(u) if ids is None else [i.upper() for i in ids]
    context = context or ConditionContext(mdp, guard)
    return [check_condition(mdp, u, cid, context=context) for cid in ids]
