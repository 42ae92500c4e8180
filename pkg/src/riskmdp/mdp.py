"""Finite Markov decision processes with per-transition rewards.

An :class:`Mdp` is built from transition records ``(from, action, to, prob,
reward)``. Construction is lenient so that :func:`validate` can report every
structural problem at once; :func:`parse_mdp` validates by default.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator, Mapping

import yaml

from .errors import MdpFormatError, MdpValidationError

PROB_TOL = 1e-9


@dataclass(frozen=True)
class Transition:
    target: str
    prob: float
    reward: float


@dataclass(frozen=True)
class Diagnostic:
    """One invariant violation, located at a state (and action, if relevant)."""

    state: str | None
    action: str | None
    message: str

    def __str__(self):
        where = []
        if self.state is not None:
            where.append(f"state {self.state!r}")
        if self.action is not None:
            where.append(f"action {self.action!r}")
        prefix = ", ".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


@dataclass(frozen=True)
class Mdp:
    """A finite MDP.

    Parameters
    ----------
    states : tuple of str
        State names; their order is the canonical index order.
    actions : tuple of str
        Every action name that is enabled somewhere.
    enabled : mapping state -> tuple of actions
        Actions available in each state, in document order.
    transitions : mapping (state, action) -> tuple of Transition
        Successor lists. Duplicate successors are allowed and are summed by
        the numerical engines.
    initial : str, optional
        Distinguished start state; informational only.
    """

    states: tuple[str, ...]
    actions: tuple[str, ...]
    enabled: Mapping[str, tuple[str, ...]]
    transitions: Mapping[tuple[str, str], tuple[Transition, ...]]
    initial: str | None = field(default=None, compare=True)

    @classmethod
    def from_records(cls, states, records, initial=None) -> "Mdp":
        """Build an MDP from ``(from, action, to, prob, reward)`` tuples."""
        states = tuple(states)
        enabled: dict[str, list[str]] = {s: [] for s in states}
        trans: dict[tuple[str, str], list[Transition]] = {}
        for src, act, dst, prob, reward in records:
            if src not in enabled:
                enabled[src] = []
            if act not in enabled[src]:
                enabled[src].append(act)
            trans.setdefault((src, act), []).append(
                Transition(dst, float(prob), float(reward))
            )
        actions: list[str] = []
        for s in enabled:
            for a in enabled[s]:
                if a not in actions:
                    actions.append(a)
        return cls(
            states=states,
            actions=tuple(actions),
            enabled={s: tuple(a) for s, a in enabled.items()},
            transitions={k: tuple(v) for k, v in trans.items()},
            initial=initial,
        )

    @cached_property
    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @property
    def n_states(self) -> int:
        return len(self.states)

    def records(self) -> Iterator[tuple[str, str, str, float, float]]:
        """Transition records in canonical (state, enabled action, list) order."""
        for s in self.states:
            for a in self.enabled.get(s, ()):
                for t in self.transitions.get((s, a), ()):
                    yield s, a, t.target, t.prob, t.reward

    def rewards(self) -> Iterator[float]:
        for *_, r in self.records():
            yield r


def validate(mdp: Mdp) -> list[Diagnostic]:
    """Return one :class:`Diagnostic` per violated invariant (empty if valid)."""
    out: list[Diagnostic] = []
    if not mdp.states:
        out.append(Diagnostic(None, None, "the state set is empty"))
    if len(set(mdp.states)) != len(mdp.states):
        out.append(Diagnostic(None, None, "duplicate state names"))
    if not mdp.actions:
        out.append(Diagnostic(None, None, "the action set is empty"))
    known = set(mdp.states)
    for s in mdp.enabled:
        if s not in known:
            out.append(Diagnostic(s, None, "transitions leave an undeclared state"))
    for s in mdp.states:
        acts = mdp.enabled.get(s, ())
        if not acts:
            out.append(Diagnostic(s, None, "no enabled action"))
        for a in acts:
            if a not in mdp.actions:
                out.append(Diagnostic(s, a, "action missing from the action set"))
            succ = mdp.transitions.get((s, a), ())
            if not succ:
                out.append(Diagnostic(s, a, "enabled action has no transitions"))
                continue
            mass = 0.0
            for t in succ:
                if t.target not in known:
                    out.append(Diagnostic(s, a, f"unknown successor {t.target!r}"))
                if not (0.0 < t.prob <= 1.0):
                    out.append(
                        Diagnostic(s, a, f"probability {t.prob!r} outside (0, 1]")
                    )
                if not math.isfinite(t.reward):
                    out.append(Diagnostic(s, a, f"reward {t.reward!r} is not finite"))
                mass += t.prob
            if abs(mass - 1.0) > PROB_TOL:
                out.append(
                    Diagnostic(s, a, f"probability mass {mass:.12g} != 1")
                )
    for s, a in mdp.transitions:
        if a not in mdp.enabled.get(s, ()):
            out.append(Diagnostic(s, a, "transitions listed for a disabled action"))
    return out


def check_valid(mdp: Mdp) -> Mdp:
    diags = validate(mdp)
    if diags:
        raise MdpValidationError(diags)
    return mdp


class RewardSign(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    MIXED = "mixed"
    ALL_ZERO = "all-zero"


def classify_rewards(rewards: Iterable[float]) -> RewardSign:
    has_pos = has_neg = False
    for r in rewards:
        if r > 0:
            has_pos = True
        elif r < 0:
            has_neg = True
    if has_pos and has_neg:
        return RewardSign.MIXED
    if has_pos:
        return RewardSign.POSITIVE
    if has_neg:
        return RewardSign.NEGATIVE
    return RewardSign.ALL_ZERO


def reward_sign(mdp: Mdp) -> RewardSign:
    """Sign class of all rewards; exact comparisons against zero."""
    return classify_rewards(mdp.rewards())


def signed_part(mdp: Mdp, sign: str) -> Mdp:
    """Replace every reward by ``max(r, 0)`` (``"positive"``) or ``min(r, 0)``."""
    if sign == "positive":
        clip = lambda r: max(r, 0.0)  # noqa: E731
    elif sign == "negative":
        clip = lambda r: min(r, 0.0)  # noqa: E731
    else:
        raise ValueError(f"sign must be 'positive' or 'negative', got {sign!r}")
    trans = {
        key: tuple(replace(t, reward=clip(t.reward)) for t in succ)
        for key, succ in mdp.transitions.items()
    }
    return replace(mdp, transitions=trans)


# ---------------------------------------------------------------------------
# documents


def load_document(text: str):
    """Parse a YAML or JSON document, reporting syntax errors with a line number."""
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        loc = f"line {mark.line + 1}, column {mark.column + 1}" if mark else None
        raise MdpFormatError(exc.problem or str(exc), loc) from None
    except yaml.YAMLError as exc:
        raise MdpFormatError(str(exc)) from None


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MdpFormatError(f"expected a number, got {value!r}", where)
    return float(value)


def _name(value, where):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise MdpFormatError(f"expected a name, got {value!r}", where)
    return str(value)


def parse_mdp(text: str, strict: bool = True) -> Mdp:
    """Parse an MDP document.

    The document is a mapping with ``states`` (list of names), ``transitions``
    (list of ``{from, action, to, prob, reward}`` records) and an optional
    ``initial`` state. With ``strict=True`` the result is validated and an
    :class:`MdpValidationError` is raised on any diagnostic.
    """
    doc = load_document(text)
    if not isinstance(doc, dict):
        raise MdpFormatError("top level must be a mapping", "document")
    for key in doc:
        if key not in ("states", "transitions", "initial"):
            raise MdpFormatError(f"unknown field {key!r}", "document")
    raw_states = doc.get("states")
    if not isinstance(raw_states, list):
        raise MdpFormatError("'states' must be a list", "states")
    states = [_name(s, f"states[{i}]") for i, s in enumerate(raw_states)]
    seen = set()
    for i, s in enumerate(states):
        if s in seen:
            raise MdpFormatError(f"duplicate state {s!r}", f"states[{i}]")
        seen.add(s)
    raw_trans = doc.get("transitions", [])
    if not isinstance(raw_trans, list):
        raise MdpFormatError("'transitions' must be a list", "transitions")
    records = []
    for i, rec in enumerate(raw_trans):
        where = f"transitions[{i}]"
        if not isinstance(rec, dict):
            raise MdpFormatError("record must be a mapping", where)
        missing = {"from", "action", "to", "prob", "reward"} - set(rec)
        if missing:
            raise MdpFormatError(f"missing field(s) {sorted(missing)}", where)
        extra = set(rec) - {"from", "action", "to", "prob", "reward"}
        if extra:
            raise MdpFormatError(f"unknown field(s) {sorted(extra)}", where)
        src = _name(rec["from"], f"{where}.from")
        dst = _name(rec["to"], f"{where}.to")
        act = _name(rec["action"], f"{where}.action")
        for key, val in (("from", src), ("to", dst)):
            if val not in seen:
                raise MdpFormatError(f"unknown state {val!r}", f"{where}.{key}")
        prob = _number(rec["prob"], f"{where}.prob")
        if not (0.0 < prob <= 1.0):
            raise MdpFormatError(f"probability {prob!r} outside (0, 1]", f"{where}.prob")
        reward = _number(rec["reward"], f"{where}.reward")
        records.append((src, act, dst, prob, reward))
    initial = doc.get("initial")
    if initial is not None:
        initial = _name(initial, "initial")
        if initial not in seen:
            raise MdpFormatError(f"unknown state {initial!r}", "initial")
    mdp = Mdp.from_records(states, records, initial=initial)
    if strict:
        check_valid(mdp)
    return mdp


def dump_mdp(mdp: Mdp) -> str:
    """Canonical JSON serialization; ``parse_mdp(dump_mdp(m)) == m``."""
    doc: dict = {"states": list(mdp.states)}
    if mdp.initial is not None:
        doc["initial"] = mdp.initial
    doc["transitions"] = [
        {"from": s, "action": a, "to": t, "prob": p, "reward": r}
        for s, a, t, p, r in mdp.records()
    ]
    return json.dumps(doc, indent=2) + "\n"


def read_mdp(path, strict: bool = True) -> Mdp:
    with open(path, encoding="utf-8") as fh:
        return parse_mdp(fh.read(), strict=strict)
