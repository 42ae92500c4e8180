"""Stationary policies and their enumeration."""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import GuardExceededError, MdpFormatError, PolicyError
from .mdp import PROB_TOL, Mdp, load_document

DEFAULT_GUARD = 10**6


def policy_guard() -> int:
    """Enumeration guard, overridable through ``RISKMDP_POLICY_GUARD``."""
    raw = os.environ.get("RISKMDP_POLICY_GUARD")
    if raw is None:
        return DEFAULT_GUARD
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"RISKMDP_POLICY_GUARD must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class StationaryPolicy:
    """A stationary decision rule.

    ``rule`` maps each state to an action name (deterministic) or to a
    mapping ``action -> probability`` with strictly positive entries
    (randomized).
    """

    kind: str
    rule: Mapping

    def __post_init__(self):
        if self.kind == "deterministic":
            for s, a in self.rule.items():
                if not isinstance(a, str):
                    raise PolicyError(f"state {s!r}: expected an action name, got {a!r}")
        elif self.kind == "randomized":
            for s, dist in self.rule.items():
                if not isinstance(dist, Mapping) or not dist:
                    raise PolicyError(f"state {s!r}: expected an action distribution")
                if any(not (p > 0) for p in dist.values()):
                    raise PolicyError(f"state {s!r}: action probabilities must be positive")
                mass = math.fsum(dist.values())
                if abs(mass - 1.0) > PROB_TOL:
                    raise PolicyError(f"state {s!r}: action probabilities sum to {mass:.12g}")
        else:
            raise PolicyError(f"unknown policy kind {self.kind!r}")

    @classmethod
    def deterministic(cls, choice: Mapping[str, str]) -> "StationaryPolicy":
        return cls("deterministic", dict(choice))

    @classmethod
    def randomized(cls, choice: Mapping[str, Mapping[str, float]]) -> "StationaryPolicy":
        return cls("randomized", {s: {a: float(p) for a, p in d.items()}
                                  for s, d in choice.items()})

    def distribution(self, state: str) -> dict[str, float]:
        """``pi(state, .)`` as a mapping over the actions in its support."""
        try:
            entry = self.rule[state]
        except KeyError:
            raise PolicyError(f"policy has no rule for state {state!r}") from None
        if self.kind == "deterministic":
            return {entry: 1.0}
        return dict(entry)

    def check(self, mdp: Mdp) -> None:
        """Raise :class:`PolicyError` unless the policy fits ``mdp``."""
        extra = set(self.rule) - set(mdp.states)
        if extra:
            raise PolicyError(f"policy mentions unknown states {sorted(extra)}")
        for s in mdp.states:
            for a in self.distribution(s):
                if a not in mdp.enabled.get(s, ()):
                    raise PolicyError(f"action {a!r} is not enabled in state {s!r}")

    def describe(self) -> str:
        if self.kind == "deterministic":
            return ", ".join(f"{s}->{a}" for s, a in self.rule.items())
        parts = []
        for s, d in self.rule.items():
            inner = " ".join(f"{a}:{p:.6g}" for a, p in d.items())
            parts.append(f"{s}->{{{inner}}}")
        return ", ".join(parts)


def sd_policy_count(mdp: Mdp) -> int:
    return math.prod(len(mdp.enabled.get(s, ())) for s in mdp.states)


def enumerate_sd_policies(mdp: Mdp, guard: int | None = None) -> Iterator[StationaryPolicy]:
    """All stationary deterministic policies in lexicographic order.

    The first state varies slowest; actions follow each state's enabled order.

    Raises
    ------
    GuardExceededError
        Immediately, if the number of policies exceeds ``guard``.
    """
    guard = policy_guard() if guard is None else guard
    count = sd_policy_count(mdp)
    if count > guard:
        raise GuardExceededError(count, guard)
    choices = [mdp.enabled[s] for s in mdp.states]
    return (
        StationaryPolicy.deterministic(dict(zip(mdp.states, combo)))
        for combo in itertools.product(*choices)
    )


def parse_policy(text: str) -> StationaryPolicy:
    doc = load_document(text)
    if not isinstance(doc, dict) or "type" not in doc or "choice" not in doc:
        raise MdpFormatError("policy document needs 'type' and 'choice'", "document")
    choice = doc["choice"]
    if not isinstance(choice, dict):
        raise MdpFormatError("'choice' must be a mapping", "choice")
    kind = doc["type"]
    if kind == "deterministic":
        return StationaryPolicy.deterministic({str(s): str(a) for s, a in choice.items()})
    if kind == "randomized":
        try:
            return StationaryPolicy.randomized(
                {str(s): {str(a): float(p) for a, p in d.items()} for s, d in choice.items()}
            )
        except (AttributeError, TypeError, ValueError) as exc:
            raise MdpFormatError(str(exc), "choice") from None
    raise MdpFormatError(f"unknown policy type {kind!r}", "type")


def dump_policy(pi: StationaryPolicy) -> dict:
    return {"type": pi.kind, "choice": {s: (a if pi.kind == "deterministic" else dict(a))
                                        for s, a in pi.rule.items()}}
