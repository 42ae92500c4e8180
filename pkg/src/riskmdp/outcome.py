"""Extended-real results with an existence status.

Extended reals are plain floats: ``math.inf`` and ``-math.inf`` stand for the
two infinities, which already gives the required total order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

OSCILLATION = "oscillation"
UNDETERMINED = "undetermined-numeric"


def format_ext(x: float) -> str:
    """Render an extended real with 12 significant digits or as ``+inf``/``-inf``."""
    if x == math.inf:
        return "+inf"
    if x == -math.inf:
        return "-inf"
    if x == 0:
        x = 0.0  # drop the sign of negative zero
    return format(x, ".12g")


@dataclass(frozen=True)
class ValueOutcome:
    """Existence status of one infinite-horizon value.

    ``numeric`` marks verdicts that come from the finite-horizon probe rather
    than from an analytic argument.
    """

    exists: bool
    value: float | None = None
    reason: str | None = None
    numeric: bool = False

    def __post_init__(self):
        if self.exists and (self.value is None or math.isnan(self.value)):
            raise ValueError("an existing value needs an extended real")
        if not self.exists and self.reason is None:
            raise ValueError("a non-existent value needs a reason")

    @classmethod
    def of(cls, value: float, numeric: bool = False) -> "ValueOutcome":
        return cls(True, float(value), None, numeric)

    @classmethod
    def nonexistent(cls, reason: str, numeric: bool = False) -> "ValueOutcome":
        return cls(False, None, reason, numeric)

    @property
    def is_finite(self) -> bool:
        return self.exists and math.isfinite(self.value)

    @property
    def is_infinite(self) -> bool:
        return self.exists and math.isinf(self.value)

    @property
    def undetermined(self) -> bool:
        return not self.exists and self.reason == UNDETERMINED

    def token(self) -> str:
        if self.exists:
            return format_ext(self.value)
        return f"nonexistent({self.reason})"

    def __str__(self):
        return self.token() + (" [numeric]" if self.numeric else "")


@dataclass(frozen=True)
class ValueVector:
    """Finite per-state values at a horizon (``horizon=None`` for infinite)."""

    states: tuple[str, ...]
    values: np.ndarray
    horizon: int | None
    utility: str

    def __getitem__(self, state: str) -> float:
        return float(self.values[self.states.index(state)])

    def as_dict(self) -> dict[str, float]:
        return {s: float(v) for s, v in zip(self.states, self.values)}
