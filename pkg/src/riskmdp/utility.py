"""Utility functions over total reward and their growth classes.

Three forms are supported: linear ``U(w) = w``, exponential
``U(w) = iota * gamma**w`` with ``iota = sign(ln gamma)``, and piecewise
linear utilities with constant or linearly extended tails. The growth class
of a utility decides which existence results apply to it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import MdpFormatError, RiskMdpError, UtilityRangeError
from .mdp import PROB_TOL, load_document

#: ``|w * ln(gamma)|`` above this raises instead of overflowing.
EXP_LIMIT = 700.0
#: Grid on which declared exponential bounds are verified.
BOUND_GRID = np.arange(-64, 65, dtype=float)


class ProbabilityMassError(RiskMdpError, ValueError):
    """Lottery probabilities are not a distribution."""


class Growth(enum.Enum):
    LINEAR = "linear"
    EXPONENTIAL = "exponential"
    BOUNDED = "bounded"
    LINEARLY_BOUNDED = "linearly-bounded"
    EXPONENTIALLY_BOUNDED = "exponentially-bounded"


@dataclass(frozen=True)
class ExpBounds:
    """Declared constants with ``U(w) <= C*gp**w + D`` (w >= 0) and
    ``U(w) >= -C*gm**w - D`` (w <= 0)."""

    C: float
    D: float
    gamma_plus: float
    gamma_minus: float

    def __post_init__(self):
        if not (self.C > 0 and self.D > 0):
            raise ValueError("exp_bounds needs C > 0 and D > 0")
        if not self.gamma_plus > 1:
            raise ValueError("exp_bounds needs gamma_plus > 1")
        if not 0 < self.gamma_minus < 1:
            raise ValueError("exp_bounds needs 0 < gamma_minus < 1")


@dataclass(frozen=True)
class GrowthClass:
    kind: Growth
    lower: float | None = None  # bounded: U^-
    upper: float | None = None  # bounded: U^+
    C: float | None = None
    D: float | None = None
    gamma_plus: float | None = None
    gamma_minus: float | None = None


@dataclass(frozen=True)
class UtilitySpec:
    """A monotone utility function.

    Use the :meth:`linear`, :meth:`exponential` and :meth:`piecewise`
    constructors rather than the raw fields.
    """

    form: str
    gamma: float | None = None
    points: tuple[tuple[float, float], ...] = ()
    left_tail: str = "constant"
    right_tail: str = "constant"
    exp_bounds: ExpBounds | None = None

    def __post_init__(self):
        if self.form == "exponential":
            g = self.gamma
            if g is None or not math.isfinite(g) or g <= 0 or g == 1:
                raise ValueError(f"exponential utility needs 0 < gamma != 1, got {g!r}")
        elif self.form == "piecewise":
            if not self.points:
                raise ValueError("piecewise utility needs at least one point")
            for tail in (self.left_tail, self.right_tail):
                if tail not in ("constant", "linear"):
                    raise ValueError(f"tail mode must be 'constant' or 'linear', got {tail!r}")
            ws = [p[0] for p in self.points]
            us = [p[1] for p in self.points]
            if not all(map(math.isfinite, ws + us)):
                raise ValueError("piecewise points must be finite")
            if any(b <= a for a, b in zip(ws, ws[1:])):
                raise ValueError("breakpoints must be strictly increasing")
            if any(b < a for a, b in zip(us, us[1:])):
                raise ValueError("utility values must be non-decreasing")
            if self.exp_bounds is not None:
                self._verify_exp_bounds()
        elif self.form != "linear":
            raise ValueError(f"unknown utility form {self.form!r}")
        if self.exp_bounds is not None and self.form != "piecewise":
            raise ValueError("exp_bounds are only accepted for piecewise utilities")

    @classmethod
    def linear(cls) -> "UtilitySpec":
        return cls("linear")

    @classmethod
    def exponential(cls, gamma: float) -> "UtilitySpec":
        return cls("exponential", gamma=float(gamma))

    @classmethod
    def piecewise(cls, points, left_tail="constant", right_tail="constant",
                  exp_bounds=None) -> "UtilitySpec":
        pts = tuple((float(w), float(u)) for w, u in points)
        return cls("piecewise", points=pts, left_tail=left_tail,
                   right_tail=right_tail, exp_bounds=exp_bounds)

    @property
    def iota(self) -> int:
        """``sign(ln gamma)`` for exponential utilities, ``+1`` otherwise."""
        if self.form == "exponential":
            return 1 if self.gamma > 1 else -1
        return 1

    @property
    def is_convex_exponential(self) -> bool:
        return self.form == "exponential" and self.gamma > 1

    @property
    def is_concave_exponential(self) -> bool:
        return self.form == "exponential" and self.gamma < 1

    def _slopes(self):
        ws = np.array([p[0] for p in self.points])
        us = np.array([p[1] for p in self.points])
        if len(ws) < 2:
            return np.zeros(0), 0.0, 0.0
        inner = np.diff(us) / np.diff(ws)
        left = inner[0] if self.left_tail == "linear" else 0.0
        right = inner[-1] if self.right_tail == "linear" else 0.0
        return inner, float(left), float(right)

    def _verify_exp_bounds(self):
        b = self.exp_bounds
        w = BOUND_GRID
        u = self(w)
        pos = w >= 0
        neg = w <= 0
        upper = b.C * b.gamma_plus ** w[pos] + b.D
        lower = -b.C * b.gamma_minus ** w[neg] - b.D
        if np.any(u[pos] > upper) or np.any(u[neg] < lower):
            raise ValueError("declared exp_bounds do not hold on the grid -64..64")

    @cached_property
    def growth(self) -> GrowthClass:
        if self.form == "linear":
            return GrowthClass(Growth.LINEAR, C=1.0, D=1.0)
        if self.form == "exponential":
            return GrowthClass(Growth.EXPONENTIAL)
        if self.exp_bounds is not None:
            b = self.exp_bounds
            return GrowthClass(Growth.EXPONENTIALLY_BOUNDED, C=b.C, D=b.D,
                               gamma_plus=b.gamma_plus, gamma_minus=b.gamma_minus)
        us = [p[1] for p in self.points]
        if self.left_tail == "constant" and self.right_tail == "constant":
            return GrowthClass(Growth.BOUNDED, lower=us[0], upper=us[-1])
        # slopes are everywhere <= C, so U(0) - C|w| <= U(w) <= U(0) + C|w|
        inner, left, right = self._slopes()
        slope = max([left, right, *inner.tolist()], default=0.0)
        C = slope if slope > 0 else 1.0
        u0 = abs(float(self(0.0)))
        D = u0 if u0 > 0 else 1.0
        return GrowthClass(Growth.LINEARLY_BOUNDED, C=C, D=D)

    def describe(self) -> str:
        if self.form == "linear":
            return "linear"
        if self.form == "exponential":
            return f"exponential(gamma={self.gamma:.12g})"
        return (f"piecewise({len(self.points)} points, "
                f"{self.left_tail}/{self.right_tail} tails)")

    def __call__(self, w):
        return evaluate_utility(self, w)


def evaluate_utility(u: UtilitySpec, w):
    """Evaluate ``U(w)`` for a scalar or array of finite total rewards.

    Raises
    ------
    UtilityRangeError
        If an exponential evaluation has ``|w * ln(gamma)| > 700``.
    """
    scalar = np.ndim(w) == 0
    w_arr = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w_arr)):
        raise ValueError("total reward must be finite")
    if u.form == "linear":
        out = w_arr.copy()
    elif u.form == "exponential":
        expo = w_arr * math.log(u.gamma)
        if np.any(np.abs(expo) > EXP_LIMIT):
            raise UtilityRangeError(
                f"gamma**w out of range for gamma={u.gamma!r} (|w ln gamma| > {EXP_LIMIT:g})"
            )
        out = u.iota * np.power(u.gamma, w_arr)
    else:
        ws = np.array([p[0] for p in u.points])
        us = np.array([p[1] for p in u.points])
        w_arr = np.atleast_1d(w_arr)
        out = np.interp(w_arr, ws, us)
        _, left, right = u._slopes()
        if left:
            lo = w_arr < ws[0]
            out[lo] = us[0] + left * (w_arr[lo] - ws[0])
        if right:
            hi = w_arr > ws[-1]
            out[hi] = us[-1] + right * (w_arr[hi] - ws[-1])
    return float(out.reshape(-1)[0]) if scalar else out


def lottery_eu(u: UtilitySpec, outcomes) -> float:
    """Expected utility of a lottery given as ``(probability, wealth)`` pairs."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ProbabilityMassError("empty lottery")
    probs = np.array([p for p, _ in outcomes], dtype=float)
    if np.any(probs <= 0):
        raise ProbabilityMassError("lottery probabilities must be positive")
    mass = probs.sum()
    if abs(mass - 1.0) > PROB_TOL:
        raise ProbabilityMassError(f"lottery probability mass {mass:.12g} != 1")
    wealth = np.array([w for _, w in outcomes], dtype=float)
    return float(np.dot(probs, evaluate_utility(u, wealth)))


def parse_utility(text: str) -> UtilitySpec:
    """Parse a utility document (``{type: linear|exponential|piecewise, ...}``)."""
    doc = load_document(text)
    if not isinstance(doc, dict) or "type" not in doc:
        raise MdpFormatError("utility document needs a 'type' field", "document")
    kind = doc["type"]
    try:
        if kind == "linear":
            return UtilitySpec.linear()
        if kind == "exponential":
            if "gamma" not in doc:
                raise MdpFormatError("missing 'gamma'", "gamma")
            return UtilitySpec.exponential(float(doc["gamma"]))
        if kind == "piecewise":
            pts = doc.get("points")
            if not isinstance(pts, list) or not all(
                isinstance(p, (list, tuple)) and len(p) == 2 for p in pts
            ):
                raise MdpFormatError("'points' must be a list of [w, u] pairs", "points")
            bounds = doc.get("exp_bounds")
            if bounds is not None:
                bounds = ExpBounds(float(bounds["C"]), float(bounds["D"]),
                                   float(bounds["gamma_plus"]),
                                   float(bounds["gamma_minus"]))
            return UtilitySpec.piecewise(
                pts,
                left_tail=doc.get("left_tail", "constant"),
                right_tail=doc.get("right_tail", "constant"),
                exp_bounds=bounds,
            )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MdpFormatError):
            raise
        raise MdpFormatError(str(exc), "utility") from None
    raise MdpFormatError(f"unknown utility type {kind!r}", "type")


def dump_utility(u: UtilitySpec) -> dict:
    if u.form == "linear":
        return {"type": "linear"}
    if u.form == "exponential":
        return {"type": "exponential", "gamma": u.gamma}
    doc = {"type": "piecewise", "points": [list(p) for p in u.points],
           "left_tail": u.left_tail, "right_tail": u.right_tail}
    if u.exp_bounds is not None:
        b = u.exp_bounds
        doc["exp_bounds"] = {"C": b.C, "D": b.D, "gamma_plus": b.gamma_plus,
                             "gamma_minus": b.gamma_minus}
    return doc
