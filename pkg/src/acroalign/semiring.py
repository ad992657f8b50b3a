"""Tropical min-plus weights: the cost algebra all machines here are weighted over.

Alternatives combine by taking the minimum, costs along a path combine by
addition.  The carrier is the non-negative reals plus infinity; infinity is
the additive identity (an impossible alternative), zero the multiplicative
identity (a free step).
"""

from __future__ import annotations

import math

__all__ = ["TropicalWeight", "w_plus", "w_times", "format_weight", "parse_weight"]


class TropicalWeight:
    """A non-negative cost, or infinity.  Immutable."""

    __slots__ = ("value",)

    def __init__(self, value: float):
        value = float(value)
        if math.isnan(value) or value < 0.0:
            raise ValueError(f"tropical weight must be >= 0 or inf, got {value!r}")
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, _value):
        raise AttributeError(f"TropicalWeight is immutable, cannot set {name!r}")

    @classmethod
    def zero(cls) -> "TropicalWeight":
        """The identity of alternative-combination: infinity."""
        return cls(math.inf)

    @classmethod
    def one(cls) -> "TropicalWeight":
        """The identity of path-combination: cost 0."""
        return cls(0.0)

    def plus(self, other: "TropicalWeight") -> "TropicalWeight":
        return TropicalWeight(min(self.value, other.value))

    def times(self, other: "TropicalWeight") -> "TropicalWeight":
        return TropicalWeight(self.value + other.value)

    def is_zero(self) -> bool:
        return math.isinf(self.value)

    def __float__(self) -> float:
        return self.value

    def __eq__(self, other) -> bool:
        if isinstance(other, TropicalWeight):
            return self.value == other.value
        if isinstance(other, (int, float)):
            return self.value == float(other)
        return NotImplemented

    def __lt__(self, other: "TropicalWeight") -> bool:
        return self.value < other.value

    def __le__(self, other: "TropicalWeight") -> bool:
        return self.value <= other.value

    def __hash__(self) -> int:
        return hash(self.value)

    def __repr__(self) -> str:
        return f"TropicalWeight({format_weight(self)})"


def w_plus(a: TropicalWeight, b: TropicalWeight) -> TropicalWeight:
    """Combine alternatives: the cheaper of the two costs."""
    return a.plus(b)


def w_times(a: TropicalWeight, b: TropicalWeight) -> TropicalWeight:
    """Combine along a path: the sum of the two costs (inf absorbs)."""
    return a.times(b)


def format_weight(w: "TropicalWeight | float") -> str:
    """Shortest textual form: `inf`, an integer, or a decimal literal."""
    v = float(w)
    if math.isinf(v):
        return "inf"
    if v == int(v):
        return str(int(v))
    return repr(v)


def parse_weight(text: str) -> TropicalWeight:
    """Inverse of :func:`format_weight`; raises ValueError on junk or negatives."""
    return TropicalWeight(float(text))
