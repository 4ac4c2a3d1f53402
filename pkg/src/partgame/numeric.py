"""Exact rational values and the float/epsilon comparison mode."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Union

Number = Union[Fraction, float]


def to_exact(value) -> Fraction:
    """Parse ``value`` as an exact rational.

    Strings may be decimals (``"0.3"`` -> 3/10) or fractions (``"16/7"``).
    Floats go through their shortest repr, so ``0.3`` also becomes 3/10
    rather than the nearest binary fraction.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {value!r} as a rational number") from exc
    raise TypeError(f"unsupported numeric type {type(value).__name__}")


def format_fraction(x: Fraction) -> str:
    """Lossless ``"p/q"`` rendering (integers keep the ``/1``)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def format_decimal(x: Real, digits: int = 12) -> str:
    return f"{float(x):.{digits}g}"


@dataclass(frozen=True)
class NumericMode:
    """How numbers are represented and how inequalities are decided.

    ``kind="exact"`` keeps everything as :class:`~fractions.Fraction`.
    ``kind="float"`` converts to float and treats ``|x - y| <= epsilon`` as
    equality in every comparison.
    """

    kind: str = "exact"
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exact", "float"):
            raise ValueError(f"unknown numeric mode {self.kind!r}")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be nonnegative")
        if self.kind == "exact" and self.epsilon != 0:
            raise ValueError("exact mode takes no epsilon")

    @classmethod
    def exact(cls) -> NumericMode:
        return cls("exact", 0.0)

    @classmethod
    def float_(cls, epsilon: float = 1e-12) -> NumericMode:
        return cls("float", float(epsilon))

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def convert(self, value) -> Number:
        x = to_exact(value)
        return x if self.is_exact else float(x)

    def sign(self, x: Number) -> int:
        """Sign of ``x`` with the tolerance band collapsed to zero."""
        if x > self.epsilon:
            return 1
        if x < -self.epsilon:
            return -1
        return 0

    def geq(self, a: Number, b: Number) -> bool:
        return self.sign(a - b) >= 0

    def leq(self, a: Number, b: Number) -> bool:
        return self.sign(a - b) <= 0

    def gt(self, a: Number, b: Number) -> bool:
        return self.sign(a - b) > 0

    def lt(self, a: Number, b: Number) -> bool:
        return self.sign(a - b) < 0

    def eq(self, a: Number, b: Number) -> bool:
        return self.sign(a - b) == 0

    def ceil(self, x: Number) -> int:
        """Ceiling that snaps float values within epsilon of an integer."""
        if isinstance(x, Fraction) or self.is_exact:
            return math.ceil(x)
        nearest = round(x)
        if abs(x - nearest) <= max(self.epsilon, 1e-9 * max(1.0, abs(x))):
            return int(nearest)
        return math.ceil(x)


EXACT = NumericMode.exact()
