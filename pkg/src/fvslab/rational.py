"""Exact rational numbers and vertex costs.

Everything numeric in this package is an exact fraction; no float ever enters a
solver, an oracle, or a certificate.  ``Q`` is the rational constructor
(gmpy2.mpq when available, fractions.Fraction otherwise -- set
``FVS_LAB_RATIONAL=python`` to force the fallback).
"""

from __future__ import annotations

import os
from typing import Union

if os.environ.get("FVS_LAB_RATIONAL", "").lower() == "python":
    from fractions import Fraction as Q
else:
    try:
        from gmpy2 import mpq as Q  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
        from fractions import Fraction as Q  # type: ignore[no-redef]

Rational = Q  # alias matching the domain vocabulary

ZERO = Q(0)
ONE = Q(1)

RationalLike = Union[int, str, "Rational"]


def rat(value: RationalLike = 0, den: int | None = None) -> "Rational":
    """Build a rational from an int, a ``p/q`` string, or another rational."""
    if den is not None:
        return Q(value, den)
    if isinstance(value, str):
        return parse_rational(value)
    return Q(value)


def parse_rational(text: str) -> "Rational":
    """Parse ``p`` or ``p/q`` (exact; no decimals accepted)."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        d = int(den)
        if d == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Q(int(num), d)
    return Q(int(text))


def format_rational(value: "Rational") -> str:
    """Render as ``p`` or ``p/q`` (round-trips through parse_rational)."""
    return str(value)


class Cost:
    """A vertex cost: a non-negative rational, or infinity.

    Infinity is a first-class variant (forced-undeletable vertices), never a
    large number.  Finite costs must be >= 0.
    """

    __slots__ = ("_value",)

    def __init__(self, value: "Rational | None"):
        if value is not None:
            value = Q(value)
            if value < 0:
                raise ValueError(f"finite costs must be non-negative, got {value}")
        self._value = value

    @classmethod
    def finite(cls, value: RationalLike) -> "Cost":
        return cls(rat(value))

    @classmethod
    def infinite(cls) -> "Cost":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self._value is None

    @property
    def value(self) -> "Rational":
        """The finite value; raises on infinity."""
        if self._value is None:
            raise ValueError("infinite cost has no finite value")
        return self._value

    def finite_or(self, default: "Rational") -> "Rational":
        return default if self._value is None else self._value

    def __add__(self, other: "Cost") -> "Cost":
        if self.is_infinite or other.is_infinite:
            return Cost(None)
        return Cost(self._value + other._value)

    def __radd__(self, other):
        if other == 0:  # allow sum() over costs
            return self
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cost):
            return NotImplemented
        return self._value == other._value

    def __hash__(self) -> int:
        return hash(("Cost", self._value))

    def __lt__(self, other: "Cost") -> bool:
        if self.is_infinite:
            return False
        if other.is_infinite:
            return True
        return self._value < other._value

    def __le__(self, other: "Cost") -> bool:
        return self == other or self < other

    def __str__(self) -> str:
        return "inf" if self._value is None else format_rational(self._value)

    def __repr__(self) -> str:
        return f"Cost({self})"


INFINITE = Cost.infinite()


def parse_cost(text: str) -> Cost:
    text = text.strip()
    if text.lower() in ("inf", "infinity"):
        return INFINITE
    value = parse_rational(text)
    return Cost(value)


def sum_costs(costs) -> Cost:
    total = Cost(ZERO)
    for c in costs:
        total = total + c
    return total
