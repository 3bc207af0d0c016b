"""OEE factor formulas in exact rational arithmetic.

A factor that cannot be computed (zero operating time, zero production) is
returned as ``None`` and reported through ``KpiValues.flags``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

Ratio = Optional[Fraction]
Number = Union[int, Fraction]


def availability(total_time: Number, down_time: Number) -> Fraction:
    if total_time <= 0:
        raise ValueError("total_time must be positive")
    if not 0 <= down_time <= total_time:
        raise ValueError(f"down_time {down_time} outside [0, {total_time}]")
    return Fraction(total_time - down_time) / Fraction(total_time)


def performance(cycle_time: Number, total_production: int, operating_time: Number) -> Ratio:
    if total_production < 0 or cycle_time <= 0:
        raise ValueError("cycle_time must be positive and total_production non-negative")
    if operating_time < 0:
        raise ValueError("operating_time must be non-negative")
    if operating_time == 0:
        return None
    return Fraction(cycle_time) * total_production / Fraction(operating_time)


def quality(total: int, defected: int) -> Ratio:
    if not 0 <= defected:
        raise ValueError("defected must be non-negative")
    if defected > total:
        raise ValueError(f"defected ({defected}) exceeds total ({total})")
    if total == 0:
        return None
    return Fraction(total - defected, total)


def oee(a: Ratio, p: Ratio, q: Ratio) -> Ratio:
    if a is None or p is None or q is None:
        return None
    return Fraction(a) * Fraction(p) * Fraction(q)


@dataclass(frozen=True)
class KpiValues:
    availability: Ratio
    performance: Ratio
    quality: Ratio
    oee: Ratio
    flags: tuple[str, ...] = ()

    @classmethod
    def combine(cls, a: Ratio, p: Ratio, q: Ratio) -> "KpiValues":
        flags = []
        for name, value in (("availability", a), ("performance", p), ("quality", q)):
            if value is None:
                flags.append(f"{name}-undefined")
        total = oee(a, p, q)
        if total is None:
            flags.append("oee-undefined")
        if p is not None and p > 1:
            # reported unclamped
            flags.append("performance-above-1")
        return cls(a, p, q, total, tuple(flags))

    def as_floats(self) -> dict[str, float | None]:
        return {k: (None if v is None else float(v)) for k, v in self.factors().items()}

    def factors(self) -> dict[str, Ratio]:
        return {
            "availability": self.availability,
            "performance": self.performance,
            "quality": self.quality,
            "oee": self.oee,
        }

    def close_to(self, other: "KpiValues", tol: float = 1e-9) -> bool:
        for name, mine in self.factors().items():
            theirs = other.factors()[name]
            if (mine is None) != (theirs is None):
                return False
            if mine is not None and abs(float(mine - theirs)) > tol:  # type: ignore[operator]
                return False
        return True
