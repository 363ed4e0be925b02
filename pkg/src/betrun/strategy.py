"""Restart strategies: the Luby sequence, schedule resolution and the catalog.

All time arithmetic is in integer time units. Percentages are exact
:class:`fractions.Fraction` values so that e.g. ``0.25`` or ``0.1`` percent
resolve without binary rounding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

__all__ = [
    "BudgetTooSmall",
    "InfeasibleStrategy",
    "Schedule",
    "Strategy",
    "StrategyError",
    "catalog",
    "format_percent",
    "luby",
    "luby_prefix_sum",
    "resolve_schedule",
]


class StrategyError(ValueError):
    """Base class for invalid strategies and schedules."""


class InfeasibleStrategy(StrategyError):
    """Phase 1 would need more than the total budget."""


class BudgetTooSmall(StrategyError):
    """A Phase-1 run would be allotted zero time units."""


def luby(i: int) -> int:
    """Return the ``i``-th term (1-based) of the Luby universal sequence."""
    if i < 1:
        raise ValueError(f"luby index must be >= 1, got {i}")
    while True:
        k = i.bit_length()  # 2**(k-1) <= i < 2**k
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1


def luby_prefix_sum(k: int) -> int:
    """Sum of the first ``k`` Luby terms.

    The first ``2**j - 1`` terms sum to ``j * 2**(j-1)``; any other prefix is
    such a block followed by a shorter prefix of the sequence itself.
    """
    if k < 1:
        raise ValueError(f"luby prefix length must be >= 1, got {k}")
    total = 0
    while k > 0:
        j = k.bit_length()
        if k == (1 << j) - 1:
            return total + j * (1 << (j - 1))
        total += (j - 1) * (1 << (j - 2)) if j >= 2 else 0
        k -= (1 << (j - 1)) - 1
    return total


_DECIMAL_RE = re.compile(r"^(\d+)(?:\.(\d+))?$")


def parse_percent(text: str) -> Fraction:
    """Parse a plain dot-decimal like ``"0.25"`` into an exact fraction."""
    m = _DECIMAL_RE.match(text.strip())
    if not m:
        raise StrategyError(f"not a decimal percentage: {text!r}")
    whole, frac = m.group(1), m.group(2) or ""
    return Fraction(int(whole + frac), 10 ** len(frac))


def format_percent(x: Fraction) -> str:
    """Inverse of :func:`parse_percent`; shortest exact dot-decimal."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        raise StrategyError(f"{x} has no terminating decimal expansion")
    digits = max(twos, fives)
    scaled = x * 10**digits
    whole, frac = divmod(scaled.numerator, 10**digits)
    return f"{whole}.{frac:0{digits}d}".rstrip("0")


@dataclass(frozen=True)
class Strategy:
    """A bet-and-run restart policy.

    ``variant="fixed"``: ``k`` Phase-1 runs of ``x`` percent of the total
    budget each. ``variant="luby"``: ``k`` Phase-1 runs whose lengths follow
    the Luby sequence, one Luby unit being ``x`` percent of the total.
    """

    variant: Literal["fixed", "luby"]
    k: int
    x: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", Fraction(self.x))
        if self.variant not in ("fixed", "luby"):
            raise StrategyError(f"unknown strategy variant {self.variant!r}")
        if self.k < 1:
            raise StrategyError(f"k must be >= 1, got {self.k}")
        if self.x <= 0:
            raise StrategyError(f"x must be > 0, got {self.x}")
        if self.phase1_percent > 100:
            raise InfeasibleStrategy(
                f"{self}: Phase 1 needs {float(self.phase1_percent):g}% of the budget"
            )

    @property
    def units(self) -> int:
        """Number of x%-units Phase 1 consumes."""
        return self.k if self.variant == "fixed" else luby_prefix_sum(self.k)

    @property
    def phase1_percent(self) -> Fraction:
        return self.units * self.x

    def multipliers(self) -> list[int]:
        if self.variant == "fixed":
            return [1] * self.k
        return [luby(i) for i in range(1, self.k + 1)]

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        """Parse ``restarts:<k>:<x>`` or ``luby:<k>:<x>``."""
        parts = text.strip().split(":")
        if len(parts) != 3 or parts[0] not in ("restarts", "luby"):
            raise StrategyError(f"bad strategy string {text!r}")
        try:
            k = int(parts[1])
        except ValueError:
            raise StrategyError(f"bad run count in {text!r}") from None
        variant = "fixed" if parts[0] == "restarts" else "luby"
        return cls(variant, k, parse_percent(parts[2]))

    def __str__(self) -> str:
        prefix = "restarts" if self.variant == "fixed" else "luby"
        return f"{prefix}:{self.k}:{format_percent(self.x)}"


@dataclass(frozen=True)
class Schedule:
    phase1: tuple[int, ...]
    phase2: int
    total: int

    def __post_init__(self) -> None:
        if sum(self.phase1) + self.phase2 != self.total:
            raise StrategyError("schedule does not conserve the total budget")
        if any(t <= 0 for t in self.phase1) or self.phase2 < 0:
            raise StrategyError("schedule has a non-positive Phase-1 run")

    def to_dict(self) -> dict:
        return {"phase1": list(self.phase1), "phase2": self.phase2, "total": self.total}


def resolve_schedule(strategy: Strategy, total: int) -> Schedule:
    """Turn a strategy and a total budget into concrete run durations.

    One percent-unit is ``floor(total * x / 100)``; whatever truncation leaves
    over goes to Phase 2.
    """
    if total < 1:
        raise BudgetTooSmall(f"total budget must be >= 1 unit, got {total}")
    unit = (total * strategy.x.numerator) // (100 * strategy.x.denominator)
    if unit < 1:
        raise BudgetTooSmall(
            f"{strategy} leaves Phase-1 runs with 0 units of a {total}-unit budget"
        )
    phase1 = tuple(m * unit for m in strategy.multipliers())
    used = sum(phase1)
    if used > total:
        raise InfeasibleStrategy(f"{strategy} needs {used} > {total} units")
    return Schedule(phase1, total - used, total)


_CATALOG = (
    "restarts:1:100",
    "restarts:4:25",
    "restarts:4:10",
    "restarts:10:4",
    "restarts:40:1",
    "restarts:4:2.5",
    "restarts:10:1",
    "restarts:40:0.25",
    "restarts:4:1",
    "restarts:10:0.4",
    "restarts:40:0.1",
    "luby:4:1",
    "luby:10:1",
    "luby:40:1",
)


def catalog() -> dict[str, Strategy]:
    """The 14 representative strategies, in their canonical order."""
    return {name: Strategy.parse(name) for name in _CATALOG}
