"""Repetition tables, mid-rank strategy ranking and rank-sum comparisons.

All qualities are minimised. ``math.inf`` marks a repetition without a
feasible result.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

INF = math.inf

LABELS = ("better", "worse", "identical", "insignificant")
NO_RESULT = "no-result"
EXACT_LIMIT = 16
TABLE_HEADER = ("instance", "strategy", "repetition", "quality")


def format_quality(q: float) -> str:
    if q == INF:
        return "inf"
    if isinstance(q, int) or (isinstance(q, float) and q.is_integer()):
        return str(int(q))
    return repr(float(q))


def parse_quality(s: str) -> float:
    s = s.strip()
    if s.lower() in ("inf", "+inf", "infinity"):
        return INF
    try:
        return int(s)
    except ValueError:
        return float(s)


@dataclass
class ExperimentTable:
    """Dense ``[instance][strategy][repetition]`` quality table."""

    instances: list[str]
    strategies: list[str]
    repetitions: int
    qualities: dict[tuple[str, str], list[float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError("need at least one repetition")
        for inst in self.instances:
            for strat in self.strategies:
                row = self.qualities.get((inst, strat))
                if row is None or len(row) != self.repetitions:
                    raise ValueError(f"table is not dense at ({inst}, {strat})")

    def samples(self, instance: str, strategy: str) -> list[float]:
        return self.qualities[(instance, strategy)]

    def subset(self, strategies: Sequence[str] | None = None,
               instances: Sequence[str] | None = None) -> "ExperimentTable":
        strategies = list(strategies if strategies is not None else self.strategies)
        instances = list(instances if instances is not None else self.instances)
        q = {(i, s): self.qualities[(i, s)] for i in instances for s in strategies}
        return ExperimentTable(instances, strategies, self.repetitions, q)

    def rows(self) -> Iterable[tuple[str, str, int, float]]:
        for inst in self.instances:
            for strat in self.strategies:
                for r, q in enumerate(self.qualities[(inst, strat)]):
                    yield inst, strat, r, q

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for inst, strat, r, q in self.rows():
            w.writerow((inst, strat, r, format_quality(q)))
        return buf.getvalue()

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, str, int, float]]) -> "ExperimentTable":
        """Build from ``(instance, strategy, repetition, quality)`` tuples.

        Instance and strategy order follows first appearance.
        """
        cells: dict[tuple[str, str], dict[int, float]] = {}
        instances: dict[str, None] = {}
        strategies: dict[str, None] = {}
        for inst, strat, r, q in rows:
            instances.setdefault(inst)
            strategies.setdefault(strat)
            cell = cells.setdefault((inst, strat), {})
            if r in cell:
                raise ValueError(f"duplicate row ({inst}, {strat}, {r})")
            cell[r] = q
        reps = {len(c) for c in cells.values()}
        if len(reps) != 1:
            raise ValueError("cells have differing repetition counts")
        (R,) = reps
        q = {}
        for key, cell in cells.items():
            if sorted(cell) != list(range(R)):
                raise ValueError(f"repetitions of {key} are not 0..{R - 1}")
            q[key] = [cell[r] for r in range(R)]
        return cls(list(instances), list(strategies), R, q)

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TABLE_HEADER:
            raise ValueError(f"expected header {','.join(TABLE_HEADER)}")
        rows = []
        for rec in reader:
            if not rec:
                continue
            if len(rec) != 4:
                raise ValueError(f"malformed row {rec!r}")
            rows.append((rec[0], rec[1], int(rec[2]), parse_quality(rec[3])))
        return cls.from_rows(rows)

    @classmethod
    def load(cls, path) -> "ExperimentTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_csv(fh.read())


def mean_quality(table: ExperimentTable, instance: str, strategy: str) -> float | Fraction:
    """Mean over repetitions; exact ``Fraction`` for integer data, inf if any run is inf."""
    return _mean(table.samples(instance, strategy))


def _mean(values: Sequence[float]) -> float | Fraction:
    if not values:
        raise ValueError("empty sample")
    if any(v == INF for v in values):
        return INF
    if all(isinstance(v, int) for v in values):
        return Fraction(sum(values), len(values))
    return math.fsum(values) / len(values)


def mid_ranks(values: Sequence) -> list[Fraction]:
    """1-based ranks with ties sharing the average of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks: list[Fraction] = [Fraction(0)] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r = Fraction(i + j + 2, 2)
        for t in range(i, j + 1):
            ranks[order[t]] = r
        i = j + 1
    return ranks


@dataclass(frozen=True)
class RankSummary:
    strategies: tuple[str, ...]
    instances: tuple[str, ...]
    per_instance_ranks: dict[str, dict[str, Fraction]]
    average_ranks: dict[str, Fraction]

    def ordered(self) -> list[tuple[str, Fraction]]:
        """Strategies from best to worst average rank (catalog order on ties)."""
        pos = {s: i for i, s in enumerate(self.strategies)}
        return sorted(self.average_ranks.items(), key=lambda kv: (kv[1], pos[kv[0]]))

    def position(self, strategy: str) -> int:
        """1-based place of ``strategy``, counting only strictly better ones."""
        mine = self.average_ranks[strategy]
        return 1 + sum(1 for v in self.average_ranks.values() if v < mine)

    def position_from_bottom(self, strategy: str) -> int:
        """1 = worst; counts only strictly worse strategies."""
        mine = self.average_ranks[strategy]
        return 1 + sum(1 for v in self.average_ranks.values() if v > mine)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("strategy", "avg_rank"))
        for s in self.strategies:
            w.writerow((s, _format_rank(self.average_ranks[s])))
        return buf.getvalue()


def _format_rank(r: Fraction) -> str:
    if r.denominator == 1:
        return str(r.numerator)
    return f"{float(r):.6f}".rstrip("0")


def rank_strategies(table: ExperimentTable) -> RankSummary:
    if not table.instances or len(table.strategies) < 2:
        raise ValueError("ranking needs at least one instance and two strategies")
    per: dict[str, dict[str, Fraction]] = {}
    for inst in table.instances:
        means = [mean_quality(table, inst, s) for s in table.strategies]
        per[inst] = dict(zip(table.strategies, mid_ranks(means)))
    n = len(table.instances)
    avg = {s: sum((per[i][s] for i in table.instances), Fraction(0)) / n
           for s in table.strategies}
    return RankSummary(tuple(table.strategies), tuple(table.instances), per, avg)


@lru_cache(maxsize=None)
def _rank_sum_counts(n1: int, n: int) -> tuple[int, ...]:
    """Number of ``n1``-subsets of ``1..n`` per rank sum (index = sum)."""
    top = n1 * (2 * n - n1 + 1) // 2
    # dp[j][s]: subsets of size j with sum s over the ranks seen so far
    dp = [[0] * (top + 1) for _ in range(n1 + 1)]
    dp[0][0] = 1
    for r in range(1, n + 1):
        for j in range(min(r, n1), 0, -1):
            row, prev = dp[j], dp[j - 1]
            for s in range(top, r - 1, -1):
                if prev[s - r]:
                    row[s] += prev[s - r]
    return tuple(dp[n1])


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sided rank-sum test; returns ``(z, p_value)``.

    ``z`` is the standardised rank sum of ``a`` (negative when ``a`` tends to
    be smaller). Exact null distribution for tie-free samples with
    ``len(a) + len(b) <= 16``, otherwise the normal approximation with tie
    and continuity corrections.
    """
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise ValueError("each sample needs at least two values")
    if any(not math.isfinite(v) for v in list(a) + list(b)):
        raise ValueError("samples must be finite; filter infeasible runs first")
    n = n1 + n2
    ranks = mid_ranks(list(a) + list(b))
    w = sum(ranks[:n1], Fraction(0))
    mu = Fraction(n1 * (n + 1), 2)
    ties = Counter(ranks)
    tie_term = sum(t ** 3 - t for t in ties.values())
    var = Fraction(n1 * n2, 12) * ((n + 1) - Fraction(tie_term, n * (n - 1)))
    z = 0.0 if var == 0 else float(w - mu) / math.sqrt(var)
    if var == 0:
        return 0.0, 1.0

    if n <= EXACT_LIMIT and tie_term == 0:
        counts = _rank_sum_counts(n1, n)
        total = math.comb(n, n1)
        # rank sums are integers here; fold around the mean
        dev = abs(w - mu)
        extreme = sum(c for s, c in enumerate(counts) if c and abs(s - mu) >= dev)
        return z, min(1.0, extreme / total)

    dev = abs(float(w - mu)) - 0.5
    if dev <= 0:
        return z, 1.0
    return z, min(1.0, 2.0 * _norm_sf(dev / math.sqrt(var)))


@dataclass(frozen=True)
class ComparisonOutcome:
    label: str
    p_value: float
    statistic: float


def classify(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> ComparisonOutcome:
    """Label candidate ``a`` against baseline ``b`` (smaller is better).

    Infinite values are dropped first; an empty remainder on either side
    yields ``no-result``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if Counter(a) == Counter(b):
        return ComparisonOutcome("identical", 1.0, 0.0)
    fa = [v for v in a if v != INF]
    fb = [v for v in b if v != INF]
    if not fa or not fb:
        return ComparisonOutcome(NO_RESULT, math.nan, math.nan)
    if len(fa) < 2 or len(fb) < 2:
        return ComparisonOutcome("insignificant", 1.0, 0.0)
    z, p = wilcoxon_rank_sum(fa, fb)
    if p >= alpha:
        return ComparisonOutcome("insignificant", p, z)
    ma, mb = statistics.median(fa), statistics.median(fb)
    if ma == mb:
        ma, mb = _mean(fa), _mean(fb)
    if ma < mb:
        return ComparisonOutcome("better", p, z)
    if ma > mb:
        return ComparisonOutcome("worse", p, z)
    return ComparisonOutcome("insignificant", p, z)


@dataclass(frozen=True)
class Comparison:
    candidate: str
    baseline: str
    outcomes: dict[str, ComparisonOutcome]

    def counts(self) -> dict[str, int]:
        c = {label: 0 for label in LABELS}
        for o in self.outcomes.values():
            c[o.label] = c.get(o.label, 0) + 1
        return c

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("instance", "label", "p_value"))
        for inst, o in self.outcomes.items():
            w.writerow((inst, o.label, "" if math.isnan(o.p_value) else f"{o.p_value:.6g}"))
        return buf.getvalue()


def compare_strategies(table: ExperimentTable, candidate: str, baseline: str,
                       alpha: float = 0.05) -> Comparison:
    out = {inst: classify(table.samples(inst, candidate), table.samples(inst, baseline), alpha)
           for inst in table.instances}
    return Comparison(candidate, baseline, out)


def counts_from_labels(labels: Mapping[str, str] | Iterable[str]) -> dict[str, int]:
    values = labels.values() if isinstance(labels, Mapping) else labels
    c = {label: 0 for label in LABELS}
    for v in values:
        c[v] = c.get(v, 0) + 1
    return c
