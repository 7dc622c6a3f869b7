"""Finite-depth premeasure computation: traces, cover costs, and an exact
cover oracle.

Everything here is exact rational arithmetic; there are no tolerances.  A
trace records, per depth, a quantity whose running minimum stands in for a
liminf: the ratio trace ``v(n)*2^n`` of a gauge, or the level trace
``v(n)*count(n)`` of a tree under a gauge.  The cover oracle computes the
true minimum cost of covering a tree's maximal cylinders by cylinders rooted
inside the tree, by dynamic programming over the tree; restricting cylinders
to tree nodes loses no generality because a cylinder meeting the tree shrinks
to a tree node without raising its cost (gauge values are non-increasing in
length).
"""

from __future__ import annotations

import io
import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import (
    HorizonExhaustedError,
    InfeasibleError,
    ParseError,
    RangeError,
    ValidationError,
)
from .gauges import GaugeFunction, hat_transform
from .trees import (
    NODE_CAP,
    ExplicitTree,
    SplitSchedule,
    Tree,
    check_bits,
    level_counts,
    lexlen_key,
    schedule_to_explicit,
)


@dataclass(frozen=True)
class MeasureTrace:
    """Per-depth exact values with their running minimum.

    The running minimum at the last entry is the finite surrogate for the
    liminf the trace approximates; callers compare it against thresholds
    instead of pretending a limit exists.
    """

    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValidationError("trace must have at least one entry")
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    @cached_property
    def running_min(self) -> tuple[Fraction, ...]:
        mins = []
        cur = self.values[0]
        for v in self.values:
            cur = min(cur, v)
            mins.append(cur)
        return tuple(mins)

    @property
    def final_min(self) -> Fraction:
        return self.running_min[-1]

    def rows(self) -> list[tuple[int, Fraction, Fraction]]:
        return [(n, v, m) for n, (v, m) in enumerate(zip(self.values, self.running_min))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["depth", "value_num", "value_den",
                         "running_min_num", "running_min_den"])
        for n, v, m in self.rows():
            writer.writerow([n, v.numerator, v.denominator,
                             m.numerator, m.denominator])
        return buf.getvalue()


def liminf_ratio_trace(g: GaugeFunction) -> MeasureTrace:
    """Trace of v(n)*2^n; its running minimum is the scale-invariance profile
    of the gauge (identically 1 for the identity gauge)."""
    return MeasureTrace(tuple(g.ratio(n) for n in range(g.horizon + 1)))


def level_trace(t: Tree, g: GaugeFunction) -> MeasureTrace:
    """Trace of v(n)*count(n) for the tree's levels."""
    depth = t.depth
    if g.horizon < depth:
        raise RangeError(f"gauge horizon {g.horizon} below tree depth {depth}")
    counts = level_counts(t)
    return MeasureTrace(tuple(g.value(n) * counts[n] for n in range(depth + 1)))


@dataclass(frozen=True)
class CoverSet:
    """Finite set of cylinders, named by their root strings."""

    cylinders: frozenset[str]
    min_length: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.cylinders, frozenset):
            object.__setattr__(self, "cylinders", frozenset(self.cylinders))
        if self.min_length < 0:
            raise ValidationError(f"min_length must be a natural, got {self.min_length}")
        for s in self.cylinders:
            check_bits(s, "cover cylinder")
            if len(s) < self.min_length:
                raise ValidationError(
                    f"cylinder {s!r} shorter than min_length {self.min_length}"
                )

    def sorted_cylinders(self) -> list[str]:
        return sorted(self.cylinders, key=lexlen_key)


def cover_to_json(c: CoverSet) -> dict:
    return {"cylinders": c.sorted_cylinders(), "min_length": c.min_length}


def cover_from_json(obj: object) -> CoverSet:
    if not isinstance(obj, dict) or "cylinders" not in obj:
        raise ParseError("cover must be an object with a 'cylinders' list")
    raw = obj["cylinders"]
    if not isinstance(raw, list) or any(not isinstance(s, str) for s in raw):
        raise ParseError("'cylinders' must be a list of strings")
    ml = obj.get("min_length", 0)
    if not isinstance(ml, int):
        raise ParseError("'min_length' must be an integer")
    try:
        return CoverSet(frozenset(raw), ml)
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def cover_cost(c: CoverSet, g: GaugeFunction) -> Fraction:
    total = Fraction(0)
    for s in c.cylinders:
        total += g.value(len(s))  # raises a range error past the horizon
    return total


def dp_cover_oracle(t: Tree, g: GaugeFunction, min_length: int = 0) -> Fraction:
    """Exact minimum cost of covering the tree's maximal cylinders.

    Covers consist of cylinders rooted at tree nodes of length at least
    ``min_length``; every maximal node's cylinder must lie under some chosen
    cylinder.  Recursion per node: either pay the gauge value at this length
    (allowed once past ``min_length``) or delegate to all children; a leaf
    has no children to delegate to.  Computed over integers after clearing
    denominators, so deep trees stay cheap.
    """
    if isinstance(t, SplitSchedule):
        t = schedule_to_explicit(t)
    if min_length > t.depth:
        raise InfeasibleError(
            f"min_length {min_length} exceeds tree depth {t.depth}"
        )
    if g.horizon < t.depth:
        raise RangeError(f"gauge horizon {g.horizon} below tree depth {t.depth}")
    scale = math.lcm(*(g.value(n).denominator for n in range(t.depth + 1)))
    weight = [g.value(n).numerator * (scale // g.value(n).denominator)
              for n in range(t.depth + 1)]
    cost: dict[str, int | None] = {}
    for d in range(t.depth, -1, -1):
        for x in t.levels[d]:
            take = weight[d] if d >= min_length else None
            kids = t.children(x)
            if kids:
                parts = [cost[c] for c in kids]
                rec = None if any(p is None for p in parts) else sum(parts)
            else:
                rec = None
            if take is None and rec is None:
                cost[x] = None
            elif take is None:
                cost[x] = rec
            elif rec is None:
                cost[x] = take
            else:
                cost[x] = min(take, rec)
    root = cost[""]
    if root is None:
        raise InfeasibleError(
            f"no cover exists: some maximal node is shorter than min_length {min_length}"
        )
    return Fraction(root, scale)


def dp_cover_oracle_profile(t: Tree, g: GaugeFunction) -> list[Fraction]:
    """Cover optimum for every feasible length floor at once.

    With the floor at ``n0``, cylinders above level ``n0`` are banned, so the
    optimum is the sum over level-``n0`` nodes of their unconstrained
    subtree optima.  One bottom-up pass therefore yields the whole profile;
    entry ``n0`` of the result equals ``dp_cover_oracle(t, g, n0)``, and the
    profile stops at the shortest maximal node (beyond it no cover exists).
    """
    if isinstance(t, SplitSchedule):
        t = schedule_to_explicit(t)
    if g.horizon < t.depth:
        raise RangeError(f"gauge horizon {g.horizon} below tree depth {t.depth}")
    scale = math.lcm(*(g.value(n).denominator for n in range(t.depth + 1)))
    weight = [g.value(n).numerator * (scale // g.value(n).denominator)
              for n in range(t.depth + 1)]
    cost: dict[str, int] = {}
    for d in range(t.depth, -1, -1):
        for x in t.levels[d]:
            kids = t.children(x)
            take = weight[d]
            cost[x] = min(take, sum(cost[c] for c in kids)) if kids else take
    max_floor = min(len(x) for x in t.leaves)
    return [Fraction(sum(cost[x] for x in t.levels[n0]), scale)
            for n0 in range(max_floor + 1)]


def refine_cover_hat(c: CoverSet, g: GaugeFunction, delta: Fraction) -> CoverSet:
    """Deepen each cylinder to where the hat transform's infimum is realized.

    Cylinder number ``i`` (in canonical order) of length ``l`` is replaced by
    all of its extensions at the least length ``m`` where the expansion cost
    ``2^(m-l) * v(m)`` comes within ``delta/2^(i+1)`` of the hat value at
    ``l``.  The refined cover covers the same set, and its cost under ``g``
    is at most the original cover's cost under the hat transform plus
    ``delta``.
    """
    delta = Fraction(delta)
    if delta <= 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    hatted = hat_transform(g)
    refined: set[str] = set()
    for i, s in enumerate(c.sorted_cylinders()):
        l = len(s)
        bound = hatted.value(l) + delta / (1 << (i + 1))
        m = None
        for cand in range(l, g.horizon + 1):
            if (1 << (cand - l)) * g.value(cand) <= bound:
                m = cand
                break
        if m is None:
            # the exact tail minimum is always attained within the horizon,
            # so this triggers only if the bound itself is unrepresentable
            raise HorizonExhaustedError(
                f"no refinement depth for cylinder {s!r} within horizon {g.horizon}"
            )
        if 1 << (m - l) > NODE_CAP:
            raise ValidationError(
                f"refinement of {s!r} to length {m} exceeds node cap {NODE_CAP}"
            )
        if m == l:
            refined.add(s)
        else:
            refined.update(s + format(k, f"0{m - l}b") for k in range(1 << (m - l)))
    return CoverSet(frozenset(refined), c.min_length)


def covers_tree(c: CoverSet, t: ExplicitTree) -> bool:
    """True iff every maximal node's cylinder lies in the union of the cover."""
    by_len: dict[int, set[str]] = {}
    for s in c.cylinders:
        by_len.setdefault(len(s), set()).add(s)
    lengths = sorted(by_len)
    bound = lengths[-1] if lengths else 0
    return all(_covered(leaf, by_len, lengths, bound) for leaf in t.leaves)


def _covered(node: str, by_len: dict[int, set[str]], lengths: list[int],
             bound: int) -> bool:
    if any(node[:l] in by_len[l] for l in lengths if l <= len(node)):
        return True
    if len(node) >= bound:
        return False
    # past any prefix witness, [node] is covered iff both halves are
    return (_covered(node + "0", by_len, lengths, bound)
            and _covered(node + "1", by_len, lengths, bound))
