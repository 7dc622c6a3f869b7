"""Gap sequences read off binary strings, and the operators built on them.

A finite binary string determines a sequence of zero-run lengths: the run
before the first one, then the run between each pair of consecutive ones.
Comparing those sequences pointwise against a target gives a notion of a
branch out-waiting the target; the operators here force that behaviour
through the stem-and-reservoir and perfect-tree constructions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cohen import DenseOpenSet
from .errors import (
    InsufficientDataError,
    NotPerfectError,
    ParseError,
    RangeError,
    ValidationError,
)
from .mathias import DensityOperatorSpec, MathiasCondition
from .trees import ExplicitTree, check_bits, index_function


@dataclass(frozen=True)
class GapFunction:
    """A finite sequence of non-negative targets, clamped at its last entry
    when read past the end."""

    gaps: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.gaps, tuple):
            object.__setattr__(self, "gaps", tuple(self.gaps))
        if any(not isinstance(g, int) or g < 0 for g in self.gaps):
            raise ValidationError("gap entries must be non-negative integers")

    def __len__(self) -> int:
        return len(self.gaps)

    def clamped(self, n: int) -> int:
        if not self.gaps:
            raise RangeError("cannot read an empty gap sequence")
        if n < 0:
            raise RangeError(f"gap index {n} is negative")
        return self.gaps[min(n, len(self.gaps) - 1)]


def gap_function_to_json(y: GapFunction) -> dict:
    return {"gaps": list(y.gaps)}


def gap_function_from_json(obj: object) -> GapFunction:
    if not isinstance(obj, dict) or "gaps" not in obj:
        raise ParseError("gap sequence must be an object with a 'gaps' list")
    gaps = obj["gaps"]
    if not isinstance(gaps, list):
        raise ParseError("'gaps' must be a list")
    try:
        return GapFunction(tuple(gaps))
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def _one_positions(x: str) -> list[int]:
    return [i for i, b in enumerate(x) if b == "1"]


def completed_gaps(x: str) -> list[int]:
    """Zero-run lengths fully determined by x: the run before the first one,
    then the run before each later one.  One entry per one in x."""
    check_bits(x)
    ones = _one_positions(x)
    if not ones:
        return []
    return [ones[0]] + [b - a - 1 for a, b in zip(ones, ones[1:])]


def pi_transform(x: str) -> list[int]:
    """Gap sequence of x; needs at least two ones so the sequence is
    nontrivial."""
    check_bits(x)
    if x.count("1") < 2:
        raise InsufficientDataError(
            f"need at least two ones to read gaps, got {x.count('1')}"
        )
    return completed_gaps(x)


def dominates_seq(x: list[int], y: list[int]) -> bool:
    """Pointwise x >= y on the common prefix of indices."""
    overlap = min(len(x), len(y))
    if overlap == 0:
        raise RangeError("sequences have no common indices to compare")
    return all(x[i] >= y[i] for i in range(overlap))


def eventually_dominates_seq(x: list[int], y: list[int]) -> int | None:
    """Least N with x >= y from N through the end of the overlap, or None."""
    overlap = min(len(x), len(y))
    if overlap == 0:
        raise RangeError("sequences have no common indices to compare")
    n = overlap
    while n > 0 and x[n - 1] >= y[n - 1]:
        n -= 1
    return n if n < overlap else None


def escape_dense_set(y: GapFunction, name: str = "escape") -> DenseOpenSet:
    """Strings already exhibiting one zero-run longer than the target demands.

    A string belongs when some one at position j closes a zero-run of length
    at least y(k) + 1, where k counts the ones before that run.  The test
    only inspects completed runs, so membership is inherited by extensions.
    """
    if not y.gaps:
        raise ValidationError("escape set needs a nonempty gap sequence")

    def member(u: str) -> bool:
        check_bits(u)
        ones = _one_positions(u)
        for k, j in enumerate(ones):
            run_start = ones[k - 1] + 1 if k else 0
            if j - run_start >= y.clamped(k) + 1:
                return True
        return False

    return DenseOpenSet(name, member, upward_closed=True)


def domination_operator(y: GapFunction,
                        name: str = "domination") -> DensityOperatorSpec:
    """Greedily keep only reservoir positions far enough apart that every
    future gap meets the target.

    With k ones already in the stem, the first kept position must leave a
    zero-run of at least y(k) after the stem, and each later kept position a
    run of at least y(k + m) after the m-th kept one.  The reservoir may run
    out before the horizon; the output is then simply shorter.
    """
    if not y.gaps:
        raise ValidationError("domination operator needs a nonempty gap sequence")

    def transform(c: MathiasCondition) -> MathiasCondition:
        k = c.stem.count("1")
        kept: list[int] = []
        for p in c.reservoir:
            if not kept:
                if p - len(c.stem) >= y.clamped(k):
                    kept.append(p)
            elif p - kept[-1] - 1 >= y.clamped(k + len(kept)):
                kept.append(p)
        return MathiasCondition(c.stem, tuple(kept), c.horizon)

    return DensityOperatorSpec(name, transform)


def bounding_operator(name: str = "even_split_restrictor") -> DensityOperatorSpec:
    """Keep only branches whose splitting choices put ones at even split
    indices, through the last complete splitting generation; full subtrees
    survive below it."""
    from .sacks import SacksCondition, compute_perfect_to_depth

    def transform(c: SacksCondition) -> SacksCondition:
        sigma = index_function(c.tree)
        depth_complete = sigma.complete_to
        if depth_complete < 0:
            raise NotPerfectError("tree has no complete splitting generation")
        keep: set[str] = set()
        for m in range(depth_complete + 1):
            for idx in range(1 << m):
                t = format(idx, f"0{m}b") if m else ""
                if any(b == "1" and i % 2 for i, b in enumerate(t)):
                    continue
                top = sigma.image(t)
                keep.update(top[:i] for i in range(len(top) + 1))
                if m == depth_complete:
                    keep.update(
                        x for x in c.tree.nodes
                        if len(x) >= len(top) and x.startswith(top)
                    )
        out = ExplicitTree(frozenset(keep), c.tree.depth)
        return SacksCondition(out, compute_perfect_to_depth(out))

    return DensityOperatorSpec(name, transform)


def path_bound(c) -> GapFunction:
    """Pointwise maximum of the gap sequences over all maximal paths.

    Any sequence dominating the result dominates the gaps of every branch on
    the indices both define.
    """
    tree = c.tree
    if all(len(tree.children(x)) < 2 for x in tree.nodes):
        raise NotPerfectError("tree has a single branch, nothing to bound")
    best: list[int] = []
    for leaf in tree.leaves:
        for i, g in enumerate(completed_gaps(leaf)):
            if i == len(best):
                best.append(g)
            elif g > best[i]:
                best[i] = g
    return GapFunction(tuple(best))
