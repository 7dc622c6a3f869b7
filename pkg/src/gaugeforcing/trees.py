"""Finite trees of bit strings and their splitting structure.

Nodes are plain ``str`` values over the alphabet ``01``; the empty string is
the root and extension is string prefixing.  Two representations coexist:

* ``ExplicitTree`` lists every node up to a depth, and is what the engines
  return when branches disagree about where they split;
* ``SplitSchedule`` describes the uniform case compactly: a stem, a strictly
  increasing list of levels where every branch splits, and a fill bit for all
  other levels.

The index function recovers the splitting skeleton of an explicit tree: the
image of an index string ``t`` is the splitting node reached by branching
according to ``t`` at successive splits.  Its level profile in turn defines
the companion gauge of the tree, the gauge under which the tree's own level
trace is identically 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property

from .errors import (
    NonUniformError,
    NotPerfectError,
    ParseError,
    RangeError,
    ValidationError,
)
from .gauges import GaugeFunction

# Upper bound on materialized nodes; protects against runaway schedules.
NODE_CAP = 1 << 22


def check_bits(s: str, what: str = "bit string") -> str:
    if not isinstance(s, str) or any(c not in "01" for c in s):
        raise ValidationError(f"{what} must be a string over 0/1, got {s!r}")
    return s


def lexlen_key(s: str) -> tuple[int, str]:
    """Sort key for the canonical length-then-lexicographic order."""
    return (len(s), s)


def is_prefix(s: str, t: str) -> bool:
    return t.startswith(s)


def comparable(s: str, t: str) -> bool:
    return s.startswith(t) or t.startswith(s)


@dataclass(frozen=True)
class ExplicitTree:
    """Finite prefix-closed node set with a declared depth.

    The root is always present and no node is longer than the depth.  The
    declared depth may exceed the longest node; operations that need every
    branch alive to the bottom check that themselves and raise a
    not-perfect error when a branch dies early.
    """

    nodes: frozenset[str]
    depth: int

    def __post_init__(self) -> None:
        if not isinstance(self.nodes, frozenset):
            object.__setattr__(self, "nodes", frozenset(self.nodes))
        if self.depth < 0:
            raise ValidationError(f"tree depth must be a natural, got {self.depth}")
        if "" not in self.nodes:
            raise ValidationError("tree must contain the root (empty string)")
        if len(self.nodes) > NODE_CAP:
            raise ValidationError(f"tree exceeds node cap {NODE_CAP}")
        for node in self.nodes:
            check_bits(node, "tree node")
            if len(node) > self.depth:
                raise ValidationError(
                    f"node {node!r} longer than declared depth {self.depth}"
                )
            if node and node[:-1] not in self.nodes:
                raise ValidationError(f"tree is not prefix-closed at {node!r}")

    @classmethod
    def from_nodes(cls, nodes, depth: int | None = None) -> "ExplicitTree":
        ns = frozenset(nodes)
        if depth is None:
            depth = max((len(n) for n in ns), default=0)
        return cls(ns, depth)

    def children(self, node: str) -> tuple[str, ...]:
        return tuple(c for c in (node + "0", node + "1") if c in self.nodes)

    @cached_property
    def levels(self) -> tuple[tuple[str, ...], ...]:
        buckets: list[list[str]] = [[] for _ in range(self.depth + 1)]
        for node in self.nodes:
            buckets[len(node)].append(node)
        return tuple(tuple(sorted(b)) for b in buckets)

    @cached_property
    def leaves(self) -> tuple[str, ...]:
        return tuple(sorted((n for n in self.nodes if not self.children(n)),
                            key=lexlen_key))

    def restrict(self, depth: int) -> "ExplicitTree":
        if not 0 <= depth <= self.depth:
            raise RangeError(f"cannot restrict to depth {depth} from {self.depth}")
        return ExplicitTree(frozenset(n for n in self.nodes if len(n) <= depth), depth)

    def subtree_at(self, node: str) -> "ExplicitTree":
        if node not in self.nodes:
            raise ValidationError(f"node {node!r} not in tree")
        return ExplicitTree(frozenset(n for n in self.nodes if comparable(n, node)),
                            self.depth)


@dataclass(frozen=True)
class SplitSchedule:
    """Uniform tree: stem, common split levels, fill bit elsewhere.

    Every node at a split level has both children; every other node extends
    only by the fill bit (by convention 0).  Split levels are strictly
    increasing and lie in [len(stem), depth).
    """

    splits: tuple[int, ...]
    depth: int
    stem: str = ""
    fill: str = "0"

    def __post_init__(self) -> None:
        if not isinstance(self.splits, tuple):
            object.__setattr__(self, "splits", tuple(self.splits))
        check_bits(self.stem, "schedule stem")
        if self.fill not in ("0", "1"):
            raise ValidationError(f"fill bit must be '0' or '1', got {self.fill!r}")
        if self.depth < 0:
            raise ValidationError(f"schedule depth must be a natural, got {self.depth}")
        if len(self.stem) > self.depth:
            raise ValidationError(
                f"stem length {len(self.stem)} exceeds depth {self.depth}"
            )
        prev = -1
        for i, l in enumerate(self.splits):
            if not isinstance(l, int):
                raise ValidationError(f"split level {l!r} is not an integer")
            if l < len(self.stem) or l >= self.depth:
                raise ValidationError(
                    f"split level {l} outside [{len(self.stem)}, {self.depth})"
                )
            if l <= prev:
                raise ValidationError(f"split levels not strictly increasing at index {i}")
            prev = l


Tree = ExplicitTree | SplitSchedule


def full_tree(depth: int) -> SplitSchedule:
    return SplitSchedule(splits=tuple(range(depth)), depth=depth)


def level_counts(t: Tree) -> list[int]:
    """Number of nodes at each level 0..depth."""
    if isinstance(t, SplitSchedule):
        # splits are strictly increasing: the count doubles once per split
        # level strictly below n
        return [1 << sum(1 for l in t.splits if l < n) for n in range(t.depth + 1)]
    return [len(level) for level in t.levels]


def schedule_to_explicit(s: SplitSchedule) -> ExplicitTree:
    expected = sum(1 << sum(1 for l in s.splits if l < n) for n in range(s.depth + 1))
    if expected > NODE_CAP:
        raise ValidationError(f"schedule expands to {expected} nodes, over cap {NODE_CAP}")
    split_set = set(s.splits)
    nodes = {s.stem[:i] for i in range(len(s.stem) + 1)}
    frontier = [s.stem]
    for n in range(len(s.stem), s.depth):
        nxt = []
        for node in frontier:
            if n in split_set:
                nxt.extend((node + "0", node + "1"))
            else:
                nxt.append(node + s.fill)
        nodes.update(nxt)
        frontier = nxt
    return ExplicitTree(frozenset(nodes), s.depth)


def explicit_to_schedule(t: ExplicitTree) -> SplitSchedule:
    """Inverse of expansion; raises a non-uniform error when no schedule fits.

    A schedule fits only when all leaves sit at full depth, every level is
    entirely splitting or entirely single-child, and all single-child levels
    past the stem use one common fill bit.
    """
    if any(len(leaf) != t.depth for leaf in t.leaves):
        raise NonUniformError("leaves not all at full depth")
    splits: list[int] = []
    fill_levels: list[int] = []
    for n in range(t.depth):
        degrees = {len(t.children(x)) for x in t.levels[n]}
        if degrees == {2}:
            splits.append(n)
        elif degrees == {1}:
            fill_levels.append(n)
        else:
            raise NonUniformError(f"level {n} mixes splitting and non-splitting nodes")
    first_split = splits[0] if splits else t.depth
    stem = next(iter(t.levels[first_split]))
    fill = None
    for n in fill_levels:
        if n < first_split:
            continue
        for x in t.levels[n]:
            bit = t.children(x)[0][-1]
            if fill is None:
                fill = bit
            elif bit != fill:
                raise NonUniformError(f"inconsistent fill bit at level {n}")
    return SplitSchedule(splits=tuple(splits), depth=t.depth, stem=stem,
                         fill=fill if fill is not None else "0")


class TreeUniformity(Enum):
    UNIFORM = "uniform"
    PARTIAL_UNIFORM = "partial_uniform"
    NON_UNIFORM = "non_uniform"


def uniformity_check(t: ExplicitTree) -> TreeUniformity:
    """Classify the split structure of an explicit tree.

    Uniform and partially uniform trees have a single schedule of split
    levels shared by every branch (fill bits are free to differ); they are
    distinguished by whether the deepest internal level splits, i.e. whether
    the bottom of the tree closes a split generation or truncates a fill run.
    Everything else, including trees with dead ends or leaves at mixed
    depths, is non-uniform.
    """
    if any(len(leaf) != t.depth for leaf in t.leaves):
        return TreeUniformity.NON_UNIFORM
    split_levels = []
    for n in range(t.depth):
        degrees = {len(t.children(x)) for x in t.levels[n]}
        if degrees == {2}:
            split_levels.append(n)
        elif degrees != {1}:
            return TreeUniformity.NON_UNIFORM
    if t.depth == 0 or (t.depth - 1) in split_levels:
        return TreeUniformity.UNIFORM
    return TreeUniformity.PARTIAL_UNIFORM


# ---------------------------------------------------------------------------
# index function and companion gauge


@dataclass(frozen=True, eq=False)
class IndexMap:
    """Images of index strings under the splitting skeleton of a tree.

    ``images[t]`` is the splitting node reached by following the branch
    choices of ``t``; entries exist for all index strings up to
    ``complete_to``, the last length at which every branch still offers a
    splitting node.  Deeper queries raise a range error rather than guess.
    """

    images: dict[str, str]
    complete_to: int

    def image(self, idx: str) -> str:
        check_bits(idx, "index string")
        if len(idx) > self.complete_to:
            raise RangeError(
                f"index length {len(idx)} beyond fully determined length {self.complete_to}"
            )
        return self.images[idx]

    def level(self, m: int) -> int:
        """Largest image length at index length ``m``."""
        if not 0 <= m <= self.complete_to:
            raise RangeError(f"index length {m} beyond {self.complete_to}")
        return max(len(node) for idx, node in self.images.items() if len(idx) == m)


def _walk(t: ExplicitTree, node: str) -> tuple[str, bool]:
    """Follow single children down to the next splitting node.

    Returns the splitting node and True, or the leaf at full depth and
    False.  A branch that dies above the declared depth is a dead end.
    """
    while True:
        cs = t.children(node)
        if len(cs) == 2:
            return node, True
        if len(cs) == 1:
            node = cs[0]
            continue
        if len(node) < t.depth:
            raise NotPerfectError(f"dead-end branch at {node!r} (depth {t.depth})")
        return node, False


def index_function(t: ExplicitTree) -> IndexMap:
    images: dict[str, str] = {}
    complete = -1
    entries = [("", *_walk(t, ""))]
    m = 0
    while all(is_split for _, _, is_split in entries):
        for idx, node, _ in entries:
            images[idx] = node
        complete = m
        nxt = []
        for idx, node, _ in entries:
            for b in "01":
                nxt.append((idx + b, *_walk(t, node + b)))
        entries = nxt
        m += 1
    return IndexMap(images=images, complete_to=complete)


def _generation_levels(t: ExplicitTree) -> list[int]:
    """Level profile of split generations, leaves counting at the boundary.

    Entry ``m`` is the largest node length among generation-``m`` walk
    results; walks that reach a leaf at full depth contribute the leaf and
    stop, so the last entries report the depth itself.
    """
    levels: list[int] = []
    entries = [_walk(t, "")]
    while entries:
        levels.append(max(len(node) for node, _ in entries))
        nxt = []
        for node, is_split in entries:
            if is_split:
                for b in "01":
                    nxt.append(_walk(t, node + b))
        entries = nxt
    return levels


def tree_gauge(t: Tree) -> GaugeFunction:
    """Companion gauge of a tree, tabulated to the tree's depth.

    The value at depth ``n`` is ``2^-m`` for the least ``m`` whose split
    generation reaches level ``n``; equivalently the gauge halves each time
    ``n`` passes a split level.  Under this gauge the tree's own level trace
    is identically 1, and no cover of the tree's bottom cylinders can cost
    less than 1.
    """
    if isinstance(t, SplitSchedule):
        return GaugeFunction(tuple(
            Fraction(1, 1 << sum(1 for l in t.splits if l < n))
            for n in range(t.depth + 1)
        ))
    gens = _generation_levels(t)
    values = []
    m = 0
    for n in range(t.depth + 1):
        while gens[m] < n:
            m += 1
        values.append(Fraction(1, 1 << m))
    return GaugeFunction(tuple(values))


def union_trees(trees: list[ExplicitTree]) -> ExplicitTree:
    if not trees:
        raise ValidationError("cannot union an empty list of trees")
    depth = trees[0].depth
    if any(t.depth != depth for t in trees):
        raise ValidationError("union requires equal depths")
    nodes: set[str] = set()
    for t in trees:
        nodes.update(t.nodes)
    return ExplicitTree(frozenset(nodes), depth)


# ---------------------------------------------------------------------------
# serialization


def tree_to_json(t: Tree) -> dict:
    if isinstance(t, SplitSchedule):
        return {
            "kind": "schedule",
            "stem": t.stem,
            "splits": list(t.splits),
            "depth": t.depth,
            "fill": t.fill,
        }
    return {
        "kind": "explicit",
        "depth": t.depth,
        "nodes": sorted(t.nodes, key=lexlen_key),
    }


def tree_from_json(obj: object) -> Tree:
    if not isinstance(obj, dict):
        raise ParseError(f"tree object must be a JSON object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind == "schedule":
        try:
            splits = tuple(obj.get("splits", []))
            depth = obj["depth"]
            stem = obj.get("stem", "")
            fill = obj.get("fill", "0")
        except KeyError as exc:
            raise ParseError(f"schedule tree missing field: {exc}") from exc
        if not all(isinstance(l, int) for l in splits) or not isinstance(depth, int):
            raise ParseError("schedule splits and depth must be integers")
        return SplitSchedule(splits=splits, depth=depth, stem=str(stem), fill=str(fill))
    if kind == "explicit":
        nodes = obj.get("nodes")
        depth = obj.get("depth")
        if not isinstance(nodes, list) or not isinstance(depth, int):
            raise ParseError("explicit tree needs 'nodes' list and integer 'depth'")
        if not all(isinstance(n, str) for n in nodes):
            raise ParseError("explicit tree nodes must be strings")
        return ExplicitTree(frozenset(nodes), depth)
    raise ParseError(f"unknown tree kind: {kind!r}")
