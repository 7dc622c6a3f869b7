"""Perfect-tree conditions: thinning against a gauge and staged extension.

The thinning walk keeps a single branch until the gauge has decayed enough
to afford another doubling: generation k is released once the gauge value
drops strictly below ``2^-2k``, and each branch then takes its next
splitting node at or past the trigger level and goes back to the leftmost
child.  Branches hit their splitting nodes at different levels, so outputs
are generally non-uniform explicit trees.

The staged construction mirrors the stem-and-reservoir one: advance to all
nodes at a candidate level, transform each rooted subtree, accept at the
least level where the gauge dominates the companion gauge of the union.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    HorizonExhaustedError,
    NotPerfectError,
    ParseError,
    PreconditionError,
    RangeError,
    ValidationError,
)
from .gauges import GaugeFunction
from .mathias import MSET_MEMBER_CAP, DensityOperatorSpec, normalize_gauge
from .trees import (
    ExplicitTree,
    full_tree,
    schedule_to_explicit,
    tree_from_json,
    tree_gauge,
    tree_to_json,
    union_trees,
    _walk,
)


def compute_perfect_to_depth(t: ExplicitTree) -> int:
    """Largest d such that every node above depth d still has a split below it."""
    has_split: dict[str, bool] = {}
    for d in range(t.depth, -1, -1):
        for x in t.levels[d]:
            cs = t.children(x)
            has_split[x] = len(cs) == 2 or any(has_split[c] for c in cs)
    return min(len(x) for x in t.nodes if not has_split[x])


def stem_of(t: ExplicitTree) -> str:
    """Path from the root to the first splitting node (or the lone branch end)."""
    return _walk(t, "")[0]


@dataclass(frozen=True)
class SacksCondition:
    """A tree plus the depth to which it is certified perfect."""

    tree: ExplicitTree
    perfect_to_depth: int

    def __post_init__(self) -> None:
        actual = compute_perfect_to_depth(self.tree)
        if not 0 <= self.perfect_to_depth <= actual:
            raise ValidationError(
                f"tree is perfect only to depth {actual}, "
                f"declared {self.perfect_to_depth}"
            )


def sacks_condition_to_json(c: SacksCondition) -> dict:
    out = tree_to_json(c.tree)
    out["perfect_to_depth"] = c.perfect_to_depth
    return out


def sacks_condition_from_json(obj: object) -> SacksCondition:
    if not isinstance(obj, dict):
        raise ParseError("condition must be a JSON object")
    ptd = obj.get("perfect_to_depth")
    if not isinstance(ptd, int):
        raise ParseError("condition needs an integer 'perfect_to_depth'")
    tree = tree_from_json({k: v for k, v in obj.items() if k != "perfect_to_depth"})
    if not isinstance(tree, ExplicitTree):
        tree = schedule_to_explicit(tree)
    return SacksCondition(tree, ptd)


def split_triggers(g: GaugeFunction, depth: int) -> list[int]:
    """Level at which each doubling generation is released: the least n with
    the gauge strictly below 2^-2k, within the depth."""
    if g.horizon < depth:
        raise RangeError(f"gauge horizon {g.horizon} below depth {depth}")
    triggers = []
    k = 0
    for n in range(depth + 1):
        while g.value(n) < Fraction(1, 1 << (2 * k)):
            triggers.append(n)
            k += 1
    return triggers


def thin_tree(c: SacksCondition, g: GaugeFunction) -> SacksCondition:
    """Leftmost-path subtree that only doubles when the gauge affords it.

    Each branch tracks how many splits it has consumed; with j consumed it
    takes its next splitting node at or past the j-th trigger level and
    follows the leftmost (0-preferring) child everywhere else.  A branch
    that dies before full depth is a dead end and raises a not-perfect
    error; a branch that simply never finds a demanded split runs to depth
    unsplit, and the output's certified perfect depth reflects that.
    """
    t = c.tree
    triggers = split_triggers(g, t.depth)
    nodes: set[str] = set()
    stack: list[tuple[str, int]] = [("", 0)]
    while stack:
        node, j = stack.pop()
        nodes.add(node)
        cs = t.children(node)
        if not cs:
            if len(node) < t.depth:
                raise NotPerfectError(
                    f"dead-end branch at {node!r} before depth {t.depth}"
                )
            continue
        if len(cs) == 2 and j < len(triggers) and len(node) >= triggers[j]:
            stack.append((node + "0", j + 1))
            stack.append((node + "1", j + 1))
        else:
            stack.append((min(cs), j))
    out = ExplicitTree(frozenset(nodes), t.depth)
    return SacksCondition(out, compute_perfect_to_depth(out))


# ---------------------------------------------------------------------------
# finite S-sets


@dataclass(frozen=True)
class FiniteSSet:
    """Conditions with pairwise incomparable stems of length >= base, all
    trees of equal depth."""

    base: int
    members: tuple[SacksCondition, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.members, tuple):
            object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValidationError("an S-set needs at least one member")
        depth = self.members[0].tree.depth
        if any(m.tree.depth != depth for m in self.members):
            raise ValidationError("all member trees must share a depth")
        stems = [stem_of(m.tree) for m in self.members]
        if any(len(s) < self.base for s in stems):
            raise ValidationError(f"every stem must have length >= {self.base}")
        for i, s in enumerate(stems):
            for r in stems[i + 1:]:
                if s.startswith(r) or r.startswith(s):
                    raise ValidationError(f"stems {s!r} and {r!r} are comparable")

    @property
    def depth(self) -> int:
        return self.members[0].tree.depth


def sset_union_tree(f: FiniteSSet) -> ExplicitTree:
    return union_trees([m.tree for m in f.members])


def apply_sacks_operator(theta: DensityOperatorSpec,
                         c: SacksCondition) -> SacksCondition:
    out = theta.transform(c)
    if not isinstance(out, SacksCondition):
        raise ValidationError(f"operator {theta.name!r} returned {type(out).__name__}")
    if not out.tree.nodes <= c.tree.nodes or out.tree.depth != c.tree.depth:
        raise ValidationError(
            f"operator {theta.name!r} violated subtree extension on a condition "
            f"with stem {stem_of(c.tree)!r}"
        )
    return out


def identity_sacks_operator() -> DensityOperatorSpec:
    return DensityOperatorSpec("identity", lambda c: c)


def custom_table_sacks_operator(pairs: list[tuple[SacksCondition, SacksCondition]],
                                name: str = "custom_table") -> DensityOperatorSpec:
    table = {src.tree.nodes: dst for src, dst in pairs}

    def transform(c: SacksCondition) -> SacksCondition:
        return table.get(c.tree.nodes, c)

    return DensityOperatorSpec(name, transform)


def sacks_catalog_from_json(obj: object) -> list[DensityOperatorSpec]:
    if not isinstance(obj, list):
        raise ParseError("operator catalog must be a JSON list")
    out = []
    for k, entry in enumerate(obj):
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ParseError(f"catalog entry {k} must be an object with a 'kind'")
        kind = entry["kind"]
        name = entry.get("name")
        if kind == "identity":
            op = identity_sacks_operator()
        elif kind == "even_split_restrictor":
            from .domination import bounding_operator

            op = bounding_operator(name or "even_split_restrictor")
        elif kind == "custom_table":
            raw = entry.get("pairs")
            if not isinstance(raw, list) or any(not isinstance(p, dict) for p in raw):
                raise ParseError(f"catalog entry {k}: custom_table needs a list of "
                                 "'pairs' objects")
            pairs = [(sacks_condition_from_json(p.get("from")),
                      sacks_condition_from_json(p.get("to"))) for p in raw]
            op = custom_table_sacks_operator(pairs, name or f"table_{k}")
        else:
            raise ParseError(f"catalog entry {k}: unknown kind {kind!r}")
        if name:
            op = DensityOperatorSpec(name, op.transform)
        out.append(op)
    return out


# ---------------------------------------------------------------------------
# one-step extension and the staged build


def _one_step_details(f: FiniteSSet, h: GaugeFunction,
                      theta: DensityOperatorSpec) -> tuple[FiniteSSet, dict]:
    depth = f.depth
    if h.horizon < depth:
        raise RangeError(f"gauge horizon {h.horizon} below tree depth {depth}")
    base_gauge = tree_gauge(sset_union_tree(f))
    if any(h.value(n) < base_gauge.value(n) for n in range(depth + 1)):
        raise PreconditionError("gauge does not dominate the companion gauge of the "
                                "starting S-set")
    a = f.base
    for n in range(depth - a + 1):
        roots = [(m, u) for m in f.members for u in m.tree.levels[a + n]]
        if len(roots) > MSET_MEMBER_CAP:
            raise HorizonExhaustedError(
                f"advancing to level {a + n} needs {len(roots)} members, "
                f"over the {MSET_MEMBER_CAP} budget"
            )
        images = []
        for m, u in roots:
            sub = m.tree.subtree_at(u)
            cond = SacksCondition(sub, compute_perfect_to_depth(sub))
            images.append(apply_sacks_operator(theta, cond))
        candidate = FiniteSSet(a + n, tuple(images))
        cand_gauge = tree_gauge(sset_union_tree(candidate))
        if all(h.value(k) >= cand_gauge.value(k) for k in range(depth + 1)):
            info = {
                "operator": theta.name,
                "base_before": a,
                "base_after": a + n,
                "members_before": len(f.members),
                "members_after": len(images),
            }
            return candidate, info
    raise HorizonExhaustedError(
        f"no advancement level within depth {depth} lets the gauge dominate "
        f"the union tree (operator {theta.name!r})"
    )


def one_step_sset(f: FiniteSSet, h: GaugeFunction,
                  theta: DensityOperatorSpec) -> FiniteSSet:
    """Advance stems, transform rooted subtrees, accept at the least level
    where h still dominates the union's companion gauge."""
    out, _ = _one_step_details(f, h, theta)
    return out


def build_sacks_tree(catalog: list[DensityOperatorSpec], f: GaugeFunction,
                     depth: int) -> tuple[ExplicitTree, list[dict], Fraction]:
    """Normalize, start from the full tree, iterate the one-step extension.

    Returns (union tree of the final S-set, stage report, normalization
    constant); the cover optimum of the result under the normalized gauge
    is at least 1.
    """
    h, s = normalize_gauge(f)
    if depth > h.horizon:
        raise RangeError(f"depth {depth} beyond gauge horizon {h.horizon}")
    start = schedule_to_explicit(full_tree(depth))
    current = FiniteSSet(0, (SacksCondition(start, depth),))
    report: list[dict] = []
    for j, theta in enumerate(catalog):
        try:
            current, info = _one_step_details(current, h, theta)
        except HorizonExhaustedError as exc:
            raise HorizonExhaustedError(f"stage {j}: {exc}") from exc
        report.append({"stage": j, **info})
    return sset_union_tree(current), report, s
