"""Stem-and-reservoir conditions and their staged generic-tree construction.

A condition is a stem plus a strictly increasing list of positions (the
reservoir) where later extensions may place ones; every other position past
the stem is pinned to zero.  The cylinder of a condition is therefore a
uniform tree splitting exactly at reservoir positions, which is what makes
exact trace and cover computations cheap.

The one-step extension follows the saturate-then-transform shape: all
reachable stems at a candidate level, each passed through the density
operator, padded to a common length, and accepted at the least level where
the target gauge still dominates the companion gauge of the assembled tree.
The companion gauge is computed on a compact state graph (stem trie plus
per-condition reservoir positions) rather than on the exponentially large
explicit tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import (
    HorizonExhaustedError,
    ParseError,
    PreconditionError,
    RangeError,
    ValidationError,
)
from .gauges import GaugeFunction, scale
from .trees import NODE_CAP, ExplicitTree, SplitSchedule, check_bits

# Budget for saturation width during the one-step search.
MSET_MEMBER_CAP = 1 << 13


@dataclass(frozen=True)
class MathiasCondition:
    """Stem plus reservoir of future one-positions, known up to a horizon.

    The reservoir may be empty on the window (sparsification can exhaust
    it); when nonempty it starts at or past the stem end.
    """

    stem: str
    reservoir: tuple[int, ...]
    horizon: int

    def __post_init__(self) -> None:
        check_bits(self.stem, "condition stem")
        if not isinstance(self.reservoir, tuple):
            object.__setattr__(self, "reservoir", tuple(self.reservoir))
        if self.horizon < 0:
            raise ValidationError(f"horizon must be a natural, got {self.horizon}")
        prev = -1
        for p in self.reservoir:
            if not isinstance(p, int) or p < 0:
                raise ValidationError(f"reservoir position {p!r} is not a natural")
            if p <= prev:
                raise ValidationError("reservoir positions must be strictly increasing")
            if p > self.horizon:
                raise ValidationError(
                    f"reservoir position {p} beyond horizon {self.horizon}"
                )
            prev = p
        if self.reservoir and self.reservoir[0] < len(self.stem):
            raise ValidationError(
                f"reservoir starts at {self.reservoir[0]} inside the stem "
                f"(length {len(self.stem)})"
            )


def full_reservoir_condition(horizon: int) -> MathiasCondition:
    return MathiasCondition("", tuple(range(horizon + 1)), horizon)


def condition_to_json(c: MathiasCondition) -> dict:
    return {"stem": c.stem, "reservoir": list(c.reservoir), "horizon": c.horizon}


def condition_from_json(obj: object) -> MathiasCondition:
    if not isinstance(obj, dict):
        raise ParseError("condition must be a JSON object")
    try:
        stem = obj["stem"]
        reservoir = obj["reservoir"]
        horizon = obj["horizon"]
    except KeyError as exc:
        raise ParseError(f"condition missing field: {exc}") from exc
    if not isinstance(reservoir, list) or not isinstance(horizon, int):
        raise ParseError("condition needs a 'reservoir' list and integer 'horizon'")
    return MathiasCondition(str(stem), tuple(reservoir), horizon)


def condition_tree(c: MathiasCondition, depth: int) -> SplitSchedule:
    """The condition's cylinder as a uniform tree: fill zero off-reservoir."""
    if depth > c.horizon:
        raise RangeError(f"depth {depth} beyond reservoir knowledge {c.horizon}")
    stem = c.stem[:depth] if len(c.stem) > depth else c.stem
    splits = tuple(p for p in c.reservoir if len(c.stem) <= p < depth)
    return SplitSchedule(splits=splits, depth=depth, stem=stem)


def extends_M(c1: MathiasCondition, c0: MathiasCondition) -> bool:
    """Literal three-clause extension check: stem grows, reservoir shrinks,
    and every new one sits on the old reservoir."""
    if not c1.stem.startswith(c0.stem):
        return False
    if not set(c1.reservoir) <= set(c0.reservoir):
        return False
    new_ones = {i for i in range(len(c0.stem), len(c1.stem)) if c1.stem[i] == "1"}
    return new_ones <= set(c0.reservoir)


def sparsify_condition(c: MathiasCondition, g: GaugeFunction) -> MathiasCondition:
    """Keep a reservoir position only while the gauge still looks heavy.

    Scanning positions in order with l positions already kept, position n
    survives iff g(2^-(n+1)) * 2^l < 2^-l.  Under a decaying gauge the
    survivors spread out so fast that the condition tree's level trace dies;
    the selection may legitimately empty out on the window.
    """
    if g.horizon < c.horizon + 1:
        raise RangeError(
            f"gauge horizon {g.horizon} below reservoir horizon {c.horizon} + 1"
        )
    selected = []
    l = 0
    for n in c.reservoir:
        if g.value(n + 1) * (1 << l) < Fraction(1, 1 << l):
            selected.append(n)
            l += 1
    return MathiasCondition(c.stem, tuple(selected), c.horizon)


def normalize_gauge(f: GaugeFunction) -> tuple[GaugeFunction, Fraction]:
    """Divide out the worst ratio so the result dominates the identity gauge.

    The precondition is the finite surrogate of "f at least the identity
    near 0": the ratio v(n)*2^n must be at least 1 at the horizon.  Returns
    (h, s) with s the minimal ratio and h = f/s, so h(2^-n) >= 2^-n
    everywhere on the window.
    """
    ratios = [f.ratio(n) for n in range(f.horizon + 1)]
    if ratios[-1] < 1:
        raise PreconditionError(
            f"gauge ratio at the horizon is {ratios[-1]} < 1; "
            "the gauge falls below the identity scale on this window"
        )
    s = min(ratios)
    return scale(f, Fraction(1) / s), s


# ---------------------------------------------------------------------------
# finite M-sets


@dataclass(frozen=True)
class FiniteMSet:
    """Conditions with equal-length, pairwise distinct (hence incomparable)
    stems."""

    base: int
    members: tuple[MathiasCondition, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.members, tuple):
            object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValidationError("an M-set needs at least one member")
        stems = [m.stem for m in self.members]
        if any(len(s) != self.base for s in stems):
            raise ValidationError(f"all stems must have length {self.base}")
        if len(set(stems)) != len(stems):
            raise ValidationError("stems must be pairwise distinct")


def mset_tree(f: FiniteMSet, depth: int) -> ExplicitTree:
    """Union of the members' condition trees (explicit; size-capped)."""
    expected = 0
    for m in f.members:
        width = 0
        for n in range(min(f.base, depth), depth + 1):
            expected += 1 << width
            if any(p == n for p in m.reservoir):
                width += 1
    if expected > NODE_CAP:
        raise ValidationError(f"M-set tree would exceed node cap {NODE_CAP}")
    nodes: set[str] = set()
    for m in f.members:
        if depth > m.horizon:
            raise RangeError(f"depth {depth} beyond member horizon {m.horizon}")
        stem = m.stem[:depth]
        nodes.update(stem[:i] for i in range(len(stem) + 1))
        if len(m.stem) > depth:
            continue
        res = set(m.reservoir)
        frontier = [m.stem]
        for n in range(len(m.stem), depth):
            if n in res:
                frontier = [x + b for x in frontier for b in "01"]
            else:
                frontier = [x + "0" for x in frontier]
            nodes.update(frontier)
    return ExplicitTree(frozenset(nodes), depth)


def reachable_stems(f: FiniteMSet, b: int) -> dict[str, MathiasCondition]:
    """All length-b stems reachable inside members' reservoirs, mapped to the
    member they came from."""
    if b < f.base:
        raise RangeError(f"target length {b} below base {f.base}")
    out: dict[str, MathiasCondition] = {}
    for m in f.members:
        window = [p for p in m.reservoir if f.base <= p < b]
        stems = [m.stem]
        for n in range(f.base, b):
            if n in set(window):
                stems = [s + c for s in stems for c in "01"]
            else:
                stems = [s + "0" for s in stems]
        for s in stems:
            out[s] = m
    return out


def mset_extends(f_star: FiniteMSet, f: FiniteMSet) -> bool:
    """Literal check: stems of f_star = all reachable length-b strings.

    Equal bases degenerate to stem-set equality (the reflexive case).
    """
    if f_star.base < f.base:
        return False
    reach = set(reachable_stems(f, f_star.base))
    return reach == {m.stem for m in f_star.members}


# ---------------------------------------------------------------------------
# compact companion gauge of an M-set tree


def mset_tree_gauge(f: FiniteMSet, depth: int) -> GaugeFunction:
    """Companion gauge of mset_tree(f, depth) without expanding the tree.

    Walk states are either a node of the stem trie or a (member, level)
    pair; inside a member's reservoir region both split children behave
    identically, so one state per member suffices regardless of how wide
    the explicit tree gets.
    """
    for m in f.members:
        if depth > m.horizon:
            raise RangeError(f"depth {depth} beyond member horizon {m.horizon}")
    prefixes = {m.stem[:i] for m in f.members for i in range(len(m.stem) + 1)}
    by_stem = {m.stem: k for k, m in enumerate(f.members)}
    reservoirs = [sorted(p for p in m.reservoir if p < depth) for m in f.members]

    def walk(state):
        # returns (level, successor states or None for a boundary leaf)
        while True:
            kind, v = state
            if kind == "trie":
                if len(v) >= depth:
                    return depth, None
                if len(v) == f.base:
                    state = ("cond", (by_stem[v], f.base))
                    continue
                kids = [v + b for b in "01" if v + b in prefixes]
                if len(kids) == 2:
                    return len(v), [("trie", k) for k in kids]
                state = ("trie", kids[0])
            else:
                i, lvl = v
                nxt = next((p for p in reservoirs[i] if p >= lvl), None)
                if nxt is None:
                    return depth, None
                return nxt, [("cond", (i, nxt + 1))]

    levels: list[int] = []
    frontier = {("trie", "")}
    while frontier:
        results = [walk(st) for st in frontier]
        levels.append(max(lv for lv, _ in results))
        frontier = {s for _, succ in results if succ for s in succ}
    values = []
    m_idx = 0
    for n in range(depth + 1):
        while levels[m_idx] < n:
            m_idx += 1
        values.append(Fraction(1, 1 << m_idx))
    return GaugeFunction(tuple(values))


# ---------------------------------------------------------------------------
# density operators


@dataclass(frozen=True)
class DensityOperatorSpec:
    """Named total map on conditions whose outputs must extend their inputs."""

    name: str
    transform: Callable


def apply_operator(theta: DensityOperatorSpec,
                   c: MathiasCondition) -> MathiasCondition:
    out = theta.transform(c)
    if not isinstance(out, MathiasCondition):
        raise ValidationError(f"operator {theta.name!r} returned {type(out).__name__}")
    if not extends_M(out, c):
        raise ValidationError(
            f"operator {theta.name!r} violated the extension contract on "
            f"stem {c.stem!r}"
        )
    return out


def identity_operator() -> DensityOperatorSpec:
    return DensityOperatorSpec("identity", lambda c: c)


def gap_doubling_operator(name: str = "gap_doubling") -> DensityOperatorSpec:
    """Thin the reservoir so consecutive kept positions at least double their
    spacing: the m-th kept gap is at least 2^m."""

    def transform(c: MathiasCondition) -> MathiasCondition:
        kept: list[int] = []
        floor = len(c.stem)
        for p in c.reservoir:
            if p >= floor:
                kept.append(p)
                floor = p + (1 << len(kept))
        return MathiasCondition(c.stem, tuple(kept), c.horizon)

    return DensityOperatorSpec(name, transform)


def custom_table_operator(pairs: list[tuple[MathiasCondition, MathiasCondition]],
                          name: str = "custom_table") -> DensityOperatorSpec:
    table = {(src.stem, src.reservoir): dst for src, dst in pairs}

    def transform(c: MathiasCondition) -> MathiasCondition:
        return table.get((c.stem, c.reservoir), c)

    return DensityOperatorSpec(name, transform)


def operator_catalog_from_json(obj: object) -> list[DensityOperatorSpec]:
    if not isinstance(obj, list):
        raise ParseError("operator catalog must be a JSON list")
    out = []
    for k, entry in enumerate(obj):
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ParseError(f"catalog entry {k} must be an object with a 'kind'")
        kind = entry["kind"]
        name = entry.get("name")
        if kind == "identity":
            op = identity_operator()
        elif kind == "gap_doubling":
            op = gap_doubling_operator(name or "gap_doubling")
        elif kind == "domination":
            from .domination import GapFunction, domination_operator

            gaps = entry.get("gaps")
            if not isinstance(gaps, list) or not all(isinstance(v, int) for v in gaps):
                raise ParseError(f"catalog entry {k}: domination needs integer 'gaps'")
            op = domination_operator(GapFunction(tuple(gaps)), name or "domination")
        elif kind == "custom_table":
            raw = entry.get("pairs")
            if not isinstance(raw, list) or any(not isinstance(p, dict) for p in raw):
                raise ParseError(f"catalog entry {k}: custom_table needs a list of "
                                 "'pairs' objects")
            pairs = [(condition_from_json(p.get("from")),
                      condition_from_json(p.get("to"))) for p in raw]
            op = custom_table_operator(pairs, name or f"table_{k}")
        else:
            raise ParseError(f"catalog entry {k}: unknown kind {kind!r}")
        if name:
            op = DensityOperatorSpec(name, op.transform)
        out.append(op)
    return out


# ---------------------------------------------------------------------------
# one-step extension and the staged build


def _one_step_details(f: FiniteMSet, h: GaugeFunction,
                      theta: DensityOperatorSpec) -> tuple[FiniteMSet, dict]:
    if any(h.ratio(n) < 1 for n in range(h.horizon + 1)):
        raise PreconditionError("gauge must dominate the identity scale everywhere "
                                "(run it through normalization first)")
    base_gauge = mset_tree_gauge(f, h.horizon)
    if any(h.value(n) < base_gauge.value(n) for n in range(h.horizon + 1)):
        raise PreconditionError("gauge does not dominate the companion gauge of the "
                                "starting M-set")
    a = f.base
    for n in range(h.horizon - a + 1):
        width = sum(1 << sum(1 for p in m.reservoir if a <= p < a + n)
                    for m in f.members)
        if width > MSET_MEMBER_CAP:
            raise HorizonExhaustedError(
                f"saturation at level {a + n} needs {width} members, "
                f"over the {MSET_MEMBER_CAP} budget"
            )
        saturated = reachable_stems(f, a + n)
        images = []
        for s, origin in sorted(saturated.items()):
            tail = tuple(p for p in origin.reservoir if p >= a + n)
            img = apply_operator(theta, MathiasCondition(s, tail, origin.horizon))
            images.append(img)
        b = max(a + n, max(len(img.stem) for img in images))
        if b > h.horizon:
            continue
        padded = tuple(
            MathiasCondition(img.stem + "0" * (b - len(img.stem)),
                             tuple(p for p in img.reservoir if p >= b),
                             img.horizon)
            for img in images
        )
        candidate = FiniteMSet(b, padded)
        cand_gauge = mset_tree_gauge(candidate, h.horizon)
        if all(h.value(k) >= cand_gauge.value(k) for k in range(h.horizon + 1)):
            info = {
                "operator": theta.name,
                "base_before": a,
                "base_after": b,
                "saturation_level": a + n,
                "members_before": len(f.members),
                "members_after": len(padded),
                "saturation_extends": mset_extends(
                    FiniteMSet(a + n, tuple(
                        MathiasCondition(s, tuple(p for p in o.reservoir
                                                  if p >= a + n), o.horizon)
                        for s, o in sorted(saturated.items()))), f),
            }
            return candidate, info
    raise HorizonExhaustedError(
        f"no saturation level within horizon {h.horizon} lets the gauge dominate "
        f"the tree of the transformed M-set (operator {theta.name!r})"
    )


def one_step_mset(f: FiniteMSet, h: GaugeFunction,
                  theta: DensityOperatorSpec) -> FiniteMSet:
    """Saturate, transform, pad; return the first level where h still
    dominates the companion gauge of the result."""
    out, _ = _one_step_details(f, h, theta)
    return out


def build_mathias_tree(catalog: list[DensityOperatorSpec], f: GaugeFunction,
                       depth: int) -> tuple[ExplicitTree, list[dict], Fraction]:
    """Normalize the gauge, iterate the one-step extension, expand the tree.

    Returns (tree, stage report, normalization constant).  The tree is the
    final M-set's cylinder union at the given depth; under the normalized
    gauge its cover optimum is at least 1.
    """
    h, s = normalize_gauge(f)
    if depth > h.horizon:
        raise RangeError(f"depth {depth} beyond gauge horizon {h.horizon}")
    current = FiniteMSet(0, (full_reservoir_condition(h.horizon),))
    report: list[dict] = []
    for j, theta in enumerate(catalog):
        try:
            current, info = _one_step_details(current, h, theta)
        except HorizonExhaustedError as exc:
            raise HorizonExhaustedError(f"stage {j}: {exc}") from exc
        report.append({"stage": j, **info})
    return mset_tree(current, depth), report, s
