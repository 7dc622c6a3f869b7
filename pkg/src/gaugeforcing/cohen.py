"""Generic-tree construction against a finite catalog of dense open sets.

A dense open set is given by a decidable membership predicate on bit strings;
density and upward closure are spot-checked by bounded sampling, since the
real properties quantify over all strings.  The two main constructions:

* ``null_cover_witness``: for a gauge that decays on the window, a cheap
  cover (total cost below ``2^-l``) whose cylinders are dense among the
  first ``count`` strings in canonical order — the witness that such a gauge
  assigns the generic's closure no mass;
* ``build_cohen_tree``: for a gauge that keeps level traces at 1 or above,
  a tree whose every branch meets every catalog member while the trace
  ``v(n)*count(n)`` never drops below 1.  Each stage extends every current
  end node into the target dense set and pads all images to a common level,
  chosen so the trace survives; when no level within the window works, the
  stage reports honest exhaustion instead of weakening the invariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import (HorizonExhaustedError, ParseError, PreconditionError,
                     RangeError, ValidationError)
from .gauges import GaugeFunction
from .measure import CoverSet, level_trace
from .trees import (
    ExplicitTree,
    TreeUniformity,
    check_bits,
    lexlen_key,
    uniformity_check,
)

# Cap on candidate strings scanned per least-extension search.
THETA_SEARCH_CAP = 1 << 18


# ---------------------------------------------------------------------------
# canonical enumeration of 2^{<w}


def canonical_enumeration(i: int) -> str:
    """The i-th bit string in length-then-lexicographic order (0 -> root)."""
    if i < 0:
        raise ValidationError(f"enumeration index must be a natural, got {i}")
    return bin(i + 1)[3:]


def enumeration_index(s: str) -> int:
    check_bits(s, "enumeration string")
    return int("1" + s, 2) - 1


# ---------------------------------------------------------------------------
# dense open sets


@dataclass(frozen=True)
class DenseOpenSet:
    """Named membership predicate, asserted upward closed under extension."""

    name: str
    membership: Callable[[str], bool]
    upward_closed: bool = True

    def contains(self, s: str) -> bool:
        return bool(self.membership(check_bits(s)))


@dataclass(frozen=True)
class DenseSetCatalog:
    members: tuple[DenseOpenSet, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.members, tuple):
            object.__setattr__(self, "members", tuple(self.members))
        seen = set()
        for d in self.members:
            if d.name in seen:
                raise ValidationError(f"duplicate dense set name {d.name!r}")
            seen.add(d.name)


def meets(x: str, d: DenseOpenSet) -> bool:
    """True iff some prefix of x (the root included) belongs to d."""
    check_bits(x, "path prefix")
    return any(d.contains(x[:k]) for k in range(len(x) + 1))


def length_threshold_set(threshold: int, name: str | None = None) -> DenseOpenSet:
    if threshold < 0:
        raise ValidationError(f"threshold must be a natural, got {threshold}")
    return DenseOpenSet(
        name=name or f"length_ge_{threshold}",
        membership=lambda s, L=threshold: len(s) >= L,
    )


def pattern_suffix_set(pattern: str, name: str | None = None) -> DenseOpenSet:
    """Strings containing the pattern; containment makes the set upward closed."""
    check_bits(pattern, "pattern")
    if not pattern:
        raise ValidationError("pattern must be non-empty")
    return DenseOpenSet(
        name=name or f"contains_{pattern}",
        membership=lambda s, p=pattern: p in s,
    )


def custom_table_set(members: set[str] | frozenset[str], name: str) -> DenseOpenSet:
    """Upward closure of an explicit finite list of strings."""
    table = frozenset(check_bits(m, "table member") for m in members)
    if not table:
        raise ValidationError("custom table must list at least one member")
    return DenseOpenSet(
        name=name,
        membership=lambda s, t=table: any(s[:k] in t for k in range(len(s) + 1)),
    )


def catalog_from_json(obj: object) -> DenseSetCatalog:
    if not isinstance(obj, list):
        raise ParseError("catalog must be a JSON list of dense set entries")
    members = []
    for k, entry in enumerate(obj):
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ParseError(f"catalog entry {k} must be an object with a 'kind'")
        kind = entry["kind"]
        name = entry.get("name")
        if kind == "length_threshold":
            threshold = entry.get("threshold")
            if not isinstance(threshold, int):
                raise ParseError(f"catalog entry {k}: length_threshold needs an "
                                 f"integer 'threshold'")
            members.append(length_threshold_set(threshold, name))
        elif kind == "pattern_suffix":
            pattern = entry.get("pattern")
            if not isinstance(pattern, str):
                raise ParseError(f"catalog entry {k}: pattern_suffix needs a "
                                 f"string 'pattern'")
            members.append(pattern_suffix_set(pattern, name))
        elif kind == "custom_table":
            raw = entry.get("members")
            if not isinstance(raw, list):
                raise ParseError(f"catalog entry {k}: custom_table needs 'members' list")
            members.append(custom_table_set({str(m) for m in raw},
                                            name or f"table_{k}"))
        elif kind == "escape":
            from .domination import GapFunction, escape_dense_set

            gaps = entry.get("gaps")
            if not isinstance(gaps, list) or not all(isinstance(v, int) for v in gaps):
                raise ParseError(f"catalog entry {k}: escape needs integer 'gaps' list")
            members.append(escape_dense_set(GapFunction(tuple(gaps)),
                                            name or "escape"))
        else:
            raise ParseError(f"catalog entry {k}: unknown kind {kind!r}")
    return DenseSetCatalog(tuple(members))


def validate_catalog(catalog: DenseSetCatalog, depth: int, slack: int = 2,
                     samples: int = 64, seed: int = 0) -> None:
    """Sampled upward-closure and density checks; raises on a counterexample.

    Density is checked as: every sampled string of length <= depth - slack
    has an extension in the set within the depth (bounded breadth-first
    scan).  A failure is evidence, not proof, that the catalog entry cannot
    support constructions at this depth.
    """
    import random

    rng = random.Random(seed)
    for d in catalog.members:
        for _ in range(samples):
            n = rng.randrange(depth + 1)
            s = "".join(rng.choice("01") for _ in range(n))
            if d.contains(s):
                for b in "01":
                    if len(s) < depth and not d.contains(s + b):
                        raise ValidationError(
                            f"dense set {d.name!r} not upward closed at {s!r}->{s + b!r}"
                        )
            if n <= depth - slack and not _has_extension_within(d, s, depth):
                raise ValidationError(
                    f"dense set {d.name!r} has no extension of {s!r} within depth {depth}"
                )


def _has_extension_within(d: DenseOpenSet, s: str, depth: int,
                          cap: int = THETA_SEARCH_CAP) -> bool:
    frontier = [s]
    scanned = 0
    while frontier and scanned < cap:
        node = frontier.pop(0)
        scanned += 1
        if d.contains(node):
            return True
        if len(node) < depth:
            frontier.extend((node + "0", node + "1"))
    return False


# ---------------------------------------------------------------------------
# null-cover witness


def null_cover_witness(f: GaugeFunction, l: int, count: int) -> CoverSet:
    """First ``count`` elements of the cheap dense cover at scale ``l``.

    Element n extends the n-th canonical string out to the least length where
    the gauge has dropped to ``2^-(l+n+1)``, padding with zeros; the total
    cost is then strictly below ``2^-l`` while remaining dense among the
    first ``count`` canonical strings.
    """
    if l < 0 or count <= 0:
        raise ValidationError(f"need l >= 0 and count >= 1, got l={l}, count={count}")
    cylinders = set()
    for n in range(count):
        sigma = canonical_enumeration(n)
        threshold = Fraction(1, 1 << (l + n + 1))
        target = None
        for m in range(max(l, len(sigma)), f.horizon + 1):
            if f.value(m) <= threshold:
                target = m
                break
        if target is None:
            raise HorizonExhaustedError(
                f"gauge never drops to 2^-{l + n + 1} within horizon {f.horizon}"
            )
        cylinders.add(sigma + "0" * (target - len(sigma)))
    return CoverSet(frozenset(cylinders), min_length=l)


# ---------------------------------------------------------------------------
# one-step extension and the staged build


def least_extension_in(o: DenseOpenSet, t: str, horizon: int) -> str:
    """Least extension of t (canonical order) lying in o, searched to horizon."""
    scanned = 0
    for m in range(len(t), horizon + 1):
        width = m - len(t)
        for k in range(1 << width):
            cand = t + format(k, f"0{width}b") if width else t
            scanned += 1
            if scanned > THETA_SEARCH_CAP:
                raise HorizonExhaustedError(
                    f"dense set {o.name!r}: extension search for {t!r} exceeded "
                    f"{THETA_SEARCH_CAP} candidates"
                )
            if o.contains(cand):
                return cand
    raise HorizonExhaustedError(
        f"dense set {o.name!r} has no extension of {t!r} within horizon {horizon}"
    )


def _one_step_details(s: ExplicitTree, g: GaugeFunction,
                      o: DenseOpenSet) -> tuple[ExplicitTree, dict]:
    if g.value(0) != 1:
        raise PreconditionError(f"gauge must be normalized to value 1 at depth 0, "
                                f"got {g.value(0)}")
    if uniformity_check(s) is TreeUniformity.NON_UNIFORM:
        raise PreconditionError("tree to extend must be uniform or partially uniform")
    l = s.depth
    if g.horizon < l:
        raise RangeError(f"gauge horizon {g.horizon} below tree height {l}")
    if level_trace(s, g).final_min < 1:
        raise PreconditionError("tree violates the level-trace >= 1 invariant")
    ends = s.levels[l]
    big_k = len(ends)

    # The fully splitting band (l, l+n] must keep the trace at 1 or above;
    # a failure at level m rules out every n >= m - l, so the first failing
    # level caps the search outright.
    n_max = g.horizon - l
    for m in range(l + 1, g.horizon + 1):
        if g.value(m) * big_k * (1 << (m - l)) < 1:
            n_max = m - 1 - l
            break

    for n in range(n_max + 1):
        if big_k << n > THETA_SEARCH_CAP:
            raise HorizonExhaustedError(
                f"saturating {big_k} branches through {n} splitting levels "
                f"exceeds the {THETA_SEARCH_CAP} width budget "
                f"(dense set {o.name!r} above height {l})"
            )
        extensions = [e + format(k, f"0{n}b") if n else e
                      for e in ends for k in range(1 << n)]
        images = [least_extension_in(o, t, g.horizon) for t in extensions]
        k_n = max(l + n, max(len(im) for im in images))
        if k_n > g.horizon:
            continue
        # trace on the constant band (l+n, k_n]; worst case at the bottom
        if k_n > l + n and g.value(k_n) * big_k * (1 << n) < 1:
            continue
        padded = [im + "0" * (k_n - len(im)) for im in images]
        nodes = set(s.nodes)
        for p in padded:
            nodes.update(p[:j] for j in range(l, k_n + 1))
        result = ExplicitTree(frozenset(nodes), k_n)
        info = {
            "dense_set": o.name,
            "height_before": l,
            "height_after": k_n,
            "c_found": k_n,
            "k_n": k_n,
            "split_band": n,
            "end_nodes_before": big_k,
            "end_nodes_after": big_k * (1 << n),
        }
        return result, info
    raise HorizonExhaustedError(
        f"no padding level within horizon {g.horizon} keeps the trace at 1 "
        f"for dense set {o.name!r} above height {l}"
    )


def one_step_extension(s: ExplicitTree, g: GaugeFunction,
                       o: DenseOpenSet) -> ExplicitTree:
    """Extend every branch of s into o, keeping the level trace at 1 or above.

    The new end level is the least one where padding every least-extension
    image leaves the trace intact across both the splitting band and the
    padded band; restricted to the old height the output equals the input.
    """
    tree, _ = _one_step_details(s, g, o)
    return tree


def build_cohen_tree(catalog: DenseSetCatalog,
                     g: GaugeFunction) -> tuple[ExplicitTree, list[dict]]:
    """Iterate the one-step extension through the catalog, recording stages.

    The result's every maximal branch meets every catalog member, and the
    level trace never drops below 1.  An empty catalog returns the minimal
    (root-only) tree.  Exhaustion at any stage propagates with the stage
    index attached.
    """
    tree = ExplicitTree(frozenset([""]), 0)
    report: list[dict] = []
    for j, o in enumerate(catalog.members):
        try:
            tree, info = _one_step_details(tree, g, o)
        except HorizonExhaustedError as exc:
            raise HorizonExhaustedError(f"stage {j}: {exc}") from exc
        info = {"stage": j, **info}
        report.append(info)
    return tree, report
