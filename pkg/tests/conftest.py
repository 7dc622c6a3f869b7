"""Shared hypothesis strategies for the test suite."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

import gaugeforcing as gf


@st.composite
def exponent_gauges(draw, max_horizon: int = 20, max_step: int = 3):
    """Dyadic gauges from a non-decreasing exponent table."""
    horizon = draw(st.integers(0, max_horizon))
    start = draw(st.integers(0, 3))
    steps = draw(st.lists(st.integers(0, max_step),
                          min_size=horizon, max_size=horizon))
    exps = [start]
    for s in steps:
        exps.append(exps[-1] + s)
    return gf.gauge_from_exponents(exps)


@st.composite
def rational_gauges(draw, max_horizon: int = 14):
    """General rational gauges: positive, non-increasing."""
    horizon = draw(st.integers(0, max_horizon))
    v = Fraction(draw(st.integers(1, 8)), draw(st.integers(1, 8)))
    values = [v]
    for _ in range(horizon):
        num = draw(st.integers(1, 4))
        den = draw(st.integers(num, 8))
        if draw(st.booleans()):
            v = v * Fraction(num, den)
        values.append(v)
    return gf.GaugeFunction(tuple(values))


@st.composite
def split_schedules(draw, max_depth: int = 10):
    depth = draw(st.integers(0, max_depth))
    stem_len = draw(st.integers(0, depth))
    stem = "".join(draw(st.lists(st.sampled_from("01"),
                                 min_size=stem_len, max_size=stem_len)))
    candidates = list(range(stem_len, depth))
    if candidates:
        splits = tuple(sorted(draw(st.sets(st.sampled_from(candidates)))))
    else:
        splits = ()
    fill = draw(st.sampled_from("01"))
    return gf.SplitSchedule(splits=splits, depth=depth, stem=stem, fill=fill)


@st.composite
def perfect_trees(draw, max_depth: int = 6):
    """Explicit trees where every branch reaches the declared depth."""
    depth = draw(st.integers(0, max_depth))
    nodes = {""}
    frontier = [""]
    for _ in range(depth):
        nxt = []
        for node in frontier:
            kind = draw(st.integers(0, 3))
            kids = ([node + "0", node + "1"] if kind == 0
                    else [node + "0"] if kind in (1, 2) else [node + "1"])
            nodes.update(kids)
            nxt.extend(kids)
        frontier = nxt
    return gf.ExplicitTree(frozenset(nodes), depth)


@st.composite
def pruned_trees(draw, max_depth: int = 5):
    """Explicit trees that may have leaves above the declared depth."""
    depth = draw(st.integers(0, max_depth))
    nodes = {""}
    frontier = [""]
    for level in range(depth):
        nxt = []
        for node in frontier:
            kind = draw(st.integers(0, 4))
            if kind == 4 and level > 0:
                continue  # early leaf
            kids = ([node + "0", node + "1"] if kind == 0
                    else [node + "0"] if kind in (1, 2) else [node + "1"])
            nodes.update(kids)
            nxt.extend(kids)
        frontier = nxt
    return gf.ExplicitTree(frozenset(nodes), depth)


@st.composite
def finite_msets(draw, max_depth: int = 8):
    depth = draw(st.integers(1, max_depth))
    base = draw(st.integers(0, depth - 1))
    all_stems = [format(i, f"0{base}b") for i in range(1 << base)] if base else [""]
    count = draw(st.integers(1, min(4, len(all_stems))))
    stems = draw(st.permutations(all_stems))[:count]
    members = []
    for stem in stems:
        positions = tuple(sorted(draw(st.sets(
            st.integers(base, depth), max_size=depth - base + 1))))
        members.append(gf.MathiasCondition(stem, positions, depth))
    return gf.FiniteMSet(base, tuple(members))


def bits(max_size: int = 14):
    return st.text(alphabet="01", min_size=0, max_size=max_size)
