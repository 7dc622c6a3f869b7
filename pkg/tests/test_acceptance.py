"""End-to-end acceptance suite: twelve shipped guarantees, one verdict each.

Every test prints a single ``criterion NN PASS/FAIL`` line on the real
stdout (bypassing pytest capture) before asserting, so a full run always
yields a twelve-line scoreboard.  All arithmetic checks are exact — the
tolerances are zero except where a bound is itself the guarantee.
"""

import io
import itertools
import json
import random
import sys
import time
from contextlib import redirect_stdout
from fractions import Fraction as F
from pathlib import Path

import pytest

import gaugeforcing as gf
from gaugeforcing.cli import main as cli_main

from test_cli import all_commands, write_fixtures


@pytest.fixture
def verdict(capsys):
    """Print one scoreboard line on the real stdout, then assert."""
    def _verdict(number: int, label: str, failures: list) -> None:
        status = "PASS" if not failures else "FAIL"
        with capsys.disabled():
            print(f"\ncriterion {number:02d} {status} — {label}",
                  file=sys.stdout, flush=True)
        assert not failures, f"criterion {number:02d}: " + "; ".join(
            str(f) for f in failures[:5])
    return _verdict


def _random_schedule(rng, max_depth, max_splits):
    depth = rng.randint(1, max_depth)
    k = rng.randint(0, min(max_splits, depth))
    return gf.SplitSchedule(tuple(sorted(rng.sample(range(depth), k))), depth)


def _random_dyadic_gauge(rng, horizon, max_step=3):
    exponents = [0]
    for _ in range(horizon):
        exponents.append(exponents[-1] + rng.randint(0, max_step))
    return gf.gauge_from_exponents(exponents)


def _random_rational_gauge(rng, horizon):
    values = [F(rng.randint(1, 12), rng.randint(1, 4))]
    for _ in range(horizon):
        values.append(values[-1] * F(rng.randint(1, 6), 6))
    return gf.GaugeFunction(tuple(values))


def test_criterion_01_cover_oracle_matches_level_count_formula(verdict):
    rng = random.Random(101)
    failures = []
    started = time.monotonic()
    for _ in range(50):
        sched = _random_schedule(rng, max_depth=14, max_splits=10)
        counts = gf.level_counts(sched)
        for _ in range(10):
            g = _random_dyadic_gauge(rng, sched.depth)
            for floor in range(sched.depth + 1):
                got = gf.dp_cover_oracle(sched, g, floor)
                want = min(counts[n] * g.values[n]
                           for n in range(floor, sched.depth + 1))
                if got != want:
                    failures.append(
                        f"splits={sched.splits} depth={sched.depth} "
                        f"floor={floor}: oracle {got} != formula {want}")
    elapsed = time.monotonic() - started
    if elapsed >= 60:
        failures.append(f"runtime {elapsed:.1f}s is not below 60s")
    verdict(1, "cover optimum equals the per-level count formula "
                "on 50 schedules x 10 dyadic gauges x every floor", failures)


def test_criterion_02_identity_gauge_gives_unit_mass_on_full_trees(verdict):
    failures = []
    for depth in range(11):
        tree = gf.full_tree(depth)
        g = gf.identity_gauge(depth)
        trace = gf.level_trace(tree, g)
        if any(v != 1 for v in trace.values):
            failures.append(f"depth {depth}: trace deviates from 1")
        for floor in range(depth + 1):
            if gf.dp_cover_oracle(tree, g, floor) != 1:
                failures.append(f"depth {depth} floor {floor}: optimum != 1")
    verdict(2, "identity gauge gives unit trace and unit cover optimum "
                "on every full tree through depth 10", failures)


def _random_tiling_cover(explicit, rng):
    chosen = []
    stack = [""]
    while stack:
        node = stack.pop()
        kids = explicit.children(node)
        if not kids or rng.random() < 0.35:
            chosen.append(node)
        else:
            stack.extend(kids)
    return gf.CoverSet(frozenset(chosen))


def test_criterion_03_companion_gauge_floors_every_cover_at_one(verdict):
    rng = random.Random(303)
    failures = []
    checked_covers = 0
    for _ in range(50):
        sched = _random_schedule(rng, max_depth=12, max_splits=8)
        companion = gf.tree_gauge(sched)
        for floor in range(sched.depth + 1):
            if gf.dp_cover_oracle(sched, companion, floor) < 1:
                failures.append(
                    f"splits={sched.splits} depth={sched.depth} "
                    f"floor={floor}: optimum below 1")
        explicit = gf.schedule_to_explicit(sched)
        for _ in range(4):
            cover = _random_tiling_cover(explicit, rng)
            if not gf.covers_tree(cover, explicit):
                failures.append(f"generated set fails to cover {sched.splits}")
                continue
            checked_covers += 1
            if gf.cover_cost(cover, companion) < 1:
                failures.append(
                    f"splits={sched.splits}: cover cost below 1")
    if checked_covers != 200:
        failures.append(f"expected 200 valid covers, checked {checked_covers}")
    verdict(3, "companion gauge keeps the cover optimum and 200 random "
                "tiling covers at cost >= 1 on 50 schedules", failures)


def test_criterion_04_hat_transform_contract_and_refinement_bound(verdict):
    rng = random.Random(404)
    failures = []
    delta = F(1, 1024)
    for i in range(100):
        horizon = rng.randint(1, 20)
        g = (_random_dyadic_gauge(rng, horizon) if i % 2
             else _random_rational_gauge(rng, horizon))
        hg = gf.hat_transform(g)
        if gf.hat_transform(hg) != hg:
            failures.append(f"gauge {i}: transform is not idempotent")
        if any(hg.values[n] > g.values[n] for n in range(horizon + 1)):
            failures.append(f"gauge {i}: transform exceeds its input")
        if not gf.is_ratio_monotone(hg):
            failures.append(f"gauge {i}: output ratio trace not monotone")
        if (hg == g) != gf.is_ratio_monotone(g):
            failures.append(f"gauge {i}: fixed point mismatch")
    for i in range(100):
        horizon = rng.randint(2, 16)
        g = (_random_dyadic_gauge(rng, horizon) if i % 2
             else _random_rational_gauge(rng, horizon))
        cylinders = {
            "".join(rng.choice("01") for _ in range(rng.randint(0, horizon)))
            for _ in range(rng.randint(1, 8))
        }
        cover = gf.CoverSet(frozenset(cylinders))
        refined = gf.refine_cover_hat(cover, g, delta)
        bound = gf.cover_cost(cover, gf.hat_transform(g)) + delta
        if gf.cover_cost(refined, g) > bound:
            failures.append(f"pair {i}: refined cost exceeds the hat bound")
    verdict(4, "hat transform is idempotent, dominated, ratio-monotone, "
                "fixed exactly on monotone inputs; refinement meets the "
                "hat cost + 2^-10 bound on 100 pairs", failures)


def test_criterion_05_generic_tree_builder_meets_catalogs_with_unit_mass(verdict):
    failures = []
    identity = gf.identity_gauge(64)
    slow_half = gf.gauge_from_exponents([(n + 1) // 2 for n in range(65)])
    slow_third = gf.gauge_from_exponents([(n + 2) // 3 for n in range(65)])
    cases = [
        (identity, (gf.length_threshold_set(4), gf.length_threshold_set(8),
                    gf.length_threshold_set(12))),
        (identity, (gf.length_threshold_set(3), gf.length_threshold_set(6))),
        (slow_half, (gf.pattern_suffix_set("11"), gf.length_threshold_set(6),
                     gf.pattern_suffix_set("00"))),
        (slow_half, (gf.escape_dense_set(gf.GapFunction((1,))),
                     gf.length_threshold_set(5))),
        (slow_third, (gf.pattern_suffix_set("101"), gf.length_threshold_set(4),
                      gf.pattern_suffix_set("000"), gf.length_threshold_set(8))),
    ]
    for idx, (g, members) in enumerate(cases):
        started = time.monotonic()
        tree, report = gf.build_cohen_tree(gf.DenseSetCatalog(members), g)
        elapsed = time.monotonic() - started
        if elapsed >= 30:
            failures.append(f"case {idx}: runtime {elapsed:.1f}s not below 30s")
        if tree.depth > 64:
            failures.append(f"case {idx}: depth {tree.depth} beyond 64")
        if gf.level_trace(tree, g).final_min < 1:
            failures.append(f"case {idx}: trace running min below 1")
        if gf.uniformity_check(tree) is gf.TreeUniformity.NON_UNIFORM:
            failures.append(f"case {idx}: output is non-uniform")
        for leaf in tree.leaves:
            for d in members:
                if not gf.meets(leaf, d):
                    failures.append(
                        f"case {idx}: leaf {leaf!r} misses {d.name}")
    verdict(5, "dense-set tree builder keeps running min >= 1, stays "
                "(partially) uniform, and every leaf meets every catalog "
                "set on 5 catalogs", failures)


def test_criterion_06_null_cover_witness_is_cheap_and_dense(verdict):
    failures = []
    f = gf.gauge_from_exponents([2 * n for n in range(65)])
    for l in range(6):
        witness = gf.null_cover_witness(f, l, 32)
        cost = gf.cover_cost(witness, f)
        if not cost < F(1, 2) ** l:
            failures.append(f"l={l}: cost {cost} not below 2^-{l}")
        for i in range(32):
            stem = gf.canonical_enumeration(i)
            if not any(u.startswith(stem) for u in witness.cylinders):
                failures.append(f"l={l}: no cylinder extends entry {stem!r}")
    verdict(6, "null cover witness costs below 2^-l for l=0..5 while "
                "extending each of the first 32 enumerated strings", failures)


def test_criterion_07_sparsifier_returns_even_positions_with_thin_trace(verdict):
    failures = []
    base = gf.full_reservoir_condition(16)
    sparse = gf.sparsify_condition(base, gf.identity_gauge(17))
    if sparse.stem != "" or sparse.reservoir != tuple(range(0, 17, 2)):
        failures.append(f"identity case kept {sparse.reservoir}")
    trace = gf.level_trace(gf.condition_tree(sparse, 16), gf.identity_gauge(17))
    if trace.final_min != F(1, 256) or not trace.final_min <= F(1, 256):
        failures.append(f"trace running min {trace.final_min} != 2^-8")
    slow = gf.gauge_from_exponents([(n + 1) // 2 for n in range(18)])
    wide = gf.sparsify_condition(base, slow)
    if wide.reservoir != (0, 4, 8, 12, 16):
        failures.append(f"half-exponent case kept {wide.reservoir}")
    verdict(7, "sparsifier keeps exactly the even positions (trace min "
                "2^-8) under identity and every fourth under the "
                "half-exponent gauge", failures)


def test_criterion_08_mset_builder_keeps_unit_optimum_with_stage_checks(verdict):
    failures = []
    operator = gf.domination_operator(gf.GapFunction((1,)))
    slow = gf.gauge_from_exponents([(n + 1) // 2 for n in range(13)])
    for name, raw in (("identity", gf.identity_gauge(12)), ("slow", slow)):
        h, s = gf.normalize_gauge(raw)
        tree, report, s_built = gf.build_mathias_tree([operator], raw, 12)
        if s_built != s:
            failures.append(f"{name}: normalization constant mismatch")
        profile = gf.dp_cover_oracle_profile(tree, h)
        if len(profile) != 13 or any(v < 1 for v in profile):
            failures.append(f"{name}: cover optimum dips below 1")
        start = gf.FiniteMSet(0, (gf.full_reservoir_condition(h.horizon),))
        step = gf.one_step_mset(start, h, operator)
        if not gf.mset_extends(step, start):
            failures.append(f"{name}: stage fails the set extension check")
        for member in step.members:
            if not any(gf.extends_M(member, base) for base in start.members):
                failures.append(f"{name}: member {member.stem!r} extends "
                                "no starting condition")
        if gf.mset_tree(step, 12).nodes != tree.nodes:
            failures.append(f"{name}: replayed stage disagrees with builder")
    verdict(8, "M-set builder output keeps the cover optimum >= 1 at every "
                "floor and every stage passes both extension checks", failures)


def test_criterion_09_thinning_reaches_thin_trace_within_split_budgets(verdict):
    failures = []
    g = gf.identity_gauge(20)
    full = gf.schedule_to_explicit(gf.full_tree(20))
    thin = gf.thin_tree(gf.SacksCondition(full, 20), g)
    final = gf.level_trace(thin.tree, g).final_min
    if not final <= F(1, 256):
        failures.append(f"trace running min {final} not below 2^-8")
    if not thin.tree.nodes <= full.nodes:
        failures.append("output is not a subtree of the full tree")
    if "0" * 20 not in thin.tree.nodes:
        failures.append("leftmost branch missing from the output")
    triggers = gf.split_triggers(g, 20)
    for n in range(21):
        budget = 2 ** sum(1 for t in triggers if t <= n)
        if len(thin.tree.levels[n]) > budget:
            failures.append(f"level {n}: {len(thin.tree.levels[n])} nodes "
                            f"over budget {budget}")
    verdict(9, "thinning the full depth-20 tree reaches a 2^-8 trace, keeps "
                "the leftmost branch, and respects per-level split budgets",
             failures)


def _escape_witness(x, y):
    """Return (k, run, index) for the first gap certificate in x, else None."""
    ones = [i for i, b in enumerate(x) if b == "1"]
    for k, j in enumerate(ones):
        start = ones[k - 1] + 1 if k else 0
        if j - start >= y.clamped(k) + 1:
            return k, j - start, j
    return None


def test_criterion_10_domination_dictionary_holds_exhaustively(verdict):
    failures = []
    # Built paths eventually dominate the operator's gap target.
    slow = gf.gauge_from_exponents([(n + 1) // 2 for n in range(13)])
    tree, _, _ = gf.build_mathias_tree(
        [gf.domination_operator(gf.GapFunction((1,)))], slow, 12)
    dominated = skipped = 0
    for leaf in tree.leaves:
        if leaf.count("1") < 2:
            skipped += 1  # gap sequence undefined below two ones
            continue
        gaps = gf.pi_transform(leaf)
        if gf.eventually_dominates_seq(gaps, [1] * len(gaps)) is None:
            failures.append(f"path {leaf!r} never dominates the target")
        else:
            dominated += 1
    if dominated == 0 or dominated + skipped != len(tree.leaves):
        failures.append(f"coverage gap: {dominated} dominated + {skipped} "
                        f"skipped over {len(tree.leaves)} branches")
    # Escape membership, exhaustively to length 12.
    y = gf.GapFunction((2, 1))
    escape = gf.escape_dense_set(y)
    for length in range(13):
        for bits in itertools.product("01", repeat=length):
            x = "".join(bits)
            witness = _escape_witness(x, y)
            if escape.contains(x) != (witness is not None):
                failures.append(f"membership mismatch at {x!r}")
            elif witness is not None:
                k, run, _ = witness
                if run < y.clamped(k) + 1:
                    failures.append(f"{x!r}: meeting run {run} does not "
                                    f"exceed target {y.clamped(k)}")
    # Path bound dominates the gaps of every maximal branch, exhaustively.
    start = gf.SacksCondition(gf.schedule_to_explicit(gf.full_tree(10)), 10)
    restricted = gf.apply_sacks_operator(gf.bounding_operator(), start)
    if len(restricted.tree.nodes) != 157:
        failures.append(f"restricted tree has {len(restricted.tree.nodes)} nodes")
    bound = list(gf.path_bound(restricted).gaps)
    for leaf in restricted.tree.leaves:
        gaps = gf.completed_gaps(leaf)
        if gaps and not gf.dominates_seq(bound, gaps):
            failures.append(f"path bound misses branch {leaf!r}")
    verdict(10, "built paths eventually dominate the gap target; escape "
                 "membership and the path bound verified exhaustively",
             failures)


def test_criterion_11_refining_gauge_meets_all_four_contract_clauses(verdict):
    failures = []
    h32 = range(33)
    slow_half = gf.gauge_from_exponents([(n + 1) // 2 for n in h32])
    slow_third = gf.gauge_from_exponents([(n + 2) // 3 for n in h32])
    slow_quarter = gf.gauge_from_exponents([(n + 3) // 4 for n in h32])
    flat = gf.constant_gauge(F(1), 32)
    fast2 = gf.gauge_from_exponents([2 * n for n in h32])
    fast3 = gf.gauge_from_exponents([3 * n for n in h32])
    instances = [
        (slow_half, []),
        (slow_half, [fast2]),
        (slow_half, [fast2, fast3]),
        (slow_half, [gf.scale(fast2, F(5, 2))]),
        (slow_third, [fast2]),
        (slow_third, [fast3, gf.scale(fast2, F(7, 4))]),
        (slow_third, [gf.scale(fast2, F(3, 2)), fast3]),
        (slow_quarter, [fast2, fast3, gf.scale(fast3, F(9, 8))]),
        (flat, [fast2]),
        (slow_quarter, [gf.scale(fast3, F(1, 3))]),
    ]
    for idx, (base, catalog) in enumerate(instances):
        out = gf.finer_gauge(base, catalog)
        horizon = base.horizon
        ratios = [out.values[n] / base.values[n] for n in range(horizon + 1)]
        if any(out.values[n] > base.values[n] for n in range(horizon + 1)):
            failures.append(f"instance {idx}: output exceeds its base")
        if any(ratios[n + 1] > ratios[n] for n in range(horizon)):
            failures.append(f"instance {idx}: ratio to base increases")
        if ratios[-1] > F(1, 2) ** len(catalog):
            failures.append(f"instance {idx}: final ratio {ratios[-1]} over "
                            f"2^-{len(catalog)}")
        for j, member in enumerate(catalog):
            if not any(out.values[n] > member.values[n]
                       for n in range(horizon + 1)):
                failures.append(f"instance {idx}: never escapes member {j}")
        if any(out.values[n + 1] < out.values[n] / 2 for n in range(horizon)):
            failures.append(f"instance {idx}: decays faster than halving")
        if not gf.is_ratio_monotone(out):
            failures.append(f"instance {idx}: output ratio trace not monotone")
    verdict(11, "refining gauge stays below base with halving stage ratios, "
                 "escapes every catalog member, never outpaces halving, and "
                 "is ratio-monotone on 10 instances", failures)


def test_criterion_12_every_cli_command_is_deterministic(verdict, tmp_path):
    failures = []
    fixtures = write_fixtures(tmp_path)
    for name, argv in all_commands(fixtures).items():
        outputs = []
        for _ in range(2):
            buffer = io.StringIO()
            with redirect_stdout(buffer):
                code = cli_main(argv)
            if code != 0:
                failures.append(f"{name}: exit code {code}")
            outputs.append(buffer.getvalue().encode())
        if outputs[0] != outputs[1]:
            failures.append(f"{name}: repeated runs differ")
    verdict(12, "all 15 CLI commands exit 0 and are byte-identical "
                 "across repeated runs", failures)
