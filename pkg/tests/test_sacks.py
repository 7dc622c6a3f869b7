"""Perfect-tree conditions, gauge-driven thinning, and the S-set builder."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gaugeforcing as gf
from conftest import exponent_gauges, perfect_trees


class TestPerfectToDepth:
    def test_full_tree(self):
        t = gf.schedule_to_explicit(gf.full_tree(4))
        assert gf.compute_perfect_to_depth(t) == 4

    def test_dead_end_caps_at_zero(self):
        assert gf.compute_perfect_to_depth(gf.ExplicitTree(frozenset({"", "0"}), 2)) == 0

    def test_single_branch_never_splits(self):
        t = gf.schedule_to_explicit(gf.SplitSchedule((), 4))
        assert gf.compute_perfect_to_depth(t) == 0

    def test_split_then_stop(self):
        t = gf.ExplicitTree(frozenset({"", "0", "1", "00", "10"}), 2)
        assert gf.compute_perfect_to_depth(t) == 1
        late = gf.schedule_to_explicit(gf.SplitSchedule((1,), 3))
        assert gf.compute_perfect_to_depth(late) == 2


class TestSacksCondition:
    def test_declared_depth_checked(self):
        bad = gf.ExplicitTree(frozenset({"", "0"}), 2)
        with pytest.raises(gf.ValidationError):
            gf.SacksCondition(bad, 2)
        assert gf.SacksCondition(bad, 0).perfect_to_depth == 0
        with pytest.raises(gf.ValidationError):
            gf.SacksCondition(bad, -1)

    def test_json_round_trip(self):
        c = gf.SacksCondition(gf.schedule_to_explicit(gf.full_tree(3)), 3)
        obj = gf.sacks_condition_to_json(c)
        assert obj["perfect_to_depth"] == 3
        assert gf.sacks_condition_from_json(obj) == c
        with pytest.raises(gf.ParseError):
            gf.sacks_condition_from_json({"kind": "explicit", "depth": 0,
                                          "nodes": [""]})
        with pytest.raises(gf.ParseError):
            gf.sacks_condition_from_json([])

    def test_stem_of(self):
        t = gf.schedule_to_explicit(gf.SplitSchedule((2, 3), 4, "01"))
        assert gf.stem_of(t) == "01"
        assert gf.stem_of(gf.schedule_to_explicit(gf.full_tree(2))) == ""


class TestSplitTriggers:
    def test_frozen(self):
        assert gf.split_triggers(gf.identity_gauge(20), 20) == [
            1, 3, 5, 7, 9, 11, 13, 15, 17, 19]
        assert gf.split_triggers(gf.constant_gauge(F(1), 8), 8) == []
        slow = gf.gauge_from_exponents([(n + 1) // 2 for n in range(21)])
        assert gf.split_triggers(slow, 20) == [1, 5, 9, 13, 17]

    @given(exponent_gauges(max_horizon=16))
    def test_triggers_are_strict_thresholds(self, g):
        triggers = gf.split_triggers(g, g.horizon)
        for k, t in enumerate(triggers):
            assert g.value(t) < F(1, 1 << (2 * k))
            if t > 0:
                assert g.value(t - 1) >= F(1, 1 << (2 * k))


class TestThinTree:
    def test_frozen_identity_depth_20(self):
        full = gf.schedule_to_explicit(gf.full_tree(20))
        thin = gf.thin_tree(gf.SacksCondition(full, 20), gf.identity_gauge(20))
        counts = [len(thin.tree.levels[n]) for n in range(21)]
        assert counts == [1, 1, 2, 2, 4, 4, 8, 8, 16, 16, 32, 32, 64, 64,
                          128, 128, 256, 256, 512, 512, 1024]
        assert "0" * 20 in thin.tree.nodes
        assert thin.perfect_to_depth == 20
        assert gf.level_trace(thin.tree, gf.identity_gauge(20)).final_min == F(1, 1024)

    def test_subset_of_input(self):
        full = gf.schedule_to_explicit(gf.full_tree(10))
        thin = gf.thin_tree(gf.SacksCondition(full, 10), gf.identity_gauge(10))
        assert thin.tree.nodes <= full.nodes

    def test_constant_gauge_single_branch(self):
        full = gf.schedule_to_explicit(gf.full_tree(6))
        thin = gf.thin_tree(gf.SacksCondition(full, 6), gf.constant_gauge(F(1), 6))
        assert sorted(thin.tree.nodes) == ["0" * k for k in range(7)]

    def test_matching_schedule_is_fixed(self):
        sched = gf.SplitSchedule(tuple(range(1, 20, 2)), 20)
        t = gf.schedule_to_explicit(sched)
        thin = gf.thin_tree(gf.SacksCondition(t, 20), gf.identity_gauge(20))
        assert thin.tree == t

    def test_dead_end_rejected(self):
        bad = gf.SacksCondition(gf.ExplicitTree(frozenset({"", "0"}), 2), 0)
        with pytest.raises(gf.NotPerfectError):
            gf.thin_tree(bad, gf.identity_gauge(2))

    @given(perfect_trees(max_depth=6), exponent_gauges(max_horizon=6))
    @settings(max_examples=40, deadline=None)
    def test_split_budget_respected(self, t, g):
        if g.horizon < t.depth:
            return
        cond = gf.SacksCondition(t, gf.compute_perfect_to_depth(t))
        thin = gf.thin_tree(cond, g)
        triggers = gf.split_triggers(g, t.depth)
        assert thin.tree.nodes <= t.nodes
        for n in range(t.depth + 1):
            allowed = sum(1 for x in triggers if x <= n)
            assert len(thin.tree.levels[n]) <= 1 << allowed


class TestFiniteSSet:
    def test_invariants(self):
        full4 = gf.schedule_to_explicit(gf.full_tree(4))
        with pytest.raises(gf.ValidationError):
            gf.FiniteSSet(0, ())
        with pytest.raises(gf.ValidationError):
            gf.FiniteSSet(0, (gf.SacksCondition(full4, 4),
                              gf.SacksCondition(gf.schedule_to_explicit(
                                  gf.full_tree(3)), 3)))
        s1 = gf.SacksCondition(full4.subtree_at("00"), 4)
        s2 = gf.SacksCondition(full4.subtree_at("0"), 4)
        with pytest.raises(gf.ValidationError):
            gf.FiniteSSet(1, (s1, s2))
        with pytest.raises(gf.ValidationError):
            gf.FiniteSSet(3, (s1,))  # stem shorter than base

    def test_union_tree(self):
        full3 = gf.schedule_to_explicit(gf.full_tree(3))
        f = gf.FiniteSSet(1, (gf.SacksCondition(full3.subtree_at("0"), 3),
                              gf.SacksCondition(full3.subtree_at("1"), 3)))
        assert gf.sset_union_tree(f) == full3


class TestOperators:
    def test_identity(self):
        c = gf.SacksCondition(gf.schedule_to_explicit(gf.full_tree(3)), 3)
        assert gf.apply_sacks_operator(gf.identity_sacks_operator(), c) == c

    def test_contract_violation(self):
        grow = gf.DensityOperatorSpec(
            "grow", lambda c: gf.SacksCondition(
                gf.schedule_to_explicit(gf.full_tree(c.tree.depth + 1)),
                c.tree.depth + 1))
        c = gf.SacksCondition(gf.schedule_to_explicit(gf.SplitSchedule((1,), 3)), 2)
        with pytest.raises(gf.ValidationError):
            gf.apply_sacks_operator(grow, c)

    def test_custom_table(self):
        src = gf.SacksCondition(gf.schedule_to_explicit(gf.full_tree(2)), 2)
        dst = gf.SacksCondition(
            gf.schedule_to_explicit(gf.SplitSchedule((1,), 2)), 2)
        op = gf.custom_table_sacks_operator([(src, dst)])
        assert gf.apply_sacks_operator(op, src) == dst

    def test_catalog_from_json(self):
        ops = gf.sacks_catalog_from_json([
            {"kind": "identity"},
            {"kind": "even_split_restrictor"},
        ])
        assert [op.name for op in ops] == ["identity", "even_split_restrictor"]
        for bad in ({}, [0], [{"kind": "nope"}],
                    [{"kind": "custom_table", "pairs": [0]}]):
            with pytest.raises(gf.ParseError):
                gf.sacks_catalog_from_json(bad)


class TestOneStep:
    def test_identity_operator_immediate(self):
        f = gf.FiniteSSet(0, (gf.SacksCondition(
            gf.schedule_to_explicit(gf.full_tree(8)), 8),))
        out = gf.one_step_sset(f, gf.identity_gauge(8), gf.identity_sacks_operator())
        assert out == f

    def test_frozen_restrictor_slow_gauge(self):
        h, _ = gf.normalize_gauge(
            gf.gauge_from_exponents([(n + 1) // 2 for n in range(11)]))
        f = gf.FiniteSSet(0, (gf.SacksCondition(
            gf.schedule_to_explicit(gf.full_tree(10)), 10),))
        out = gf.one_step_sset(f, h, gf.bounding_operator())
        assert out.base == 0 and len(out.members) == 1
        u = gf.sset_union_tree(out)
        assert len(u.nodes) == 157
        companion = gf.tree_gauge(u)
        assert all(h.value(n) >= companion.value(n) for n in range(11))

    def test_frozen_restrictor_identity_gauge(self):
        f = gf.FiniteSSet(0, (gf.SacksCondition(
            gf.schedule_to_explicit(gf.full_tree(8)), 8),))
        out = gf.one_step_sset(f, gf.identity_gauge(8), gf.bounding_operator())
        # only once the members' trees have no room left to restrict does the
        # identity gauge dominate the union again
        assert out.base == 6 and len(out.members) == 64
        assert gf.sset_union_tree(out) == gf.schedule_to_explicit(gf.full_tree(8))

    def test_requires_dominating_gauge(self):
        f = gf.FiniteSSet(0, (gf.SacksCondition(
            gf.schedule_to_explicit(gf.full_tree(4)), 4),))
        fast = gf.gauge_from_exponents([2 * n for n in range(5)])
        with pytest.raises(gf.PreconditionError):
            gf.one_step_sset(f, fast, gf.identity_sacks_operator())


class TestBuild:
    def test_empty_catalog_full_tree(self):
        t, report, s = gf.build_sacks_tree([], gf.identity_gauge(6), 6)
        assert t == gf.schedule_to_explicit(gf.full_tree(6))
        assert report == [] and s == 1

    def test_frozen_restrictor_slow(self):
        slow = gf.gauge_from_exponents([(n + 1) // 2 for n in range(11)])
        t, report, s = gf.build_sacks_tree([gf.bounding_operator()], slow, 10)
        assert s == 1 and len(t.nodes) == 157
        assert report == [{"stage": 0, "operator": "even_split_restrictor",
                           "base_before": 0, "base_after": 0,
                           "members_before": 1, "members_after": 1}]
        h, _ = gf.normalize_gauge(slow)
        assert min(gf.dp_cover_oracle_profile(t, h)) >= 1

    def test_depth_beyond_horizon(self):
        with pytest.raises(gf.RangeError):
            gf.build_sacks_tree([], gf.identity_gauge(4), 5)
