"""Bound formulas vs the exact rewrite oracle, plus structural rule findings."""

from fractions import Fraction
from math import inf

import pytest

from gadgets import directed_ring, figure_gadget, path3, profile

from ncg import (
    DeviationClass,
    audit_altpath,
    audit_deviation_bound,
    audit_full,
    audit_structural,
    build_context,
    scaffold_profile,
    strategy1_bound,
    strategy2_bound,
    strategy3_bound,
    verify_equilibrium,
)
from ncg.audit import eligible_sold_selections
from ncg.structure import global_girth


# ---------------------------------------------------------------------------
# fixtures realising the hand-evaluated parameter sets


def depth1_seller(alpha=21):
    """n=10; seller 3 at depth 1 with |T(3)|=2 buys the out-edge (2, 3)."""
    pairs = [(0, 1), (0, 3), (1, 2), (3, 2), (3, 4),
             (0, 5), (0, 6), (0, 7), (0, 8), (0, 9)]
    return profile(10, alpha, pairs)


def depth2_seller(alpha=21):
    """n=10; seller 2 at depth 2, |T(1)|=3, |T(2)|=2, out-edge (2, 6)."""
    pairs = [(0, 1), (1, 2), (2, 3), (0, 5), (5, 6), (2, 6),
             (0, 4), (0, 7), (0, 8), (0, 9)]
    return profile(10, alpha, pairs)


def depth3_seller(alpha=21):
    """n=10; seller 3 at depth 3, |T(2)|=3, |T(3)|=2, out-edge (3, 7)."""
    pairs = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 5), (5, 6), (6, 7), (3, 7),
             (0, 8), (0, 9)]
    return profile(10, alpha, pairs)


def up_and_out_seller(alpha=21):
    """n=10 triangle {0,1,5}: vertex 1 buys its up-edge and the doubly-bought
    out-edge (1, 5); vertex 5 owns the antiparallel copy."""
    pairs = [(1, 0), (0, 5), (1, 5), (5, 1), (2, 1), (3, 1), (4, 1),
             (0, 6), (0, 7), (0, 8), (0, 9)]
    return profile(10, alpha, pairs)


def _ctx(p):
    return build_context(p)


def test_depth1_fixture_shape():
    ctx = _ctx(depth1_seller())
    assert ctx.root == 0
    assert ctx.spt.depth[3] == 1
    assert ctx.spt.subtree_size[3] == 2
    assert ctx.x_level((2, 3)) == 0
    assert ctx.profile.buys(3, 2)


def test_context_root_degrees_by_ownership():
    ctx = _ctx(directed_ring(7, 29))
    incoming, outgoing = ctx.root_h_degrees()
    assert (incoming, outgoing) == (1, 1)  # 0 buys one ring edge, 6 buys into 0
    assert ctx.deg_h(0) == 2


# ---------------------------------------------------------------------------
# bound values (hand evaluations)


def test_strategy1_bound_depth1():
    ctx = _ctx(depth1_seller(alpha=21))
    assert strategy1_bound(ctx, 3, [((2, 3), 0)]) == Fraction(-15)


def test_strategy1_bound_cancels_at_critical_alpha():
    ctx = _ctx(depth1_seller(alpha=6))  # alpha = d*n - sum 2|T(u_l)| exactly
    assert strategy1_bound(ctx, 3, [((2, 3), 0)]) == 0


def test_strategy2_bound_even_depth_has_midpoint_term():
    ctx = _ctx(depth2_seller())
    assert ctx.root == 0
    assert ctx.spt.depth[2] == 2
    assert ctx.spt.subtree_size[1] == 3
    assert ctx.spt.subtree_size[2] == 2
    assert ctx.x_level((2, 6)) == 0
    assert strategy2_bound(ctx, 2, [((2, 6), 0)]) == Fraction(3)


def test_strategy2_bound_odd_depth_drops_midpoint_term():
    ctx = _ctx(depth3_seller())
    assert ctx.spt.depth[3] == 3
    assert ctx.spt.subtree_size[3] == 2
    assert ctx.spt.subtree_size[2] == 3
    assert ctx.x_level((3, 7)) == 0
    assert strategy2_bound(ctx, 3, [((3, 7), 0)]) == Fraction(0)


def test_strategy3_bound_two_weightless_edges():
    ctx = _ctx(up_and_out_seller())
    assert ctx.root == 0
    assert ctx.spt.depth[1] == 1
    assert ctx.spt.subtree_size[1] == 4
    assert ctx.spt.orientation(0, 1) == "up"
    assert ctx.x_level((1, 5)) == 0
    assert strategy3_bound(ctx, 1, [((0, 1), 0), ((1, 5), 0)]) == Fraction(-19)


def test_strategy3_bound_leaf_seller():
    ctx = _ctx(up_and_out_seller())
    assert ctx.spt.subtree_size[5] == 1
    assert ctx.profile.buys(5, 1)
    assert strategy3_bound(ctx, 5, [((1, 5), 0)]) == Fraction(8)


# ---------------------------------------------------------------------------
# bound audits against the oracle


def test_bound_audit_on_tree_is_inapplicable():
    ctx = _ctx(path3(alpha=7))
    cmp = audit_deviation_bound(ctx, 1, "strategy1", [2])
    assert not cmp.preconditions_met
    assert "no biconnected component" in cmp.precondition_notes


def test_bound_audit_rejects_up_edge_for_strategy1():
    ctx = _ctx(directed_ring(7, 29))
    cmp = audit_deviation_bound(ctx, 4, "strategy1", [5])  # (4,5) is 4's up-edge
    assert not cmp.preconditions_met
    assert "no eligible level" in cmp.precondition_notes


def test_bound_audit_dominates_on_directed_ring():
    ctx = _ctx(directed_ring(7, 29))
    cmp = audit_deviation_bound(ctx, 3, "strategy1", [4])  # the out-edge buyer
    assert cmp.preconditions_met
    assert cmp.bound == Fraction(-20)
    assert cmp.exact_delta == Fraction(-20)
    assert cmp.dominates


def test_bound_audit_certificate_mismatch_noted():
    p = directed_ring(7, 29)
    other = verify_equilibrium(path3(alpha=5))
    cmp = audit_deviation_bound(_ctx(p), 3, "strategy1", [4], ne_certificate=other)
    assert "hash mismatch" in cmp.precondition_notes


def test_bound_domination_on_seeded_scaffolds():
    checked = {"strategy1": 0, "strategy2": 0, "strategy3": 0}
    for seed in range(40):
        p = scaffold_profile(seed)
        ctx = build_context(p)
        for kind in checked:
            for u, combo in eligible_sold_selections(ctx, kind, max_sell=2):
                cmp = audit_deviation_bound(ctx, u, kind, combo)
                assert cmp.preconditions_met, cmp.precondition_notes
                assert cmp.dominates, (seed, kind, u, combo, cmp)
                checked[kind] += 1
    assert all(count >= 40 for count in checked.values()), checked


def test_scaffolds_have_high_girth_and_alpha():
    for seed in range(25):
        p = scaffold_profile(seed)
        assert global_girth(p) >= 7
        assert p.alpha > 2 * p.n
    assert scaffold_profile(7) == scaffold_profile(7)


# ---------------------------------------------------------------------------
# structural findings


def test_tree_input_gates_h_rules():
    ctx = _ctx(path3(alpha=7))
    for lemma in ("maxn2", "x2position", "deg2", "obs-x1", "obs-x2",
                  "obs-x2depth", "mainlemma1", "mainlemma2", "degree-sum"):
        finding = audit_structural(ctx, lemma)
        assert not finding.applicable, lemma
        assert finding.holds is None
    # cycle statements hold vacuously on trees
    for lemma in ("mincyclesize", "seven-cycle", "directed-mincycles"):
        finding = audit_structural(ctx, lemma)
        assert finding.applicable and finding.holds, lemma


def test_girth_rule_counterexample_under_restricted_certificate():
    # complete triangle is an equilibrium under single-add (nothing to add),
    # yet its girth violates the price bound
    tri = directed_ring(3, 4)
    certificate = verify_equilibrium(tri, DeviationClass.parse("single-add"))
    assert certificate.is_equilibrium
    finding = audit_structural(_ctx(tri), "mincyclesize", certificate)
    assert finding.applicable and not finding.informational
    assert finding.holds is False
    assert finding.detail["counter_witness"] is not None


def test_girth_rule_informational_pass_on_big_ring():
    finding = audit_structural(_ctx(directed_ring(9, 22)), "mincyclesize")
    assert finding.informational
    assert finding.holds is True  # 9 >= 2*22/9 + 2


def test_girth_rule_witness_outside_largest_component():
    # five-ring is H, but the violating triangle hangs off a bridge
    pairs = [(i, (i + 1) % 5) for i in range(5)] + [(4, 5), (5, 6), (6, 7), (7, 5)]
    finding = audit_structural(_ctx(profile(8, 40, pairs)), "mincyclesize")
    assert finding.holds is False
    assert finding.detail["girth"] == 3
    assert len(finding.detail["counter_witness"]) == 3


def test_directed_mincycles_on_rings():
    good = audit_structural(_ctx(directed_ring(9, 22)), "directed-mincycles")
    assert good.applicable and good.holds
    # one vertex buying both its ring edges breaks directedness
    pairs = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (0, 8)]
    bad = audit_structural(_ctx(profile(9, 22, pairs)), "directed-mincycles")
    assert bad.applicable and bad.holds is False


def test_maxn2_on_figure_gadget():
    finding = audit_structural(_ctx(figure_gadget()), "maxn2")
    assert finding.applicable
    assert finding.holds  # ring subtrees never exceed n/2


def test_obs_rules_on_figure_gadget():
    ctx = _ctx(figure_gadget())
    for lemma in ("obs-x1", "obs-x2", "obs-x2depth"):
        finding = audit_structural(ctx, lemma)
        assert finding.applicable, lemma
        assert finding.informational  # no certificate supplied
        assert finding.holds, lemma


def test_x2position_on_directed_ring():
    ctx = _ctx(directed_ring(7, 29))
    finding = audit_structural(ctx, "x2position")
    assert finding.applicable
    # only the out-edge buyer at depth 3 carries a low level: 3 >= 7//2 - 0
    assert finding.holds
    assert any(row["vertex"] == 3 for row in finding.detail["checked"])


def test_degree_sum_identity_on_rings():
    finding = audit_structural(_ctx(directed_ring(9, 1)), "degree-sum")
    assert finding.applicable  # ring minus one edge spans H
    assert finding.holds
    assert finding.detail["out_edges"] == 1


def test_deg2_rows_on_directed_ring():
    finding = audit_structural(_ctx(directed_ring(9, 1)), "deg2")
    assert finding.applicable
    rows = finding.detail["checked"]
    assert rows, "expected directed deg-2 paths on the ring"
    for row in rows:
        assert row["funnel_size"] <= row["funnel_size_some_path"]


def test_unknown_lemma_rejected():
    with pytest.raises(ValueError):
        audit_structural(_ctx(path3()), "no-such-rule")


# ---------------------------------------------------------------------------
# altpath


def test_altpath_vacuous_on_out_edge():
    ctx = _ctx(figure_gadget())
    finding = audit_altpath(ctx, 5, (5, 6))  # level-0 edge: empty subtree
    assert finding.applicable and finding.holds
    assert finding.detail["margins"] == {}


def test_altpath_level1_down_edge_has_detour():
    ctx = _ctx(figure_gadget())
    finding = audit_altpath(ctx, 4, (4, 5))  # level 1, subtree {5}
    assert finding.applicable and finding.holds
    assert finding.detail["margins"] == {5: 1}  # detour 6 vs allowance 5 + 2


def test_altpath_gated_below_girth_seven():
    ctx = _ctx(directed_ring(6, 13))
    finding = audit_altpath(ctx, 2, (2, 3))
    assert not finding.applicable


# ---------------------------------------------------------------------------
# full audit


def test_audit_full_on_tree_equilibrium():
    p = path3(alpha=7)
    certificate = verify_equilibrium(p)
    report = audit_full(_ctx(p), certificate)
    by_id = {f.lemma_id: f for f in report.findings}
    assert not by_id["maxn2"].applicable
    assert not by_id["degree-sum"].applicable
    assert report.bounds == ()
    assert report.summary["bound_violations"] == 0


def test_audit_full_informational_without_certificate():
    report = audit_full(_ctx(directed_ring(3, 4)))
    assert all(f.informational for f in report.findings if f.lemma_id != "degree-sum")


def test_audit_full_on_scaffold_counts_everything():
    ctx = build_context(scaffold_profile(3))
    report = audit_full(ctx)
    assert report.summary["bounds_checked"] == len(report.bounds)
    assert report.summary["bound_violations"] == 0
    assert not report.skipped
    assert {f.lemma_id for f in report.findings} == {
        "mincyclesize", "seven-cycle", "directed-mincycles", "maxn2", "altpath",
        "x2position", "deg2", "obs-x1", "obs-x2", "obs-x2depth",
        "mainlemma1", "mainlemma2", "degree-sum",
    }


def test_audit_full_reports_skipped_families_on_tiny_budget():
    ctx = build_context(scaffold_profile(3))
    report = audit_full(ctx, max_bound_checks=0)
    assert report.skipped
