from __future__ import annotations

from fractions import Fraction

import pytest

from nodcover.combcover import find_istar, iter_covers
from nodcover.fixtures import fig4_patterns, load_fixture, template_marks
from nodcover.graphword import BRANCH, Graph, Leg, PlacedGraph, c_vertex
from nodcover.ingram import ingram_word
from nodcover.wrapping import (
    Across,
    Away,
    ClassificationImpossible,
    Disconnected,
    DoesNotMeetBranch,
    ReversalPoint,
    Toward,
    WrappingPattern,
    branch_star_trajectory,
    build_complex,
    check_theorems,
    classify,
    count_istar_marks,
    detect_wrapping_patterns,
    find_reversal_points,
    is_wrapping_pattern,
    observation_holds,
    pre_branch_star_segment,
    reversal_rule_violations,
    verify_complex_sync,
)


def _template_path(n, k):
    marks = template_marks(n, k)
    return PlacedGraph.build(n, dict(enumerate(marks)), [(p, p + 1) for p in range(k)])


def test_ingram_legs_are_patterns():
    for n in (2, 3, 4):
        word = ingram_word(n)
        found = detect_wrapping_patterns(word.placed)
        legs = {(word.word.nod.branch,) + leg for leg in word.word.nod.legs}
        assert {p.vertices for p in found} == legs
        assert all(p.k == 2 * n + 2 for p in found)


def test_fig3_marks_form_one_pattern():
    fx = load_fixture("fig3")
    found = detect_wrapping_patterns(fx.placed)
    assert [p.k for p in found] == [16]
    assert found[0].vertices == tuple(range(17))


def test_alternating_path_has_no_pattern():
    assert detect_wrapping_patterns(load_fixture("path2").placed) == []


def test_subpatterns_on_demand():
    pg = _template_path(2, 18)
    assert [p.k for p in detect_wrapping_patterns(pg)] == [18]
    subs = detect_wrapping_patterns(pg, include_subpatterns=True)
    assert sorted(p.k for p in subs) == [6, 6, 6, 12, 12, 18]


def test_is_wrapping_pattern_rejects_wrong_length():
    pg = _template_path(2, 12)
    assert is_wrapping_pattern(pg, tuple(range(13)))
    assert not is_wrapping_pattern(pg, tuple(range(12)))
    assert not is_wrapping_pattern(pg, tuple(range(1, 8)))


def test_fig3_classifies_across():
    fx = load_fixture("fig3")
    (pat,) = detect_wrapping_patterns(fx.placed)
    cls = classify(pat, fx.cover, 3)
    assert isinstance(cls, Across)
    assert (cls.leg1, cls.leg2, cls.j1, cls.j2) == (3, 1, 5, 9)
    assert cls.trajectory.vertices == (4, 5, 6, 7, 8)
    assert cls.trajectory.legs == (3, 2, 1) and cls.trajectory.q == 2


def test_away_and_toward_literally():
    n, k = 2, 6
    pat = WrappingPattern(tuple(range(k + 1)))
    away = {p: Leg(1, p + 2) for p in range(k + 1)}
    assert classify(pat, away, n) == Away(1, 2)
    toward = {p: Leg(2, k + 3 - p) for p in range(k + 1)}
    assert classify(pat, toward, n) == Toward(2, k + 3)


def test_away_from_branch():
    pat = WrappingPattern(tuple(range(7)))
    f = {p: c_vertex(2, p) for p in range(7)}
    assert classify(pat, f, 2) == Away(2, 0)


def test_jump_is_impossible():
    pat = WrappingPattern(tuple(range(7)))
    f = {p: Leg(1, p + 2) for p in range(7)}
    f[4] = Leg(2, 5)
    with pytest.raises(ClassificationImpossible):
        classify(pat, f, 2)


def test_trajectory_needs_distinct_legs():
    f = {0: Leg(1, 1), 1: BRANCH, 2: Leg(1, 1)}
    assert branch_star_trajectory([0, 1, 2], f, 3) is None
    f[2] = Leg(2, 1)
    assert branch_star_trajectory([0, 1, 2], f, 3).legs == (1, 2)
    # q must stay below n
    assert branch_star_trajectory([0, 1, 2], f, 1) is None


def test_fig3_pre_branch_star_segment():
    fx = load_fixture("fig3")
    (pat,) = detect_wrapping_patterns(fx.placed)
    seg = pre_branch_star_segment(pat, fx.cover)
    assert seg == (0, 1, 2, 3)
    assert count_istar_marks(fx.placed, seg, 1) == 1


def test_segment_empty_when_starting_in_branch_star():
    pat = WrappingPattern(tuple(range(9)))
    f = {0: Leg(1, 1), 1: BRANCH}
    f.update({p: Leg(2, p - 1) for p in range(2, 9)})
    assert pre_branch_star_segment(pat, f) == ()


def test_segment_requires_branch():
    pat = WrappingPattern(tuple(range(7)))
    with pytest.raises(DoesNotMeetBranch):
        pre_branch_star_segment(pat, {p: Leg(1, p + 2) for p in range(7)})


def test_observation_on_fig3():
    fx = load_fixture("fig3")
    (pat,) = detect_wrapping_patterns(fx.placed)
    assert observation_holds(pat, fx.cover)


def test_synthetic_start_reversal():
    a = WrappingPattern(tuple(range(7)))
    b = WrappingPattern(tuple(range(100, 107)))
    f = {0: Leg(1, 3), 1: Leg(1, 2), 2: Leg(1, 1), 3: BRANCH}
    f.update({p: Leg(2, p - 3) for p in range(4, 7)})
    f.update({100 + p: Leg(1, 3 + p) for p in range(7)})
    assert find_reversal_points([a, b], f) == [ReversalPoint(Leg(1, 3), "start", (0, 1))]
    assert reversal_rule_violations([a, b], f, find_reversal_points([a, b], f)) == []


def test_identical_patterns_have_no_reversal():
    a = WrappingPattern(tuple(range(7)))
    f = {p: Leg(1, p + 2) for p in range(7)}
    assert find_reversal_points([a, a], f) == []


def _fig4():
    fx = load_fixture("fig4")
    pats = [WrappingPattern(v) for v in fig4_patterns().values()]
    return fx, pats


def test_fig4_classes():
    fx, pats = _fig4()
    got = [classify(p, fx.cover, 4) for p in pats]
    assert got[0] == Away(1, 11)
    assert [(c.leg1, c.leg2, c.j1, c.j2) for c in got[1:]] == [(1, 2, 11, 9), (3, 2, 11, 9), (3, 4, 11, 19)]


def test_fig4_start_reversal_at_c_1_11():
    fx, pats = _fig4()
    points = find_reversal_points(pats, fx.cover)
    assert points == [ReversalPoint(Leg(1, 11), "start", (0, 1))]
    assert reversal_rule_violations(pats, fx.cover, points) == []


def test_fig4_split_gives_two_connected_subcomplexes():
    fx, pats = _fig4()
    cx = build_complex(pats, fx.cover)
    assert sorted(cx.index_graph.edges) == [(0, 1), (1, 2), (2, 3)]
    at = Leg(1, 11)
    outward = [i for i, p in enumerate(pats) if any(fx.cover[v] == Leg(1, j) for v in p.vertices for j in (12, 13))]
    inward = [i for i in range(len(pats)) if i not in outward]
    assert outward == [0] and inward == [1, 2, 3]
    assert build_complex([pats[i] for i in inward], fx.cover).index_graph.is_connected()
    report = verify_complex_sync(cx, fx.cover, find_istar(fx.placed, fx.cover), fx.placed)
    assert report.ok, report.violations
    assert at == find_reversal_points(pats, fx.cover)[0].at


def test_fig4_theorems_hold():
    fx = load_fixture("fig4")
    assert check_theorems(fx.placed, fx.cover).violations == []


def test_single_pattern_complex():
    pat = WrappingPattern(tuple(range(7)))
    f = {p: Leg(1, p + 2) for p in range(7)}
    cx = build_complex([pat], f)
    assert len(cx.index_graph.vertices) == 1
    assert verify_complex_sync(cx, f, 0, _template_path(2, 6)).ok


def test_disconnected_complex():
    a = WrappingPattern(tuple(range(7)))
    b = WrappingPattern(tuple(range(100, 107)))
    f = {p: Leg(1, p + 2) for p in range(7)}
    f.update({100 + p: Leg(2, p + 2) for p in range(7)})
    with pytest.raises(Disconnected):
        build_complex([a, b], f)
    with pytest.raises(Disconnected):
        build_complex([], f)


def test_ingram_legs_form_one_complex_under_witnesses():
    for n in (2, 3):
        pg = ingram_word(n).placed
        pats = detect_wrapping_patterns(pg)
        seen = 0
        for cover in iter_covers(pg, Fraction(2), limit=30):
            cx = build_complex(pats, cover.f)
            assert isinstance(cx.index_graph, Graph) and len(cx.index_graph.vertices) == n + 1
            report = check_theorems(pg, cover.f)
            assert report.violations == [], report.violations
            seen += 1
        assert seen > 0


def test_positional_sync_flags_shifted_images():
    # two patterns sharing w_0 but offset by one step violate positional sync
    pg = _template_path(2, 6)
    a = WrappingPattern(tuple(range(7)))
    b = WrappingPattern(tuple(range(100, 107)))
    f = {p: Leg(1, p + 2) for p in range(7)}
    f.update({100 + p: Leg(1, p + 2) for p in range(7)})
    f[106] = Leg(1, 7)
    cx = build_complex([a, b], f)
    assert verify_complex_sync(cx, f, 0, pg).positional
