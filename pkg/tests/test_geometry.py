from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracles import placed_trees
from nodcover.combcover import check_cover, search_cover
from nodcover.expansion import ExpansionWord, chi_expand
from nodcover.fixtures import load_fixture
from nodcover.graphword import BRANCH, ORIGIN, Graph, Leg, PlacedGraph, Ray, as_nod
from nodcover.geometry import (
    REL_TOL,
    ArcCover,
    Complex1,
    CTrack,
    Element,
    EpsilonTooLarge,
    GammaSpace,
    GeometryError,
    InvalidGammaSpace,
    MeshTooSmall,
    NotATree,
    Piece,
    PremiseViolated,
    alternation_map,
    build_T0,
    composed_distance,
    epsilon_bound,
    expand_via_geometry,
    extract_comb_cover,
    generate_cover,
    layout_embedding,
    nerve,
    render_svg,
    scene_from_doc,
    smallness_margin,
)
from nodcover.ingram import ingram_word, star

Q = Fraction


def close(p, q, tol=1e-12):
    return math.dist(p, q) <= tol


# -- Gamma-spaces ---------------------------------------------------------------------------


def test_T0_tips():
    t = build_T0(3)
    assert close(t.legs[0][-1], (2.0, 0.0))
    assert close(t.legs[3][-1], (-2.0, 0.0))
    assert t.branch == (0.0, 0.0)
    assert close(t.mark(Ray(0, Q(0))), (1.0, 0.0))
    assert close(t.mark(Ray(0, Q(1))), (2.0, 0.0))
    assert t.mark(ORIGIN) == (0.0, 0.0)


def test_T0_passes_checks():
    for n in (2, 3, 4):
        assert build_T0(n).check() == []


def test_improper_order_is_flagged():
    t = build_T0(3)
    legs = (t.legs[0], t.legs[2], t.legs[1], t.legs[3])
    assert any("circular order" in m for m in GammaSpace(3, t.branch, legs).check())


def test_curved_tip_is_flagged():
    t = build_T0(2)
    bent = ((0.0, 0.0), (1.2, 0.0), (2.0, 0.3))
    assert any("not straight" in m for m in GammaSpace(2, t.branch, (bent,) + t.legs[1:]).check())


def test_short_leg_is_flagged():
    t = build_T0(2)
    short = ((0.0, 0.0), (0.9, 0.0))
    assert any("length" in m for m in GammaSpace(2, t.branch, (short,) + t.legs[1:]).check())


def test_wrong_leg_count():
    with pytest.raises(InvalidGammaSpace):
        GammaSpace(3, (0.0, 0.0), build_T0(2).legs)


# -- layout ---------------------------------------------------------------------------------


def test_single_edge():
    pg = PlacedGraph.build(2, {0: ORIGIN, 1: Ray(0, Q(1))}, [(0, 1)])
    emb = layout_embedding(pg, build_T0(2), 0.05)
    assert emb.check() == []
    (strand,) = emb.strands.values()
    assert strand.leg == 0
    assert emb.sup_distance() < 0.05


def test_epsilon_too_large():
    t = build_T0(2)
    with pytest.raises(EpsilonTooLarge):
        layout_embedding(star(2), t, epsilon_bound(t))
    with pytest.raises(EpsilonTooLarge):
        layout_embedding(star(2), t, 0.0)


def test_not_a_tree():
    pg = PlacedGraph.build(
        2, {0: ORIGIN, 1: Ray(0, Q(1)), 2: ORIGIN, 3: Ray(1, Q(1))}, [(0, 1), (1, 2), (2, 3), (3, 0)]
    )
    with pytest.raises(NotATree):
        layout_embedding(pg, build_T0(2), 0.05)


def test_ingram_n3_layout_and_image():
    t = build_T0(3)
    emb = layout_embedding(ingram_word(3).placed, t, 0.05)
    assert emb.check() == []
    assert emb.sup_distance() < 0.05 * (1 + REL_TOL)
    image = emb.image_gamma_space()
    assert image.check() == []
    assert emb.tip_alignment(image) == []
    # every tip projects onto leg 0's tip
    for i in range(4):
        for t_ in (0.0, 0.5, 1.0):
            got = image.project_to_parent(i, image.length(i) - 1 + t_)
            assert close(got, t.mark(Ray(0, Q(t_).limit_denominator())), 1e-9)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.sampled_from([pg for pg in placed_trees(6, 2, [0, Q(1, 2), 1])]), st.sampled_from([0.02, 0.05, 0.2]))
def test_random_tree_layouts(pg, eps):
    emb = layout_embedding(pg, build_T0(2), eps)
    assert emb.check() == []


def _two_level(word_pg, graph, eps1=0.05):
    t = build_T0(word_pg.n)
    first = layout_embedding(word_pg, t, eps1)
    image = first.image_gamma_space()
    eps2 = epsilon_bound(image) / 2
    second = layout_embedding(graph, image, eps2)
    return first, second, eps1, eps2


def test_two_level_composition():
    first, second, e1, e2 = _two_level(ingram_word(3).placed, star(3))
    assert second.check() == []
    assert composed_distance(second) < (e1 + e2) * (1 + REL_TOL)


def test_fig5_geometric_expansion():
    word_pg = load_fixture("fig5-word").placed
    edge = load_fixture("fig5-edge").placed
    first, second, _, _ = _two_level(word_pg, edge)
    word = ExpansionWord.from_placed_graph(word_pg)
    geo = expand_via_geometry(first, second, word)
    assert geo.marks[(0, 1)] == (
        Ray(3, Q(1)), ORIGIN, Ray(2, Q(1, 2)), ORIGIN, Ray(1, Q(1)), ORIGIN, Ray(0, Q(1, 3)),
    )
    assert len(geo.chains[(0, 1)]) == 7


def test_identity_target_positions():
    # star into the word's image: inserted vertices land next to the word's own vertices
    word_pg = ingram_word(2).placed
    first, second, _, e2 = _two_level(word_pg, star(2))
    word = ExpansionWord.from_placed_graph(word_pg)
    geo = expand_via_geometry(first, second, word)
    nod = word.nod
    for (u, v), pts in geo.chains.items():
        leg = second.strands[(u, v)].leg
        for p in range(1, len(pts) - 1):
            assert math.dist(pts[p], first.positions[nod.vertex_at(leg + 1, p)]) < e2


@settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.sampled_from([pg for pg in placed_trees(5, 2, [0, Q(1, 2), 1]) if pg.graph.edges]))
def test_geometric_expansion_matches_chi_expand(pg):
    word = ingram_word(2).word
    first, second, e1, e2 = _two_level(word.word, pg)
    assert second.check() == []
    geo = expand_via_geometry(first, second, word)
    exp = chi_expand(pg, word)
    for e, marks in geo.marks.items():
        assert [exp.expanded.omega[z] for z in exp.chains[e]] == list(marks)
    assert composed_distance(second) < (e1 + e2) * (1 + REL_TOL)


# -- covers ---------------------------------------------------------------------------------


def _segment_complex():
    return Complex1({0: (0.0, 0.0), 1: (4.0, 0.0)}, [(0, 1, tuple((float(x), 0.0) for x in range(5)))])


def test_path_cover_with_four_elements():
    cx = _segment_complex()
    e = Q(1, 4)
    elements = [
        Element((Piece(0, Q(0), 1 + e, lo_open=False),), frozenset([0])),
        Element((Piece(0, 1 - e, 2 + e),)),
        Element((Piece(0, 2 - e, 3 + e),)),
        Element((Piece(0, 3 - e, Q(4), hi_open=False),), frozenset([1])),
    ]
    cover = ArcCover(cx, elements)
    assert sorted(nerve(cover).edges) == [(0, 1), (1, 2), (2, 3)]
    assert cover.mesh == pytest.approx(1.5)


def test_triple_intersection_rejected():
    cx = _segment_complex()
    elements = [
        Element((Piece(0, Q(0), Q(3), lo_open=False),), frozenset([0])),
        Element((Piece(0, Q(1), Q(4), hi_open=False),), frozenset([1])),
        Element((Piece(0, Q(2), Q(5, 2)),)),
    ]
    with pytest.raises(GeometryError, match="common point"):
        ArcCover(cx, elements)


def test_gap_rejected():
    cx = _segment_complex()
    elements = [
        Element((Piece(0, Q(0), Q(2), lo_open=False),), frozenset([0])),
        Element((Piece(0, Q(2), Q(4), hi_open=False),), frozenset([1])),
    ]
    with pytest.raises(GeometryError, match="not covered"):
        ArcCover(cx, elements)


def test_T0_cover_nerve_is_4od():
    cover = generate_cover(Complex1.from_gamma_space(build_T0(3)), 0.5)
    nod = as_nod(nerve(cover))
    assert nod.m == 4
    assert cover.mesh < 0.5


def test_generated_nerve_matches_leg_count():
    for n in (2, 3, 4):
        emb = layout_embedding(ingram_word(n).placed, build_T0(n), 0.05)
        cover = generate_cover(emb.complex(), 0.1)
        assert as_nod(nerve(cover)).m == n + 1
        assert cover.mesh < 0.1


def test_mesh_floor():
    cx = Complex1.from_gamma_space(build_T0(2))
    with pytest.raises(MeshTooSmall):
        generate_cover(cx, 1e-10)
    with pytest.raises(MeshTooSmall):
        generate_cover(cx, 1e-5)


# -- extraction ------------------------------------------------------------------------------


def _path_pg():
    marks = [Ray(0, Q(1)), ORIGIN, Ray(0, Q(1, 2)), ORIGIN, Ray(0, Q(1))]
    return PlacedGraph.build(2, dict(enumerate(marks)), [(p, p + 1) for p in range(4)])


def test_extract_on_path():
    eps1, mesh = 0.05, 0.1
    delta = Q(1, 5)  # 2*eps1 + mesh, and 4*delta is below the tip clearance of T0
    emb = layout_embedding(_path_pg(), build_T0(2), eps1)
    cover = generate_cover(emb.complex(), mesh)
    assert 2 * eps1 + cover.mesh <= float(delta)
    assert smallness_margin(build_T0(2)) > 4 * float(delta)
    out = extract_comb_cover(emb, cover, delta)
    assert check_cover(emb.placed, out.f, delta) == []
    # the nerve is an arc, so the images run along one arc of C through Branch
    legs = {c.ell for c in out.f.values() if c != BRANCH}
    assert len(legs) <= 2


def test_alternation_map_counts():
    # nerve: a path of five elements; the arc's middle element is the branch
    nod = as_nod(Graph.from_edges([(p, p + 1) for p in range(4)]))
    assert nod.address[nod.branch] == (0, 0)
    pg = PlacedGraph.build(2, {10: Ray(0, Q(1)), 11: ORIGIN, 12: Ray(0, Q(1, 2))}, [(10, 11), (11, 12)])
    ends = [nod.vertex_at(1, 1), nod.vertex_at(2, 1), nod.vertex_at(2, 3)]
    holder = dict(zip((10, 11, 12), ends))
    g = {ends[0]: 0, ends[1]: -1, ends[2]: 0, nod.branch: 0}
    f = alternation_map(pg, nod, holder, g)
    assert f[10] == BRANCH  # same label as the branch element: no alternation
    assert f[11] == Leg(2, 1)
    assert f[12] == Leg(2, 2)
    # one element per vertex with constant labels gives only A = 0
    g_flat = {k: 0 for k in g}
    assert set(alternation_map(pg, nod, holder, g_flat).values()) == {BRANCH}


def test_premise_checks():
    emb = layout_embedding(_path_pg(), build_T0(2), 0.05)
    cover = generate_cover(emb.complex(), 0.1)
    with pytest.raises(PremiseViolated, match="exceeds"):
        extract_comb_cover(emb, cover, Q(1, 10))
    with pytest.raises(PremiseViolated, match="4\\*delta"):
        extract_comb_cover(emb, generate_cover(emb.complex(), 0.01), Q(1, 2))


def test_ingram_n2_extraction_fails():
    pg = ingram_word(2).placed
    delta = Q(1, 5)
    assert search_cover(pg, delta).verdict == "Unsat"
    emb = layout_embedding(pg, build_T0(2), 0.05)
    cover = generate_cover(emb.complex(), float(delta) - 2 * 0.05)
    with pytest.raises(PremiseViolated, match="od"):
        extract_comb_cover(emb, cover, delta)


# -- figures ---------------------------------------------------------------------------------


def _parse(svg):
    return ET.fromstring(svg.encode())


def test_render_T0_has_dotted_tips():
    svg = render_svg([build_T0(3)])
    _parse(svg)
    assert svg.count("stroke-dasharray") == 4


def test_render_is_deterministic():
    objs, style = scene_from_doc({"items": [{"type": "embedding", "fixture": "ingram2", "cover_mesh": 0.2}]})
    assert render_svg(objs, style) == render_svg(objs, style)


def test_render_empty_scene():
    root = _parse(render_svg([]))
    assert root.tag.endswith("svg")


def test_fig3_track():
    fx = load_fixture("fig3")
    track = CTrack(3, tuple(fx.cover[v] for v in sorted(fx.cover)), "fig3")
    svg = render_svg([track])
    _parse(svg)
    objs, _ = scene_from_doc({"items": [{"type": "track", "fixture": "fig3"}]})
    assert objs == [track]


def test_scene_rejects_unknown_items():
    with pytest.raises(ValueError):
        scene_from_doc({"items": [{"type": "teapot"}]})
    with pytest.raises(TypeError):
        render_svg([object()])
