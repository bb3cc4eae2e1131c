"""Piecewise-linear realizations of placed graphs near Gamma-spaces.

Coordinates are floats.  Planarity tests convert the float coordinates to exact
rationals before taking orientations, and cover combinatorics (overlaps, nerve,
chains) live in rational polyline parameters, so rounding cannot flip them.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .combcover import CombCover, check_cover
from .graphword import (
    BRANCH,
    Graph,
    Marking,
    NotAnOd,
    Origin,
    PlacedGraph,
    Ray,
    as_nod,
    c_vertex,
    mark_class,
)

log = logging.getLogger(__name__)

Point = tuple[float, float]
REL_TOL = 1e-9


class GeometryError(ValueError):
    pass


class EpsilonTooLarge(GeometryError):
    pass


class NotATree(GeometryError):
    pass


class RoutingInfeasible(GeometryError):
    pass


class InvalidGammaSpace(GeometryError):
    pass


class MeshTooSmall(GeometryError):
    pass


class PremiseViolated(GeometryError):
    pass


class ProjectionNotMonotone(AssertionError):
    pass


# -- polylines -------------------------------------------------------------------------------


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _norm(a: Point) -> float:
    return math.hypot(a[0], a[1])


def _lerp(a: Point, b: Point, u: float) -> Point:
    return (a[0] + (b[0] - a[0]) * u, a[1] + (b[1] - a[1]) * u)


def cumulative(poly: Sequence[Point]) -> list[float]:
    out = [0.0]
    for a, b in zip(poly, poly[1:]):
        out.append(out[-1] + _norm(_sub(b, a)))
    return out


def point_at(poly: Sequence[Point], cum: Sequence[float], s: float) -> Point:
    """Point at arclength s, clamped to the polyline."""
    if s <= 0:
        return poly[0]
    if s >= cum[-1]:
        return poly[-1]
    k = bisect.bisect_right(cum, s) - 1
    seg = cum[k + 1] - cum[k]
    return _lerp(poly[k], poly[k + 1], (s - cum[k]) / seg if seg else 0.0)


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ab = _sub(b, a)
    denom = ab[0] ** 2 + ab[1] ** 2
    u = 0.0 if denom == 0 else max(0.0, min(1.0, ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / denom))
    return _norm(_sub(p, _lerp(a, b, u)))


def segment_distance(a: Point, b: Point, c: Point, d: Point) -> float:
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    )


def polyline_distance(p: Sequence[Point], q: Sequence[Point]) -> float:
    return min(segment_distance(a, b, c, d) for a, b in zip(p, p[1:]) for c, d in zip(q, q[1:]))


# -- exact predicates ----------------------------------------------------------------------------


def _q(p: Point) -> tuple[Fraction, Fraction]:
    return (Fraction(p[0]), Fraction(p[1]))


def orientation(a: Point, b: Point, c: Point) -> int:
    """Sign of the cross product (b - a) x (c - a), computed exactly."""
    (ax, ay), (bx, by), (cx, cy) = _q(a), _q(b), _q(c)
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (v > 0) - (v < 0)


def _on_segment(a: Point, b: Point, p: Point) -> bool:
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Closed-segment intersection, exact on the float inputs."""
    o1, o2, o3, o4 = orientation(a, b, c), orientation(a, b, d), orientation(c, d, a), orientation(c, d, b)
    if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
        return True
    if o1 == 0 and _on_segment(a, b, c):
        return True
    if o2 == 0 and _on_segment(a, b, d):
        return True
    if o3 == 0 and _on_segment(c, d, a):
        return True
    if o4 == 0 and _on_segment(c, d, b):
        return True
    if o1 != o2 and o3 != o4:
        return True
    return False


def _touch_only_at(a: Point, b: Point, c: Point, d: Point, shared: Point) -> bool:
    """Segments ab and cd share endpoint `shared`; true when that is their only common point."""
    p = b if a == shared else a
    q = d if c == shared else c
    if orientation(shared, p, q) != 0:
        return True
    # collinear: they overlap unless they leave the shared point in opposite directions
    v, w = _sub(p, shared), _sub(q, shared)
    return v[0] * w[0] + v[1] * w[1] < 0


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point
    owner: object
    index: int


def crossing_violations(
    segments: Sequence[Segment], allowed_points: set[Point], limit: int = 20
) -> list[str]:
    """Pairs of segments meeting anywhere other than an allowed shared endpoint.

    Consecutive segments of one owner may share their joint; segments of
    different owners may share an endpoint only if it is in allowed_points.
    """
    if not segments:
        return []
    arr = np.array([[s.a[0], s.a[1], s.b[0], s.b[1]] for s in segments])
    lo = np.minimum(arr[:, :2], arr[:, 2:])
    hi = np.maximum(arr[:, :2], arr[:, 2:])
    out = []
    for i in range(len(segments)):
        cand = np.nonzero(
            (lo[i + 1 :, 0] <= hi[i, 0])
            & (hi[i + 1 :, 0] >= lo[i, 0])
            & (lo[i + 1 :, 1] <= hi[i, 1])
            & (hi[i + 1 :, 1] >= lo[i, 1])
        )[0]
        s = segments[i]
        for j in cand + i + 1:
            t = segments[int(j)]
            if not segments_intersect(s.a, s.b, t.a, t.b):
                continue
            shared = {s.a, s.b} & {t.a, t.b}
            ok = False
            if len(shared) == 1:
                (p,) = shared
                joint = s.owner == t.owner and abs(s.index - t.index) == 1
                if joint or p in allowed_points:
                    ok = _touch_only_at(s.a, s.b, t.a, t.b, p)
            if not ok:
                out.append(f"{s.owner}#{s.index} meets {t.owner}#{t.index}")
                if len(out) >= limit:
                    return out
    return out


# -- Gamma-spaces ------------------------------------------------------------------------------


@dataclass
class GammaSpace:
    """An (n+1)-od of polylines from a common branch point, with the tip marking.

    Ray(i, t) marks the point at arclength L_i - 1 + t on leg i; Origin marks the
    branch.  For images of layouts, `parent` records for each polyline vertex the
    (leg, arclength) it projects to in `parent_space`, and `word_positions` the
    arclength of each word vertex along its leg.
    """

    n: int
    branch: Point
    legs: tuple[tuple[Point, ...], ...]
    parent: tuple[tuple[tuple[int, float], ...], ...] | None = None
    parent_space: GammaSpace | None = None
    word_positions: tuple[tuple[float, ...], ...] | None = None
    _cum: list[list[float]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if len(self.legs) != self.n + 1:
            raise InvalidGammaSpace(f"expected {self.n + 1} legs, got {len(self.legs)}")
        for leg in self.legs:
            if len(leg) < 2 or leg[0] != self.branch:
                raise InvalidGammaSpace("every leg must start at the branch and have a segment")
        self._cum = [cumulative(leg) for leg in self.legs]

    def length(self, i: int) -> float:
        return self._cum[i][-1]

    def cum(self, i: int) -> list[float]:
        return self._cum[i]

    def leg_point(self, i: int, s: float) -> Point:
        return point_at(self.legs[i], self._cum[i], s)

    def height(self, mark: Marking) -> float:
        """Arclength of the marked point along its leg (0 for Origin)."""
        if isinstance(mark, Origin):
            return 0.0
        return self.length(mark.leg) - 1 + float(mark.t)

    def mark(self, mark: Marking) -> Point:
        if isinstance(mark, Origin):
            return self.branch
        return self.leg_point(mark.leg, self.height(mark))

    def direction(self, i: int) -> Point:
        a, b = self.legs[i][0], self.legs[i][1]
        d = _sub(b, a)
        length = _norm(d)
        return (d[0] / length, d[1] / length)

    def ccw_order(self) -> list[int]:
        """Legs sorted by the angle of their first segment."""
        return sorted(range(self.n + 1), key=lambda i: math.atan2(self.direction(i)[1], self.direction(i)[0]))

    def to_parent(self, i: int, s: float) -> tuple[int, float]:
        """(leg, arclength) in the parent space of the point at arclength s on leg i."""
        if self.parent is None:
            raise GeometryError("this Gamma-space has no parent projection")
        cum, par = self._cum[i], self.parent[i]
        s = min(max(s, 0.0), cum[-1])
        k = min(bisect.bisect_right(cum, s) - 1, len(cum) - 2)
        seg = cum[k + 1] - cum[k]
        u = (s - cum[k]) / seg if seg else 0.0
        (la, sa), (lb, sb) = par[k], par[k + 1]
        leg = lb if sa == 0 else la
        return leg, sa + (sb - sa) * u

    def project_to_parent(self, i: int, s: float) -> Point:
        leg, sigma = self.to_parent(i, s)
        return self.parent_space.leg_point(leg, sigma)

    def check(self) -> list[str]:
        out = []
        order = self.ccw_order()
        k = order.index(0)
        rotated = order[k:] + order[:k]
        proper = list(range(self.n + 1))
        if rotated != proper and rotated != [0] + proper[:0:-1]:
            out.append(f"legs are not in proper circular order: {order}")
        for i in range(self.n + 1):
            length = self.length(i)
            if length <= 1 + REL_TOL:
                out.append(f"leg {i} has length {length} <= 1, tip would contain the branch")
                continue
            start = self.leg_point(i, length - 1)
            end = self.legs[i][-1]
            cum = self._cum[i]
            for p, s in zip(self.legs[i], cum):
                if s > length - 1 and point_segment_distance(p, start, end) > REL_TOL * max(1.0, length):
                    out.append(f"tip of leg {i} is not straight")
                    break
        segments = [
            Segment(a, b, f"leg{i}", k)
            for i, leg in enumerate(self.legs)
            for k, (a, b) in enumerate(zip(leg, leg[1:]))
        ]
        out.extend(crossing_violations(segments, {self.branch}))
        return out


def build_T0(n: int) -> GammaSpace:
    if n < 2:
        raise ValueError("n must be at least 2")
    legs = []
    for i in range(n + 1):
        angle = i * math.pi / n
        legs.append(((0.0, 0.0), (2 * math.cos(angle), 2 * math.sin(angle))))
    return GammaSpace(n, (0.0, 0.0), tuple(legs))


# -- embeddings ---------------------------------------------------------------------------------


@dataclass
class Strand:
    """Routed edge from its Origin vertex to its ray vertex, with target arclengths."""

    edge: tuple[int, int]
    leg: int
    points: list[Point]
    sigma: list[float]


@dataclass
class PLEmbedding:
    placed: PlacedGraph
    target: GammaSpace
    epsilon: float
    positions: dict[int, Point]
    strands: dict[tuple[int, int], Strand]

    def project(self, edge: tuple[int, int], k: int) -> Point:
        s = self.strands[edge]
        return self.target.leg_point(s.leg, s.sigma[k])

    def sup_distance(self) -> float:
        """Exact for piecewise-affine data: both maps are affine between stored vertices."""
        best = 0.0
        for s in self.strands.values():
            for p, sig in zip(s.points, s.sigma):
                best = max(best, _norm(_sub(p, self.target.leg_point(s.leg, sig))))
        return best

    def segments(self) -> list[Segment]:
        return [
            Segment(a, b, s.edge, k)
            for s in self.strands.values()
            for k, (a, b) in enumerate(zip(s.points, s.points[1:]))
        ]

    def check(self) -> list[str]:
        out = []
        pg, tgt = self.placed, self.target
        for v, p in self.positions.items():
            for s in self.strands.values():
                if v in s.edge:
                    k = 0 if v == s.edge[0] else -1
                    want = tgt.mark(pg.omega[v])
                    got = tgt.leg_point(s.leg, s.sigma[k])
                    if _norm(_sub(want, got)) > REL_TOL * max(1.0, tgt.length(s.leg)):
                        out.append(f"vertex {v} projects to {got}, expected {want}")
                    if s.points[k] != p:
                        out.append(f"strand {s.edge} does not end at vertex {v}")
        for s in self.strands.values():
            if any(b <= a for a, b in zip(s.sigma, s.sigma[1:])):
                out.append(f"projection along {s.edge} is not strictly monotone")
            if s.sigma[0] != 0.0:
                out.append(f"strand {s.edge} does not start over the branch")
            want = tgt.height(pg.omega[s.edge[1]])
            if abs(s.sigma[-1] - want) > REL_TOL * max(1.0, want):
                out.append(f"strand {s.edge} ends at arclength {s.sigma[-1]}, expected {want}")
        d = self.sup_distance()
        if not d < self.epsilon:
            out.append(f"sup distance {d} is not below epsilon {self.epsilon}")
        out.extend(crossing_violations(self.segments(), set(self.positions.values())))
        return out

    def complex(self) -> Complex1:
        return Complex1(
            dict(self.positions),
            [(s.edge[0], s.edge[1], tuple(s.points)) for s in self.strands.values()],
        )

    def image_gamma_space(self) -> GammaSpace:
        """The image as a Gamma-space; legs follow the word's canonical leg order."""
        pg = self.placed
        nod = as_nod(pg.graph)
        if nod.m != pg.n + 1:
            raise InvalidGammaSpace(f"image has {nod.m} legs, expected {pg.n + 1}")
        legs, parents, words = [], [], []
        for leg in nod.legs:
            walk = [nod.branch] + list(leg)
            pts, par, wpos = [self.positions[nod.branch]], [], [0.0]
            for x, y in zip(walk, walk[1:]):
                s = self.strands.get((x, y)) or self.strands[(y, x)]
                seq = list(zip(s.points, s.sigma))
                if s.edge[0] != x:
                    seq.reverse()
                if not par:
                    par.append((s.leg, seq[0][1]))
                for p, sig in seq[1:]:
                    pts.append(p)
                    par.append((s.leg, sig))
                wpos.append(None)
            legs.append(tuple(pts))
            parents.append(tuple(par))
            cum = cumulative(pts)
            # word vertex p sits at the polyline vertex equal to its position
            marks, k = [0.0], 0
            for v in leg:
                target = self.positions[v]
                k = pts.index(target, k + 1)
                marks.append(cum[k])
            words.append(tuple(marks))
        return GammaSpace(pg.n, self.positions[nod.branch], tuple(legs), tuple(parents), self.target, tuple(words))

    def tip_alignment(self, image: GammaSpace, samples: int = 5) -> list[str]:
        """pi(m_image(b(i, t))) = m_target(b(i(e), t)) on the tip of each leg."""
        out = []
        nod = as_nod(self.placed.graph)
        for i, leg in enumerate(nod.legs):
            end_leg = self.placed.omega[leg[-1]].leg
            for k in range(samples + 1):
                t = k / samples
                got = image.project_to_parent(i, image.length(i) - 1 + t)
                want = self.target.mark(Ray(end_leg, Fraction(t)))
                if _norm(_sub(got, want)) > REL_TOL * 10:
                    out.append(f"tip of leg {i} at t={t} projects to {got}, expected {want}")
        return out


# -- routing --------------------------------------------------------------------------------


class _Order:
    """Lane order of strands on each target leg, with incremental admissibility checks."""

    def __init__(self, pg: PlacedGraph, ccw: list[int], heights: Mapping[int, float]):
        self.pg = pg
        self.ccw = ccw
        self.block = {leg: k for k, leg in enumerate(ccw)}
        self.lists: dict[int, list[tuple[int, int]]] = {leg: [] for leg in ccw}
        self.heights = heights
        self.o_of: dict[tuple[int, int], int] = {}
        self.r_of: dict[tuple[int, int], int] = {}

    def leg_of(self, e: tuple[int, int]) -> int:
        return self.pg.omega[e[1]].leg

    def global_positions(self) -> dict[tuple[int, int], int]:
        pos, k = {}, 0
        for leg in self.ccw:
            for e in self.lists[leg]:
                pos[e] = k
                k += 1
        return pos

    def _ok_origin(self, u: int) -> bool:
        pos = self.global_positions()
        groups: dict[int, list[int]] = {}
        for e, p in pos.items():
            groups.setdefault(e[0], []).append(p)
        mine = sorted(groups[u])
        for w, ps in groups.items():
            if w == u:
                continue
            gaps = {bisect.bisect_left(mine, p) % len(mine) for p in ps}
            if len(gaps) > 1:
                return False
        return True

    def _ok_ray(self, leg: int, v: int) -> bool:
        order = self.lists[leg]
        groups: dict[int, list[int]] = {}
        for k, e in enumerate(order):
            groups.setdefault(e[1], []).append(k)
        mine = groups[v]
        for w, ps in groups.items():
            if w == v:
                continue
            rel = _nesting(mine, ps)
            if rel is None:
                return False
            # "inner": w sits inside v's span; "outer": v sits inside w's span
            if rel == "inner" and self.heights[w] > self.heights[v]:
                return False
            if rel == "outer" and self.heights[v] > self.heights[w]:
                return False
        return True

    def insert(self, e: tuple[int, int], k: int) -> bool:
        self.lists[self.leg_of(e)].insert(k, e)
        if self._ok_origin(e[0]) and self._ok_ray(self.leg_of(e), e[1]):
            return True
        self.lists[self.leg_of(e)].pop(k)
        return False

    def remove(self, e: tuple[int, int]) -> None:
        self.lists[self.leg_of(e)].remove(e)

    def candidates(self, e: tuple[int, int], anchor: int) -> list[int]:
        """Gaps on e's leg, nearest to the anchor vertex's strands first, counter-clockwise first."""
        leg = self.leg_of(e)
        order = self.lists[leg]
        gaps = list(range(len(order) + 1))
        pos = self.global_positions()
        base = sum(len(self.lists[x]) for x in self.ccw[: self.block[leg]])
        total = max(len(pos), 1)
        anchors = [p for f, p in pos.items() if anchor in f]
        if not anchors:
            return gaps

        def key(g: int) -> tuple:
            gp = base + g  # strand at this gap would sit just before global index gp
            best = None
            for a in anchors:
                ccw = (gp - a - 1) % (total + 1)
                cw = (a - gp) % (total + 1)
                cand = min((ccw, 0), (cw, 1))
                best = cand if best is None else min(best, cand)
            return best

        return sorted(gaps, key=key)


def _nesting(a: list[int], b: list[int]) -> str | None:
    """Relation of b to a on a line: 'apart', 'inner' (b inside a gap of a), 'outer' (a inside b)."""
    a, b = sorted(a), sorted(b)
    gaps_b = {bisect.bisect_left(a, p) for p in b}
    if len(gaps_b) == 1:
        g = gaps_b.pop()
        return "inner" if 0 < g < len(a) else "apart"
    gaps_a = {bisect.bisect_left(b, p) for p in a}
    if len(gaps_a) == 1:
        g = gaps_a.pop()
        return "outer" if 0 < g < len(b) else "apart"
    return None


def _edge_order(pg: PlacedGraph, root: int) -> list[tuple[tuple[int, int], int]]:
    """DFS over edges from root; each edge with the already-reached endpoint it hangs from."""
    out, seen = [], {root}
    adj = pg.graph.adjacency
    visited_edges = set()

    def orient(a: int, b: int) -> tuple[int, int]:
        return (a, b) if isinstance(pg.omega[a], Origin) else (b, a)

    def dfs(x: int) -> None:
        for y in sorted(adj[x]):
            e = orient(x, y)
            if e in visited_edges:
                continue
            visited_edges.add(e)
            out.append((e, x))
            if y not in seen:
                seen.add(y)
                dfs(y)

    dfs(root)
    return out


def _route(pg: PlacedGraph, target: GammaSpace, heights: Mapping[int, float], budget: int) -> _Order:
    nod_root = None
    try:
        nod_root = as_nod(pg.graph).branch
    except (NotAnOd, ValueError):
        nod_root = min(pg.graph.vertices)
    edges = _edge_order(pg, nod_root)
    order = _Order(pg, target.ccw_order(), heights)
    steps = 0

    def rec(k: int) -> bool:
        nonlocal steps
        if k == len(edges):
            return True
        e, anchor = edges[k]
        for gap in order.candidates(e, anchor):
            steps += 1
            if steps > budget:
                raise RoutingInfeasible(f"lane assignment exceeded {budget} insertion attempts")
            if order.insert(e, gap):
                if rec(k + 1):
                    return True
                order.remove(e)
        return False

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * len(edges) + 100))
    try:
        if not rec(0):
            raise RoutingInfeasible("no admissible lane order exists for this placement")
    finally:
        sys.setrecursionlimit(limit)
    return order


@dataclass(frozen=True)
class LayoutParams:
    rho: float  # branch ball radius
    lane_span: float  # every lane offset is below this in absolute value
    pitch: float
    eta: float  # compression per nesting level
    fan: float  # length over which a fan converges


def clearance(target: GammaSpace) -> tuple[float, float, float, float]:
    """(min distance between non-adjacent segments, min first-segment length,
    min angle between neighbouring legs at the branch, max miter factor)."""
    segs = [(a, b) for leg in target.legs for a, b in zip(leg, leg[1:])]
    best = math.inf
    for i, (a, b) in enumerate(segs):
        for c, d in segs[i + 1 :]:
            if not {a, b} & {c, d}:
                best = min(best, segment_distance(a, b, c, d))
    first = min(_norm(_sub(leg[1], leg[0])) for leg in target.legs)
    angles = sorted(math.atan2(target.direction(i)[1], target.direction(i)[0]) for i in range(target.n + 1))
    gaps = [b - a for a, b in zip(angles, angles[1:])] + [angles[0] + 2 * math.pi - angles[-1]]
    miter = 1.0
    for leg in target.legs:
        for a, b, c in zip(leg, leg[1:], leg[2:]):
            u, w = _sub(a, b), _sub(c, b)
            cosang = (u[0] * w[0] + u[1] * w[1]) / (_norm(u) * _norm(w))
            alpha = math.acos(max(-1.0, min(1.0, cosang)))
            miter = max(miter, 1 / max(math.sin(alpha / 2), 1e-12))
    return best, first, min(gaps), miter


def epsilon_bound(target: GammaSpace) -> float:
    c, first, theta, miter = clearance(target)
    return min(4 * first, 4 * c / (miter * math.sin(theta / 2)), 1.0)


def _params(target: GammaSpace, eps: float, multiplicity: int) -> LayoutParams:
    _, _, theta, _ = clearance(target)
    rho = eps / 8
    span = rho * math.sin(theta / 2) / 2
    pitch = 2 * span / max(multiplicity, 1)
    return LayoutParams(rho, span, pitch, pitch, pitch / 2)


def _miters(leg: Sequence[Point]) -> list[Point]:
    """Unit-offset vectors (left side) at each polyline vertex, mitred at corners."""
    normals = []
    for a, b in zip(leg, leg[1:]):
        d = _sub(b, a)
        length = _norm(d)
        normals.append((-d[1] / length, d[0] / length))
    out = [normals[0]]
    for n1, n2 in zip(normals, normals[1:]):
        s = (n1[0] + n2[0], n1[1] + n2[1])
        dot = 1 + n1[0] * n2[0] + n1[1] * n2[1]
        out.append((s[0] / dot, s[1] / dot) if dot > 1e-12 else n1)
    out.append(normals[-1])
    return out


class _Lane:
    """Offset curve of a target leg at lane offset lam, indexed by the foot arclength."""

    def __init__(self, target: GammaSpace, leg: int, lam: float, miters: list[Point]):
        self.poly = target.legs[leg]
        self.cum = target.cum(leg)
        self.lam = lam
        self.miters = miters

    def vertex(self, k: int) -> Point:
        q, m = self.poly[k], self.miters[k]
        return (q[0] + self.lam * m[0], q[1] + self.lam * m[1])

    def at(self, x: float) -> Point:
        cum = self.cum
        k = min(max(bisect.bisect_right(cum, x) - 1, 0), len(cum) - 2)
        u = (x - cum[k]) / (cum[k + 1] - cum[k])
        return _lerp(self.vertex(k), self.vertex(k + 1), u)

    def run(self, x0: float, x1: float) -> list[tuple[Point, float]]:
        """Lane points from foot arclength x0 to x1 inclusive, with corners in between."""
        pts = [(self.at(x0), x0)]
        for k, s in enumerate(self.cum):
            if x0 < s < x1:
                pts.append((self.vertex(k), s))
        pts.append((self.at(x1), x1))
        return pts


def _densify(points: list[Point], sigma: list[float], breaks: Sequence[float]) -> tuple[list[Point], list[float]]:
    """Insert points where sigma crosses a target vertex, making both maps affine per piece."""
    out_p, out_s = [points[0]], [sigma[0]]
    for (a, sa), (b, sb) in zip(zip(points, sigma), zip(points[1:], sigma[1:])):
        lo, hi = bisect.bisect_right(breaks, sa), bisect.bisect_left(breaks, sb)
        for s in breaks[lo:hi]:
            if sa < s < sb:
                out_p.append(_lerp(a, b, (s - sa) / (sb - sa)))
                out_s.append(s)
        out_p.append(b)
        out_s.append(sb)
    return out_p, out_s


def layout_embedding(
    pg: PlacedGraph, target: GammaSpace, epsilon: float, budget: int = 200_000
) -> PLEmbedding:
    """Route every edge as a strand in its own lane alongside its target leg.

    Each edge {u, v}, u Origin and v = Ray(i, t), becomes a strand leaving a small
    ball around the branch in a lane parallel to leg i and ending where it
    projects onto Ray(i, t).  Lanes are ordered so that Origin stars inside the
    ball are non-crossing and fans converging on a ray vertex only enclose
    strands ending lower; enclosed vertices are pulled back by eta per level.
    """
    if pg.n != target.n:
        raise ValueError(f"graph has n={pg.n}, target has n={target.n}")
    if not pg.graph.is_tree():
        raise NotATree("layout is implemented for trees only")
    bound = epsilon_bound(target)
    if not 0 < epsilon < bound:
        raise EpsilonTooLarge(f"epsilon {epsilon} must lie in (0, {bound:.6g}) for this target")
    heights = {v: target.height(m) for v, m in pg.omega.items()}
    for i in range(target.n + 1):
        if target.length(i) - 1 <= 2 * epsilon:
            raise EpsilonTooLarge(f"leg {i} is too short for epsilon {epsilon}")
    if not pg.graph.edges:
        (v,) = pg.graph.vertices
        return PLEmbedding(pg, target, epsilon, {v: target.mark(pg.omega[v])}, {})

    order = _route(pg, target, heights, budget)
    mult = max(len(x) for x in order.lists.values())
    par = _params(target, epsilon, mult)

    lanes: dict[tuple[int, int], float] = {}
    for leg, seq in order.lists.items():
        m = len(seq)
        for k, e in enumerate(seq):
            lanes[e] = (k - (m - 1) / 2) * par.pitch
    depth: dict[int, int] = {}
    spans: dict[int, list[int]] = {}
    for leg, seq in order.lists.items():
        groups: dict[int, list[int]] = {}
        for k, e in enumerate(seq):
            groups.setdefault(e[1], []).append(k)
        for v, ps in groups.items():
            spans[v] = ps
            depth[v] = sum(1 for w, qs in groups.items() if w != v and _nesting(qs, ps) == "inner")

    miters = {i: _miters(target.legs[i]) for i in range(target.n + 1)}
    # exits on the ball circle
    exits: dict[tuple[int, int], tuple[Point, float]] = {}
    for e, lam in lanes.items():
        i = order.leg_of(e)
        d = target.direction(i)
        nrm = (-d[1], d[0])
        x = math.sqrt(par.rho**2 - lam**2)
        b = target.branch
        exits[e] = ((b[0] + x * d[0] + lam * nrm[0], b[1] + x * d[1] + lam * nrm[1]), x)

    positions: dict[int, Point] = {}
    by_origin: dict[int, list[tuple[int, int]]] = {}
    for e in lanes:
        by_origin.setdefault(e[0], []).append(e)
    for u, es in by_origin.items():
        pts = [exits[e][0] for e in es]
        positions[u] = (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))
        if len(es) == 1:
            positions[u] = pts[0]
    fan_of: dict[int, bool] = {}
    for v, ps in spans.items():
        i = pg.omega[v].leg
        shift = par.eta * depth[v]
        a = heights[v] - shift
        seq = order.lists[i]
        lams = [lanes[seq[k]] for k in ps]
        lam_mid = (min(lams) + max(lams)) / 2
        fan_of[v] = len(ps) > 1
        positions[v] = _Lane(target, i, lam_mid, miters[i]).at(a)

    strands = {}
    for e, lam in lanes.items():
        u, v = e
        i = order.leg_of(e)
        lane = _Lane(target, i, lam, miters[i])
        shift = par.eta * depth[v]
        a = heights[v] - shift
        s0 = 2 * par.rho
        s1 = s0 + (target.length(i) - 1 - s0) / 2

        def sigma(x: float) -> float:
            if x <= s0:
                return x
            if x <= s1:
                return x + shift * (x - s0) / (s1 - s0)
            return x + shift

        x_end = a - par.fan if fan_of[v] else a
        x_exit = exits[e][1]
        pts: list[Point] = []
        sig: list[float] = []
        if positions[u] != exits[e][0]:
            pts.append(positions[u])
            sig.append(0.0)
        run = lane.run(x_exit, x_end)
        run[0] = exits[e]
        extra = [x for x in (s0, s1) if x_exit < x < x_end]
        run = sorted(run + [(lane.at(x), x) for x in extra], key=lambda item: item[1])
        for k, (p, x) in enumerate(run):
            pts.append(p)
            sig.append(0.0 if not sig and k == 0 else sigma(x))
        if fan_of[v]:
            pts.append(positions[v])
            sig.append(heights[v])
        else:
            pts[-1] = positions[v]
            sig[-1] = heights[v]
        pts, sig = _densify(pts, sig, target.cum(i))
        strands[e] = Strand(e, i, pts, sig)
    return PLEmbedding(pg, target, epsilon, positions, strands)


# -- geometric expansion ----------------------------------------------------------------------


def strand_point_at_sigma(strand: Strand, s: float) -> Point:
    sig = strand.sigma
    if any(b <= a for a, b in zip(sig, sig[1:])):
        raise ProjectionNotMonotone(f"projection along {strand.edge} is not strictly monotone")
    if not sig[0] <= s <= sig[-1]:
        raise ValueError(f"arclength {s} outside the strand's range")
    k = min(bisect.bisect_right(sig, s) - 1, len(sig) - 2)
    return _lerp(strand.points[k], strand.points[k + 1], (s - sig[k]) / (sig[k + 1] - sig[k]))


@dataclass(frozen=True)
class GeometricExpansion:
    """Positions of the vertices inserted into each edge, plus their marks."""

    chains: dict[tuple[int, int], tuple[Point, ...]]
    marks: dict[tuple[int, int], tuple[Marking, ...]]


def expand_via_geometry(first: PLEmbedding, second: PLEmbedding, word) -> GeometricExpansion:
    """Pull the word's vertices back along each routed edge of the second embedding.

    `first` embeds the word near T; `second` embeds G near the image of `first`.
    The p-th inserted vertex on edge (u, v), v = Ray(i, .), is the point of the
    strand of (u, v) projecting onto word vertex G(i, p) of the image.
    """
    image = second.target
    if image.word_positions is None:
        raise GeometryError("second embedding must target the image of the first")
    chains, marks = {}, {}
    for e, strand in second.strands.items():
        i = strand.leg
        wpos = image.word_positions[i]
        kappa = len(wpos) - 1
        pts = [second.positions[e[0]]]
        pts += [strand_point_at_sigma(strand, wpos[p]) for p in range(1, kappa)]
        pts.append(second.positions[e[1]])
        chains[e] = tuple(pts)
        ms = tuple(word.leg_marks(i)[:kappa]) + (
            Ray(word.end_leg(i), second.placed.omega[e[1]].t),
        )
        marks[e] = ms
    return GeometricExpansion(chains, marks)


def composed_distance(second: PLEmbedding, samples: int = 2) -> float:
    """Max over sample points of |x - pi_1(pi_2(x))| for an embedding into an image space."""
    image = second.target
    best = 0.0
    for s in second.strands.values():
        for (p, a), (q, b) in zip(zip(s.points, s.sigma), zip(s.points[1:], s.sigma[1:])):
            for k in range(samples + 1):
                u = k / samples
                x = _lerp(p, q, u)
                y = image.project_to_parent(s.leg, a + (b - a) * u)
                best = max(best, _norm(_sub(x, y)))
    return best


# -- arc covers ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class Complex1:
    """Embedded 1-complex: nodes and polyline edges between them."""

    nodes: dict[int, Point]
    edges: list[tuple[int, int, tuple[Point, ...]]]

    @classmethod
    def from_gamma_space(cls, space: GammaSpace) -> Complex1:
        nodes = {0: space.branch}
        edges = []
        for i, leg in enumerate(space.legs):
            nodes[i + 1] = leg[-1]
            edges.append((0, i + 1, tuple(leg)))
        return cls(nodes, edges)

    def point(self, edge: int, u: Fraction) -> Point:
        poly = self.edges[edge][2]
        k = min(int(u), len(poly) - 2)
        return _lerp(poly[k], poly[k + 1], float(u - k))


@dataclass(frozen=True)
class Piece:
    """Sub-arc of one edge in polyline-index parameters, with open or closed ends."""

    edge: int
    lo: Fraction
    hi: Fraction
    lo_open: bool = True
    hi_open: bool = True

    def meets(self, other: Piece) -> bool:
        if self.edge != other.edge:
            return False
        return _interval_meet(
            (self.lo, self.lo_open, self.hi, self.hi_open), (other.lo, other.lo_open, other.hi, other.hi_open)
        ) is not None


def _interval_meet(a, b):
    lo = max((a[0], a[1]), (b[0], b[1]), key=lambda x: (x[0], x[1]))
    hi = min((a[2], not a[3]), (b[2], not b[3]), key=lambda x: (x[0], x[1]))
    lo_v, lo_open = lo
    hi_v, hi_closed = hi
    if lo_v < hi_v or (lo_v == hi_v and not lo_open and hi_closed):
        return (lo_v, lo_open, hi_v, not hi_closed)
    return None


@dataclass(frozen=True)
class Element:
    pieces: tuple[Piece, ...]
    nodes: frozenset[int] = frozenset()


@dataclass
class ArcCover:
    complex: Complex1
    elements: list[Element]

    def __post_init__(self) -> None:
        problems = self.validate()
        if problems:
            raise GeometryError("; ".join(problems))

    def validate(self) -> list[str]:
        out = []
        per_edge = self._per_edge()
        holders: dict[int, int] = {}
        for el in self.elements:
            for x in el.nodes:
                holders[x] = holders.get(x, 0) + 1
        out.extend(f"node {x} lies in {c} elements" for x, c in holders.items() if c >= 3)
        for e, items in per_edge.items():
            for a, b, c in _edge_triples(items):
                out.append(f"elements {a}, {b}, {c} have a common point on edge {e}")
                break
        for e, (na, nb, poly) in enumerate(self.complex.edges):
            ivs = sorted((_iv(p) for _, p in per_edge.get(e, [])), key=lambda t: (t[0], t[1]))
            reach, closed = Fraction(0), na in holders
            ok = True
            for lo, lo_open, hi, hi_open in ivs:
                if lo > reach or (lo == reach and lo_open and not closed):
                    ok = False
                    break
                if hi > reach or (hi == reach and not hi_open):
                    reach, closed = hi, not hi_open
            if not ok or reach < len(poly) - 1 or not (closed or nb in holders):
                out.append(f"edge {e} is not covered")
        return out

    def _per_edge(self) -> dict[int, list[tuple[int, Piece]]]:
        per_edge: dict[int, list[tuple[int, Piece]]] = {}
        for k, el in enumerate(self.elements):
            for p in el.pieces:
                per_edge.setdefault(p.edge, []).append((k, p))
        return per_edge

    def element_points(self, k: int) -> list[Point]:
        pts = [self.complex.nodes[x] for x in self.elements[k].nodes]
        for p in self.elements[k].pieces:
            poly = self.complex.edges[p.edge][2]
            pts.append(self.complex.point(p.edge, p.lo))
            pts.extend(poly[j] for j in range(len(poly)) if p.lo < j < p.hi)
            pts.append(self.complex.point(p.edge, p.hi))
        return pts

    def diameter(self, k: int) -> float:
        pts = np.array(self.element_points(k))
        if len(pts) < 2:
            return 0.0
        diff = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((diff**2).sum(-1)).max())

    @property
    def mesh(self) -> float:
        return max(self.diameter(k) for k in range(len(self.elements)))

    def nerve(self) -> Graph:
        return nerve(self)

    def polylines(self, k: int) -> list[list[Point]]:
        out = []
        for p in self.elements[k].pieces:
            poly = self.complex.edges[p.edge][2]
            seg = [self.complex.point(p.edge, p.lo)]
            seg += [poly[j] for j in range(len(poly)) if p.lo < j < p.hi]
            seg.append(self.complex.point(p.edge, p.hi))
            out.append(seg)
        return out


def _iv(p: Piece):
    return (p.lo, p.lo_open, p.hi, p.hi_open)


def _edge_pairs(items: list[tuple[int, Piece]]):
    """Overlapping pairs among the pieces of one edge, found by a sweep over left ends."""
    items = sorted(items, key=lambda kp: (kp[1].lo, kp[1].lo_open))
    for x, (a, p) in enumerate(items):
        for b, q in items[x + 1 :]:
            if q.lo > p.hi:
                break
            m = _interval_meet(_iv(p), _iv(q))
            if m is not None and a != b:
                yield a, b, m


def _edge_triples(items: list[tuple[int, Piece]]):
    items = sorted(items, key=lambda kp: (kp[1].lo, kp[1].lo_open))
    for a, b, m in _edge_pairs(items):
        for c, r in items:
            if r.lo > m[2]:
                break
            if c not in (a, b) and _interval_meet(m, _iv(r)) is not None:
                yield a, b, c


def nerve(cover: ArcCover) -> Graph:
    edges = set()
    holders: dict[int, list[int]] = {}
    for k, el in enumerate(cover.elements):
        for x in el.nodes:
            holders.setdefault(x, []).append(k)
    for ks in holders.values():
        edges.update(combinations(sorted(ks), 2))
    for items in cover._per_edge().values():
        for a, b, _ in _edge_pairs(items):
            edges.add((min(a, b), max(a, b)))
    return Graph.from_edges(sorted(edges), range(len(cover.elements)))


MESH_FLOOR = 1e-9
MAX_ELEMENTS = 200_000


def _param_at(cum: Sequence[float], s: float) -> Fraction:
    k = min(max(bisect.bisect_right(cum, s) - 1, 0), len(cum) - 2)
    u = (s - cum[k]) / (cum[k + 1] - cum[k])
    return k + Fraction(min(max(u, 0.0), 1.0)).limit_denominator(1 << 40)


def generate_cover(cx: Complex1, mesh: float) -> ArcCover:
    """Stars around nodes plus overlapping open sub-arcs along edges, each of diameter < mesh."""
    if mesh <= MESH_FLOOR:
        raise MeshTooSmall(f"mesh {mesh} is below the resolution floor {MESH_FLOOR}")
    total = sum(cumulative(poly)[-1] for _, _, poly in cx.edges)
    if total / mesh > MAX_ELEMENTS:
        raise MeshTooSmall(f"mesh {mesh} would need more than {MAX_ELEMENTS} elements")
    radius = 0.3 * mesh
    step = 0.6 * mesh
    star_pieces: dict[int, list[Piece]] = {x: [] for x in cx.nodes}
    elements: list[Element] = []
    for e, (a, b, poly) in enumerate(cx.edges):
        cum = cumulative(poly)
        length = cum[-1]
        top = Fraction(len(poly) - 1)
        if length <= 2 * radius:
            cuts = [length / 2]
        else:
            inner = length - 2 * radius
            m = max(1, math.ceil(inner / step))
            cuts = [radius + inner * k / m for k in range(m + 1)]
        params = [_param_at(cum, s) for s in cuts]
        gaps = [y - x for x, y in zip([Fraction(0)] + params, params + [top])]
        overlap = min(gaps) / 8
        star_pieces[a].append(Piece(e, Fraction(0), params[0] + overlap, lo_open=False))
        for x, y in zip(params, params[1:]):
            elements.append(Element((Piece(e, x - overlap, y + overlap),)))
        star_pieces[b].append(Piece(e, params[-1] - overlap, top, hi_open=False))
    stars = [Element(tuple(ps), frozenset([x])) for x, ps in sorted(star_pieces.items()) if ps]
    return ArcCover(cx, stars + elements)


# -- geometric to combinatorial ------------------------------------------------------------------


def smallness_margin(target: GammaSpace) -> float:
    """Min distance from any tip point b(i1, .) to any point of another leg i2."""
    best = math.inf
    for i1 in range(target.n + 1):
        tip = (target.mark(Ray(i1, Fraction(0))), target.mark(Ray(i1, Fraction(1))))
        for i2 in range(target.n + 1):
            if i1 != i2:
                best = min(best, polyline_distance(tip, target.legs[i2]))
    return best


def alternation_map(pg: PlacedGraph, nod, holder: Mapping[int, int], g: Mapping[int, int]) -> dict:
    """f(z) = C(l, A) for z in element U(l, j), A counting label changes from the branch element.

    `holder` sends each vertex to its element, `g` labels elements (mark class,
    -1 for o) and must label the branch element.
    """
    where = nod.address
    f = {}
    for v, k in holder.items():
        ell, j = where[k]
        if j == 0:
            f[v] = BRANCH
            continue
        chain = [nod.branch] + [nod.vertex_at(ell, jj) for jj in range(1, j + 1)]
        labels = [g[w] for w in chain if w in g]
        f[v] = c_vertex(ell, sum(1 for x, y in zip(labels, labels[1:]) if x != y))
    return f


def extract_comb_cover(emb: PLEmbedding, cover: ArcCover, delta: Fraction) -> CombCover:
    """Read a combinatorial cover off a small-mesh od cover of an embedded placed graph.

    g labels each element containing a vertex with the vertex's mark class; the
    branch element, if it holds no vertex, gets i when it comes within 2*delta of
    tip i (the smallest such i) and o otherwise.  A vertex in element U(l, j) goes
    to C(l, A) with A the number of label changes along the chain from the branch.
    """
    pg = emb.placed
    d = float(delta)
    margin = smallness_margin(emb.target)
    if not margin > 4 * d * (1 + REL_TOL):
        raise PremiseViolated(f"tips are {margin:.6g} from other legs, need more than 4*delta = {4 * d:.6g}")
    if not 2 * emb.epsilon + cover.mesh <= d * (1 + REL_TOL):
        raise PremiseViolated(
            f"2*eps1 + mesh = {2 * emb.epsilon + cover.mesh:.6g} exceeds delta = {d:.6g}"
        )
    try:
        nod = as_nod(cover.nerve())
    except (NotAnOd, ValueError) as exc:
        raise PremiseViolated(f"nerve is not an od graph: {exc}") from exc
    if nod.m != pg.n:
        raise PremiseViolated(f"nerve is a {nod.m}-od, need a {pg.n}-od")
    holder: dict[int, int] = {}
    for k, el in enumerate(cover.elements):
        for x in el.nodes:
            holder[x] = k
    g: dict[int, int] = {}
    for v, k in holder.items():
        cls = mark_class(pg.omega[v])
        if g.setdefault(k, cls) != cls:
            raise PremiseViolated(f"element {k} holds vertices of different mark classes")
    if nod.branch not in g:
        hits = [
            i
            for i in range(pg.n + 1)
            if any(
                polyline_distance(poly, (emb.target.mark(Ray(i, Fraction(0))), emb.target.mark(Ray(i, Fraction(1)))))
                < 2 * d
                for poly in cover.polylines(nod.branch)
            )
        ]
        if len(hits) > 1:
            log.warning("branch element meets N(i) for several i %s; using %d", hits, hits[0])
        g[nod.branch] = hits[0] if hits else -1
    f = alternation_map(pg, nod, holder, g)
    problems = check_cover(pg, f, Fraction(delta))
    if problems:
        raise AssertionError("extracted map fails the axioms: " + "; ".join(map(str, problems[:5])))
    return CombCover(f, Fraction(delta))


# -- figures ----------------------------------------------------------------------------------


@dataclass(frozen=True)
class CTrack:
    """A sequence of C-vertices drawn as a track over the first legs of C."""

    n: int
    images: tuple
    label: str = ""


def _c_point(c, n: int) -> Point:
    if c == BRANCH:
        return (0.0, 0.0)
    angle = 2 * math.pi * (c.ell - 1) / n
    return (c.j * math.cos(angle), c.j * math.sin(angle))


def render_svg(objects: Iterable[object], style: Mapping[str, object] | None = None) -> str:
    """Draw Gamma-spaces, embeddings, covers and C-tracks into one SVG document.

    Output is byte-stable for fixed input: matplotlib's SVG ids are salted with a
    constant and the date metadata is dropped.
    """
    import io

    import matplotlib

    matplotlib.use("Agg")
    from matplotlib.backends.backend_svg import FigureCanvasSVG
    from matplotlib.figure import Figure

    style = dict(style or {})
    with matplotlib.rc_context({"svg.hashsalt": "nodcover", "svg.fonttype": "none"}):
        fig = Figure(figsize=(float(style.get("width", 6)), float(style.get("height", 6))))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(1, 1, 1)
        ax.set_aspect("equal")
        ax.axis("off")
        lw = float(style.get("linewidth", 1.0))
        for obj in objects:
            if isinstance(obj, GammaSpace):
                _draw_gamma(ax, obj, lw)
            elif isinstance(obj, PLEmbedding):
                _draw_gamma(ax, obj.target, lw * 0.6, colour="0.75")
                for s in obj.strands.values():
                    xs, ys = zip(*s.points)
                    ax.plot(xs, ys, color="tab:blue", lw=lw * 0.5)
                if obj.positions:
                    xs, ys = zip(*obj.positions.values())
                    ax.plot(xs, ys, "o", color="black", ms=1.5)
            elif isinstance(obj, ArcCover):
                for k in range(len(obj.elements)):
                    for poly in obj.polylines(k):
                        xs, ys = zip(*poly)
                        ax.plot(xs, ys, color=f"C{k % 10}", lw=lw * 3, alpha=0.35)
            elif isinstance(obj, CTrack):
                _draw_track(ax, obj, lw)
            else:
                raise TypeError(f"cannot draw {type(obj).__name__}")
        if style.get("title"):
            ax.set_title(str(style["title"]))
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def _draw_gamma(ax, space: GammaSpace, lw: float, colour: str = "black") -> None:
    for i, leg in enumerate(space.legs):
        length = space.length(i)
        cut = bisect.bisect_right(space.cum(i), length - 1)
        body = list(leg[:cut]) + [space.leg_point(i, length - 1)]
        tip = [space.leg_point(i, length - 1)] + list(leg[cut:])
        ax.plot(*zip(*body), color=colour, lw=lw)
        ax.plot(*zip(*tip), color=colour, lw=lw, ls=":")


def _draw_track(ax, track: CTrack, lw: float) -> None:
    n = track.n
    reach = max([c.j for c in track.images if c != BRANCH] + [1]) + 1
    for ell in range(1, n + 1):
        end = _c_point(c_vertex(ell, reach), n)
        ax.plot([0, end[0]], [0, end[1]], color="0.6", lw=lw)
        for j in range(1, reach + 1):
            p = _c_point(c_vertex(ell, j), n)
            ax.plot([p[0]], [p[1]], "o", color="0.6", ms=2)
    pts = []
    total = max(len(track.images) - 1, 1)
    for k, c in enumerate(track.images):
        x, y = _c_point(c, n)
        # lift later steps slightly so back-and-forth motion stays visible
        pts.append((x, y + 0.25 * k / total))
    ax.plot(*zip(*pts), color="tab:red", lw=lw * 1.5)
    ax.annotate("", xy=pts[-1], xytext=pts[-2], arrowprops={"arrowstyle": "->", "color": "tab:red"})
    if track.label:
        ax.text(pts[0][0], pts[0][1], track.label, fontsize=8)


def scene_from_doc(doc: Mapping) -> tuple[list[object], dict]:
    """Objects and style from a scene document.

    Items: {"type": "T0", "n": 3}; {"type": "embedding", "fixture": "ingram2",
    "epsilon": 0.05, "cover_mesh": 0.1 (optional)}; {"type": "track",
    "fixture": "fig3"} or {"type": "track", "n": 2, "images": [[1, 2], [0, 0]]}.
    """
    from .fixtures import load_fixture

    objects: list[object] = []
    for item in doc.get("items", []):
        kind = item.get("type")
        if kind == "T0":
            objects.append(build_T0(int(item["n"])))
        elif kind == "embedding":
            pg = load_fixture(item["fixture"]).placed
            emb = layout_embedding(pg, build_T0(pg.n), float(item.get("epsilon", 0.05)))
            objects.append(emb)
            if "cover_mesh" in item:
                objects.append(generate_cover(emb.complex(), float(item["cover_mesh"])))
        elif kind == "track":
            if "fixture" in item:
                fx = load_fixture(item["fixture"])
                images = tuple(fx.cover[v] for v in sorted(fx.cover))
                objects.append(CTrack(fx.placed.n, images, item.get("label", fx.name)))
            else:
                images = tuple(c_vertex(int(a), int(b)) for a, b in item["images"])
                objects.append(CTrack(int(item["n"]), images, item.get("label", "")))
        else:
            raise ValueError(f"unknown scene item type {kind!r}")
    return objects, dict(doc.get("style", {}))
