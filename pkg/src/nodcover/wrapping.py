"""Wrapping patterns under a cover: detection, the away/toward/across trichotomy,
reversal points, wrapping complexes and executable checks of their sync properties.

A wrapping pattern is a simple path w_0..w_k, k a positive multiple of 2(n+1),
whose even positions p = 2q carry Ray(q mod (n+1), .) and odd positions Origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

from .graphword import (
    BRANCH,
    Branch,
    CVertex,
    Graph,
    Leg,
    Origin,
    PlacedGraph,
    Ray,
    c_position,
    c_vertex,
    in_branch_star,
)


class ClassificationImpossible(AssertionError):
    pass


class DoesNotMeetBranch(ValueError):
    pass


class Disconnected(ValueError):
    pass


@dataclass(frozen=True)
class WrappingPattern:
    vertices: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.vertices) - 1

    def __getitem__(self, p: int) -> int:
        return self.vertices[p]


def template_mark_ok(mark, p: int, n: int) -> bool:
    if p % 2:
        return isinstance(mark, Origin)
    return isinstance(mark, Ray) and mark.leg == (p // 2) % (n + 1)


def is_wrapping_pattern(pg: PlacedGraph, vertices: Sequence[int]) -> bool:
    k = len(vertices) - 1
    if k <= 0 or k % (2 * (pg.n + 1)):
        return False
    if len(set(vertices)) != len(vertices):
        return False
    adj = pg.graph.adjacency
    if any(b not in adj[a] for a, b in zip(vertices, vertices[1:])):
        return False
    return all(template_mark_ok(pg.omega[v], p, pg.n) for p, v in enumerate(vertices))


def detect_wrapping_patterns(pg: PlacedGraph, include_subpatterns: bool = False) -> list[WrappingPattern]:
    """Maximal template-matching simple paths, or every aligned sub-pattern when asked.

    A pattern is maximal when it is not an aligned block of a longer one, i.e. it
    does not sit at an offset that is a multiple of 2(n+1) inside another pattern.
    Repeated vertices are never followed, so non-simple candidates do not arise.
    """
    period = 2 * (pg.n + 1)
    adj = pg.graph.adjacency
    found: set[tuple[int, ...]] = set()

    def extend(path: list[int], on_path: set[int]) -> None:
        p = len(path)
        for y in adj[path[-1]]:
            if y in on_path or not template_mark_ok(pg.omega[y], p, pg.n):
                continue
            path.append(y)
            on_path.add(y)
            if p % period == 0:
                found.add(tuple(path))
            extend(path, on_path)
            path.pop()
            on_path.discard(y)

    for v in pg.graph.sorted_vertices():
        if template_mark_ok(pg.omega[v], 0, pg.n):
            extend([v], {v})
    if include_subpatterns:
        chosen = found
    else:
        covered = set()
        for pat in found:
            for a in range(0, len(pat), period):
                for b in range(a + period, len(pat), period):
                    if (a, b) != (0, len(pat) - 1):
                        covered.add(pat[a : b + 1])
        chosen = found - covered
    return [WrappingPattern(p) for p in sorted(chosen, key=lambda p: (p[0], len(p), p))]


# -- classification ------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchStarTrajectory:
    start: int  # position in the pattern of v_0
    vertices: tuple[int, ...]
    legs: tuple[int, ...]  # ell_p at even positions

    @property
    def q(self) -> int:
        return (len(self.vertices) - 1) // 2


@dataclass(frozen=True)
class Away:
    leg: int
    j: int
    name: str = "Away"


@dataclass(frozen=True)
class Toward:
    leg: int
    j: int
    name: str = "Toward"


@dataclass(frozen=True)
class Across:
    leg1: int
    leg2: int
    j1: int
    j2: int
    trajectory: BranchStarTrajectory = field(compare=False)
    name: str = "Across"


PatternClass = Away | Toward | Across


def branch_star_trajectory(vertices: Sequence[int], f: Mapping[int, CVertex], n: int, start: int = 0):
    """The trajectory, or None when the sequence is not one."""
    if len(vertices) % 2 == 0:
        return None
    q = (len(vertices) - 1) // 2
    if not 1 <= q <= n - 1:
        return None
    legs = []
    for p, v in enumerate(vertices):
        c = f[v]
        if p % 2:
            if not isinstance(c, Branch):
                return None
        elif isinstance(c, Leg) and c.j == 1:
            legs.append(c.ell)
        else:
            return None
    if len(set(legs)) != len(legs):
        return None
    return BranchStarTrajectory(start, tuple(vertices), tuple(legs))


def classify(pattern: WrappingPattern, f: Mapping[int, CVertex], n: int) -> PatternClass:
    w, k = pattern.vertices, pattern.k
    pos = [c_position(f[v]) for v in w]
    ell0, j0 = pos[0]
    ell1, j1n = pos[1]
    # (a) away from the branch: w_1 one step further out than w_0
    if j1n == j0 + 1 and (j0 == 0 or ell1 == ell0):
        ell = ell1
        if all(f[w[p]] == c_vertex(ell, j0 + p) for p in range(k + 1)):
            return Away(ell, j0)
        raise ClassificationImpossible(f"pattern starting at {w[0]} leaves leg {ell} going outward")
    if j0 == 0:
        raise ClassificationImpossible(f"pattern starts at Branch but w_1 maps to {f[w[1]]}")
    leg1, j1 = ell0, j0
    for p in range(min(j1, k) + 1):
        if f[w[p]] != c_vertex(leg1, j1 - p):
            raise ClassificationImpossible(f"pattern does not run straight down leg {leg1} at p={p}")
    if j1 >= k:
        return Toward(leg1, j1)
    leg2, j2 = pos[k]
    if j2 < 1 or leg2 == leg1 or j1 + j2 > k:
        raise ClassificationImpossible(f"end image {f[w[k]]} is incompatible with crossing from leg {leg1}")
    for p in range(j2 + 1):
        if f[w[k - p]] != c_vertex(leg2, j2 - p):
            raise ClassificationImpossible(f"pattern does not run straight up leg {leg2} at k-p={k - p}")
    traj = branch_star_trajectory(w[j1 - 1 : k - j2 + 2], f, n, start=j1 - 1)
    if traj is None:
        raise ClassificationImpossible(f"w_{j1 - 1}..w_{k - j2 + 1} is not a branch-star trajectory")
    return Across(leg1, leg2, j1, j2, traj)


def _component(c: CVertex, removed: CVertex) -> tuple:
    """Label of the component of C - removed containing c."""
    if isinstance(removed, Branch):
        return ("leg", c.ell)
    ell, j = removed.ell, removed.j
    if isinstance(c, Leg) and c.ell == ell and c.j > j:
        return ("out",)
    return ("in",)


def observation_holds(pattern: WrappingPattern, f: Mapping[int, CVertex]) -> bool:
    """f(w_1..w_k) avoids f(w_0) and lies in one component of C - f(w_0); likewise at the end."""
    w = pattern.vertices
    for anchor, rest in ((w[0], w[1:]), (w[-1], w[:-1])):
        c0 = f[anchor]
        if any(f[v] == c0 for v in rest):
            return False
        if len({_component(f[v], c0) for v in rest}) != 1:
            return False
    return True


# -- pre-branch-star segments and i* counts ---------------------------------------------------


def meets_branch(pattern: WrappingPattern, f: Mapping[int, CVertex]) -> bool:
    return any(isinstance(f[v], Branch) for v in pattern.vertices)


def pre_branch_star_segment(pattern: WrappingPattern, f: Mapping[int, CVertex]) -> tuple[int, ...]:
    if not meets_branch(pattern, f):
        raise DoesNotMeetBranch("pattern never maps to Branch")
    for p, v in enumerate(pattern.vertices):
        if in_branch_star(f[v]):
            return pattern.vertices[:p]
    raise AssertionError("unreachable: Branch is in the branch-star")


def count_istar_marks(pg: PlacedGraph, vertices: Sequence[int], istar: int) -> int:
    return sum(1 for v in vertices if isinstance(pg.omega[v], Ray) and pg.omega[v].leg == istar)


# -- reversal points --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReversalPoint:
    at: Leg
    kind: str  # "start" or "end"
    witnesses: tuple[int, int]


def find_reversal_points(patterns: Sequence[WrappingPattern], f: Mapping[int, CVertex]) -> list[ReversalPoint]:
    found: dict[tuple[Leg, str], ReversalPoint] = {}
    for a, b in combinations(range(len(patterns)), 2):
        u, v = patterns[a].vertices, patterns[b].vertices
        for kind, pu, pv, nu, nv in (
            ("start", u[0], v[0], u[1], v[1]),
            ("end", u[-1], v[-1], u[-2], v[-2]),
        ):
            c = f[pu]
            if c == f[pv] and f[nu] != f[nv] and isinstance(c, Leg) and c.j >= 2:
                found.setdefault((c, kind), ReversalPoint(c, kind, (a, b)))
    return sorted(found.values(), key=lambda r: (r.at.ell, r.at.j, r.kind))


def reversal_rule_violations(
    patterns: Sequence[WrappingPattern], f: Mapping[int, CVertex], points: Sequence[ReversalPoint]
) -> list[str]:
    """A start-type point is hit only at p = 0, an end-type point only at p = k."""
    out = []
    for rp in points:
        for idx, pat in enumerate(patterns):
            for p, v in enumerate(pat.vertices):
                if f[v] != rp.at:
                    continue
                if (rp.kind == "start" and p != 0) or (rp.kind == "end" and p != pat.k):
                    out.append(f"pattern {idx} hits {rp.kind}-type point {rp.at} at p={p}")
            sides = {_component(f[v], rp.at) for v in pat.vertices if f[v] != rp.at}
            if len(sides) > 1:
                out.append(f"pattern {idx} meets both sides of {rp.at}")
    return out


# -- wrapping complexes -----------------------------------------------------------------------


def _complex_edges(patterns: Sequence[WrappingPattern], f: Mapping[int, CVertex], members: Sequence[int]):
    edges = []
    for a, b in combinations(members, 2):
        u, v = patterns[a], patterns[b]
        if f[u[0]] == f[v[0]] or (f[u[u.k]] == f[v[v.k]] and u.k == v.k):
            edges.append((a, b))
    return edges


@dataclass(frozen=True)
class WrappingComplex:
    patterns: tuple[WrappingPattern, ...]
    index_graph: Graph


def build_complex(patterns: Sequence[WrappingPattern], f: Mapping[int, CVertex]) -> WrappingComplex:
    if not patterns:
        raise Disconnected("no patterns")
    members = list(range(len(patterns)))
    q = Graph.from_edges(_complex_edges(patterns, f, members), members)
    if not q.is_connected():
        raise Disconnected(f"index graph has components {[sorted(c) for c in q.components()]}")
    return WrappingComplex(tuple(patterns), q)


@dataclass(frozen=True)
class SyncReport:
    positional: tuple[str, ...]
    istar_counts: tuple[str, ...]
    splits: tuple[str, ...]

    @property
    def violations(self) -> tuple[str, ...]:
        return self.positional + self.istar_counts + self.splits

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_complex_sync(
    complex_: WrappingComplex,
    f: Mapping[int, CVertex],
    istar: int,
    pg: PlacedGraph,
    points: Sequence[ReversalPoint] | None = None,
) -> SyncReport:
    """Check the three sync conclusions; `points` defaults to the complex's own reversal points."""
    pats = complex_.patterns
    positional = []
    seen: dict[CVertex, list[tuple[int, int, int]]] = {}
    for idx, pat in enumerate(pats):
        for p, v in enumerate(pat.vertices):
            seen.setdefault(f[v], []).append((idx, p, v))
    for c, hits in seen.items():
        for (i1, p1, v1), (i2, p2, v2) in combinations(hits, 2):
            if p1 == p2:
                continue
            if isinstance(c, Branch) and isinstance(pg.omega[v1], Origin) and isinstance(pg.omega[v2], Origin):
                continue
            positional.append(f"patterns {i1}@{p1} and {i2}@{p2} share image {c}")

    counts = {}
    for idx, pat in enumerate(pats):
        if meets_branch(pat, f):
            counts[idx] = count_istar_marks(pg, pre_branch_star_segment(pat, f), istar)
    istar_counts = []
    if len(set(counts.values())) > 1:
        istar_counts.append(f"pre-branch-star counts of Ray({istar}, .) differ: {counts}")

    splits = []
    for rp in find_reversal_points(pats, f) if points is None else points:
        sides: dict[tuple, list[int]] = {("in",): [], ("out",): []}
        for idx, pat in enumerate(pats):
            labels = {_component(f[v], rp.at) for v in pat.vertices if f[v] != rp.at}
            for lab in labels or {("in",), ("out",)}:
                sides[lab].append(idx)
        union = set(sides[("in",)]) | set(sides[("out",)])
        if union != set(range(len(pats))):
            splits.append(f"split at {rp.at} misses patterns {sorted(set(range(len(pats))) - union)}")
        for lab, members in sides.items():
            if members:
                sub = Graph.from_edges(_complex_edges(pats, f, members), members)
                if not sub.is_connected():
                    splits.append(f"{lab[0]}-side sub-complex at {rp.at} is disconnected")
    return SyncReport(tuple(positional), tuple(istar_counts), tuple(splits))


# -- aggregate check used on every witness --------------------------------------------------------


@dataclass
class TheoremReport:
    patterns: int = 0
    classified: dict[str, int] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)


def check_theorems(pg: PlacedGraph, f: Mapping[int, CVertex]) -> TheoremReport:
    """Run trichotomy, observation, i*, reversal and complex-sync checks on one cover."""
    from .combcover import NotFound, find_istar

    report = TheoremReport()
    try:
        istar = find_istar(pg, f)
    except NotFound as exc:
        report.violations.append(f"i*: {exc}")
        return report
    for v, c in f.items():
        if in_branch_star(c) and isinstance(pg.omega[v], Ray) and pg.omega[v].leg == istar:
            report.violations.append(f"i*: vertex {v} in the branch-star carries Ray({istar}, .)")
    patterns = detect_wrapping_patterns(pg, include_subpatterns=True)
    report.patterns = len(patterns)
    for pat in patterns:
        try:
            cls = classify(pat, f, pg.n)
            report.classified[cls.name] = report.classified.get(cls.name, 0) + 1
        except ClassificationImpossible as exc:
            report.violations.append(f"trichotomy: {exc}")
        if not observation_holds(pat, f):
            report.violations.append(f"observation fails for pattern at {pat[0]}")
    points = find_reversal_points(patterns, f)
    report.violations.extend(reversal_rule_violations(patterns, f, points))
    for members in _complexes(patterns, f):
        sub = [patterns[i] for i in members]
        report.violations.extend(verify_complex_sync(build_complex(sub, f), f, istar, pg, points).violations)
    return report


def _complexes(patterns: Sequence[WrappingPattern], f: Mapping[int, CVertex]) -> list[list[int]]:
    """Connected components of the index graph on all patterns (each one a wrapping complex)."""
    if not patterns:
        return []
    members = list(range(len(patterns)))
    q = Graph.from_edges(_complex_edges(patterns, f, members), members)
    return [sorted(c) for c in q.components()]
