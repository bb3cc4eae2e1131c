"""Edge-wise substitution of a placed graph by the legs of a graph-word, and cover descent.

Each edge {u, v} with omega(u) = Origin and omega(v) = Ray(i, t) is replaced by a
copy of leg i of the word: u takes the word's branch mark, the inner vertices take
the leg's marks, and v is re-marked Ray(i(e), t) where Ray(i(e), 1) marks the leg's
endpoint e.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .combcover import CombCover, verify_cover
from .graphword import (
    BRANCH,
    Branch,
    CVertex,
    NOd,
    Origin,
    PlacedGraph,
    Ray,
    as_nod,
    c_position,
    c_vertex,
    mark_class,
    validate_placement,
)


class InvalidWord(ValueError):
    pass


class ConditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class ExpansionWord:
    """A placed (n+1)-od; leg i of the word is the (i+1)-th leg in canonical order."""

    word: PlacedGraph
    nod: NOd

    @classmethod
    def from_placed_graph(cls, word: PlacedGraph) -> ExpansionWord:
        problems = validate_placement(word)
        if problems:
            raise InvalidWord("; ".join(problems))
        try:
            nod = as_nod(word.graph)
        except ValueError as exc:
            raise InvalidWord(str(exc)) from exc
        if nod.m != word.n + 1:
            raise InvalidWord(f"word has {nod.m} legs, expected n+1 = {word.n + 1}")
        if isinstance(word.omega[nod.branch], Origin):
            raise InvalidWord("branch vertex of the word is marked Origin")
        for leg in nod.legs:
            end = word.omega[leg[-1]]
            if not (isinstance(end, Ray) and end.t == 1):
                raise InvalidWord(f"endpoint {leg[-1]} is marked {end}, expected Ray(., 1)")
        return cls(word, nod)

    @property
    def n(self) -> int:
        return self.word.n

    def leg_marks(self, i: int) -> list:
        """Marks chi(G(i, p)) for p = 0..kappa, the branch first."""
        leg = self.nod.legs[i]
        return [self.word.omega[self.nod.branch]] + [self.word.omega[v] for v in leg]

    def kappa(self, i: int) -> int:
        return len(self.nod.legs[i])

    def end_leg(self, i: int) -> int:
        return self.word.omega[self.nod.legs[i][-1]].leg


@dataclass(frozen=True)
class Expansion:
    original: PlacedGraph
    expanded: PlacedGraph
    # original edge (u, v) with u the Origin endpoint -> chain z_0 = u, ..., z_kappa = v
    chains: Mapping[tuple[int, int], tuple[int, ...]] = field(hash=False)
    inserted: frozenset[int]

    def is_original(self, v: int) -> bool:
        return v not in self.inserted


def chi_expand(pg: PlacedGraph, word: ExpansionWord) -> Expansion:
    if word.n != pg.n:
        raise InvalidWord(f"word is for n={word.n}, graph has n={pg.n}")
    problems = validate_placement(pg)
    if problems:
        raise ValueError("; ".join(problems))
    if len(pg.graph.vertices) < 2 or not pg.graph.edges:
        raise ValueError("single-vertex graphs have no expansion")
    branch_mark = word.word.omega[word.nod.branch]
    base = max(pg.graph.vertices) + 1
    stride = max(word.kappa(i) for i in range(pg.n + 1))
    marks = {}
    edges = []
    chains = {}
    inserted = set()
    for index, (a, b) in enumerate(pg.graph.sorted_edges()):
        u, v = (a, b) if isinstance(pg.omega[a], Origin) else (b, a)
        ray = pg.omega[v]
        leg_marks = word.leg_marks(ray.leg)
        kappa = word.kappa(ray.leg)
        chain = [u] + [base + index * stride + p - 1 for p in range(1, kappa)] + [v]
        for p in range(kappa):
            marks[chain[p]] = leg_marks[p]
        marks[v] = Ray(word.end_leg(ray.leg), ray.t)
        inserted.update(chain[1:-1])
        edges.extend(zip(chain, chain[1:]))
        chains[(u, v)] = tuple(chain)
    expanded = PlacedGraph.build(pg.n, marks, edges)
    return Expansion(pg, expanded, chains, frozenset(inserted))


def contract(exp: Expansion) -> PlacedGraph:
    """Collapse every inserted chain back to one edge, restoring the original marks."""
    edges = [(chain[0], chain[-1]) for chain in exp.chains.values()]
    marks = {v: exp.original.omega[v] for v in exp.original.graph.vertices}
    return PlacedGraph.build(exp.original.n, marks, edges)


@dataclass(frozen=True)
class DescentReport:
    pairs: int
    violations: tuple[tuple[int, int], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _descent_kind(exp: Expansion, u: int, v: int) -> str | None:
    ou, ov = exp.is_original(u), exp.is_original(v)
    if ou and ov:
        mu, mv = exp.original.omega[u], exp.original.omega[v]
        if isinstance(mu, Origin) and isinstance(mv, Origin):
            return "A"
        if isinstance(mu, Ray) and isinstance(mv, Ray) and mu.leg == mv.leg:
            return "B"
        return None
    if not ou and not ov:
        return "C"
    return None


def check_descent_condition(exp: Expansion, fplus: Mapping[int, CVertex], delta: Fraction | None = None) -> DescentReport:
    fibers: dict[CVertex, list[int]] = {}
    for v in sorted(fplus):
        fibers.setdefault(fplus[v], []).append(v)
    pairs = 0
    bad = []
    for vs in fibers.values():
        for x in range(len(vs)):
            for y in range(x + 1, len(vs)):
                pairs += 1
                if _descent_kind(exp, vs[x], vs[y]) is None:
                    bad.append((vs[x], vs[y]))
    return DescentReport(pairs, tuple(bad))


def descend_cover(exp: Expansion, fplus: Mapping[int, CVertex], delta: Fraction) -> CombCover:
    """Push a cover of the expansion down to the original graph.

    Let CV be the image of the original vertices, with g(c) the original mark
    class of the vertices over c.  S is {Branch} when Branch is in CV, otherwise
    the Origin-class vertices of CV lowest on their leg.  A vertex over S goes to
    Branch; any other vertex over C(ell, j) goes to C(ell, A), A counting the CV
    vertices C(ell, j') with 0 <= j' <= j that are not in S.
    """
    report = check_descent_condition(exp, fplus, delta)
    if not report.ok:
        raise ConditionViolated(f"descent condition fails on pairs {list(report.violations)[:5]}")
    original = exp.original.graph.vertices
    cv = {fplus[v] for v in original}
    g = {}
    for v in original:
        g[fplus[v]] = mark_class(exp.original.omega[v])
    if BRANCH in cv:
        s = {BRANCH}
    else:
        lowest: dict[int, int] = {}
        for c in cv:
            ell, j = c_position(c)
            lowest[ell] = min(lowest.get(ell, j), j)
        s = {c for c in cv if g[c] == -1 and c_position(c)[1] == lowest[c_position(c)[0]]}
    by_leg: dict[int, list[int]] = {}
    for c in cv:
        if c not in s and not isinstance(c, Branch):
            ell, j = c_position(c)
            by_leg.setdefault(ell, []).append(j)
    f = {}
    for v in original:
        c = fplus[v]
        if c in s:
            f[v] = BRANCH
        else:
            ell, j = c_position(c)
            f[v] = c_vertex(ell, sum(1 for jj in by_leg[ell] if jj <= j))
    return verify_cover(exp.original, f, Fraction(delta))
