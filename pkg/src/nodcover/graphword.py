"""Finite graphs, n-od addressing, the marking alphabet and placement functions.

Markings are either ``ORIGIN`` or ``Ray(leg, t)`` with an exact rational ``t``.
Vertices of the infinite n-od are ``BRANCH`` or ``Leg(ell, j)`` with ``j >= 1``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping


class GraphError(ValueError):
    pass


class NotConnected(GraphError):
    pass


class MultipleBranches(GraphError):
    pass


class NotAnOd(GraphError):
    pass


class NotPresent(GraphError):
    pass


class FormatError(ValueError):
    pass


# -- markings -----------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Origin:
    def __str__(self) -> str:
        return "o"


ORIGIN = Origin()


@dataclass(frozen=True, order=True)
class Ray:
    leg: int
    t: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.t, Fraction):
            object.__setattr__(self, "t", Fraction(self.t))
        if self.leg < 0:
            raise ValueError(f"negative leg index {self.leg}")
        if not 0 <= self.t <= 1:
            raise ValueError(f"ray parameter {self.t} outside [0, 1]")

    def __str__(self) -> str:
        return f"b({self.leg},{self.t})"


Marking = Origin | Ray


def mark_class(mark: Marking) -> int:
    """-1 for Origin, the leg index for a Ray; equal classes are what C1 allows to share an image."""
    return -1 if isinstance(mark, Origin) else mark.leg


# -- vertices of the infinite n-od C -------------------------------------------


@dataclass(frozen=True, order=True)
class Branch:
    def __str__(self) -> str:
        return "C(.,0)"


BRANCH = Branch()


@dataclass(frozen=True, order=True)
class Leg:
    ell: int
    j: int

    def __post_init__(self) -> None:
        if self.ell < 1 or self.j < 1:
            raise ValueError(f"invalid C vertex Leg({self.ell},{self.j})")

    def __str__(self) -> str:
        return f"C({self.ell},{self.j})"


CVertex = Branch | Leg


def c_vertex(ell: int, j: int) -> CVertex:
    """C(ell, j) with the convention that j = 0 is the branch on every leg."""
    return BRANCH if j == 0 else Leg(ell, j)


def c_position(c: CVertex) -> tuple[int, int]:
    """(leg, j) of a C vertex, with (0, 0) for the branch."""
    return (0, 0) if isinstance(c, Branch) else (c.ell, c.j)


def c_adjacent(a: CVertex, b: CVertex) -> bool:
    if isinstance(a, Branch):
        return isinstance(b, Leg) and b.j == 1
    if isinstance(b, Branch):
        return a.j == 1
    return a.ell == b.ell and abs(a.j - b.j) == 1


def c_neighbors(c: CVertex, n: int) -> list[CVertex]:
    if isinstance(c, Branch):
        return [Leg(ell, 1) for ell in range(1, n + 1)]
    return [c_vertex(c.ell, c.j - 1), Leg(c.ell, c.j + 1)]


def in_branch_star(c: CVertex) -> bool:
    return isinstance(c, Branch) or c.j == 1


# -- graphs ---------------------------------------------------------------------


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    vertices: frozenset[int]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if u > v:
                raise GraphError(f"edge ({u}, {v}) not normalized")
            if u not in self.vertices or v not in self.vertices:
                raise GraphError(f"edge ({u}, {v}) uses an unknown vertex")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], vertices: Iterable[int] = ()) -> Graph:
        es = set()
        vs = set(vertices)
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            e = _edge(u, v)
            if e in es:
                raise GraphError(f"duplicate edge {e}")
            es.add(e)
            vs.update(e)
        return cls(frozenset(vs), frozenset(es))

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {v: tuple(sorted(ns)) for v, ns in adj.items()}

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def sorted_vertices(self) -> list[int]:
        return sorted(self.vertices)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def components(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        out = []
        for s in self.sorted_vertices():
            if s in seen:
                continue
            comp = {s}
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in self.adjacency[x]:
                    if y not in comp:
                        comp.add(y)
                        queue.append(y)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def is_tree(self) -> bool:
        return bool(self.vertices) and self.is_connected() and len(self.edges) == len(self.vertices) - 1


def remove_vertex(graph: Graph, v: int) -> Graph:
    if v not in graph.vertices:
        raise NotPresent(f"vertex {v} not in graph")
    return Graph(graph.vertices - {v}, frozenset(e for e in graph.edges if v not in e))


def remove_edge(graph: Graph, e: tuple[int, int]) -> Graph:
    """G - e: drop the edge, and drop an endpoint exactly when e was its only edge."""
    e = _edge(*e)
    if e not in graph.edges:
        raise NotPresent(f"edge {e} not in graph")
    drop = {x for x in e if graph.degree(x) == 1}
    return Graph(graph.vertices - drop, graph.edges - {e})


# -- n-od addressing --------------------------------------------------------------


@dataclass(frozen=True)
class NOd:
    """Address map of an m-od graph (or an arc, kind == "arc").

    ``legs[ell - 1]`` lists the vertices of leg ``ell`` from the branch outward,
    so ``vertex_at(ell, j)`` is G(ell, j) and index 0 is the branch on every leg.
    """

    branch: int
    legs: tuple[tuple[int, ...], ...]
    kind: str

    @property
    def m(self) -> int:
        return len(self.legs)

    def vertex_at(self, ell: int, j: int) -> int:
        return self.branch if j == 0 else self.legs[ell - 1][j - 1]

    @cached_property
    def address(self) -> dict[int, tuple[int, int]]:
        out = {self.branch: (0, 0)}
        for ell, leg in enumerate(self.legs, start=1):
            for j, v in enumerate(leg, start=1):
                out[v] = (ell, j)
        return out

    def flatten(self) -> frozenset[int]:
        return frozenset(self.address)


def as_nod(graph: Graph) -> NOd:
    """Address a connected tree with at most one vertex of degree >= 3.

    For an arc the branch is the smallest-id vertex of degree 2 (or the smallest
    id when there is none), giving two legs (one for a single edge).
    """
    if not graph.vertices:
        raise NotAnOd("empty graph")
    if not graph.is_connected():
        raise NotConnected("graph is not connected")
    high = [v for v in graph.sorted_vertices() if graph.degree(v) >= 3]
    if len(high) >= 2:
        raise MultipleBranches(f"vertices {high} all have degree >= 3")
    if len(graph.edges) != len(graph.vertices) - 1:
        raise NotAnOd("graph has a cycle")
    if high:
        branch, kind = high[0], "nod"
    else:
        inner = [v for v in graph.sorted_vertices() if graph.degree(v) == 2]
        branch, kind = (inner[0] if inner else min(graph.vertices)), "arc"
    legs = []
    for first in graph.adjacency[branch]:
        leg = [first]
        prev, cur = branch, first
        while True:
            nxt = [y for y in graph.adjacency[cur] if y != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            leg.append(cur)
        legs.append(tuple(leg))
    legs.sort(key=min)
    return NOd(branch, tuple(legs), kind)


# -- placed graphs ----------------------------------------------------------------------


@dataclass(frozen=True)
class PlacedGraph:
    graph: Graph
    n: int
    omega: Mapping[int, Marking] = field(hash=False)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if set(self.omega) != set(self.graph.vertices):
            raise ValueError("placement must be total on the vertex set")
        for v, mark in self.omega.items():
            if isinstance(mark, Ray) and mark.leg > self.n:
                raise ValueError(f"vertex {v}: leg {mark.leg} exceeds n={self.n}")

    @classmethod
    def build(cls, n: int, marks: Mapping[int, Marking], edges: Iterable[tuple[int, int]]) -> PlacedGraph:
        return cls(Graph.from_edges(edges, marks), n, dict(marks))

    def mark(self, v: int) -> Marking:
        return self.omega[v]

    def relabel(self, mapping: Mapping[int, int]) -> PlacedGraph:
        return PlacedGraph.build(
            self.n,
            {mapping[v]: m for v, m in self.omega.items()},
            [(mapping[u], mapping[v]) for u, v in self.graph.edges],
        )


def validate_placement(pg: PlacedGraph) -> list[str]:
    out = []
    for u, v in pg.graph.sorted_edges():
        a, b = isinstance(pg.omega[u], Origin), isinstance(pg.omega[v], Origin)
        if a == b:
            kind = "Origin" if a else "Ray"
            out.append(f"edge ({u}, {v}): both endpoints marked {kind}")
    return out


def canonical_form(pg: PlacedGraph) -> tuple:
    """Mark-preserving isomorphism invariant for trees (exact, AHU encoding at the centre)."""
    g = pg.graph
    if not g.is_tree():
        raise NotAnOd("canonical_form needs a tree")
    leaves = [v for v in g.vertices if g.degree(v) <= 1]
    remaining = set(g.vertices)
    while len(remaining) > 2:
        nxt = []
        for v in leaves:
            remaining.discard(v)
        for v in leaves:
            for w in g.adjacency[v]:
                if w in remaining and sum(1 for x in g.adjacency[w] if x in remaining) <= 1 and w not in nxt:
                    nxt.append(w)
        leaves = nxt
    centres = sorted(remaining)

    def key(mark: Marking) -> tuple:
        return ("o",) if isinstance(mark, Origin) else ("b", mark.leg, mark.t)

    def encode(root: int) -> tuple:
        order, parent = [root], {root: None}
        for x in order:
            for y in g.adjacency[x]:
                if y != parent[x]:
                    parent[y] = x
                    order.append(y)
        codes: dict[int, tuple] = {}
        for x in reversed(order):
            kids = sorted(codes[y] for y in g.adjacency[x] if y != parent[x])
            codes[x] = (key(pg.omega[x]), tuple(kids))
        return codes[root]

    return (pg.n, min(encode(c) for c in centres))


# -- text format ------------------------------------------------------------------------


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str | int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise FormatError(f"not a rational: {text!r}") from exc


def mark_to_doc(mark: Marking) -> str | dict:
    if isinstance(mark, Origin):
        return "o"
    return {"leg": mark.leg, "t": format_fraction(mark.t)}


def mark_from_doc(doc) -> Marking:
    if doc == "o":
        return ORIGIN
    if isinstance(doc, dict) and set(doc) == {"leg", "t"}:
        return Ray(int(doc["leg"]), parse_fraction(doc["t"]))
    raise FormatError(f"bad mark {doc!r}")


def placed_graph_to_doc(pg: PlacedGraph) -> dict:
    return {
        "n": pg.n,
        "vertices": [{"id": v, "mark": mark_to_doc(pg.omega[v])} for v in pg.graph.sorted_vertices()],
        "edges": [list(e) for e in pg.graph.sorted_edges()],
    }


def placed_graph_from_doc(doc: dict) -> PlacedGraph:
    try:
        n = int(doc["n"])
        marks = {}
        for item in doc["vertices"]:
            v = int(item["id"])
            if v in marks:
                raise FormatError(f"duplicate vertex id {v}")
            marks[v] = mark_from_doc(item["mark"])
        edges = [(int(a), int(b)) for a, b in doc["edges"]]
        return PlacedGraph.build(n, marks, edges)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed placed-graph document: {exc}") from exc
    except (GraphError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from exc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def dump_placed_graph(pg: PlacedGraph) -> str:
    return dumps(placed_graph_to_doc(pg))


def load_placed_graph(text: str) -> PlacedGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return placed_graph_from_doc(doc)
