"""Independent brute-force references used by the tests."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator

from nodcover.graphword import (
    BRANCH,
    ORIGIN,
    Graph,
    Leg,
    Origin,
    PlacedGraph,
    Ray,
    c_adjacent,
    canonical_form,
)


def literal_c3(pg: PlacedGraph, f, delta) -> bool:
    """C3 evaluated over every consecutive triple and every fourth vertex, as quantified."""
    adj = pg.graph.adjacency
    for v2 in pg.graph.vertices:
        for v1 in adj[v2]:
            for v3 in adj[v2]:
                if v1 == v3 or f[v1] == f[v3] or f[v2] == BRANCH:
                    continue
                for v in pg.graph.vertices:
                    if v in (v1, v2, v3) or f[v] != f[v2]:
                        continue
                    a, b = pg.omega[v2], pg.omega[v]
                    if isinstance(a, Ray) and isinstance(b, Ray) and a.leg == b.leg and a.t < b.t:
                        if not b.t - a.t < delta:
                            return False
    return True


def literal_cover(pg: PlacedGraph, f, delta) -> bool:
    vs = sorted(pg.graph.vertices)
    for u in vs:
        for v in vs:
            if u < v and f[u] == f[v]:
                a, b = pg.omega[u], pg.omega[v]
                same = (isinstance(a, Origin) and isinstance(b, Origin)) or (
                    isinstance(a, Ray) and isinstance(b, Ray) and a.leg == b.leg
                )
                if not same:
                    return False
    for u, v in pg.graph.edges:
        if not c_adjacent(f[u], f[v]):
            return False
    return literal_c3(pg, f, delta)


def bounded_c(n: int, jmax: int) -> list:
    return [BRANCH] + [Leg(ell, j) for ell in range(1, n + 1) for j in range(1, jmax + 1)]


def naive_has_cover(pg: PlacedGraph, delta) -> bool:
    """Every homomorphism of the tree into C truncated at j <= |V| + 1, checked literally.

    No symmetry breaking and no incremental checks: the root takes every vertex
    of the truncated C, each child every C-neighbour of its parent's image.
    """
    g = pg.graph
    root = min(g.vertices)
    order, parent = [root], {root: None}
    for x in order:
        for y in g.adjacency[x]:
            if y not in parent:
                parent[y] = x
                order.append(y)
    jmax = len(g.vertices) + 1
    cvs = bounded_c(pg.n, jmax)
    nbrs = {c: [d for d in cvs if c_adjacent(c, d)] for c in cvs}
    f = {}

    def rec(k: int) -> bool:
        if k == len(order):
            return literal_cover(pg, f, delta)
        x = order[k]
        for c in nbrs[f[parent[x]]]:
            f[x] = c
            if rec(k + 1):
                return True
        return False

    for c in cvs:
        f[root] = c
        if rec(1):
            return True
    return False


def prufer_trees(k: int) -> Iterator[list[tuple[int, int]]]:
    if k == 1:
        yield []
        return
    if k == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(k), repeat=k - 2):
        degree = [1] * k
        for x in seq:
            degree[x] += 1
        edges = []
        for x in seq:
            leaf = min(v for v in range(k) if degree[v] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = [v for v in range(k) if degree[v] == 1]
        edges.append((u, v))
        yield edges


def unlabeled_trees(k: int) -> list[list[tuple[int, int]]]:
    """One representative per isomorphism class of trees on k vertices."""
    seen = {}
    for edges in prufer_trees(k):
        plain = PlacedGraph(Graph.from_edges(edges, range(k)), 2, {v: ORIGIN for v in range(k)})
        seen.setdefault(canonical_form(plain), edges)
    return list(seen.values())


def two_colouring(k: int, edges) -> list[int]:
    side = {0: 0}
    adj = {v: [] for v in range(k)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in side:
                side[y] = 1 - side[x]
                stack.append(y)
    return [side[v] for v in range(k)]


def placed_trees(max_vertices: int, n: int, params) -> Iterator[PlacedGraph]:
    """Every placed tree up to tree isomorphism and leg relabelling of the marks.

    Legs of ray vertices are enumerated as restricted growth strings (first
    appearance in vertex order gets the next unused leg index), which picks one
    representative of each orbit of the leg permutation group.  Remaining
    duplicates from tree automorphisms are removed by the exact canonical form.
    """
    for k in range(1, max_vertices + 1):
        for edges in unlabeled_trees(k):
            colour = two_colouring(k, edges)
            for origin_side in (0, 1):
                rays = [v for v in range(k) if colour[v] != origin_side]
                seen = set()
                for legs in _growth_strings(len(rays), n + 1):
                    for ts in itertools.product(params, repeat=len(rays)):
                        marks = {v: ORIGIN for v in range(k) if colour[v] == origin_side}
                        for v, leg, t in zip(rays, legs, ts):
                            marks[v] = Ray(leg, Fraction(t))
                        pg = PlacedGraph.build(n, marks, edges) if edges else PlacedGraph(
                            Graph(frozenset([0]), frozenset()), n, marks
                        )
                        key = canonical_form(pg)
                        if key not in seen:
                            seen.add(key)
                            yield pg


def _growth_strings(length: int, alphabet: int) -> Iterator[tuple[int, ...]]:
    def rec(prefix: list[int], top: int):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for x in range(min(top + 1, alphabet)):
            prefix.append(x)
            yield from rec(prefix, max(top, x + 1))
            prefix.pop()

    yield from rec([], 0)
