"""Cover axioms C1-C3 for maps into the infinite n-od C and an exact search for covers.

A cover is a map f: V(G) -> V(C).  Axioms, for a placed graph (G, omega):

C1  f(u) = f(v) implies both marks are Origin or both are rays on the same leg.
C2  adjacent vertices go to adjacent vertices of C.
C3  for consecutive v1, v2, v3 with f(v1) != f(v3) and f(v2) != Branch, every
    other v with f(v) = f(v2), omega(v2) = Ray(i, s), omega(v) = Ray(i, t), s < t
    satisfies t - s < delta (strictly).  Only this orientation is constrained.
"""

from __future__ import annotations

import json
import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from .graphword import (
    BRANCH,
    Branch,
    CVertex,
    FormatError,
    Leg,
    PlacedGraph,
    Ray,
    c_adjacent,
    format_fraction,
    in_branch_star,
    mark_class,
    parse_fraction,
)


class InvalidInput(ValueError):
    pass


class NotFound(AssertionError):
    pass


@dataclass(frozen=True)
class Violation:
    axiom: str
    vertices: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        return f"{self.axiom} {list(self.vertices)}: {self.detail}"


@dataclass(frozen=True)
class CombCover:
    f: Mapping[int, CVertex] = field(hash=False)
    delta: Fraction


# -- checkers -------------------------------------------------------------------------


def _fibers(f: Mapping[int, CVertex]) -> dict[CVertex, list[int]]:
    out: dict[CVertex, list[int]] = {}
    for v in sorted(f):
        out.setdefault(f[v], []).append(v)
    return out


def _require_total(pg: PlacedGraph, f: Mapping[int, CVertex]) -> None:
    missing = pg.graph.vertices - set(f)
    if missing:
        raise InvalidInput(f"f is undefined on {sorted(missing)}")


def check_c1(pg: PlacedGraph, f: Mapping[int, CVertex]) -> list[Violation]:
    _require_total(pg, f)
    out = []
    for c, vs in _fibers(f).items():
        classes = {mark_class(pg.omega[v]) for v in vs}
        if len(classes) > 1:
            out.append(Violation("C1", tuple(vs), f"mixed mark classes at {c}"))
    return out


def check_c2(pg: PlacedGraph, f: Mapping[int, CVertex]) -> list[Violation]:
    _require_total(pg, f)
    return [
        Violation("C2", (u, v), f"{f[u]} and {f[v]} are not adjacent in C")
        for u, v in pg.graph.sorted_edges()
        if not c_adjacent(f[u], f[v])
    ]


def straight_through(pg: PlacedGraph, f: Mapping[int, CVertex], v2: int) -> tuple[int, int] | None:
    """A pair of neighbours (v1, v3) of v2 with f(v1) != f(v3), if any."""
    adj = pg.graph.adjacency[v2]
    for a in adj:
        for b in adj:
            if a < b and f[a] != f[b]:
                return (a, b)
    return None


def check_c3(pg: PlacedGraph, f: Mapping[int, CVertex], delta: Fraction) -> list[Violation]:
    _require_total(pg, f)
    delta = Fraction(delta)
    fibers = _fibers(f)
    out = []
    for v2 in pg.graph.sorted_vertices():
        s_mark = pg.omega[v2]
        if isinstance(f[v2], Branch) or not isinstance(s_mark, Ray):
            continue
        flank = straight_through(pg, f, v2)
        if flank is None:
            continue
        v1, v3 = flank
        for v in fibers[f[v2]]:
            if v in (v1, v2, v3):
                continue
            t_mark = pg.omega[v]
            if isinstance(t_mark, Ray) and t_mark.leg == s_mark.leg and s_mark.t < t_mark.t:
                if not t_mark.t - s_mark.t < delta:
                    out.append(
                        Violation(
                            "C3",
                            (v1, v2, v3, v),
                            f"t - s = {t_mark.t - s_mark.t} is not below delta = {delta}",
                        )
                    )
    return out


def check_cover(pg: PlacedGraph, f: Mapping[int, CVertex], delta: Fraction) -> list[Violation]:
    return check_c1(pg, f) + check_c2(pg, f) + check_c3(pg, f, delta)


def verify_cover(pg: PlacedGraph, f: Mapping[int, CVertex], delta: Fraction) -> CombCover:
    problems = check_cover(pg, f, delta)
    if problems:
        raise AssertionError("; ".join(map(str, problems)))
    return CombCover(dict(f), Fraction(delta))


def find_istar(pg: PlacedGraph, f: Mapping[int, CVertex]) -> int:
    """Smallest i such that no vertex sent into the branch-star carries Ray(i, .)."""
    used = {
        pg.omega[v].leg
        for v, c in f.items()
        if in_branch_star(c) and isinstance(pg.omega[v], Ray)
    }
    for i in range(pg.n + 1):
        if i not in used:
            return i
    raise NotFound(f"every leg 0..{pg.n} is used in the branch-star; f violates C1 or C2")


# -- search -----------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchStats:
    nodes: int
    seconds: float


@dataclass(frozen=True)
class Sat:
    witness: CombCover
    stats: SearchStats
    verdict: str = "Sat"


@dataclass(frozen=True)
class Unsat:
    stats: SearchStats
    verdict: str = "Unsat"


@dataclass(frozen=True)
class BudgetExceeded:
    stats: SearchStats
    verdict: str = "BudgetExceeded"


SearchOutcome = Sat | Unsat | BudgetExceeded


class _OutOfBudget(Exception):
    pass


class _Search:
    """Backtracking over a spanning-tree order of G.

    Completeness.  The image of a cover is connected (C2) and has at most |V|
    vertices.  If it avoids Branch it lies on one leg, and sliding it toward the
    branch until its lowest vertex becomes Branch keeps C1 and C2 and only drops
    C3 premises, so some cover touches Branch whenever any cover exists.  Every
    image vertex is then within |V| - 1 of Branch, and the root can be placed at
    Branch or at Leg(1, j), j <= |V| - 1, the leg being fixed by the leg
    permutation symmetry of C.  Legs are introduced in order 1, 2, ... for the
    same reason.  This is tighter than the |V| + 1 bound and loses no cover up to
    symmetry.
    """

    def __init__(self, pg: PlacedGraph, delta: Fraction, budget: int | None, shared=None, deadline=None):
        g = pg.graph
        if not g.vertices:
            raise InvalidInput("empty graph")
        if not g.is_connected():
            raise InvalidInput("placed graph is not connected")
        if delta <= 0:
            raise InvalidInput("delta must be positive")
        self.pg = pg
        self.n = pg.n
        self.delta = Fraction(delta)
        self.budget = budget
        self.shared = shared
        self.deadline = deadline  # wall-clock time.time() limit
        self.nodes = 0
        ids = g.sorted_vertices()
        root = max(ids, key=lambda v: (g.degree(v), -v))
        order, parent = [root], {root: None}
        stack = [root]
        seen = {root}
        order = []
        while stack:
            x = stack.pop()
            order.append(x)
            for y in sorted(g.adjacency[x], reverse=True):
                if y not in seen:
                    seen.add(y)
                    parent[y] = x
                    stack.append(y)
        self.order = order
        index = {v: k for k, v in enumerate(order)}
        self.index = index
        self.parent = [index[parent[v]] if parent[v] is not None else -1 for v in order]
        self.nbrs = [tuple(index[y] for y in g.adjacency[v]) for v in order]
        self.cls = [mark_class(pg.omega[v]) for v in order]
        self.param = [pg.omega[v].t if isinstance(pg.omega[v], Ray) else None for v in order]
        size = len(order)
        self.size = size
        self.jmax = max(size - 1, 1)
        self.K = self.jmax + 2

    # C vertex codes: 0 is Branch, ell * K + j is Leg(ell, j)
    def decode(self, code: int) -> CVertex:
        return BRANCH if code == 0 else Leg(code // self.K, code % self.K)

    def root_domain(self) -> list[int]:
        return [0] + [self.K + j for j in range(1, self.jmax + 1)]

    def _tick(self) -> None:
        self.nodes += 1
        if self.deadline is not None and self.nodes % 1024 == 0 and time.time() > self.deadline:
            raise _OutOfBudget
        if self.shared is not None and self.nodes % 512 == 0:
            counter, stop = self.shared
            with counter.get_lock():
                counter.value += 512
                total = counter.value
            if stop.value or (self.budget is not None and total > self.budget):
                raise _OutOfBudget
        elif self.budget is not None and self.nodes > self.budget:
            raise _OutOfBudget

    def solutions(self, roots: list[int] | None = None) -> Iterator[dict[int, CVertex]]:
        size, K, n, jmax = self.size, self.K, self.n, self.jmax
        delta, cls, param, nbrs, parent = self.delta, self.cls, self.param, self.nbrs, self.parent
        assign = [-1] * size
        fiber: dict[int, list[int]] = {}
        fiber_cls: dict[int, int] = {}
        lo = [0] * size  # assigned neighbours below / above on the leg
        hi = [0] * size
        leg_count = [0] * (n + 1)
        state = {"used": 0, "branch": 0, "minj": 0}

        def adj(a: int, b: int) -> bool:
            if a == 0 or b == 0:
                return a != b and (a + b) % K == 1
            return abs(a - b) == 1 and a // K == b // K

        def below(a: int, b: int) -> bool:
            # b is the lower neighbour of a (a is a leg vertex)
            return b == 0 or (b // K == a // K and b % K < a % K)

        def c3_straight(x: int) -> bool:
            # x just became straight-through; x plays v2 against its fiber
            s = param[x]
            if s is None:
                return True
            for v in fiber[assign[x]]:
                t = param[v]
                if v != x and t is not None and t > s and t - s >= delta:
                    return False
            return True

        def place(x: int, code: int) -> list | None:
            """Assign and check; return an undo log, or None if a constraint fails."""
            c = cls[x]
            if code in fiber_cls and fiber_cls[code] != c:
                return None
            for y in nbrs[x]:
                cy = assign[y]
                if cy >= 0 and not adj(code, cy):
                    return None
            members = fiber.get(code, ())
            t = param[x]
            if code and t is not None:
                for v in members:
                    s = param[v]
                    if s is not None and s < t and t - s >= delta and lo[v] and hi[v]:
                        return None
            log: list = []
            assign[x] = code
            fiber.setdefault(code, []).append(x)
            if code not in fiber_cls:
                fiber_cls[code] = c
                log.append(("cls", code))
            ell = code // K if code else 0
            leg_count[ell] += 1
            ok = True
            if code:
                for y in nbrs[x]:
                    cy = assign[y]
                    if cy < 0:
                        continue
                    if below(code, cy):
                        lo[x] += 1
                    else:
                        hi[x] += 1
            if code and lo[x] and hi[x] and not c3_straight(x):
                ok = False
            for y in nbrs[x]:
                cy = assign[y]
                if cy <= 0 or y == x:
                    continue
                was = lo[y] > 0 and hi[y] > 0
                if below(cy, code):
                    lo[y] += 1
                    log.append(("lo", y))
                else:
                    hi[y] += 1
                    log.append(("hi", y))
                if ok and not was and lo[y] and hi[y] and not c3_straight(y):
                    ok = False
            log.append(("x", x, code, ell))
            if not ok:
                undo(log)
                return None
            return log

        def undo(log: list) -> None:
            for item in reversed(log):
                kind = item[0]
                if kind == "x":
                    _, x, code, ell = item
                    fiber[code].pop()
                    if not fiber[code]:
                        del fiber[code]
                    leg_count[ell] -= 1
                    lo[x] = hi[x] = 0
                    assign[x] = -1
                elif kind == "cls":
                    del fiber_cls[item[1]]
                elif kind == "lo":
                    lo[item[1]] -= 1
                else:
                    hi[item[1]] -= 1

        def used_legs() -> int:
            for ell in range(n, 0, -1):
                if leg_count[ell]:
                    return ell
            return 0

        def rec(k: int, minj: int) -> Iterator[None]:
            self._tick()
            if k == size:
                if leg_count[0]:
                    yield None
                return
            if not leg_count[0] and minj > size - k:
                return
            pc = assign[parent[k]]
            if pc == 0:
                top = min(used_legs() + 1, n)
                cands = [ell * K + 1 for ell in range(1, top + 1)]
            else:
                j = pc % K
                cands = [pc - 1 if j > 1 else 0]
                if j < jmax:
                    cands.append(pc + 1)
            for code in cands:
                log = place(k, code)
                if log is None:
                    continue
                yield from rec(k + 1, min(minj, code % K) if code else 0)
                undo(log)

        for root in roots if roots is not None else self.root_domain():
            log = place(0, root)
            if log is None:
                continue
            for _ in rec(1, root % K if root else 0):
                yield {self.order[k]: self.decode(assign[k]) for k in range(size)}
            undo(log)


def iter_covers(pg: PlacedGraph, delta: Fraction, limit: int | None = None) -> Iterator[CombCover]:
    """All covers touching Branch, one per leg-permutation class (see _Search)."""
    search = _Search(pg, Fraction(delta), None)
    count = 0
    for f in _run(search):
        yield CombCover(f, Fraction(delta))
        count += 1
        if limit is not None and count >= limit:
            return


def _run(search: _Search, roots: list[int] | None = None) -> Iterator[dict[int, CVertex]]:
    return search.solutions(roots)


def default_budget() -> int | None:
    raw = os.environ.get("NODCOVER_BUDGET_NODES")
    if raw is None or raw == "":
        return None
    value = int(raw)
    if value <= 0:
        raise InvalidInput("NODCOVER_BUDGET_NODES must be positive")
    return value


def search_cover(
    pg: PlacedGraph,
    delta: Fraction,
    budget: int | None = None,
    jobs: int = 1,
    seconds: float | None = None,
) -> SearchOutcome:
    """First cover found, Unsat after an exhaustive search, or BudgetExceeded.

    `budget` caps search nodes and `seconds` wall-clock time; either limit
    yields BudgetExceeded, never a verdict.
    """
    delta = Fraction(delta)
    start = time.perf_counter()
    deadline = None if seconds is None else time.time() + seconds
    search = _Search(pg, delta, budget, deadline=deadline)
    if jobs > 1:
        return _search_parallel(pg, delta, budget, jobs, search.root_domain(), start, deadline)
    try:
        for f in _run(search):
            witness = verify_cover(pg, f, delta)
            return Sat(witness, SearchStats(search.nodes, time.perf_counter() - start))
    except _OutOfBudget:
        return BudgetExceeded(SearchStats(search.nodes, time.perf_counter() - start))
    return Unsat(SearchStats(search.nodes, time.perf_counter() - start))


_WORKER: dict = {}


def _worker_init(pg_doc, delta, budget, counter, stop, deadline) -> None:
    from .graphword import placed_graph_from_doc

    _WORKER.update(
        pg=placed_graph_from_doc(pg_doc), delta=delta, budget=budget, shared=(counter, stop), deadline=deadline
    )


def _worker_task(root: int):
    search = _Search(_WORKER["pg"], _WORKER["delta"], _WORKER["budget"], _WORKER["shared"], _WORKER["deadline"])
    counter, stop = _WORKER["shared"]
    try:
        for f in _run(search, [root]):
            stop.value = 1
            return ("sat", {v: (None if isinstance(c, Branch) else (c.ell, c.j)) for v, c in f.items()}, search.nodes)
    except _OutOfBudget:
        return ("budget", None, search.nodes)
    return ("unsat", None, search.nodes)


def _search_parallel(pg, delta, budget, jobs, roots, start, deadline=None) -> SearchOutcome:
    from .graphword import placed_graph_to_doc

    ctx = mp.get_context("spawn")
    counter = ctx.Value("q", 0)
    stop = ctx.Value("b", 0)
    nodes = 0
    verdict = "unsat"
    found = None
    with ctx.Pool(jobs, _worker_init, (placed_graph_to_doc(pg), delta, budget, counter, stop, deadline)) as pool:
        for kind, f, count in pool.imap_unordered(_worker_task, roots):
            nodes += count
            if kind == "sat" and found is None:
                found = f
                pool.terminate()
                break
            if kind == "budget":
                verdict = "budget"
    stats = SearchStats(nodes, time.perf_counter() - start)
    if found is not None:
        f = {v: (BRANCH if c is None else Leg(*c)) for v, c in found.items()}
        return Sat(verify_cover(pg, f, delta), stats)
    if verdict == "budget":
        return BudgetExceeded(stats)
    return Unsat(stats)


# -- cover documents ----------------------------------------------------------------------


def cover_to_doc(cover: CombCover) -> dict:
    f = {}
    for v in sorted(cover.f):
        c = cover.f[v]
        f[str(v)] = "branch" if isinstance(c, Branch) else {"leg": c.ell, "j": c.j}
    return {"delta": format_fraction(cover.delta), "f": f}


def cover_from_doc(doc: dict) -> CombCover:
    try:
        f: dict[int, CVertex] = {}
        for key, value in doc["f"].items():
            f[int(key)] = BRANCH if value == "branch" else Leg(int(value["leg"]), int(value["j"]))
        return CombCover(f, parse_fraction(doc["delta"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed cover document: {exc}") from exc


def dump_cover(cover: CombCover) -> str:
    return json.dumps(cover_to_doc(cover), indent=2) + "\n"
