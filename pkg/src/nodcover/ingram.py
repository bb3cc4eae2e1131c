"""Ingram's graph-word, the expansion tower over the star, and the no-cover check."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .combcover import SearchOutcome, search_cover
from .expansion import Expansion, ExpansionWord, chi_expand
from .graphword import ORIGIN, PlacedGraph, Ray

log = logging.getLogger(__name__)


class DeltaOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class IngramWord:
    n: int
    word: ExpansionWord

    @property
    def placed(self) -> PlacedGraph:
        return self.word.word


def ingram_marks(n: int, i: int) -> list:
    """Marks of leg i from the branch (p = 0) to the endpoint (p = 2n + 2)."""
    out = []
    for p in range(2 * n + 3):
        if p in (0, 2 * n + 2):
            out.append(Ray(0, Fraction(1)))
        elif p % 2:
            out.append(ORIGIN)
        else:
            out.append(Ray(p // 2, 1 - Fraction(i, n)))
    return out


def ingram_word(n: int) -> IngramWord:
    """Branch is vertex 0; vertex 1 + i(2n+2) + (p-1) is G(i, p), so canonical leg order is 0..n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    length = 2 * n + 2
    marks = {0: Ray(0, Fraction(1))}
    edges = []
    for i in range(n + 1):
        prev = 0
        for p, mark in enumerate(ingram_marks(n, i)[1:], start=1):
            v = 1 + i * length + p - 1
            marks[v] = mark
            edges.append((prev, v))
            prev = v
    return IngramWord(n, ExpansionWord.from_placed_graph(PlacedGraph.build(n, marks, edges)))


def star(n: int) -> PlacedGraph:
    """Centre 0 marked Origin, tip i + 1 marked Ray(i, 1) for i = 0..n."""
    marks = {0: ORIGIN}
    marks.update({i + 1: Ray(i, Fraction(1)) for i in range(n + 1)})
    return PlacedGraph.build(n, marks, [(0, i + 1) for i in range(n + 1)])


@dataclass
class Tower:
    """Level 0 is the base graph; level L + 1 is the expansion of level L by the word."""

    word: IngramWord
    base: PlacedGraph
    _expansions: list[Expansion] = field(default_factory=list)

    def level(self, depth: int) -> PlacedGraph:
        if depth == 0:
            return self.base
        return self.expansion(depth).expanded

    def expansion(self, depth: int) -> Expansion:
        """The Expansion producing level `depth` (>= 1), generated on demand."""
        while len(self._expansions) < depth:
            current = self.level(len(self._expansions))
            self._expansions.append(chi_expand(current, self.word.word))
        return self._expansions[depth - 1]


def build_tower(n: int, depth: int, base: PlacedGraph | None = None) -> Tower:
    tower = Tower(ingram_word(n), base if base is not None else star(n))
    if depth <= 2:
        tower.level(depth)
    return tower


@dataclass(frozen=True)
class Verdict:
    n: int
    delta: Fraction
    levels: dict[int, SearchOutcome]

    @property
    def verdict(self) -> str:
        names = {outcome.verdict for outcome in self.levels.values()}
        for name in ("Sat", "BudgetExceeded"):
            if name in names:
                return name
        return "Unsat"


def check_delta(n: int, delta: Fraction) -> Fraction:
    delta = Fraction(delta)
    if not 0 < delta < Fraction(1, n):
        raise DeltaOutOfRange(f"delta = {delta} is outside (0, 1/{n})")
    return delta


def verify_no_cover(
    n: int,
    delta: Fraction,
    budget: int | None = None,
    levels: tuple[int, ...] = (1,),
    jobs: int = 1,
    seconds: float | None = None,
) -> Verdict:
    """Search for covers of the chosen tower levels (level 1 is the word itself)."""
    delta = check_delta(n, delta)
    tower = build_tower(n, max(levels))
    results = {}
    for depth in levels:
        outcome = search_cover(tower.level(depth), delta, budget, jobs, seconds)
        if outcome.verdict == "Sat":
            log.error("cover found at level %d for n=%d, delta=%s: the no-cover claim fails here", depth, n, delta)
        results[depth] = outcome
    return Verdict(n, delta, results)
