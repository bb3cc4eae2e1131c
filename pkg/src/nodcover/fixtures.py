"""Bundled inputs with provenance notes, addressable from the CLI as `fixture:NAME`."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .graphword import BRANCH, ORIGIN, CVertex, PlacedGraph, Ray, c_vertex
from .ingram import ingram_word, star


@dataclass(frozen=True)
class Fixture:
    name: str
    placed: PlacedGraph
    note: str
    cover: Mapping[int, CVertex] | None = field(default=None, hash=False)
    delta: Fraction | None = None


def _path(n: int, marks: list) -> PlacedGraph:
    return PlacedGraph.build(n, dict(enumerate(marks)), [(p, p + 1) for p in range(len(marks) - 1)])


def template_marks(n: int, k: int, t: Fraction = Fraction(1)) -> list:
    """Marks of a wrapping pattern of length k with every ray parameter equal to t."""
    return [ORIGIN if p % 2 else Ray((p // 2) % (n + 1), t) for p in range(k + 1)]


def fig3() -> Fixture:
    """Seventeen-vertex pattern for n = 3 crossing from leg 3 to leg 1."""
    h = Fraction(1, 2)
    rays = [
        Ray(0, h), Ray(1, Fraction(3, 4)), Ray(2, Fraction(0)), Ray(3, Fraction(1)),
        Ray(0, Fraction(2, 5)), Ray(1, h), Ray(2, Fraction(1, 3)), Ray(3, h), Ray(0, Fraction(1)),
    ]
    marks = []
    for r in rays:
        marks += [r, ORIGIN]
    pg = _path(3, marks[:-1])
    images = [c_vertex(3, 5 - p) for p in range(5)] + [BRANCH, c_vertex(2, 1), BRANCH]
    images += [c_vertex(1, j) for j in range(1, 10)]
    return Fixture(
        "fig3",
        pg,
        "the across-the-branch example for n=3 with the listed marks and images",
        dict(enumerate(images)),
    )


def fig4() -> Fixture:
    """Four patterns for n = 4 joined into one path; the layout is reconstructed from the caption.

    Z4 (k=10) goes away on leg 1 from C(1,11); Z3 (k=20) starts at the same
    vertex and crosses to leg 2; Z2 (k=20) crosses from leg 3 to leg 2 and ends
    where Z3 ends; Z1 (k=30) starts where Z2 starts and crosses to leg 4.
    """
    n = 4
    z4 = [c_vertex(1, 11 + p) for p in range(11)]
    z3 = [c_vertex(1, 11 - p) for p in range(12)] + [c_vertex(2, p - 11) for p in range(12, 21)]
    z2 = [c_vertex(3, 11 - p) for p in range(12)] + [c_vertex(2, p - 11) for p in range(12, 21)]
    z1 = [c_vertex(3, 11 - p) for p in range(12)] + [c_vertex(4, p - 11) for p in range(12, 31)]
    m10, m20, m30 = (template_marks(n, k) for k in (10, 20, 30))
    # walk: Z4 backwards to the shared start, Z3 forwards, Z2 backwards, Z1 forwards
    marks = m10[::-1] + m20[1:] + m20[::-1][1:] + m30[1:]
    images = z4[::-1] + z3[1:] + z2[::-1][1:] + z1[1:]
    return Fixture(
        "fig4",
        _path(n, marks),
        "wrapping complex for n=4 with k = 30, 20, 20, 10; images reconstructed so that C(1,11) is a "
        "start-type reversal point of Z3 and Z4",
        dict(enumerate(images)),
    )


def fig4_patterns() -> dict[str, tuple[int, ...]]:
    """Vertex ids of Z1..Z4 in the fig4 path, each listed from w_0."""
    return {
        "Z4": tuple(range(10, -1, -1)),
        "Z3": tuple(range(10, 31)),
        "Z2": tuple(range(50, 29, -1)),
        "Z1": tuple(range(50, 81)),
    }


FIG5_LEGS = (
    (Ray(3, Fraction(1)), ORIGIN, Ray(0, Fraction(1))),
    (Ray(3, Fraction(1)), ORIGIN, Ray(1, Fraction(0)), ORIGIN, Ray(0, Fraction(1))),
    (Ray(3, Fraction(1)), ORIGIN, Ray(2, Fraction(1, 2)), ORIGIN, Ray(1, Fraction(1)), ORIGIN, Ray(0, Fraction(1))),
    (Ray(3, Fraction(1)), ORIGIN, Ray(2, Fraction(1))),
)


def fig5_word() -> Fixture:
    """The 4-od word of the expansion example (n = 3); legs listed branch first."""
    marks = {0: FIG5_LEGS[0][0]}
    edges = []
    v = 1
    for leg in FIG5_LEGS:
        prev = 0
        for mark in leg[1:]:
            marks[v] = mark
            edges.append((prev, v))
            prev, v = v, v + 1
    return Fixture("fig5-word", PlacedGraph.build(3, marks, edges), "expansion example word, n=3")


def fig5_edge() -> Fixture:
    pg = PlacedGraph.build(3, {0: ORIGIN, 1: Ray(2, Fraction(1, 3))}, [(0, 1)])
    return Fixture("fig5-edge", pg, "single edge u=o, v=b(2,1/3) expanded in the same example")


def path_fixture(n: int = 2, length: int = 5) -> Fixture:
    """Alternating Origin / Ray(0, 1) path covered straight up leg 1."""
    marks = [ORIGIN if p % 2 else Ray(0, Fraction(1)) for p in range(length)]
    return Fixture(
        f"path{n}",
        _path(n, marks),
        "alternating path that never advances its leg index",
        {p: c_vertex(1, p + 1) for p in range(length)},
        Fraction(1, 4),
    )


def _registry() -> dict[str, Callable[[], Fixture]]:
    out: dict[str, Callable[[], Fixture]] = {}
    for n in (2, 3, 4):
        out[f"star{n}"] = lambda n=n: Fixture(f"star{n}", star(n), f"star with centre o and tips b(i,1), n={n}")
        out[f"ingram{n}"] = lambda n=n: Fixture(f"ingram{n}", ingram_word(n).placed, f"Ingram's graph-word, n={n}")
    out.update({"fig3": fig3, "fig4": fig4, "fig5-word": fig5_word, "fig5-edge": fig5_edge, "path2": path_fixture})
    return out


FIXTURES = _registry()


def load_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
