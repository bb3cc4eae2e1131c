"""The `nodcover` command line."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from .combcover import CombCover, InvalidInput, cover_from_doc, cover_to_doc, default_budget, search_cover
from .expansion import ExpansionWord, InvalidWord, chi_expand
from .fixtures import load_fixture
from .graphword import FormatError, PlacedGraph, canonical_form, dumps, placed_graph_from_doc, placed_graph_to_doc
from .ingram import DeltaOutOfRange, build_tower, check_delta, ingram_word, star, verify_no_cover

log = logging.getLogger("nodcover")


class UsageError(Exception):
    pass


# -- argument types --------------------------------------------------------------------------


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational like 1/4") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("delta must be positive")
    return value


def _delta_or_auto(text: str) -> Fraction | None:
    """`auto` stands for 1/(2n), resolved once n is known."""
    return None if text == "auto" else _fraction(text)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _n(text: str) -> int:
    value = _positive_int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("n must be at least 2")
    return value


def _levels(text: str) -> tuple[int, ...]:
    try:
        out = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("levels look like 1 or 1,2") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("levels start at 1")
    return out


# -- inputs ----------------------------------------------------------------------------------


def load_input(source: str) -> tuple[PlacedGraph, CombCover | None]:
    """A placed graph (and optional cover) from a JSON file or `fixture:NAME`."""
    if source.startswith("fixture:"):
        try:
            fx = load_fixture(source.split(":", 1)[1])
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        cover = CombCover(dict(fx.cover), fx.delta or Fraction(1, 4)) if fx.cover is not None else None
        return fx.placed, cover
    try:
        doc = json.loads(Path(source).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{source} is not JSON: {exc}") from None
    pg = placed_graph_from_doc(doc)
    cover = cover_from_doc(doc["cover"]) if "cover" in doc else None
    return pg, cover


def load_word(source: str) -> ExpansionWord:
    if source.startswith("ingram:"):
        try:
            return ingram_word(int(source.split(":", 1)[1])).word
        except ValueError as exc:
            raise UsageError(f"bad word {source!r}: {exc}") from None
    pg, _ = load_input(source)
    return ExpansionWord.from_placed_graph(pg)


def _emit(args, doc: dict, text: str) -> None:
    if args.json:
        sys.stdout.write(dumps(doc))
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _budget(args) -> int | None:
    return args.budget if args.budget is not None else default_budget()


# -- subcommands -----------------------------------------------------------------------------


def cmd_search(args) -> int:
    pg, _ = load_input(args.input)
    outcome = search_cover(pg, args.delta, _budget(args), args.jobs, args.seconds)
    doc = {"verdict": outcome.verdict, "nodes": outcome.stats.nodes, "seconds": round(outcome.stats.seconds, 6)}
    if outcome.verdict == "Sat":
        doc["cover"] = cover_to_doc(outcome.witness)
        if args.out:
            Path(args.out).write_text(dumps(cover_to_doc(outcome.witness)))
    _emit(args, doc, f"{outcome.verdict} after {outcome.stats.nodes} nodes ({outcome.stats.seconds:.3f}s)")
    if outcome.verdict == "BudgetExceeded":
        return 1
    if args.expect and outcome.verdict.lower() != args.expect:
        log.error("expected %s, got %s", args.expect, outcome.verdict)
        return 1
    return 0


def cmd_expand(args) -> int:
    word = load_word(args.word)
    pg, _ = load_input(args.input)
    current = pg
    for _ in range(args.levels):
        current = chi_expand(current, word).expanded
    text = dumps(placed_graph_to_doc(current))
    if args.out:
        Path(args.out).write_text(text)
    summary = {
        "vertices": len(current.graph.vertices),
        "edges": len(current.graph.edges),
        "equals_word": canonical_form(current) == canonical_form(word.word),
    }
    if args.json:
        sys.stdout.write(dumps({**summary, "graph": placed_graph_to_doc(current)}))
    elif args.out:
        print(f"{summary['vertices']} vertices, {summary['edges']} edges; equals word: {summary['equals_word']}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_classify(args) -> int:
    from .wrapping import (
        Across,
        Away,
        ClassificationImpossible,
        Toward,
        check_theorems,
        classify,
        detect_wrapping_patterns,
        meets_branch,
        pre_branch_star_segment,
    )

    pg, cover = load_input(args.input)
    if args.cover:
        cover = cover_from_doc(json.loads(Path(args.cover).read_text()))
    if cover is None:
        raise UsageError("classify needs a cover: embed one under \"cover\" or pass --cover")
    report = check_theorems(pg, cover.f)
    rows, lines = [], []
    for pattern in detect_wrapping_patterns(pg):
        try:
            cls = classify(pattern, cover.f, pg.n)
        except ClassificationImpossible as exc:
            lines.append(f"pattern {pattern.vertices[0]}..{pattern.vertices[-1]}: unclassifiable ({exc})")
            continue
        row = {"vertices": list(pattern.vertices), "k": pattern.k, "class": cls.name}
        if isinstance(cls, Across):
            row.update(l1=cls.leg1, l2=cls.leg2, j1=cls.j1, j2=cls.j2)
            row["trajectory"] = list(cls.trajectory.vertices)
            desc = f"Across {cls.leg1}->{cls.leg2}, j1={cls.j1}, j2={cls.j2}"
        elif isinstance(cls, (Away, Toward)):
            row.update(leg=cls.leg, j=cls.j)
            desc = f"{cls.name} on leg {cls.leg}, j={cls.j}"
        else:
            desc = cls.name
        line = f"pattern {pattern.vertices[0]}..{pattern.vertices[-1]} (k={pattern.k}): {desc}"
        if meets_branch(pattern, cover.f):
            segment = list(pre_branch_star_segment(pattern, cover.f))
            row["pre_branch_star_segment"] = segment
            line += f"; pre-branch-star segment {segment}"
        rows.append(row)
        lines.append(line)
    if not rows:
        lines.append("no wrapping patterns")
    for v in report.violations:
        lines.append(f"VIOLATION: {v}")
    _emit(args, {"patterns": rows, "violations": [str(v) for v in report.violations]}, "\n".join(lines))
    return 1 if report.violations else 0


def cmd_verify(args) -> int:
    try:
        delta = check_delta(args.n, args.delta if args.delta is not None else Fraction(1, 2 * args.n))
    except DeltaOutOfRange as exc:
        raise UsageError(str(exc)) from None
    verdict = verify_no_cover(args.n, delta, _budget(args), args.levels, args.jobs, args.seconds)
    rows = [
        {"level": lvl, "verdict": o.verdict, "nodes": o.stats.nodes, "seconds": round(o.stats.seconds, 6)}
        for lvl, o in sorted(verdict.levels.items())
    ]
    doc = {"n": args.n, "delta": str(delta), "verdict": verdict.verdict, "levels": rows}
    text = "\n".join(f"level {r['level']}: {r['verdict']} ({r['nodes']} nodes, {r['seconds']:.3f}s)" for r in rows)
    _emit(args, doc, f"{text}\nverdict: {verdict.verdict}")
    if args.figures:
        write_report(Path(args.figures), args.n, rows)
    return 0 if verdict.verdict == "Unsat" else 1


def write_report(folder: Path, n: int, rows: list[dict]) -> None:
    """Delimited summary plus figures of T0 and the routed word."""
    from .geometry import build_T0, layout_embedding, render_svg

    folder.mkdir(parents=True, exist_ok=True)
    with open(folder / "verify.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["level", "verdict", "nodes", "seconds"])
        writer.writeheader()
        writer.writerows(rows)
    t0 = build_T0(n)
    (folder / "t0.svg").write_text(render_svg([t0], {"title": f"T0, n={n}"}))
    emb = layout_embedding(ingram_word(n).placed, t0, 0.05)
    (folder / "word.svg").write_text(render_svg([emb], {"title": f"word near T0, n={n}"}))


def cmd_render(args) -> int:
    from .geometry import render_svg, scene_from_doc

    try:
        doc = json.loads(Path(args.input).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    objects, style = scene_from_doc(doc)
    Path(args.out).write_text(render_svg(objects, style))
    print(f"wrote {args.out}")
    return 0


def cmd_selftest(args) -> int:
    """Desk-scale reproduction: each line is one check with PASS or FAIL."""
    from .geometry import build_T0, composed_distance, epsilon_bound, layout_embedding
    from .wrapping import check_theorems, classify, detect_wrapping_patterns

    rng = random.Random(args.seed)
    results = []

    def check(name: str, fn) -> None:
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"check": name, "ok": ok, "detail": detail, "seconds": round(time.perf_counter() - start, 3)})

    def no_cover(n, delta):
        o = verify_no_cover(n, delta, _budget(args)).levels[1]
        return o.verdict == "Unsat", f"{o.verdict} in {o.stats.nodes} nodes"

    check("no cover n=2 delta=1/4", lambda: no_cover(2, Fraction(1, 4)))
    if not args.quick:
        check("no cover n=3 delta=1/6", lambda: no_cover(3, Fraction(1, 6)))
    for n in (2, 3, 4):
        check(f"star unsat n={n}", lambda n=n: (search_cover(star(n), Fraction(1, 4)).verdict == "Unsat", ""))
        check(
            f"fixed point n={n}",
            lambda n=n: (
                canonical_form(chi_expand(star(n), ingram_word(n).word).expanded)
                == canonical_form(ingram_word(n).placed),
                "",
            ),
        )

    def fig3():
        fx = load_fixture("fig3")
        report = check_theorems(fx.placed, fx.cover)
        cls = [classify(p, fx.cover, 3) for p in detect_wrapping_patterns(fx.placed)]
        ok = [(c.name, c.leg1, c.leg2, c.j1, c.j2) for c in cls] == [("Across", 3, 1, 5, 9)]
        ok = ok and not report.violations
        return ok, str(cls)

    check("figure 3 classification", fig3)

    def sizes():
        bad = []
        for n in (2, 3):
            tower = build_tower(n, 3)
            for lvl in range(4):
                got = len(tower.level(lvl).graph.edges)
                if got != (2 * n + 2) ** lvl * (n + 1):
                    bad.append((n, lvl, got))
        return not bad, str(bad)

    check("tower size law", sizes)

    def geometry():
        n = rng.choice([2, 3])
        t0 = build_T0(n)
        word = ingram_word(n).word
        first = layout_embedding(word.word, t0, 0.05)
        image = first.image_gamma_space()
        eps2 = epsilon_bound(image) / 2
        second = layout_embedding(star(n), image, eps2)
        problems = first.check() + image.check() + first.tip_alignment(image) + second.check()
        d = composed_distance(second)
        return not problems and d < 0.05 + eps2, f"n={n}, composed {d:.4g}; {problems[:2]}"

    check("geometry pipeline", geometry)
    for r in results:
        print(f"{'PASS' if r['ok'] else 'FAIL'} {r['check']} ({r['seconds']}s) {r['detail']}".rstrip())
    if args.json:
        sys.stdout.write(dumps({"results": results}))
    return 0 if all(r["ok"] for r in results) else 1


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nodcover", description="Combinatorial n-od covers of placed graphs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def budget_args(sp):
        sp.add_argument(
            "--budget", "--budget-nodes", dest="budget", type=_positive_int,
            help="search node budget (default NODCOVER_BUDGET_NODES)",
        )
        sp.add_argument("--seconds", type=float, help="wall-clock budget for the search")
        sp.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")

    sp = sub.add_parser("search", help="search for a delta-cover of a placed graph")
    sp.add_argument("--input", required=True, help="placed-graph JSON or fixture:NAME")
    sp.add_argument("--delta", type=_fraction, required=True)
    sp.add_argument("--out", "--output", dest="out", help="write the witness cover here")
    sp.add_argument("--expect", choices=["sat", "unsat"])
    sp.add_argument("--json", action="store_true")
    budget_args(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("expand", help="expand a placed graph by a word")
    sp.add_argument("--word", required=True, help="ingram:N, a word JSON file, or fixture:NAME")
    sp.add_argument("--input", required=True)
    sp.add_argument("--levels", "--iterations", dest="levels", type=_positive_int, default=1)
    sp.add_argument("--out", "--output", dest="out")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("classify", help="classify the wrapping patterns of a cover")
    sp.add_argument("--input", required=True)
    sp.add_argument("--cover", help="cover JSON, if not embedded in the input")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("verify", help="check that the word has no delta-cover")
    sp.add_argument("--n", type=_n, required=True)
    sp.add_argument("--delta", type=_delta_or_auto, default=None, help="rational in (0, 1/n); default auto = 1/(2n)")
    sp.add_argument("--levels", type=_levels, default=(1,), help="tower levels, e.g. 1,2")
    sp.add_argument("--figures", help="directory for the CSV summary and SVG figures")
    sp.add_argument("--json", action="store_true")
    budget_args(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("render", help="render a scene description to SVG")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", "--output", dest="out", required=True)
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("selftest", help="run the desk-scale reproduction checks")
    sp.add_argument("--quick", action="store_true", help="skip the n=3 search")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--budget", type=_positive_int)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nodcover: error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, InvalidInput, InvalidWord, DeltaOutOfRange) as exc:
        print(f"nodcover: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"nodcover: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
