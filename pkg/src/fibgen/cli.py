"""Command-line interface: ``fibgen validate | build | classify | paper-examples | search``."""

from __future__ import annotations

import argparse
import json
import sys

from . import classify as cls
from .catalogue import BUILDER_HELP, Artifact, Workspace, build, resolve, resolve_object, summarize
from .errors import FibgenError, ImplicationViolated, ParseError
from .fibration import Fibration, fibration_failure, is_split, make_cleavage
from .fincat import validate_category, validate_functor

EXIT_OK, EXIT_INPUT, EXIT_AUDIT, EXIT_SUITE = 0, 1, 2, 3


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, ensure_ascii=False, default=str))
    else:
        print(text)


# -- validate ----------------------------------------------------------------------------------


def cmd_validate(args) -> int:
    target = args.target
    if target.endswith(".json"):
        try:
            with open(target, encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise ParseError(f"no such file {target!r}") from None
        except json.JSONDecodeError as e:
            raise ParseError(f"{target}: malformed JSON ({e.msg} at line {e.lineno})") from None
        if isinstance(doc, dict) and "objMap" in doc:
            from .catalogue import _category_ref

            dom, cod = _category_ref(doc.get("dom")), _category_ref(doc.get("cod"))
            F = validate_functor(doc, dom, cod)
            bad = fibration_failure(F)
            verdict = "fibration" if bad is None else "functor"
            _emit(args, {"ok": True, "kind": verdict, "objects": dom.n_obj, "morphisms": dom.n_mor,
                         "fibrationWitness": bad},
                  f"OK: {verdict} ({dom.n_obj} objects, {dom.n_mor} morphisms over {cod.n_obj} objects)"
                  + ("" if bad is None else f"; not a fibration: no cartesian lift of {bad[0]} at {bad[1]}"))
            return EXIT_OK
        C = validate_category(doc)
        _emit(args, {"ok": True, "kind": "category", "objects": C.n_obj, "morphisms": C.n_mor},
              f"OK: category ({C.n_obj} objects, {C.n_mor} morphisms)")
        return EXIT_OK
    art = build(target)
    if art.kind == "category":
        C = validate_category(art.category)
        _emit(args, {"ok": True, "kind": "category", "objects": C.n_obj, "morphisms": C.n_mor},
              f"OK: category ({C.n_obj} objects, {C.n_mor} morphisms)")
    else:
        s = summarize(art)
        _emit(args, {"ok": True, **s}, f"OK: {s['kind']} ({s['objects']} objects, {s['morphisms']} morphisms)")
    return EXIT_OK


# -- build -----------------------------------------------------------------------------------------


def _render_summary(art: Artifact, s: dict) -> str:
    if s["kind"] == "category":
        return f"category {s['name']}: {s['objects']} objects, {s['morphisms']} morphisms"
    lines = [
        f"{s['kind']} {s['name']}: {s['objects']} objects, {s['morphisms']} morphisms",
        f"  base {s['base']['name']}: {s['base']['objects']} objects, {s['base']['morphisms']} morphisms",
        "  fiber sizes: " + ", ".join(f"{k}: {v}" for k, v in s["fiberSizes"].items()),
    ]
    if s["cleavage"]:
        lines.append(f"  canonical cleavage: {s['cleavage']}")
    if s["T"] is not None:
        lines.append(f"  distinguished object T = {s['T']['index']} ({s['T']['label']})")
    if "equivalence" in s:
        lines.append(f"  comparison functor is an equivalence: {'yes' if s['equivalence'] else 'no'}")
    return "\n".join(lines)


def cmd_build(args) -> int:
    art = build(args.expr)
    s = summarize(art)
    name = args.name or args.expr
    if args.workspace:
        Workspace(args.workspace).store(name, art)
        s["storedAs"] = name
    text = _render_summary(art, s)
    if args.workspace:
        text += f"\n  stored in {args.workspace} as {name!r}"
    _emit(args, s, text)
    return EXIT_OK


# -- classify ------------------------------------------------------------------------------------------


def _yes(v) -> str:
    return "n/a" if v is None else ("yes" if v else "no")


def _describe_witness(art: Artifact, flag: str, w: dict) -> str:
    q = art.functor
    E, B = q.dom, q.cod
    parts = []
    if "X" in w:
        parts.append(f"X = {w['X']} ({E.obj_labels[w['X']]})")
    if w.get("maps"):
        parts.append("cartesian maps " + ", ".join(str(f) for f in w["maps"]))
    if w.get("baseMaps"):
        parts.append("base maps " + ", ".join(f"{u} ({B.mor_labels[u]})" for u in w["baseMaps"]))
    if "span" in w:
        a, b = w["span"]
        parts.append(f"cartesian span U = {w['U']} ({E.obj_labels[w['U']]}) with U→T = {a}, "
                     f"U→X = {b} over mono {w['mono']} ({B.mor_labels[w['mono']]}) has no filler")
    if "reason" in w:
        parts.append(w["reason"])
    return "; ".join(parts)


def _render_report(art: Artifact, rep: cls.GenericReport, cleavage_note: str) -> str:
    E = art.functor.dom
    lines = [f"fibered category {E.name}: {E.n_obj} objects over {art.functor.cod.name}",
             f"candidate {rep.candidate} ({rep.label})"]
    for flag in ("generic", "skeletal", "gaunt", "acyclic", "weakStack"):
        v = rep.flags.get(flag)
        note = {"acyclic": " [all monos]", "weakStack": f" [{rep.options['covers']} covers]"}.get(flag, "")
        lines.append(f"  {flag:<9} {_yes(v):<4} {cls.rosetta_name(flag)}{note}")
        if v is False and flag in rep.witnesses:
            lines.append(f"            witness: {_describe_witness(art, flag, rep.witnesses[flag])}")
    v = rep.flags.get("split")
    lines.append(f"  {'split':<9} {_yes(v):<4} split generic [{cleavage_note}]")
    if v is False and "split" in rep.witnesses:
        lines.append(f"            witness: {_describe_witness(art, 'split', rep.witnesses['split'])}")
    strongest = rep.strongest()
    lines.append("summary: " + ", ".join(f"{k}: {_yes(rep.flags.get(k))}" for k in
                                         ("split", "generic", "skeletal", "gaunt", "acyclic", "weakStack")))
    lines.append("Rosetta row: " + (cls.rosetta_name(strongest) if strongest else "not even weak generic"))
    return "\n".join(lines)


def cmd_classify(args) -> int:
    ws = Workspace(args.workspace) if args.workspace else None
    art = resolve(args.artifact, ws)
    if art.kind != "fibration":
        raise FibgenError(f"{args.artifact} is a category; classify needs a fibered category")
    cleavage, note = None, "no cleavage"
    if args.cleavage == "canonical" and art.cleavage is not None:
        cleavage, note = art.cleavage, "canonical splitting"
    elif args.cleavage in ("canonical", "leastIndex") and isinstance(art.fibration, Fibration):
        cl = make_cleavage(art.fibration, "leastIndex")
        if is_split(cl):
            cleavage, note = cl, "least-index cleavage"
        else:
            note = "least-index cleavage is not split"
    objects = range(art.functor.dom.n_obj) if args.object == "all" else [resolve_object(art, args.object)]
    reports = [cls.classify_object(art.fibration, t, cleavage, covers=args.covers, acyclic=not args.no_acyclic)
               for t in objects]
    payload = [r.to_json() for r in reports]
    text = "\n\n".join(_render_report(art, r, note) for r in reports)
    _emit(args, payload[0] if len(payload) == 1 else {"reports": payload}, text)
    return EXIT_OK


# -- paper-examples ------------------------------------------------------------------------------------


def cmd_paper_examples(args) -> int:
    from .suite import run_suite

    if args.mutate:
        cls.MUTATIONS.add(args.mutate)
    try:
        results = run_suite(args.only)
    finally:
        cls.MUTATIONS.discard(args.mutate)
    ok = all(r.passed for r in results)
    width = max(len(r.anchor) for r in results) if results else 0
    text = "\n".join(
        f"{'PASS' if r.passed else 'FAIL'}  {r.anchor:<{width}}  {r.seconds:7.2f}s / {r.limit:.0f}s  {r.title}"
        for r in results
    ) + f"\n{sum(r.passed for r in results)}/{len(results)} checks passed"
    _emit(args, {"passed": ok, "checks": [r.to_json() for r in results]}, text)
    return EXIT_OK if ok else EXIT_SUITE


# -- search -------------------------------------------------------------------------------------------------


def cmd_search(args) -> int:
    from .search import DEFAULT_BASES, SearchBounds, counterexample_search

    if args.zero:
        bounds = SearchBounds.zero()
    else:
        bases = tuple(args.bases.split(",")) if args.bases else DEFAULT_BASES
        bounds = SearchBounds(args.max_cat_morphisms, tuple(b for b in bases if b))
    cat = counterexample_search(bounds, jobs=args.jobs)
    lines = [f"{len(cat.candidates)} candidate fibered categories, {cat.objects_checked} objects classified"]
    for row in cat.rows:
        ex = row["example"]
        found = (f"{ex['fibration']} object {ex['object']} ({ex['label']})  [{row['count']} total]"
                 if ex else "none within bounds")
        lines.append(f"  {row['holds']:>9} but not {row['fails']:<9}  {found}")
    payload = cat.to_json()
    if not args.all_examples:
        payload = {**payload, "separations": [{k: v for k, v in r.items() if k != "all"} for r in cat.rows]}
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


# -- entry point ----------------------------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--workspace", default=argparse.SUPPRESS, metavar="FILE", help="JSON file of named artifacts")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, metavar="N", help="worker processes for search")

    p = argparse.ArgumentParser(
        prog="fibgen", parents=[common],
        description="Decide generic-object notions for finite fibered categories.",
        epilog=BUILDER_HELP, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="check a category/functor file or builder expression")
    v.add_argument("target")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("build", parents=[common], help="materialize a builder expression")
    b.add_argument("expr")
    b.add_argument("--name", help="artifact name in the workspace (default: the expression)")
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("classify", parents=[common], help="classify an object of a fibered category")
    c.add_argument("artifact", help="workspace name, builder expression or functor file")
    c.add_argument("object", nargs="?", default="T", help="object index, label, T (default) or all")
    c.add_argument("--cleavage", choices=("canonical", "leastIndex", "none"), default="canonical")
    c.add_argument("--covers", choices=("regular", "allEpis", "split"), default="regular")
    c.add_argument("--no-acyclic", action="store_true", help="skip the acyclicity check")
    c.set_defaults(func=cmd_classify)

    e = sub.add_parser("paper-examples", parents=[common], help="run the reference-example suite")
    e.add_argument("--only", nargs="*", metavar="ANCHOR")
    e.add_argument("--mutate", choices=("gaunt",), help=argparse.SUPPRESS)
    e.set_defaults(func=cmd_paper_examples)

    s = sub.add_parser("search", parents=[common], help="bounded counterexample search")
    s.add_argument("--max-cat-morphisms", type=int, default=6)
    s.add_argument("--bases", help="comma-separated base builders (finset_skel:1, finset_skel:2, deloops, maps)")
    s.add_argument("--zero", action="store_true", help="empty bounds")
    s.add_argument("--all-examples", action="store_true", help="list every separating object in JSON output")
    s.set_defaults(func=cmd_search)
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    for name, default in (("json", False), ("workspace", None), ("jobs", 1)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except ImplicationViolated as e:
        print(f"internal audit violation: {e}", file=sys.stderr)
        return EXIT_AUDIT
    except FibgenError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
