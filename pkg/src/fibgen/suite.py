"""The reference-example suite: each check rebuilds a known example from
scratch and verifies its exact verdicts within a time budget."""

from __future__ import annotations

import time
import traceback
from dataclasses import dataclass, field
from typing import Callable

from .catalogue import BUILTIN_POINTED, arrow_deloop, build, builtin_fibrations, parse_category, set_deloop
from .classify import (
    acyclic_iff_rlp_check,
    classify_object,
    is_fibered_preorder,
    is_gaunt_generic,
    is_generic,
    is_skeletal_generic,
    is_split_generic,
    is_weak_generic_stack,
)
from .constructions.bases import arrow_category, finset_skel
from .constructions.derived import skeletal_generic_candidate, split_from_weak, stack_members, subfibration_members
from .constructions.internal import family_members
from .errors import ImplicationViolated
from .fibration import (
    Fibration,
    as_functor,
    cartesian_flags,
    fibration_failure,
    is_pullback_square,
    is_split,
)
from .fincat import category_predicates
from .search import REQUIRED, counterexample_search


@dataclass
class CheckResult:
    anchor: str
    title: str
    passed: bool
    seconds: float
    limit: float
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"anchor": self.anchor, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "limit": self.limit, "details": self.details}


def _split_not_skeletal() -> tuple[bool, dict]:
    art = build("externalize:walkingIso@finset_skel:2")
    fib, T = art.fibration, art.T
    split = is_split_generic(fib, art.cleavage, T)
    skel = is_skeletal_generic(fib, T)
    ok = bool(split) and not skel
    d = {"split": bool(split), "skeletal": bool(skel)}
    if not skel:
        w = skel.witness
        B = fib.base
        picks = [family_members(fib, int(fib.total.src[f])) for f in w["maps"]]
        us = w["baseMaps"]
        distinct = us[0] != us[1] and all(B.src[u] == B.src[us[0]] for u in us)
        d["witness"] = {"X": fib.total.obj_labels[w["X"]], "baseMaps": [B.mor_labels[u] for u in us]}
        ok = ok and distinct and picks[0] == picks[1]
    return ok, d


def _delooping() -> tuple[bool, dict]:
    art = build("externalize:deloopZ2")
    fib, T = art.fibration, art.T
    E = fib.total
    hom = E.hom(T, T)
    n_cart = int(cartesian_flags(fib.p)[hom].sum())
    skel, gaunt = is_skeletal_generic(fib, T), is_gaunt_generic(fib, T)
    return bool(skel) and not gaunt and n_cart == 2, {
        "skeletal": bool(skel), "gaunt": bool(gaunt), "cartesianEndomorphisms": n_cart}


def _skeleton() -> tuple[bool, dict]:
    ok, rows = True, {}
    for name in ("walkingIso", "deloopZ2", "walkingArrow", "twoClassGroupoid"):
        C = parse_category(name)
        pt = skeletal_generic_candidate(C, 2)
        flags = category_predicates(C)
        skel = bool(is_skeletal_generic(pt.fibration, pt.T))
        split = bool(is_split_generic(pt.fibration, pt.splitting, pt.T))
        gaunt = bool(is_gaunt_generic(pt.fibration, pt.T))
        good = skel and split == flags.skeletal and gaunt == flags.gaunt
        rows[name] = {"skeletal": skel, "split": split, "gaunt": gaunt,
                      "categorySkeletal": flags.skeletal, "categoryGaunt": flags.gaunt}
        ok &= good
    return ok, rows


def _weak_to_split() -> tuple[bool, dict]:
    ok, rows = True, {}
    for expr in BUILTIN_POINTED:
        art = build(expr)
        if not isinstance(art.fibration, Fibration) or not is_generic(art.fibration, art.T):
            continue
        sw = split_from_weak(art.fibration, art.T)
        good = sw.checks["split"] and sw.checks["splitGeneric"] and sw.equivalence
        rows[expr] = {"split": sw.checks["split"], "splitGeneric": sw.checks["splitGeneric"],
                      "equivalence": sw.equivalence}
        ok &= good
    return ok and bool(rows), rows


def _strength() -> tuple[bool, dict]:
    violations, objects = [], 0
    for expr in builtin_fibrations():
        art = build(expr)
        for t in range(art.functor.dom.n_obj):
            objects += 1
            try:
                classify_object(art.fibration, t, art.cleavage)
            except ImplicationViolated as e:
                violations.append({"fibration": expr, "object": t, "error": str(e)})
    cat = counterexample_search()
    found = {f"{a}&!{b}": cat.found(a, b) is not None for a, b in REQUIRED}
    iso_T = build("externalize:walkingIso@finset_skel:2").T
    deloop_T = build("intdeloop:1->Z2@arrow").T
    named = {
        "acyclic&!skeletal at walking-iso T": ["fam:walkingIso:2", iso_T] in cat.row("acyclic", "skeletal")["all"],
        "skeletal&!acyclic at arrow delooping T": ["intdeloop:1->Z2@arrow", deloop_T] in cat.row("skeletal", "acyclic")["all"],
    }
    no_gaunt_sep = cat.found("gaunt", "skeletal") is None
    ok = not violations and all(found.values()) and all(named.values()) and no_gaunt_sep
    return ok, {"objectsAudited": objects, "violations": violations, "separations": found, "named": named,
                "gaunt&!skeletal": "none within bounds" if no_gaunt_sep else cat.found("gaunt", "skeletal")}


def _rlp() -> tuple[bool, dict]:
    rows, ok = {}, True
    setups = {
        "finset_skel(2) x Z2": set_deloop("Z2", 2),
        "arrow base x (1->Z2)": arrow_deloop("Z2"),
        "finset_skel(2) x trivial": set_deloop("1", 2),
        "arrow base x trivial": arrow_deloop("1"),
    }
    for name, (ext, G) in setups.items():
        rep = acyclic_iff_rlp_check(ext, G)
        rows[name] = {"acyclic": rep.acyclic, "rlpAll": all(rep.rlp.values()), "agree": rep.agree}
        ok &= rep.agree
    trivial_ok = rows["finset_skel(2) x trivial"]["rlpAll"] and rows["arrow base x trivial"]["rlpAll"]
    expected = (rows["finset_skel(2) x Z2"]["acyclic"] and not rows["arrow base x (1->Z2)"]["acyclic"])
    return ok and trivial_ok and expected, rows


def _stack() -> tuple[bool, dict]:
    art = build("stack:gsets:Z2:4:2triv->1")
    q = art.functor
    gen = is_generic(art.fibration, art.T)
    weak = is_weak_generic_stack(art.fibration, art.T)
    witness = None if gen else q.dom.obj_labels[gen.witness["X"]]
    ok = not gen and witness is not None and witness.startswith("rho→1") and bool(weak)
    B = finset_skel(3)
    mismatched = []
    for pi in range(B.n_mor):
        if subfibration_members(B, pi) != stack_members(B, pi):
            mismatched.append(B.mor_labels[pi])
    ok = ok and not mismatched
    return ok, {"generic": bool(gen), "witness": witness, "weakStack": bool(weak),
                "finsetMapsChecked": B.n_mor, "finsetMismatches": mismatched}


def _foundations() -> tuple[bool, dict]:
    B = finset_skel(2)
    A, cod = arrow_category(B)
    flags = cartesian_flags(cod)
    disagree = []
    for m, (f, g, x, y) in enumerate(A.mor_keys):
        if bool(flags[m]) != is_pullback_square(B, g, y, x, f):
            disagree.append(m)
    fib_ok = {}
    for name in ("finset_skel:1", "booleanSquare"):
        fib_ok[name] = fibration_failure(arrow_category(parse_category(name))[1]) is None
    cospan_fail = fibration_failure(arrow_category(parse_category("cospan"))[1])
    skel2_fail = fibration_failure(cod)
    split_ok = {}
    for expr in builtin_fibrations():
        art = build(expr)
        if art.cleavage is not None:
            split_ok[expr] = isinstance(art.fibration, Fibration) and is_split(art.cleavage)
    ok = not disagree and all(fib_ok.values()) and cospan_fail is not None and all(split_ok.values())
    return ok, {
        "squares": A.n_mor, "cartesianVsPullbackDisagreements": disagree,
        "codomainFibration": fib_ok,
        "cospanWitness": cospan_fail,
        "finsetSkel2Witness": None if skel2_fail is None else {
            "u": B.mor_labels[skel2_fail[0]], "E": A.obj_labels[skel2_fail[1]]},
        "splitCanonicalCleavages": split_ok,
    }


def _preorder() -> tuple[bool, dict]:
    rows, ok = {}, True
    for expr in builtin_fibrations():
        art = build(expr)
        if not is_fibered_preorder(art.fibration):
            continue
        bad = [t for t in range(art.functor.dom.n_obj)
               if bool(is_skeletal_generic(art.fibration, t)) != bool(is_gaunt_generic(art.fibration, t))]
        rows[expr] = {"objects": art.functor.dom.n_obj, "disagreements": bad}
        ok &= not bad
    return ok and bool(rows), rows


CHECKS: list[tuple[str, str, float, Callable[[], tuple[bool, dict]]]] = [
    ("split-not-skeletal", "walking-iso T is split generic but not skeletal", 1.0, _split_not_skeletal),
    ("delooping", "deloop(Z/2) T is skeletal, not gaunt, with 2 cartesian endomorphisms", 1.0, _delooping),
    ("skeleton", "skeleton candidate: skeletal; split iff C skeletal; gaunt iff C gaunt", 5.0, _skeleton),
    ("weak-to-split", "split fibration of a generic object is split, split generic and equivalent", 10.0,
     _weak_to_split),
    ("strength-diagram", "implication audit on every built-in; search finds the strict separations", 120.0,
     _strength),
    ("rlp", "acyclic iff right lifting property against all monos", 30.0, _rlp),
    ("stack-completion", "stack completion: weak generic, not generic; sets need no covers", 30.0, _stack),
    ("foundations", "cartesian iff pullback; codomain fibrations; split canonical cleavages", 30.0, _foundations),
    ("preorder-coincidence", "skeletal and gaunt agree on fibered preorders", 5.0, _preorder),
]


def clear_caches() -> None:
    """Drop memoized builds so each check is timed from scratch."""
    from . import catalogue
    from .constructions import bases

    for fn in (catalogue._build, catalogue.parse_category, catalogue.set_deloop, catalogue.arrow_deloop,
               bases.finset_skel):
        fn.cache_clear()


def run_suite(only: list[str] | None = None) -> list[CheckResult]:
    results = []
    for anchor, title, limit, fn in CHECKS:
        if only and anchor not in only:
            continue
        clear_caches()
        start = time.perf_counter()
        try:
            passed, details = fn()
        except Exception as e:  # a crashing check is a failed check
            passed, details = False, {"error": f"{type(e).__name__}: {e}", "trace": traceback.format_exc(limit=3)}
        seconds = time.perf_counter() - start
        if seconds > limit:
            details["overTime"] = True
            passed = False
        results.append(CheckResult(anchor, title, bool(passed), seconds, limit, details))
    return results


__all__ = ["CHECKS", "CheckResult", "run_suite"]
