"""Bounded search for objects separating one notion of generic object from another."""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .catalogue import build
from .classify import NOTIONS, classify_object
from .errors import AxiomError, BoundsTooLarge, UnknownBuilder
from .fincat import validate_category
from .constructions.bases import NAMED_CATEGORIES, monoid_category

MAX_CAT_MORPHISMS = 8
DEFAULT_BASES = ("finset_skel:1", "finset_skel:2", "deloops", "maps")
KNOWN_BASES = frozenset(DEFAULT_BASES)

# builder expressions per base family
DELOOP_BUILDERS = ("intdeloop:Z2@finset_skel:2", "intdeloop:1@finset_skel:2",
                   "intdeloop:1->Z2@arrow", "intdeloop:1->1@arrow")
MAP_BUILDERS = ("subfib:finset_skel:3:2->1", "stack:finset_skel:3:2->1",
                "subfib:gsets:Z2:4:2triv->1", "stack:gsets:Z2:4:2triv->1")

REQUIRED = (("split", "skeletal"), ("skeletal", "gaunt"), ("acyclic", "skeletal"),
            ("skeletal", "acyclic"), ("weakStack", "generic"))


@dataclass(frozen=True)
class SearchBounds:
    max_cat_morphisms: int = 6
    base_builders: tuple[str, ...] = DEFAULT_BASES

    @classmethod
    def zero(cls) -> "SearchBounds":
        return cls(0, ())

    def check(self) -> None:
        if self.max_cat_morphisms > MAX_CAT_MORPHISMS:
            raise BoundsTooLarge(f"maxCatMorphisms {self.max_cat_morphisms} exceeds {MAX_CAT_MORPHISMS}")
        unknown = set(self.base_builders) - KNOWN_BASES
        if unknown:
            raise UnknownBuilder(f"unknown base builders {sorted(unknown)}; known: {sorted(KNOWN_BASES)}")


def monoid_tables(order: int) -> list[list[list[int]]]:
    """Multiplication tables of all monoids of the given order, one per
    isomorphism class, with the unit at index 0."""
    if order == 1:
        return [[[0]]]
    rest = list(range(1, order))
    found: list[list[list[int]]] = []
    seen: set[tuple] = set()
    for values in itertools.product(range(order), repeat=len(rest) ** 2):
        table = [[a if g == 0 else (g if a == 0 else 0) for a in range(order)] for g in range(order)]
        it = iter(values)
        for g in rest:
            for f in rest:
                table[g][f] = next(it)
        try:
            validate_category(monoid_category(table))
        except AxiomError:
            continue
        canon = min(_relabel(table, (0,) + p) for p in itertools.permutations(rest))
        if canon not in seen:
            seen.add(canon)
            found.append([list(r) for r in canon])
    return found


def _relabel(table: list[list[int]], sigma: tuple[int, ...]) -> tuple:
    n = len(table)
    out = [[0] * n for _ in range(n)]
    for g in range(n):
        for f in range(n):
            out[sigma[g]][sigma[f]] = sigma[table[g][f]]
    return tuple(map(tuple, out))


def small_categories(max_morphisms: int) -> list[str]:
    """Category expressions with at most ``max_morphisms`` morphisms."""
    out = []
    for name, make in NAMED_CATEGORIES.items():
        if make().n_mor <= max_morphisms:
            out.append(name)
    for order in range(2, min(max_morphisms, 3) + 1):
        for table in monoid_tables(order):
            out.append("monoid:" + json.dumps(table, separators=(",", ":")))
    return out


def candidate_builders(bounds: SearchBounds) -> list[str]:
    bounds.check()
    exprs = []
    cats = small_categories(bounds.max_cat_morphisms) if bounds.max_cat_morphisms > 0 else []
    for base in ("finset_skel:1", "finset_skel:2"):
        if base in bounds.base_builders:
            n = base.split(":")[1]
            exprs.extend(f"fam:{c}:{n}" for c in cats)
    if "deloops" in bounds.base_builders:
        exprs.extend(DELOOP_BUILDERS)
    if "maps" in bounds.base_builders:
        exprs.extend(MAP_BUILDERS)
    return exprs


def classify_all(expr: str) -> list[dict]:
    """Flags of every object of the fibered category built from ``expr``."""
    art = build(expr)
    q = art.functor
    rows = []
    for t in range(q.dom.n_obj):
        rep = classify_object(art.fibration, t, art.cleavage)
        rows.append({"object": t, "label": rep.label, "flags": rep.flags})
    return rows


@dataclass
class Catalogue:
    candidates: list[str]
    rows: list[dict] = field(default_factory=list)
    objects_checked: int = 0

    def row(self, holds: str, fails: str) -> dict:
        return next(r for r in self.rows if r["holds"] == holds and r["fails"] == fails)

    def found(self, holds: str, fails: str) -> dict | None:
        return self.row(holds, fails)["example"]

    def to_json(self) -> dict:
        return {"candidates": self.candidates, "objectsChecked": self.objects_checked, "separations": self.rows}


def counterexample_search(bounds: SearchBounds | None = None, jobs: int = 1) -> Catalogue:
    """Classify every object of every candidate and record, for each ordered
    pair of notions, the first object satisfying one but not the other."""
    bounds = SearchBounds() if bounds is None else bounds
    exprs = candidate_builders(bounds)
    if jobs > 1 and len(exprs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(classify_all, exprs))
    else:
        results = [classify_all(e) for e in exprs]
    cat = Catalogue(exprs)
    cat.objects_checked = sum(len(r) for r in results)
    for a, b in itertools.permutations(NOTIONS, 2):
        hits = [[expr, row["object"]]
                for expr, rows in zip(exprs, results) for row in rows
                if row["flags"].get(a) is True and row["flags"].get(b) is False]
        example = None
        if hits:
            expr, obj = hits[0]
            label = results[exprs.index(expr)][obj]["label"]
            example = {"fibration": expr, "object": obj, "label": label}
        cat.rows.append({"holds": a, "fails": b, "example": example, "count": len(hits), "all": hits})
    return cat


__all__ = ["SearchBounds", "Catalogue", "counterexample_search", "candidate_builders", "monoid_tables",
           "small_categories", "REQUIRED"]
