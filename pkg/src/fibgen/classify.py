"""Decision procedures for generic objects, smallness, the right lifting
property of group objects, and the implication audit between the notions."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ImplicationViolated
from .fibration import (
    Cleavage,
    MonoClass,
    all_monos,
    as_functor,
    cartesian_flags,
    cover_class,
    require_split,
)
from .fincat import FinCat

NOTIONS = ("generic", "skeletal", "gaunt", "split", "acyclic", "weakStack")

# Mutation-testing hooks; names listed here flip the corresponding verdict.
MUTATIONS: set[str] = set()


class Verdict(NamedTuple):
    holds: bool
    witness: dict | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.holds


def _cart_into(q, T: int) -> dict[int, list[int]]:
    E = q.dom
    flags = cartesian_flags(q)
    out: dict[int, list[int]] = {x: [] for x in range(E.n_obj)}
    for f in E.into(T).tolist():
        if flags[f]:
            out[int(E.src[f])].append(f)
    return out


def is_generic(p, T: int) -> Verdict:
    """Every object has a cartesian morphism to ``T``."""
    q = as_functor(p)
    carts = _cart_into(q, T)
    for x, fs in carts.items():
        if not fs:
            return Verdict(False, {"X": x, "reason": "no cartesian morphism X → T"})
    return Verdict(True, None, len(carts))


def is_skeletal_generic(p, T: int) -> Verdict:
    """Generic, and for each object one base map carries all its cartesian maps to ``T``."""
    q = as_functor(p)
    g = is_generic(q, T)
    if not g:
        return g
    for x, fs in _cart_into(q, T).items():
        seen: dict[int, int] = {}
        for f in fs:
            seen.setdefault(int(q.mor_map[f]), f)
        if len(seen) > 1:
            (u1, f1), (u2, f2) = list(seen.items())[:2]
            return Verdict(False, {"X": x, "maps": [f1, f2], "baseMaps": [u1, u2]})
    return Verdict(True, None, g.checked)


def is_gaunt_generic(p, T: int) -> Verdict:
    """Every object has exactly one cartesian morphism to ``T``."""
    q = as_functor(p)
    verdict = Verdict(True, None, q.dom.n_obj)
    for x, fs in _cart_into(q, T).items():
        if len(fs) != 1:
            verdict = Verdict(False, {"X": x, "maps": fs[:2],
                                      "reason": "no cartesian morphism X → T" if not fs else "two cartesian morphisms"})
            break
    if "gaunt" in MUTATIONS:
        return Verdict(not verdict.holds, verdict.witness, verdict.checked)
    return verdict


def is_split_generic(p, cl: Cleavage, T: int) -> Verdict:
    """For every ``X`` exactly one ``u: pX → pT`` has ``u*T = X`` under ``cl``."""
    require_split(cl)
    q = as_functor(p)
    B = q.cod
    pT = q.on_obj(T)
    hits: dict[int, list[int]] = {x: [] for x in range(q.dom.n_obj)}
    for u in B.into(pT).tolist():
        hits[cl.reindex_obj(u, T)].append(u)
    for x, us in hits.items():
        if len(us) != 1:
            return Verdict(False, {"X": x, "baseMaps": us[:2],
                                   "reason": "not a reindexing of T" if not us else "two base maps reindex T to X"})
    return Verdict(True, None, len(hits))


def is_acyclic_generic(p, T: int, M: MonoClass | Iterable[int] | None = None) -> Verdict:
    """Cartesian spans ``T ← U → X`` with the right leg over ``M`` extend to a
    cartesian ``X → T`` making the triangle commute."""
    q = as_functor(p)
    g = is_generic(q, T)
    if not g:
        return g
    E = q.dom
    members = all_monos(q.cod).members if M is None else (M.members if isinstance(M, MonoClass) else frozenset(M))
    flags = cartesian_flags(q)
    carts = _cart_into(q, T)
    legs = np.nonzero(flags & np.isin(q.mor_map, list(members)))[0]
    checked = 0
    for b in legs.tolist():
        u, x = int(E.src[b]), int(E.tgt[b])
        xs = np.array(carts[x], dtype=np.int64)
        filled = set(E.comp[xs, b].tolist())
        for a in carts[u]:
            checked += 1
            if a not in filled:
                return Verdict(False, {"U": u, "X": x, "span": [a, b], "mono": int(q.mor_map[b])})
    return Verdict(True, None, checked)


def is_weak_generic_stack(p, T: int, covers: Iterable[int] | str | None = None) -> Verdict:
    """Every ``X`` has a cartesian span ``X ← X̃ → T`` whose left leg is cover-cartesian."""
    q = as_functor(p)
    E = q.dom
    cov = cover_class(q.cod) if covers is None else (cover_class(q.cod, covers) if isinstance(covers, str) else frozenset(covers))
    flags = cartesian_flags(q)
    carts = _cart_into(q, T)
    reach = {x for x, fs in carts.items() if fs}
    for x in range(E.n_obj):
        if x in reach:
            continue
        ok = False
        for c in E.into(x).tolist():
            if flags[c] and int(E.src[c]) in reach and int(q.mor_map[c]) in cov:
                ok = True
                break
        if not ok:
            return Verdict(False, {"X": x, "reason": "no cover-cartesian map from an object over T"})
    return Verdict(True, None, E.n_obj)


# -- smallness ------------------------------------------------------------------------------


def _locally_small_failure(q) -> dict | None:
    """Search, for each pair ``X, Y`` in a common fiber, a universal span
    ``X ← H → Y`` whose left leg is cartesian and whose legs lie over the same
    base map."""
    E, B = q.dom, q.cod
    flags = cartesian_flags(q)
    for i in range(B.n_obj):
        objs = np.nonzero(q.obj_map == i)[0].tolist()
        for x in objs:
            for y in objs:
                if not _has_universal_span(q, flags, x, y):
                    return {"I": i, "X": x, "Y": y}
    return None


def _has_universal_span(q, flags, x: int, y: int) -> bool:
    E = q.dom
    for c0 in E.into(x).tolist():
        if not flags[c0]:
            continue
        r = int(E.src[c0])
        for d0 in E.hom(r, y).tolist():
            if q.mor_map[d0] != q.mor_map[c0]:
                continue
            if _span_universal(q, flags, x, y, c0, d0):
                return True
    return False


def _span_universal(q, flags, x, y, c0, d0) -> bool:
    E, B = q.dom, q.cod
    r = int(E.src[c0])
    for c in E.into(x).tolist():
        if not flags[c]:
            continue
        z = int(E.src[c])
        for d in E.hom(z, y).tolist():
            if q.mor_map[d] != q.mor_map[c]:
                continue
            ks = E.hom(z, r)
            ok = (E.comp[c0, ks] == c) & (E.comp[d0, ks] == d)
            if int(ok.sum()) != 1:
                return False
    return True


def smallness(p) -> dict:
    q = as_functor(p)
    generic = [t for t in range(q.dom.n_obj) if is_generic(q, t)]
    local = _locally_small_failure(q)
    return {
        "globallySmall": bool(generic),
        "locallySmall": local is None,
        "witnesses": {"genericObject": generic[0] if generic else None, "locallyFailure": local},
    }


# -- right lifting property --------------------------------------------------------------------


def has_rlp(B: FinCat, carrier: int, m: int) -> Verdict:
    """Every ``g: J → G`` extends along ``m: J → I`` to some ``k: I → G``."""
    J, I = int(B.src[m]), int(B.tgt[m])
    ks = B.hom(I, carrier)
    reached = set(B.comp[ks, m].tolist()) if len(ks) else set()
    for g in B.hom(J, carrier).tolist():
        if g not in reached:
            return Verdict(False, {"m": m, "g": g})
    return Verdict(True, None, len(B.hom(J, carrier)))


@dataclass
class RlpReport:
    acyclic: bool
    rlp: dict[int, bool]
    agree: bool
    witness: dict | None = None


def acyclic_iff_rlp_check(ext, G, M: Iterable[int] | None = None) -> RlpReport:
    """Compare acyclicity of ``T`` in the externalized delooping of ``G`` with
    the right lifting property of ``G`` against each ``m`` in ``M``.

    ``M`` ranges over morphisms of the index base of ``ext`` (default: all
    monos there); they are transported to ``G.base`` along the index inclusion.
    """
    fib = ext.fibration
    P = fib.presheaf
    index = P.base
    incl = P.inclusion
    monos = sorted(all_monos(index).members) if M is None else sorted(M)
    rlp = {m: bool(has_rlp(G.base, G.carrier, incl(m) if incl is not None else m)) for m in monos}
    verdict = is_acyclic_generic(fib, ext.T, monos)
    return RlpReport(bool(verdict), rlp, bool(verdict) == all(rlp.values()), verdict.witness)


# -- reports ----------------------------------------------------------------------------------

ROSETTA = {
    "weakStack": ("weak generic", {"Streicher": "weak generic"}),
    "generic": ("generic", {"Jacobs": "weak generic", "Phoa": "generic", "Hermida": "generic", "Streicher": "generic"}),
    "acyclic": ("acyclic generic", {}),
    "skeletal": ("skeletal generic", {"Jacobs": "generic"}),
    "gaunt": ("gaunt generic", {"Jacobs": "strong generic", "Phoa": "skeletal generic",
                                "Hermida": "strong generic", "Streicher": "classifying"}),
}

IMPLICATIONS = (
    ("gaunt", "skeletal"),
    ("gaunt", "acyclic"),
    ("skeletal", "generic"),
    ("acyclic", "generic"),
    ("generic", "weakStack"),
    ("split", "generic"),
)


def rosetta_name(flag: str) -> str:
    name, others = ROSETTA[flag]
    if not others:
        return name
    return f"{name} (= " + "; ".join(f"{k}: {v}" for k, v in others.items()) + ")"


@dataclass
class GenericReport:
    candidate: int
    label: str
    flags: dict[str, bool | None]
    witnesses: dict[str, dict | None]
    checked: dict[str, int]
    timing_ms: float = 0.0
    options: dict = field(default_factory=dict)

    def strongest(self) -> str | None:
        for flag in ("gaunt", "skeletal", "acyclic", "generic", "weakStack"):
            if self.flags.get(flag):
                return flag
        return None

    def to_json(self) -> dict:
        return {
            "candidate": self.candidate,
            "label": self.label,
            "flags": self.flags,
            "witnesses": self.witnesses,
            "checked": self.checked,
            "options": self.options,
            "timingMs": round(self.timing_ms, 3),
        }


def audit(flags: dict[str, bool | None], obj: int = -1) -> None:
    for strong, weak in IMPLICATIONS:
        if flags.get(strong) and flags.get(weak) is False:
            raise ImplicationViolated(strong, weak, obj)


def classify_object(p, T: int, cleavage: Cleavage | None = None, monos=None, covers=None,
                    acyclic: bool = True, weak_stack: bool = True) -> GenericReport:
    """Run every applicable predicate on ``T`` and audit the implications."""
    start = time.perf_counter()
    q = as_functor(p)
    results: dict[str, Verdict | None] = {
        "generic": is_generic(q, T),
        "skeletal": is_skeletal_generic(q, T),
        "gaunt": is_gaunt_generic(q, T),
        "split": is_split_generic(q, cleavage, T) if cleavage is not None else None,
        "acyclic": is_acyclic_generic(q, T, monos) if acyclic else None,
        "weakStack": is_weak_generic_stack(q, T, covers) if weak_stack else None,
    }
    flags = {k: (None if v is None else bool(v)) for k, v in results.items()}
    report = GenericReport(
        candidate=T,
        label=q.dom.obj_labels[T],
        flags=flags,
        witnesses={k: v.witness for k, v in results.items() if v is not None and not v},
        checked={k: v.checked for k, v in results.items() if v is not None and v},
        options={"cleavage": cleavage is not None, "monos": "all" if monos is None else "custom",
                 "covers": covers if isinstance(covers, str) else ("regular" if covers is None else "custom")},
    )
    audit(flags, T)
    report.timing_ms = (time.perf_counter() - start) * 1000
    return report


_PREDICATES = {
    "generic": lambda q, T, cl: is_generic(q, T),
    "skeletal": lambda q, T, cl: is_skeletal_generic(q, T),
    "gaunt": lambda q, T, cl: is_gaunt_generic(q, T),
    "split": lambda q, T, cl: is_split_generic(q, cl, T),
    "acyclic": lambda q, T, cl: is_acyclic_generic(q, T),
    "weakStack": lambda q, T, cl: is_weak_generic_stack(q, T),
}


def find_generic_objects(p, kind: str, cleavage: Cleavage | None = None) -> list[int]:
    if kind not in _PREDICATES:
        raise ValueError(f"unknown notion {kind!r}; expected one of {', '.join(NOTIONS)}")
    if kind == "split" and cleavage is None:
        raise ValueError("the split notion needs a cleavage")
    q = as_functor(p)
    return [t for t in range(q.dom.n_obj) if _PREDICATES[kind](q, t, cleavage)]


def is_fibered_preorder(p) -> bool:
    """Whether every fiber is a preorder (at most one vertical map between two objects)."""
    q = as_functor(p)
    E = q.dom
    vert = q.mor_map == q.cod.ident[q.obj_map[E.src]]
    keys = E.src[vert] * E.n_obj + E.tgt[vert]
    return len(np.unique(keys)) == len(keys)
