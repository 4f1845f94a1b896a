"""Concrete finite categories: finite sets, G-sets, posets, arrow categories
and a handful of named small categories."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ..fincat import FinCat, FinFunctor, build_category


# -- groups -------------------------------------------------------------------


@dataclass(frozen=True)
class Group:
    """A finite group given by its multiplication table on ``0..order-1``."""

    table: tuple[tuple[int, ...], ...]
    name: str = "G"

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def unit(self) -> int:
        for e in range(self.order):
            if all(self.table[e][x] == x == self.table[x][e] for x in range(self.order)):
                return e
        raise ValueError("table has no unit")

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        e = self.unit
        return next(b for b in range(self.order) if self.table[a][b] == e)

    def check(self) -> None:
        n, e = self.order, self.unit
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                raise ValueError(f"{self.name} is not associative at {(a, b, c)}")
        for a in range(n):
            if not any(self.mul(a, b) == e == self.mul(b, a) for b in range(n)):
                raise ValueError(f"{self.name}: element {a} has no inverse")


def cyclic_group(n: int) -> Group:
    return Group(tuple(tuple((a + b) % n for b in range(n)) for a in range(n)), name=f"Z{n}")


def trivial_group() -> Group:
    return Group(((0,),), name="1")


GROUPS = {"Z2": lambda: cyclic_group(2), "Z3": lambda: cyclic_group(3), "1": trivial_group, "trivial": trivial_group}


def parse_group(name: str) -> Group:
    if name in GROUPS:
        return GROUPS[name]()
    if name.startswith("Z") and name[1:].isdigit():
        return cyclic_group(int(name[1:]))
    raise KeyError(f"unknown group {name!r}")


# -- finite sets ----------------------------------------------------------------


def _fn_label(m: int, n: int, graph: tuple[int, ...]) -> str:
    return f"{m}→{n}:" + ("".join(map(str, graph)) if graph else "∅")


def finset_category(sizes: Iterable[int], name: str = "") -> FinCat:
    """Full subcategory of finite sets on the sets ``{0..k-1}`` for ``k`` in ``sizes``.

    Morphisms are all functions, keyed ``(src, tgt, graph)``.
    """
    sizes = list(sizes)
    mors = []
    for a, m in enumerate(sizes):
        for b, n in enumerate(sizes):
            for graph in itertools.product(range(n), repeat=m):
                mors.append(((a, b, graph), a, b))

    def compose(gk, fk):
        return (fk[0], gk[1], tuple(gk[2][x] for x in fk[2]))

    def identity(o):
        return (o, o, tuple(range(sizes[o])))

    return build_category(
        list(sizes), mors, compose, identity,
        obj_labels=[str(k) for k in sizes],
        mor_labels=[_fn_label(sizes[a], sizes[b], g) for (a, b, g), _, _ in mors],
        name=name or f"finset{sizes}",
    )


@lru_cache(maxsize=None)
def finset_skel(n: int) -> FinCat:
    """Skeleton of finite sets of size at most ``n``: objects ``0..n``."""
    if n < 0:
        raise ValueError("size bound must be non-negative")
    return finset_category(range(n + 1), name=f"finset_skel:{n}")


def set_size(c: FinCat, o: int) -> int:
    """Cardinality of an object of a category built by :func:`finset_category`."""
    return c.obj_keys[o]


def function_of(c: FinCat, m: int) -> tuple[int, ...]:
    return c.mor_keys[m][2]


def find_function(c: FinCat, a: int, b: int, graph: Sequence[int]) -> int:
    return c.mor_of_key((a, b, tuple(graph)))


# -- G-sets ---------------------------------------------------------------------


def _actions(group: Group, k: int) -> list[tuple[tuple[int, ...], ...]]:
    """All actions of ``group`` on ``{0..k-1}``, one per isomorphism class.

    Each class is represented by its lexicographically least relabelled table.
    """
    n, e = group.order, group.unit
    perms = list(itertools.permutations(range(k)))
    ident = tuple(range(k))
    found = set()
    for assignment in itertools.product(perms, repeat=n):
        if assignment[e] != ident:
            continue
        ok = all(
            assignment[group.mul(g, h)] == tuple(assignment[g][assignment[h][x]] for x in range(k))
            for g in range(n) for h in range(n)
        )
        if not ok:
            continue
        best = None
        for sigma in perms:
            inv = [0] * k
            for i, s in enumerate(sigma):
                inv[s] = i
            relabelled = tuple(tuple(sigma[a[inv[x]]] for x in range(k)) for a in assignment)
            if best is None or relabelled < best:
                best = relabelled
        found.add(best)
    return sorted(found)


def _orbit_label(group: Group, k: int, act) -> str:
    if group.order == 1:
        return str(k)
    seen, sizes = set(), []
    for x in range(k):
        if x in seen:
            continue
        orbit = {act[g][x] for g in range(group.order)}
        seen |= orbit
        sizes.append(len(orbit))
    fixed = sizes.count(1)
    regular = sizes.count(group.order)
    parts = []
    if fixed:
        parts.append("1" if fixed == 1 else f"{fixed}triv")
    if regular:
        parts.append("rho" if regular == 1 else f"{regular}rho")
    for s in sorted({s for s in sizes if s not in (1, group.order)}):
        c = sizes.count(s)
        parts.append(f"o{s}" if c == 1 else f"{c}o{s}")
    return "+".join(parts) or "0"


def gset_category(group: Group, n: int) -> FinCat:
    """Finite ``group``-sets of size at most ``n`` (one per iso class) and equivariant maps.

    Object keys are ``(size, action)`` where ``action[g]`` is the permutation
    by which ``g`` acts.
    """
    objects = [(k, act) for k in range(n + 1) for act in _actions(group, k)]
    labels = [_orbit_label(group, k, act) for k, act in objects]
    dup = {l for l in labels if labels.count(l) > 1}
    if dup:
        counter: dict[str, int] = {}
        for i, l in enumerate(labels):
            if l in dup:
                counter[l] = counter.get(l, 0) + 1
                labels[i] = f"{l}#{counter[l]}"
    g_all = range(group.order)
    mors = []
    for a, (k, act) in enumerate(objects):
        for b, (k2, act2) in enumerate(objects):
            for graph in itertools.product(range(k2), repeat=k):
                if all(graph[act[g][x]] == act2[g][graph[x]] for g in g_all for x in range(k)):
                    mors.append(((a, b, graph), a, b))

    def compose(gk, fk):
        return (fk[0], gk[1], tuple(gk[2][x] for x in fk[2]))

    def identity(o):
        return (o, o, tuple(range(objects[o][0])))

    return build_category(
        objects, mors, compose, identity,
        obj_labels=labels,
        mor_labels=[f"{labels[a]}→{labels[b]}:" + ("".join(map(str, g)) or "∅") for (a, b, g), _, _ in mors],
        name=f"gsets:{group.name}:{n}",
    )


# -- posets and small named categories -------------------------------------------


def poset_category(labels: Sequence[str], leq: Iterable[tuple[int, int]], name: str = "") -> FinCat:
    """Preorder category generated by the relation pairs ``(a, b)`` meaning ``a → b``."""
    n = len(labels)
    rel = [[a == b for b in range(n)] for a in range(n)]
    for a, b in leq:
        rel[a][b] = True
    for k in range(n):
        for a in range(n):
            if rel[a][k]:
                for b in range(n):
                    if rel[k][b]:
                        rel[a][b] = True
    pairs = [(a, a) for a in range(n)] + [(a, b) for a in range(n) for b in range(n) if a != b and rel[a][b]]
    return build_category(
        list(labels), [(p, p[0], p[1]) for p in pairs],
        lambda g, f: (f[0], g[1]), lambda o: (o, o),
        obj_labels=labels,
        mor_labels=[f"{labels[a]}≤{labels[b]}" for a, b in pairs],
        name=name,
    )


def cospan_poset() -> FinCat:
    """The poset ``a → c ← b``; it has no pullback of its cospan."""
    return poset_category(["a", "b", "c"], [(0, 2), (1, 2)], name="cospan")


def boolean_square() -> FinCat:
    """The lattice of subsets of a 2-element set; being a meet-semilattice it has all pullbacks."""
    return poset_category(["0", "a", "b", "1"], [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)], name="booleanSquare")


def terminal_category() -> FinCat:
    return poset_category(["*"], [], name="terminal")


def walking_arrow() -> FinCat:
    return poset_category(["a", "b"], [(0, 1)], name="walkingArrow")


def indiscrete(labels: Sequence[str], name: str = "") -> FinCat:
    n = len(labels)
    return poset_category(labels, [(a, b) for a in range(n) for b in range(n)], name=name)


def walking_iso() -> FinCat:
    """Objects A, B; morphisms id_A, id_B, A→B, B→A (mutually inverse)."""
    return indiscrete(["A", "B"], name="walkingIso")


def discrete(n: int) -> FinCat:
    return poset_category([f"x{i}" for i in range(n)], [], name=f"discrete{n}")


def two_class_groupoid() -> FinCat:
    """Four objects in two isomorphism classes {A, B} and {C, D}, each indiscrete."""
    return poset_category(
        ["A", "B", "C", "D"], [(0, 1), (1, 0), (2, 3), (3, 2)], name="twoClassGroupoid"
    )


def monoid_category(table: Sequence[Sequence[int]], unit: int = 0, name: str = "") -> FinCat:
    """One-object category whose composition is ``g∘f = table[g][f]``."""
    n = len(table)
    mors = [(x, 0, 0) for x in range(n)]
    return build_category(
        ["*"], mors, lambda g, f: table[g][f], lambda o: unit,
        obj_labels=["*"], mor_labels=[f"e{x}" if x else "id" for x in range(n)], name=name,
    )


def deloop(group: Group) -> FinCat:
    """One object whose endomorphisms are the group elements; composition is multiplication."""
    e = group.unit
    order = [e] + [x for x in range(group.order) if x != e]
    return build_category(
        ["*"], [(x, 0, 0) for x in order],
        lambda g, f: group.mul(g, f), lambda o: e,
        obj_labels=["*"], mor_labels=[f"{group.name}[{x}]" for x in order],
        name=f"deloop{group.name}",
    )


def idempotent_monoid() -> FinCat:
    return monoid_category([[0, 1], [1, 1]], name="idempotent")


# -- arrow categories -------------------------------------------------------------


def arrow_category(base: FinCat, objects: Sequence[int] | None = None, name: str = "") -> tuple[FinCat, FinFunctor]:
    """Arrow category of ``base`` (optionally the full subcategory on some arrows)
    together with its codomain functor.

    A morphism from arrow ``f`` to arrow ``g`` is a commuting square, keyed
    ``(f, g, x, y)`` with ``x`` on sources, ``y`` on targets and ``g∘x = y∘f``.
    """
    arrows = list(range(base.n_mor)) if objects is None else list(objects)
    pos = {f: i for i, f in enumerate(arrows)}
    comp = base.comp
    mors = []
    for f in arrows:
        a, b = int(base.src[f]), int(base.tgt[f])
        for g in arrows:
            xs = base.hom(a, int(base.src[g]))
            ys = base.hom(b, int(base.tgt[g]))
            if not len(xs) or not len(ys):
                continue
            lhs = comp[g, xs]          # g∘x
            rhs = comp[ys, f]          # y∘f
            for i, j in zip(*np.nonzero(lhs[:, None] == rhs[None, :])):
                mors.append(((f, g, int(xs[i]), int(ys[j])), pos[f], pos[g]))

    def compose(gk, fk):
        return (fk[0], gk[1], int(comp[gk[2], fk[2]]), int(comp[gk[3], fk[3]]))

    def identity(o):
        f = arrows[o]
        return (f, f, int(base.ident[base.src[f]]), int(base.ident[base.tgt[f]]))

    cat = build_category(
        arrows, mors, compose, identity,
        obj_labels=[base.mor_labels[f] for f in arrows],
        mor_labels=[f"[{base.mor_labels[x]} | {base.mor_labels[y]}]" for (_, _, x, y), _, _ in mors],
        name=name or f"arrow:{base.name}",
    )
    cod = FinFunctor(
        cat, base,
        [int(base.tgt[f]) for f in arrows],
        [k[3] for k in cat.mor_keys],
    )
    return cat, cod


NAMED_CATEGORIES = {
    "terminal": terminal_category,
    "walkingArrow": walking_arrow,
    "walkingIso": walking_iso,
    "discrete2": lambda: discrete(2),
    "twoClassGroupoid": two_class_groupoid,
    "cospan": cospan_poset,
    "booleanSquare": boolean_square,
    "idempotent": idempotent_monoid,
    "deloopZ2": lambda: deloop(cyclic_group(2)),
    "deloopZ3": lambda: deloop(cyclic_group(3)),
}
