"""Presheaves of categories, the Grothendieck construction, family fibrations,
internal categories (including group deloopings) and externalization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ..errors import BoundTooSmall, BoundsTooLarge, EquationFailed, MissingLimit
from ..fibration import (
    Cleavage,
    Cone,
    Fibration,
    is_pullback_square,
    pairing,
    product,
    pullback,
    terminal_object,
)
from ..fincat import FinCat, FinFunctor, build_category, full_subcategory
from .bases import Group, finset_category, finset_skel, function_of, set_size


# -- presheaves of categories ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PshCat:
    """A strict presheaf of categories on ``base``.

    ``fibers[i]`` is the category over base object ``i``; ``reindex[u]`` is the
    functor ``fibers[cod u] → fibers[dom u]``.
    """

    base: FinCat
    fibers: tuple[FinCat, ...]
    reindex: tuple[FinFunctor, ...]
    inclusion: FinFunctor | None = None  # index base → ambient base, when restricted


def presheaf_failure(P: PshCat) -> str | None:
    """First failure of strict functoriality, or ``None``."""
    B = P.base
    for i in range(B.n_obj):
        F = P.reindex[int(B.ident[i])]
        if not (np.array_equal(F.obj_map, np.arange(P.fibers[i].n_obj))
                and np.array_equal(F.mor_map, np.arange(P.fibers[i].n_mor))):
            return f"reindexing along id_{i} is not the identity functor"
    for v in range(B.n_mor):
        for u in B.into(int(B.src[v])).tolist():
            vu = int(B.comp[v, u])
            Fv, Fu, Fvu = P.reindex[v], P.reindex[u], P.reindex[vu]
            if not (np.array_equal(Fu.obj_map[Fv.obj_map], Fvu.obj_map)
                    and np.array_equal(Fu.mor_map[Fv.mor_map], Fvu.mor_map)):
                return f"reindexing along {v}∘{u} differs from the composite of reindexings"
    return None


def grothendieck(P: PshCat, name: str = "") -> tuple[Fibration, Cleavage]:
    """Total category of ``P`` with its projection and canonical split cleavage.

    Objects are pairs ``(I, c)``; a morphism ``(J, c) → (I, d)`` is a pair of
    ``u: J → I`` and a fiber morphism ``c → P(u) d``, keyed ``(u, m, d)``.
    """
    B = P.base
    objects = [(i, c) for i in range(B.n_obj) for c in range(P.fibers[i].n_obj)]
    opos = {o: k for k, o in enumerate(objects)}
    mors = []
    for u in range(B.n_mor):
        j, i = int(B.src[u]), int(B.tgt[u])
        Fj, R = P.fibers[j], P.reindex[u]
        for d in range(P.fibers[i].n_obj):
            ud = int(R.obj_map[d])
            for c in range(Fj.n_obj):
                for m in Fj.hom(c, ud).tolist():
                    mors.append(((u, m, d), opos[(j, c)], opos[(i, d)]))

    def compose(gk, fk):
        u, m, d = gk
        v, n, _ = fk
        k = int(B.src[v])
        return (int(B.comp[u, v]), int(P.fibers[k].comp[P.reindex[v].mor_map[m], n]), d)

    def identity(o):
        i, c = objects[o]
        return (int(B.ident[i]), int(P.fibers[i].ident[c]), c)

    def obj_label(i, c):
        return f"{B.obj_labels[i]}:{P.fibers[i].obj_labels[c]}"

    total = build_category(
        objects, mors, compose, identity,
        obj_labels=[obj_label(i, c) for i, c in objects],
        mor_labels=[f"({B.mor_labels[u]}, {P.fibers[int(B.src[u])].mor_labels[m]})" for (u, m, _), _, _ in mors],
        name=name or "grothendieck",
    )
    p = FinFunctor(total, B, [i for i, _ in objects], [k[0] for k in total.mor_keys])
    fib = Fibration(p, name=total.name)
    fib.presheaf = P
    choice = {}
    for (i, d), e in opos.items():
        for u in B.into(i).tolist():
            j = int(B.src[u])
            ud = int(P.reindex[u].obj_map[d])
            choice[(u, e)] = total.mor_of_key((u, int(P.fibers[j].ident[ud]), d))
    return fib, Cleavage(fib, choice)


# -- family fibrations -----------------------------------------------------------------


def power_category(C: FinCat, k: int) -> FinCat:
    """``C^k``: ``k``-tuples of objects, componentwise morphisms and composition."""
    objs = list(itertools.product(range(C.n_obj), repeat=k))
    opos = {o: n for n, o in enumerate(objs)}
    mors = [
        (ms, opos[tuple(int(C.src[m]) for m in ms)], opos[tuple(int(C.tgt[m]) for m in ms)])
        for ms in itertools.product(range(C.n_mor), repeat=k)
    ]
    return build_category(
        objs, mors,
        lambda g, f: tuple(int(C.comp[a, b]) for a, b in zip(g, f)),
        lambda o: tuple(int(C.ident[x]) for x in objs[o]),
        obj_labels=["[" + ",".join(C.obj_labels[x] for x in o) + "]" for o in objs],
        mor_labels=["[" + ",".join(C.mor_labels[m] for m in ms) + "]" for ms, _, _ in mors],
        name=f"{C.name}^{k}",
    )


def psh_family(C: FinCat, n: int) -> PshCat:
    """The presheaf ``k ↦ C^k`` on ``finset_skel(n)``, reindexed by precomposition."""
    B = finset_skel(n)
    fibers = tuple(power_category(C, k) for k in range(n + 1))
    reindex = []
    for u in range(B.n_mor):
        j, i = int(B.src[u]), int(B.tgt[u])
        graph = function_of(B, u)
        Fi, Fj = fibers[i], fibers[j]
        om = [Fj.obj_of_key(tuple(o[x] for x in graph)) for o in Fi.obj_keys]
        mm = [Fj.mor_of_key(tuple(ms[x] for x in graph)) for ms in Fi.mor_keys]
        reindex.append(FinFunctor(Fi, Fj, om, mm))
    return PshCat(B, fibers, tuple(reindex))


def fam(C: FinCat, n: int) -> tuple[Fibration, Cleavage]:
    """Family fibration of ``C`` over finite index sets of size at most ``n``."""
    if n < 0:
        raise ValueError("size bound must be non-negative")
    return grothendieck(psh_family(C, n), name=f"fam:{C.name or 'C'}:{n}")


def family_object(fib: Fibration, members: Sequence[int]) -> int:
    """Index of the family ``members`` (a tuple of ``C``-objects) in a family fibration."""
    k = len(members)
    if k >= fib.base.n_obj:
        raise BoundTooSmall(f"family of size {k} exceeds the index bound {fib.base.n_obj - 1}")
    return fib.total.obj_of_key((k, fib.presheaf.fibers[k].obj_of_key(tuple(members))))


def family_members(fib: Fibration, o: int) -> tuple[int, ...]:
    i, c = fib.total.obj_keys[o]
    return fib.presheaf.fibers[i].obj_keys[c]


# -- internal categories ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InternalCat:
    """Category object ``(C0, C1, s, t, i, c)`` in ``base``.

    ``pb`` is the chosen pullback ``C1 ×_{C0} C1`` of ``t`` and ``s``: ``pb.p1``
    is the first (earlier) morphism, ``pb.p2`` the later one, so that
    ``s∘c = s∘p1`` and ``t∘c = t∘p2``.
    """

    base: FinCat
    c0: int
    c1: int
    s: int
    t: int
    i: int
    c: int
    pb: Cone
    name: str = ""

    def compose_elements(self, h1: int, h2: int) -> int:
        """Composite of generalized elements ``h1`` then ``h2`` (``t∘h1 = s∘h2``)."""
        B = self.base
        return int(B.comp[self.c, pairing(B, self.pb, h1, h2)])


def validate_internal_cat(
    base: FinCat, c0: int, c1: int, s: int, t: int, i: int, c: int,
    pb: Cone | None = None, name: str = "",
) -> InternalCat:
    """Check every internal-category equation; raise :class:`EquationFailed`.

    Associativity is checked on generalized elements ``X → C1`` for every
    object ``X`` of the base, which does not require a triple pullback object.
    """
    B = base
    comp = B.comp
    shapes = {"s": (s, c1, c0), "t": (t, c1, c0), "i": (i, c0, c1)}
    for label, (m, a, b) in shapes.items():
        if int(B.src[m]) != a or int(B.tgt[m]) != b:
            raise EquationFailed(f"{label} has the wrong source/target")
    if pb is None:
        pb = pullback(B, t, s)
        if pb is None:
            raise MissingLimit("the base has no pullback C1 ×_C0 C1")
    elif not is_pullback_square(B, t, s, pb.p1, pb.p2):
        raise EquationFailed("chosen C1 ×_C0 C1 is not a pullback")
    if int(B.src[c]) != pb.apex or int(B.tgt[c]) != c1:
        raise EquationFailed("c has the wrong source/target")
    idc0, idc1 = int(B.ident[c0]), int(B.ident[c1])
    checks = {
        "s∘i = id": comp[s, i] == idc0,
        "t∘i = id": comp[t, i] == idc0,
        "s∘c = s∘π1": comp[s, c] == comp[s, pb.p1],
        "t∘c = t∘π2": comp[t, c] == comp[t, pb.p2],
    }
    for label, ok in checks.items():
        if not ok:
            raise EquationFailed(label)
    ic = InternalCat(B, c0, c1, s, t, i, c, pb, name)
    left = ic.compose_elements(int(comp[i, s]), idc1)
    if left != idc1:
        raise EquationFailed("c∘⟨i∘s, id⟩ = id")
    right = ic.compose_elements(idc1, int(comp[i, t]))
    if right != idc1:
        raise EquationFailed("c∘⟨id, i∘t⟩ = id")
    for x in range(B.n_obj):
        hs = B.hom(x, c1).tolist()
        for h1 in hs:
            for h2 in hs:
                if comp[t, h1] != comp[s, h2]:
                    continue
                h12 = ic.compose_elements(h1, h2)
                for h3 in hs:
                    if comp[t, h2] != comp[s, h3]:
                        continue
                    if ic.compose_elements(h12, h3) != ic.compose_elements(h1, ic.compose_elements(h2, h3)):
                        raise EquationFailed("associativity", f"generalized elements {h1}, {h2}, {h3} from object {x}")
    return ic


def psh_of_cats(ic: InternalCat, over: Sequence[int] | None = None) -> PshCat:
    """Presheaf ``I ↦ C^I`` of an internal category, optionally indexed only over
    the full subcategory of the base on the objects ``over``.

    Over ``I`` the objects are the base morphisms ``I → C0`` and the morphisms
    ``α → β`` are the ``h: I → C1`` with ``s∘h = α`` and ``t∘h = β``.
    """
    B = ic.base
    index, incl = full_subcategory(B, range(B.n_obj) if over is None else over,
                                   name=B.name if over is None else f"{B.name}|{len(over)}")
    fibers = []
    for k in range(index.n_obj):
        I = incl.on_obj(k)
        alphas = B.hom(I, ic.c0).tolist()
        apos = {a: n for n, a in enumerate(alphas)}
        mors = [(h, apos[int(B.comp[ic.s, h])], apos[int(B.comp[ic.t, h])]) for h in B.hom(I, ic.c1).tolist()]
        fibers.append(build_category(
            alphas, mors,
            lambda h2, h1: ic.compose_elements(h1, h2),
            lambda o, alphas=alphas: int(B.comp[ic.i, alphas[o]]),
            obj_labels=[B.mor_labels[a] for a in alphas],
            mor_labels=[B.mor_labels[h] for h, _, _ in mors],
            name=f"{ic.name}^{index.obj_labels[k]}",
        ))
    reindex = []
    for v in range(index.n_mor):
        u = incl(v)
        Fi, Fj = fibers[int(index.tgt[v])], fibers[int(index.src[v])]
        om = [Fj.obj_of_key(int(B.comp[a, u])) for a in Fi.obj_keys]
        mm = [Fj.mor_of_key(int(B.comp[h, u])) for h in Fi.mor_keys]
        reindex.append(FinFunctor(Fi, Fj, om, mm))
    return PshCat(index, tuple(fibers), tuple(reindex), incl)


class Pointed(NamedTuple):
    """A fibered category with an optional cleavage and a distinguished object."""

    fibration: Fibration | FinFunctor
    splitting: Cleavage | None
    T: int


Externalization = Pointed


def externalize(ic: InternalCat | FinCat, over: Sequence[int] | int | None = None) -> Externalization:
    """Externalization with its canonical splitting and the object ``T = (C0, id)``.

    For an :class:`InternalCat`, ``over`` optionally restricts the index base to
    a full subcategory (which must contain ``C0``). An ordinary :class:`FinCat`
    is regarded as a category internal to finite sets; its externalization is
    the family fibration over sets of size at most ``over``.
    """
    if isinstance(ic, FinCat):
        n = ic.n_obj if over is None else int(over)
        if n < ic.n_obj:
            raise BoundTooSmall(f"index bound {n} is below |C0| = {ic.n_obj}")
        P = psh_family(ic, n)
        fib, cl = grothendieck(P, name=f"ext:{ic.name or 'C'}@finset_skel:{n}")
        T = fib.total.obj_of_key((ic.n_obj, P.fibers[ic.n_obj].obj_of_key(tuple(range(ic.n_obj)))))
        return Externalization(fib, cl, T)
    P = psh_of_cats(ic, over)
    objs = list(range(ic.base.n_obj)) if over is None else list(over)
    if ic.c0 not in objs:
        raise BoundTooSmall("the index base must contain the object of objects")
    fib, cl = grothendieck(P, name=f"ext:{ic.name or 'IC'}")
    k0 = objs.index(ic.c0)
    T = fib.total.obj_of_key((k0, P.fibers[k0].obj_of_key(int(ic.base.ident[ic.c0]))))
    return Externalization(fib, cl, T)


# -- group objects ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupObject:
    base: FinCat
    carrier: int
    unit: int   # 1 → G
    mult: int   # G×G → G
    inv: int    # G → G
    prod: Cone  # chosen G×G
    terminal: int
    name: str = "G"


def validate_group_object(G: GroupObject) -> GroupObject:
    """Group axioms on generalized elements ``X → G`` for every object ``X``."""
    B = G.base
    comp = B.comp
    for label, m, a, b in (("unit", G.unit, G.terminal, G.carrier), ("mult", G.mult, G.prod.apex, G.carrier),
                           ("inv", G.inv, G.carrier, G.carrier)):
        if int(B.src[m]) != a or int(B.tgt[m]) != b:
            raise EquationFailed(f"{label} has the wrong source/target")
    for x in range(B.n_obj):
        bang = int(B.hom(x, G.terminal)[0])
        e = int(comp[G.unit, bang])
        gs = B.hom(x, G.carrier).tolist()

        def mul(a, b):
            return int(comp[G.mult, pairing(B, G.prod, a, b)])

        for a in gs:
            if mul(e, a) != a or mul(a, e) != a:
                raise EquationFailed("unit law", f"element {a} from object {x}")
            ia = int(comp[G.inv, a])
            if mul(a, ia) != e or mul(ia, a) != e:
                raise EquationFailed("inverse law", f"element {a} from object {x}")
            for b in gs:
                ab = mul(a, b)
                for c in gs:
                    if mul(ab, c) != mul(a, mul(b, c)):
                        raise EquationFailed("associativity", f"elements {a}, {b}, {c} from object {x}")
    return G


def internal_deloop(G: GroupObject) -> InternalCat:
    """``G`` regarded as a one-object internal groupoid: ``C0 = 1``, ``C1 = G``."""
    B = G.base
    bang = int(B.hom(G.carrier, G.terminal)[0])
    return validate_internal_cat(B, G.terminal, G.carrier, bang, bang, G.unit, G.mult, G.prod,
                                 name=f"deloop({G.name})")


def _sized(B: FinCat, n: int) -> int:
    for o in range(B.n_obj):
        if set_size(B, o) == n:
            return o
    raise MissingLimit(f"the base has no set of size {n}")


def set_group_object(B: FinCat, group: Group) -> GroupObject:
    """A finite group as a group object in a category of finite sets."""
    g = _sized(B, group.order)
    one = terminal_object(B)
    if one is None:
        raise MissingLimit("no terminal object")
    prod = product(B, g, g)
    if prod is None:
        raise MissingLimit(f"the base has no product {group.name}×{group.name}")
    x1, x2 = function_of(B, prod.p1), function_of(B, prod.p2)
    mult = B.mor_of_key((prod.apex, g, tuple(group.mul(a, b) for a, b in zip(x1, x2))))
    unit = B.mor_of_key((one, g, (group.unit,)))
    inv = B.mor_of_key((g, g, tuple(group.inv(a) for a in range(group.order))))
    return validate_group_object(GroupObject(B, g, unit, mult, inv, prod, one, name=group.name))


def arrow_group_object(A: FinCat, sets: FinCat, g0: Group, g1: Group, phi: Sequence[int]) -> GroupObject:
    """The homomorphism ``phi: g0 → g1`` as a group object in an arrow category ``A``
    of the finite-set category ``sets``."""
    f = sets.mor_of_key((_sized(sets, g0.order), _sized(sets, g1.order), tuple(phi)))
    carrier = A.obj_of_key(f)
    one = terminal_object(A)
    if one is None:
        raise MissingLimit("no terminal object")
    prod = product(A, carrier, carrier)
    if prod is None:
        raise MissingLimit("the arrow base has no product G×G")
    (_, _, a1, b1), (_, _, a2, b2) = A.mor_keys[prod.p1], A.mor_keys[prod.p2]
    pf = A.obj_keys[prod.apex]
    top = (int(sets.src[pf]), int(sets.src[f]),
           tuple(g0.mul(x, y) for x, y in zip(function_of(sets, a1), function_of(sets, a2))))
    bot = (int(sets.tgt[pf]), int(sets.tgt[f]),
           tuple(g1.mul(x, y) for x, y in zip(function_of(sets, b1), function_of(sets, b2))))
    mult = A.mor_of_key((pf, f, sets.mor_of_key(top), sets.mor_of_key(bot)))
    t_arrow = A.obj_keys[one]
    one_top, one_bot = int(sets.src[t_arrow]), int(sets.tgt[t_arrow])
    unit = A.mor_of_key((t_arrow, f,
                         sets.mor_of_key((one_top, int(sets.src[f]), (g0.unit,))),
                         sets.mor_of_key((one_bot, int(sets.tgt[f]), (g1.unit,)))))
    inv = A.mor_of_key((f, f,
                        sets.mor_of_key((int(sets.src[f]), int(sets.src[f]), tuple(g0.inv(a) for a in range(g0.order)))),
                        sets.mor_of_key((int(sets.tgt[f]), int(sets.tgt[f]), tuple(g1.inv(a) for a in range(g1.order))))))
    return validate_group_object(GroupObject(A, carrier, unit, mult, inv, prod, one, name=f"{g0.name}->{g1.name}"))


# -- encoding ordinary categories as internal ones ---------------------------------------------

ENCODE_LIMIT = 4


def encode_category(C: FinCat, index_bound: int = 2) -> tuple[InternalCat, list[int]]:
    """Encode ``C`` as a category internal to finite sets.

    The base is the category of finite sets on the sizes ``0..index_bound``
    together with ``|C0|``, ``|C1|`` and the number of composable pairs. Returns
    the internal category and the base objects of size at most
    ``index_bound`` (the index objects used for externalization).
    """
    n0, n1 = C.n_obj, C.n_mor
    pairs = [(f, g) for f in range(n1) for g in range(n1) if C.tgt[f] == C.src[g]]
    sizes = sorted(set(range(index_bound + 1)) | {n0, n1, len(pairs)})
    if max(sizes) > ENCODE_LIMIT:
        raise BoundsTooLarge(f"encoding {C.name or 'C'} needs sets of size {max(sizes)} > {ENCODE_LIMIT}")
    B = finset_category(sizes, name=f"finset{sizes}")
    o0, o1 = _sized(B, n0), _sized(B, n1)
    s = B.mor_of_key((o1, o0, tuple(int(x) for x in C.src)))
    t = B.mor_of_key((o1, o0, tuple(int(x) for x in C.tgt)))
    i = B.mor_of_key((o0, o1, tuple(int(x) for x in C.ident)))
    pb = pullback(B, t, s)
    if pb is None:
        raise MissingLimit("no pullback of composable pairs")
    first, second = function_of(B, pb.p1), function_of(B, pb.p2)
    c = B.mor_of_key((pb.apex, o1, tuple(int(C.comp[g, f]) for f, g in zip(first, second))))
    ic = validate_internal_cat(B, o0, o1, s, t, i, c, pb, name=C.name or "C")
    return ic, [o for o in range(B.n_obj) if set_size(B, o) <= index_bound]
