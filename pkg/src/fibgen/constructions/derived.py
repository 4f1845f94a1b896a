"""Constructions derived from a fibration or a base category: the skeleton
candidate in a family fibration, the split fibration of a generic object, and
the subfibration and stack completion determined by a single map."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BoundTooSmall, MissingPullback, NotGeneric
from ..fibration import (
    Cleavage,
    Fibration,
    _cone_counts,
    _hom_counts,
    as_functor,
    cartesian_flags,
    cover_class,
    fibration_failure,
    is_pullback_square,
)
from ..fincat import FinCat, FinFunctor, build_category, skeleton_data, validate_functor
from .bases import arrow_category
from .internal import PshCat, Pointed, fam, family_object, grothendieck, presheaf_failure


# -- skeleton candidate ---------------------------------------------------------------


def skeletal_generic_candidate(C: FinCat, n: int) -> Pointed:
    """``fam(C, n)`` with the family of iso-class representatives of ``C``."""
    sk = skeleton_data(C)
    k = len(sk.section)
    if k > n:
        raise BoundTooSmall(f"{C.name or 'C'} has {k} isomorphism classes, above the index bound {n}")
    fib, cl = fam(C, n)
    return Pointed(fib, cl, family_object(fib, [int(s) for s in sk.section]))


# -- split fibration of a generic object ------------------------------------------------


def cartesian_into(p, T: int) -> dict[int, list[int]]:
    """For every object, the cartesian morphisms from it to ``T``."""
    q = as_functor(p)
    E = q.dom
    flags = cartesian_flags(q)
    out: dict[int, list[int]] = {x: [] for x in range(E.n_obj)}
    for f in E.into(T).tolist():
        if flags[f]:
            out[int(E.src[f])].append(f)
    return out


def _factor(q: FinFunctor, f: int, h: int, g: int) -> int:
    """The unique ``k`` with ``f∘k = h`` and ``q(k) = g`` (``f`` cartesian)."""
    E = q.dom
    ks = E.hom(int(E.src[h]), int(E.src[f]))
    ok = (E.comp[f, ks] == h) & (q.mor_map[ks] == g)
    if ok.sum() != 1:
        raise AssertionError("cartesian factorization is not unique")
    return int(ks[np.argmax(ok)])


@dataclass
class SplitFromWeak:
    fibration: Fibration
    splitting: Cleavage
    T: int
    comparison: FinFunctor
    equivalence: bool
    checks: dict = field(default_factory=dict)


def split_from_weak(p: Fibration, T: int) -> SplitFromWeak:
    """Split fibration ``∫E•`` of a generic object ``T`` and its comparison to ``p``.

    Over ``I`` the fiber of ``E•`` has one object per base map ``α: I → pT``;
    the morphisms ``α → β`` are the vertical maps between the chosen
    (least-index) cartesian lifts ``A_α → T`` and ``A_β → T``.
    """
    q = as_functor(p)
    E, B = q.dom, q.cod
    carts = cartesian_into(q, T)
    missing = [x for x, fs in carts.items() if not fs]
    if missing:
        raise NotGeneric(f"object {missing[0]} has no cartesian morphism to {T}")
    flags = cartesian_flags(q)
    pT = q.on_obj(T)
    into_T = E.into(T)
    into_T = into_T[flags[into_T]]
    chosen: dict[int, int] = {}
    for f in into_T.tolist():
        chosen.setdefault(int(q.mor_map[f]), f)

    def apex(alpha: int) -> int:
        return int(E.src[chosen[alpha]])

    fibers, alpha_lists = [], []
    for i in range(B.n_obj):
        alphas = B.hom(i, pT).tolist()
        apos = {a: n for n, a in enumerate(alphas)}
        vid = B.ident[i]
        mors = []
        for a in alphas:
            for b in alphas:
                hs = E.hom(apex(a), apex(b))
                for h in hs[q.mor_map[hs] == vid].tolist():
                    mors.append(((a, b, h), apos[a], apos[b]))
        fibers.append(build_category(
            alphas, mors,
            lambda g, f: (f[0], g[1], int(E.comp[g[2], f[2]])),
            lambda o, alphas=alphas: (alphas[o], alphas[o], int(E.ident[apex(alphas[o])])),
            obj_labels=[B.mor_labels[a] for a in alphas],
            mor_labels=[E.mor_labels[h] for (_, _, h), _, _ in mors],
            name=f"E•[{B.obj_labels[i]}]",
        ))
        alpha_lists.append(alphas)

    # k[(u, α)]: A_{α∘u} → A_α over u, factoring the chosen lift of α∘u through that of α
    kmap: dict[tuple[int, int], int] = {}

    def k_of(u: int, a: int) -> int:
        key = (u, a)
        if key not in kmap:
            au = int(B.comp[a, u])
            kmap[key] = _factor(q, chosen[a], chosen[au], u)
        return kmap[key]

    reindex = []
    for u in range(B.n_mor):
        j, i = int(B.src[u]), int(B.tgt[u])
        Fi, Fj = fibers[i], fibers[j]
        om = [Fj.obj_of_key(int(B.comp[a, u])) for a in Fi.obj_keys]
        mm = []
        for a, b, h in Fi.mor_keys:
            au, bu = int(B.comp[a, u]), int(B.comp[b, u])
            m = _factor(q, k_of(u, b), int(E.comp[h, k_of(u, a)]), int(B.ident[j]))
            mm.append(Fj.mor_of_key((au, bu, m)))
        reindex.append(FinFunctor(Fi, Fj, om, mm))
    P = PshCat(B, tuple(fibers), tuple(reindex))
    bad = presheaf_failure(P)
    if bad is not None:
        raise AssertionError(bad)
    fib2, cl2 = grothendieck(P, name=f"split({p.name if isinstance(p, Fibration) else E.name})")
    Tp = fib2.total.obj_of_key((pT, fibers[pT].obj_of_key(int(B.ident[pT]))))

    # comparison functor ∫E• → E
    G = fib2.total
    obj_map = [apex(alpha_lists[i][c]) for i, c in G.obj_keys]
    mor_map = []
    for u, m, d in G.mor_keys:
        j = int(B.src[u])
        _, b_u, h = fibers[j].mor_keys[m]
        beta = alpha_lists[int(B.tgt[u])][d]
        mor_map.append(int(E.comp[k_of(u, beta), h]))
    phi = validate_functor(FinFunctor(G, E, obj_map, mor_map))

    from ..classify import is_split_generic
    from ..fibration import is_split

    checks = {
        "split": is_split(cl2),
        "splitGeneric": bool(is_split_generic(fib2, cl2, Tp)),
        "overBase": bool(np.array_equal(q.obj_map[phi.obj_map], fib2.p.obj_map)
                         and np.array_equal(q.mor_map[phi.mor_map], fib2.p.mor_map)),
        "fullyFaithful": _fully_faithful(phi),
        "essentiallySurjective": _fiberwise_ess_surj(q, phi),
        "preservesCartesian": bool(flags[phi.mor_map[cartesian_flags(fib2.p)]].all()),
    }
    verdict = checks["fullyFaithful"] and checks["essentiallySurjective"] and checks["overBase"] \
        and checks["preservesCartesian"]
    return SplitFromWeak(fib2, cl2, Tp, phi, verdict, checks)


def _fully_faithful(phi: FinFunctor) -> bool:
    D, E = phi.dom, phi.cod
    for a in range(D.n_obj):
        for b in range(D.n_obj):
            hs = D.hom(a, b)
            image = phi.mor_map[hs]
            target = E.hom(phi.on_obj(a), phi.on_obj(b))
            if len(image) != len(target) or len(np.unique(image)) != len(image):
                return False
    return True


def _fiberwise_ess_surj(q: FinFunctor, phi: FinFunctor) -> bool:
    """Every object of ``E`` is vertically isomorphic to an image object over its base."""
    E = q.dom
    image = set(phi.obj_map.tolist())
    for x in range(E.n_obj):
        vid = q.cod.ident[q.on_obj(x)]
        hit = False
        for y in image:
            if q.on_obj(y) != q.on_obj(x):
                continue
            fwd = E.hom(x, y)
            fwd = fwd[q.mor_map[fwd] == vid]
            back = E.hom(y, x)
            back = back[q.mor_map[back] == vid]
            if len(fwd) and len(back) and (E.comp[back[:, None], fwd[None, :]] == E.ident[x]).any() \
                    and (E.comp[fwd[:, None], back[None, :]] == E.ident[y]).any():
                hit = True
                break
        if not hit:
            return False
    return True


# -- subfibration and stack completion of a map -----------------------------------------------


def is_pullback_of(B: FinCat, pi: int, x: int) -> bool:
    """Whether the arrow ``x`` is, up to iso over its codomain, a pullback of ``pi``."""
    X, I = int(B.src[x]), int(B.tgt[x])
    E0, U = int(B.src[pi]), int(B.tgt[pi])
    apex_counts = _hom_counts(B, X)
    for b in B.hom(I, U).tolist():
        counts = _cone_counts(B, pi, b)
        if not np.array_equal(counts, apex_counts):
            continue
        bx = B.comp[b, x]
        for a in B.hom(X, E0).tolist():
            if B.comp[pi, a] == bx and is_pullback_square(B, pi, b, a, x, counts):
                return True
    return False


def _pointed_subfibration(B: FinCat, arrows: list[int], pi: int, name: str) -> Pointed:
    A, cod = arrow_category(B, arrows, name=name)
    p = Fibration(cod, name=name) if fibration_failure(cod) is None else cod
    return Pointed(p, None, A.obj_of_key(pi))


def subfibration_members(B: FinCat, pi: int) -> list[int]:
    """The arrows of ``B`` that are pullbacks of ``pi``, in index order."""
    return [x for x in range(B.n_mor) if is_pullback_of(B, pi, x)]


def subfibration_from_map(B: FinCat, pi: int, strict: bool = False) -> Pointed:
    """``[π]``: the full subcategory of the arrow category on pullbacks of ``pi``.

    Over a truncated base the codomain projection need not be a fibration; it is
    returned as a plain functor then, or :class:`MissingPullback` is raised when
    ``strict``.
    """
    out = _pointed_subfibration(B, subfibration_members(B, pi), pi, f"[{B.mor_labels[pi]}]")
    if strict and not isinstance(out.fibration, Fibration):
        raise MissingPullback(f"{B.name} lacks pullbacks of {B.mor_labels[pi]} needed for a fibration")
    return out


def stack_members(B: FinCat, pi: int, covers=None) -> list[int]:
    """Arrows ``x`` with a pullback square ``x̃ → x`` over a cover ``e`` and ``x̃`` in ``[π]``.

    The search runs from the (few) members ``x̃`` of ``[π]``: every cover ``e``
    out of the codomain of ``x̃`` and every square from ``x̃`` over ``e`` is
    tested for being a pullback.
    """
    cov = cover_class(B) if covers is None else (cover_class(B, covers) if isinstance(covers, str) else frozenset(covers))
    local = subfibration_members(B, pi)
    members = set(local)
    for xt in local:
        Xt, It = int(B.src[xt]), int(B.tgt[xt])
        for e in B.out_of(It).tolist():
            if e not in cov:
                continue
            I = int(B.tgt[e])
            ext = B.comp[e, xt]
            for x in B.into(I).tolist():
                if x in members:
                    continue
                counts = _cone_counts(B, x, e)
                if not np.array_equal(_hom_counts(B, Xt), counts):
                    continue
                for a in B.hom(Xt, int(B.src[x])).tolist():
                    if B.comp[x, a] == ext and is_pullback_square(B, x, e, a, xt, counts):
                        members.add(x)
                        break
    return sorted(members)


def stack_completion(B: FinCat, pi: int, covers=None, strict: bool = False) -> Pointed:
    """``{π}``: arrows that become pullbacks of ``pi`` after pulling back along a cover.

    ``covers`` is a cover-class name (``regular``, ``allEpis``, ``split``) or an
    explicit set of base morphisms; the default is the regular epis.
    """
    out = _pointed_subfibration(B, stack_members(B, pi, covers), pi, f"{{{B.mor_labels[pi]}}}")
    if strict and not isinstance(out.fibration, Fibration):
        raise MissingPullback(f"{B.name} lacks pullbacks needed for the stack completion of {B.mor_labels[pi]}")
    return out
