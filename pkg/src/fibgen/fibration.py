"""Cartesian morphisms, fibrations, fibers, cleavages and base-category limits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidChoice, NotAFibration, NotSplitCleavage
from .fincat import UNDEF, FinCat, FinFunctor


def _cached(obj, key, compute):
    d = obj.__dict__
    if key not in d:
        d[key] = compute()
    return d[key]


# -- cartesian morphisms ----------------------------------------------------------


def _count_table(base: FinCat, q: int, u: int) -> np.ndarray:
    """``out[v]`` = number of ``g: q → dom(u)`` with ``u∘g = v``."""
    cache = _cached(base, "_fib_counts", dict)
    key = (q, u)
    if key not in cache:
        gs = base.hom(q, int(base.src[u]))
        cache[key] = np.bincount(base.comp[u, gs], minlength=base.n_mor) if len(gs) else np.zeros(base.n_mor, np.int64)
    return cache[key]


def _compute_cartesian(p: FinFunctor) -> np.ndarray:
    E, B = p.dom, p.cod
    pm, po = p.mor_map, p.obj_map
    nb = B.n_mor
    flags = np.ones(E.n_mor, dtype=bool)
    for (e, f_obj), fs in E._homs.items():
        us = pm[fs]
        for h_obj in range(E.n_obj):
            ks = E.hom(h_obj, e)
            hs = E.hom(h_obj, f_obj)
            q = int(po[h_obj])
            alive = flags[fs]
            if not alive.any():
                break
            # target size: pairs (h, g) with p(f)∘g = p(h)
            targets = {}
            for u in np.unique(us).tolist():
                targets[u] = int(_count_table(B, q, u)[pm[hs]].sum()) if len(hs) else 0
            need = np.array([targets[u] for u in us.tolist()])
            ok = need == len(ks)
            if len(ks) > 1:
                keys = E.comp[np.ix_(fs, ks)] * nb + pm[ks][None, :]
                keys.sort(axis=1)
                ok &= ~(keys[:, 1:] == keys[:, :-1]).any(axis=1)
            flags[fs] &= ok
    return flags


def cartesian_flags(p: FinFunctor) -> np.ndarray:
    """Boolean array: which morphisms of ``p.dom`` are cartesian for ``p``."""
    return _cached(p, "_cartesian", lambda: _compute_cartesian(p))


def is_cartesian(p: FinFunctor, f: int) -> bool:
    return bool(cartesian_flags(p)[f])


def cartesian_failure(p: FinFunctor, f: int) -> dict | None:
    """A replayable reason why ``f`` is not cartesian, or ``None`` if it is.

    The witness names an object ``H``, a morphism ``h: H → cod f`` and a base
    morphism ``g: pH → p(dom f)`` with ``p(h) = p(f)∘g``, together with the
    list of lifts ``H → dom f`` over ``g`` through which ``h`` factors (empty or
    more than one).
    """
    E, B = p.dom, p.cod
    e, t = int(E.src[f]), int(E.tgt[f])
    u = p(f)
    for h_obj in range(E.n_obj):
        ks = E.hom(h_obj, e)
        fk = E.comp[f, ks]
        pk = p.mor_map[ks]
        for h in E.hom(h_obj, t).tolist():
            for g in B.hom(p.on_obj(h_obj), p.on_obj(e)).tolist():
                if B.comp[u, g] != p(h):
                    continue
                lifts = ks[(fk == h) & (pk == g)].tolist()
                if len(lifts) != 1:
                    return {"H": h_obj, "h": h, "g": g, "lifts": lifts}
    return None


def cartesian_lifts(p: FinFunctor, u: int, e: int) -> list[int]:
    """All cartesian morphisms into ``e`` lying over ``u``."""
    if p.cod.tgt[u] != p.obj_map[e]:
        raise ValueError(f"base morphism {u} does not end at p({e})")
    cands = p.dom.into(e)
    flags = cartesian_flags(p)
    return [int(f) for f in cands if flags[f] and p.mor_map[f] == u]


def _lift_table(p: FinFunctor) -> dict[tuple[int, int], list[int]]:
    def build():
        table: dict[tuple[int, int], list[int]] = {}
        flags = cartesian_flags(p)
        for f in np.nonzero(flags)[0].tolist():
            table.setdefault((int(p.mor_map[f]), int(p.dom.tgt[f])), []).append(f)
        return table

    return _cached(p, "_lifts", build)


def fibration_failure(p: FinFunctor) -> tuple[int, int] | None:
    """First ``(u, E)`` with no cartesian lift, or ``None``."""
    table = _lift_table(p)
    B = p.cod
    for e in range(p.dom.n_obj):
        for u in B.into(p.on_obj(e)).tolist():
            if (u, e) not in table:
                return (u, e)
    return None


class Fibration:
    """A functor verified to be a fibration, with its table of cartesian lifts."""

    def __init__(self, p: FinFunctor, name: str = ""):
        bad = fibration_failure(p)
        if bad is not None:
            raise NotAFibration(*bad)
        self.p = p
        self.name = name or p.dom.name

    @property
    def total(self) -> FinCat:
        return self.p.dom

    @property
    def base(self) -> FinCat:
        return self.p.cod

    def lifts(self, u: int, e: int) -> list[int]:
        return _lift_table(self.p).get((u, e), [])

    def __repr__(self) -> str:
        return f"<Fibration {self.name}: {self.total.n_obj} objects over {self.base.n_obj}>"


def as_functor(p: Fibration | FinFunctor) -> FinFunctor:
    return p.p if isinstance(p, Fibration) else p


def is_fibration(p: Fibration | FinFunctor) -> bool:
    return fibration_failure(as_functor(p)) is None


def as_fibration(p: FinFunctor, name: str = "") -> Fibration:
    return Fibration(p, name)


# -- fibers -------------------------------------------------------------------------


def subcategory(c: FinCat, objects: Iterable[int], morphisms: Iterable[int], name: str = "") -> tuple[FinCat, FinFunctor]:
    """Subcategory on given objects and morphisms (assumed closed) with its inclusion."""
    objs = list(objects)
    mors = list(morphisms)
    opos = {o: i for i, o in enumerate(objs)}
    remap = np.full(c.n_mor + 1, UNDEF, dtype=np.int64)
    idx = np.array(mors, dtype=np.int64)
    remap[idx] = np.arange(len(mors))
    block = c.comp[np.ix_(idx, idx)] if len(mors) else np.zeros((0, 0), np.int64)
    sub_comp = np.where(block == UNDEF, UNDEF, remap[block])
    sub = FinCat(
        len(objs),
        [opos[int(c.src[m])] for m in mors],
        [opos[int(c.tgt[m])] for m in mors],
        [int(remap[c.ident[o]]) for o in objs],
        sub_comp,
        obj_labels=[c.obj_labels[o] for o in objs],
        mor_labels=[c.mor_labels[m] for m in mors],
        obj_keys=[c.obj_keys[o] for o in objs] if c.obj_keys is not None else None,
        mor_keys=[c.mor_keys[m] for m in mors] if c.mor_keys is not None else None,
        name=name,
    )
    return sub, FinFunctor(sub, c, objs, mors)


def objects_over(p: Fibration | FinFunctor, i: int) -> list[int]:
    q = as_functor(p)
    return np.nonzero(q.obj_map == i)[0].tolist()


def vertical(p: Fibration | FinFunctor, i: int) -> list[int]:
    q = as_functor(p)
    return np.nonzero(q.mor_map == q.cod.ident[i])[0].tolist()


def fiber(p: Fibration | FinFunctor, i: int) -> tuple[FinCat, FinFunctor]:
    """The fiber over base object ``i``: objects over ``i``, morphisms over ``id_i``."""
    q = as_functor(p)
    return subcategory(q.dom, objects_over(q, i), vertical(q, i),
                       name=f"{q.dom.name}[{q.cod.obj_labels[i]}]")


# -- cleavages ----------------------------------------------------------------------


class Cleavage:
    """A choice of one cartesian lift per ``(u, E)``."""

    def __init__(self, fibration: Fibration, choice: Mapping[tuple[int, int], int]):
        self.fibration = fibration
        self.choice = dict(choice)

    def lift(self, u: int, e: int) -> int:
        return self.choice[(u, e)]

    def reindex_obj(self, u: int, e: int) -> int:
        return int(self.fibration.total.src[self.choice[(u, e)]])

    def reindex(self, u: int) -> FinFunctor:
        """The reindexing functor ``fiber(cod u) → fiber(dom u)`` along ``u``."""
        fib = self.fibration
        p, E, B = fib.p, fib.total, fib.base
        j, i = int(B.src[u]), int(B.tgt[u])
        src_fib, src_incl = fiber(p, i)
        dst_fib, dst_incl = fiber(p, j)
        dst_obj_pos = {o: k for k, o in enumerate(dst_incl.obj_map.tolist())}
        dst_mor_pos = {m: k for k, m in enumerate(dst_incl.mor_map.tolist())}
        vert_j = B.ident[j]
        obj_map = [dst_obj_pos[self.reindex_obj(u, int(e))] for e in src_incl.obj_map]
        mor_map = []
        for m in src_incl.mor_map.tolist():
            a, b = int(E.src[m]), int(E.tgt[m])
            la, lb = self.lift(u, a), self.lift(u, b)
            target = E.comp[m, la]
            cands = E.hom(int(E.src[la]), int(E.src[lb]))
            ok = (p.mor_map[cands] == vert_j) & (E.comp[lb, cands] == target)
            mor_map.append(dst_mor_pos[int(cands[np.argmax(ok)])])
        return FinFunctor(src_fib, dst_fib, obj_map, mor_map)


def make_cleavage(fib: Fibration, chooser: str | Mapping[tuple[int, int], int] = "leastIndex") -> Cleavage:
    p, B = fib.p, fib.base
    choice: dict[tuple[int, int], int] = {}
    for e in range(fib.total.n_obj):
        for u in B.into(p.on_obj(e)).tolist():
            lifts = fib.lifts(u, e)
            if chooser == "leastIndex":
                choice[(u, e)] = lifts[0]
            else:
                f = chooser.get((u, e)) if isinstance(chooser, Mapping) else None
                if f is None or f not in lifts:
                    raise InvalidChoice(u, e, f)
                choice[(u, e)] = f
    return Cleavage(fib, choice)


def split_failure(cl: Cleavage) -> dict | None:
    """First violation of strict functoriality of the chosen lifts, or ``None``."""
    fib = cl.fibration
    E, B = fib.total, fib.base
    for e in range(E.n_obj):
        i = fib.p.on_obj(e)
        if cl.lift(int(B.ident[i]), e) != E.ident[e]:
            return {"kind": "identity", "E": e}
        for v in B.into(i).tolist():
            lv = cl.lift(v, e)
            rv = int(E.src[lv])
            for u in B.into(int(B.src[v])).tolist():
                lvu = cl.lift(int(B.comp[v, u]), e)
                if lvu != E.comp[lv, cl.lift(u, rv)]:
                    return {"kind": "composite", "E": e, "v": v, "u": u}
    return None


def is_split(cl: Cleavage) -> bool:
    """Chosen lifts of identities are identities and lifts of composites compose.

    This is equivalent to the reindexing functors composing strictly.
    """
    return split_failure(cl) is None


def require_split(cl: Cleavage) -> Cleavage:
    bad = split_failure(cl)
    if bad is not None:
        raise NotSplitCleavage(f"cleavage is not split: {bad}")
    return cl


# -- base-category structure ---------------------------------------------------------


@dataclass(frozen=True)
class MonoClass:
    base: FinCat
    members: frozenset

    def __contains__(self, m: int) -> bool:
        return m in self.members


@dataclass(frozen=True)
class MorphismFlags:
    mono: np.ndarray
    epi: np.ndarray
    split_epi: np.ndarray
    regular_epi: np.ndarray
    iso: np.ndarray

    def of(self, m: int) -> dict:
        return {k: bool(getattr(self, k)[m]) for k in ("mono", "epi", "split_epi", "regular_epi", "iso")}


def _is_mono(B: FinCat, f: int) -> bool:
    a = int(B.src[f])
    for q in range(B.n_obj):
        ks = B.hom(q, a)
        if len(ks) > 1 and len(np.unique(B.comp[f, ks])) != len(ks):
            return False
    return True


def _is_epi(B: FinCat, f: int) -> bool:
    b = int(B.tgt[f])
    for z in range(B.n_obj):
        ws = B.hom(b, z)
        if len(ws) > 1 and len(np.unique(B.comp[ws, f])) != len(ws):
            return False
    return True


def is_coequalizer(B: FinCat, e: int, a: int, b: int) -> bool:
    """Whether ``e`` is a coequalizer of the parallel pair ``a, b``."""
    if B.comp[e, a] != B.comp[e, b]:
        return False
    x, y = int(B.src[e]), int(B.tgt[e])
    for z in range(B.n_obj):
        zs = B.hom(x, z)
        ws = B.hom(y, z)
        coeq = zs[B.comp[zs, a] == B.comp[zs, b]] if len(zs) else zs
        through = B.comp[ws, e] if len(ws) else ws
        # bijection hom(y, z) → {z: z∘a = z∘b}
        if len(np.unique(through)) != len(ws) or set(through.tolist()) != set(coeq.tolist()):
            return False
    return True


def _is_regular_epi(B: FinCat, e: int, epi: bool) -> bool:
    if not epi:
        return False
    kp = pullback(B, e, e)
    if kp is not None:
        return is_coequalizer(B, e, kp.p1, kp.p2)
    x = int(B.src[e])
    for k in range(B.n_obj):
        ms = B.hom(k, x)
        if not len(ms):
            continue
        em = B.comp[e, ms]
        for i, a in enumerate(ms.tolist()):
            for b in ms[i:][em[i:] == em[i]].tolist():
                if is_coequalizer(B, e, a, b):
                    return True
    return False


def mono_epi_analysis(B: FinCat) -> MorphismFlags:
    def compute():
        n = B.n_mor
        mono = np.array([_is_mono(B, f) for f in range(n)], dtype=bool)
        epi = np.array([_is_epi(B, f) for f in range(n)], dtype=bool)
        split = np.zeros(n, dtype=bool)
        iso = np.zeros(n, dtype=bool)
        for f in range(n):
            a, b = int(B.src[f]), int(B.tgt[f])
            ss = B.hom(b, a)
            if len(ss):
                right = B.comp[f, ss] == B.ident[b]
                split[f] = right.any()
                iso[f] = (right & (B.comp[ss, f] == B.ident[a])).any()
        regular = np.array([_is_regular_epi(B, f, bool(epi[f])) for f in range(n)], dtype=bool)
        return MorphismFlags(mono, epi, split, regular, iso)

    return _cached(B, "_mono_epi", compute)


def all_monos(B: FinCat) -> MonoClass:
    flags = mono_epi_analysis(B)
    return MonoClass(B, frozenset(np.nonzero(flags.mono)[0].tolist()))


def cover_class(B: FinCat, kind: str = "regular") -> frozenset:
    """Covers of the base: ``regular`` epis (default), ``allEpis`` or ``split`` epis."""
    flags = mono_epi_analysis(B)
    arr = {"regular": flags.regular_epi, "allEpis": flags.epi, "split": flags.split_epi}[kind]
    return frozenset(np.nonzero(arr)[0].tolist())


def is_cover_cartesian(p: Fibration | FinFunctor, f: int, covers: Iterable[int] | None = None) -> bool:
    q = as_functor(p)
    cov = cover_class(q.cod) if covers is None else covers
    return is_cartesian(q, f) and q(f) in cov


# -- pullbacks ------------------------------------------------------------------------


@dataclass(frozen=True)
class Cone:
    apex: int
    p1: int
    p2: int


def _cone_counts(B: FinCat, f: int, g: int) -> np.ndarray:
    """Per object ``q``, the number of pairs ``(x: q→X, y: q→Y)`` with ``f∘x = g∘y``."""
    x, y = int(B.src[f]), int(B.src[g])
    out = np.zeros(B.n_obj, dtype=np.int64)
    for q in range(B.n_obj):
        xs, ys = B.hom(q, x), B.hom(q, y)
        if len(xs) and len(ys):
            cnt = np.bincount(B.comp[g, ys], minlength=B.n_mor)
            out[q] = cnt[B.comp[f, xs]].sum()
    return out


def _hom_matrix(B: FinCat) -> np.ndarray:
    """``out[q, o] = |hom(q, o)|``."""
    def compute():
        out = np.zeros((B.n_obj, B.n_obj), dtype=np.int64)
        np.add.at(out, (B.src, B.tgt), 1)
        return out
    return _cached(B, "_hom_matrix", compute)


def _hom_counts(B: FinCat, apex: int) -> np.ndarray:
    return _hom_matrix(B)[:, apex]


def _cone_injective(B: FinCat, p1: int, p2: int) -> bool:
    apex = int(B.src[p1])
    ks = B.into(apex)
    keys = (B.src[ks] * B.n_mor + B.comp[p1, ks]) * B.n_mor + B.comp[p2, ks]
    return len(np.unique(keys)) == len(ks)


def is_pullback_square(B: FinCat, f: int, g: int, p1: int, p2: int, counts: np.ndarray | None = None) -> bool:
    """Whether ``(p1, p2)`` is a pullback cone over the cospan ``f, g``."""
    if B.src[p1] != B.src[p2] or B.tgt[p1] != B.src[f] or B.tgt[p2] != B.src[g]:
        return False
    if B.comp[f, p1] != B.comp[g, p2]:
        return False
    apex = int(B.src[p1])
    counts = _cone_counts(B, f, g) if counts is None else counts
    if not np.array_equal(_hom_counts(B, apex), counts):
        return False
    return _cone_injective(B, p1, p2)


def pullback(B: FinCat, f: int, g: int) -> Cone | None:
    """Least-index pullback cone of ``X --f--> Z <--g-- Y``, or ``None`` if none exists.

    A cone is universal exactly when, for every object ``q``, composing with it
    is a bijection from ``hom(q, apex)`` to the compatible pairs out of ``q``.
    Apexes are pre-filtered by comparing those cardinalities.
    """
    if B.tgt[f] != B.tgt[g]:
        raise ValueError("not a cospan")
    cache = _cached(B, "_pullbacks", dict)
    if (f, g) in cache:
        return cache[(f, g)]
    counts = _cone_counts(B, f, g)
    x, y = int(B.src[f]), int(B.src[g])
    found = None
    hm = _hom_matrix(B)
    for apex in np.nonzero((hm == counts[:, None]).all(axis=0))[0].tolist():
        p1s, p2s = B.hom(apex, x), B.hom(apex, y)
        ends = B.hom(apex, apex)
        for a in p1s.tolist():
            fa = B.comp[f, a]
            for b in p2s[B.comp[g, p2s] == fa].tolist():
                # cheap rejection on endomorphisms of the apex before the full check
                if len(ends) > 1 and len(np.unique(B.comp[a, ends] * B.n_mor + B.comp[b, ends])) != len(ends):
                    continue
                if _cone_injective(B, a, b):
                    found = Cone(apex, a, b)
                    break
            if found:
                break
        if found:
            break
    cache[(f, g)] = found
    return found


def terminal_object(B: FinCat) -> int | None:
    for o in range(B.n_obj):
        if all(len(B.hom(q, o)) == 1 for q in range(B.n_obj)):
            return o
    return None


def product(B: FinCat, a: int, b: int) -> Cone | None:
    t = terminal_object(B)
    if t is None:
        return None
    return pullback(B, int(B.hom(a, t)[0]), int(B.hom(b, t)[0]))


def pairing(B: FinCat, cone: Cone, x: int, y: int) -> int:
    """The unique ``k`` into the cone apex with ``p1∘k = x`` and ``p2∘k = y``."""
    ks = B.hom(int(B.src[x]), cone.apex)
    ok = (B.comp[cone.p1, ks] == x) & (B.comp[cone.p2, ks] == y)
    if ok.sum() != 1:
        raise ValueError("pair does not factor uniquely through the cone")
    return int(ks[np.argmax(ok)])
