"""Finite category and functor presentations.

A :class:`FinCat` is a presentation: objects ``0..n_obj-1``, morphisms
``0..n_mor-1`` with ``src``/``tgt`` arrays, an identity per object and a dense
composition table where ``comp[g, f]`` is ``g∘f`` (``-1`` when undefined).
Identity of objects and morphisms is index equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import (
    AxiomError,
    BadCompositionDomain,
    MissingIdentity,
    NonAssociative,
    NotPreservingComposite,
    NotPreservingIdentity,
    ParseError,
)

UNDEF = -1


class FinCat:
    """An immutable finite category presentation.

    ``obj_keys``/``mor_keys`` are optional structural keys used by builders
    (a finite-set map is keyed by its graph, a square by its components) so
    that morphisms can be looked up by what they are rather than by index.
    """

    def __init__(
        self,
        n_obj: int,
        src: Sequence[int],
        tgt: Sequence[int],
        ident: Sequence[int],
        comp: np.ndarray,
        *,
        obj_labels: Sequence[str] | None = None,
        mor_labels: Sequence[str] | None = None,
        obj_keys: Sequence[Hashable] | None = None,
        mor_keys: Sequence[Hashable] | None = None,
        name: str = "",
    ):
        self.n_obj = int(n_obj)
        self.src = np.asarray(src, dtype=np.int64)
        self.tgt = np.asarray(tgt, dtype=np.int64)
        self.ident = np.asarray(ident, dtype=np.int64)
        self.comp = np.asarray(comp, dtype=np.int64)
        for arr in (self.src, self.tgt, self.ident, self.comp):
            arr.flags.writeable = False
        self.n_mor = len(self.src)
        self.obj_labels = tuple(obj_labels) if obj_labels is not None else tuple(str(i) for i in range(self.n_obj))
        self.mor_labels = tuple(mor_labels) if mor_labels is not None else tuple(f"m{i}" for i in range(self.n_mor))
        self.obj_keys = tuple(obj_keys) if obj_keys is not None else None
        self.mor_keys = tuple(mor_keys) if mor_keys is not None else None
        self.name = name

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<FinCat{label}: {self.n_obj} objects, {self.n_mor} morphisms>"

    # -- hom-sets -------------------------------------------------------

    @cached_property
    def _homs(self) -> dict[tuple[int, int], np.ndarray]:
        buckets: dict[tuple[int, int], list[int]] = {}
        for m, (a, b) in enumerate(zip(self.src.tolist(), self.tgt.tolist())):
            buckets.setdefault((a, b), []).append(m)
        return {k: np.array(v, dtype=np.int64) for k, v in buckets.items()}

    _EMPTY = np.zeros(0, dtype=np.int64)

    def hom(self, a: int, b: int) -> np.ndarray:
        return self._homs.get((a, b), self._EMPTY)

    @cached_property
    def _out(self) -> list[np.ndarray]:
        out: list[list[int]] = [[] for _ in range(self.n_obj)]
        for m, a in enumerate(self.src.tolist()):
            out[a].append(m)
        return [np.array(v, dtype=np.int64) for v in out]

    @cached_property
    def _into(self) -> list[np.ndarray]:
        into: list[list[int]] = [[] for _ in range(self.n_obj)]
        for m, b in enumerate(self.tgt.tolist()):
            into[b].append(m)
        return [np.array(v, dtype=np.int64) for v in into]

    def out_of(self, a: int) -> np.ndarray:
        return self._out[a]

    def into(self, b: int) -> np.ndarray:
        return self._into[b]

    def compose(self, g: int, f: int) -> int:
        """Return ``g∘f``; raises ``ValueError`` when not composable."""
        r = int(self.comp[g, f])
        if r == UNDEF:
            raise ValueError(f"morphisms {g} and {f} are not composable")
        return r

    def compose_path(self, *ms: int) -> int:
        """``compose_path(h, g, f) == h∘g∘f``."""
        out = ms[-1]
        for m in reversed(ms[:-1]):
            out = self.compose(m, out)
        return out

    def is_identity(self, m: int) -> bool:
        return int(self.ident[self.src[m]]) == m

    # -- structural lookup ----------------------------------------------

    @cached_property
    def _mor_index(self) -> dict[Hashable, int]:
        if self.mor_keys is None:
            return {}
        return {k: i for i, k in enumerate(self.mor_keys)}

    @cached_property
    def _obj_index(self) -> dict[Hashable, int]:
        if self.obj_keys is None:
            return {}
        return {k: i for i, k in enumerate(self.obj_keys)}

    def mor_of_key(self, key: Hashable) -> int:
        return self._mor_index[key]

    def obj_of_key(self, key: Hashable) -> int:
        return self._obj_index[key]

    def obj_of_label(self, label: str) -> int:
        try:
            return self.obj_labels.index(label)
        except ValueError:
            raise KeyError(f"no object labelled {label!r} in {self!r}") from None

    def describe_mor(self, m: int) -> str:
        return f"{self.mor_labels[m]}: {self.obj_labels[self.src[m]]}→{self.obj_labels[self.tgt[m]]}"


@dataclass(frozen=True, eq=False)
class FinFunctor:
    dom: FinCat
    cod: FinCat
    obj_map: np.ndarray
    mor_map: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "obj_map", np.asarray(self.obj_map, dtype=np.int64))
        object.__setattr__(self, "mor_map", np.asarray(self.mor_map, dtype=np.int64))
        self.obj_map.flags.writeable = False
        self.mor_map.flags.writeable = False

    def __call__(self, m: int) -> int:
        return int(self.mor_map[m])

    def on_obj(self, o: int) -> int:
        return int(self.obj_map[o])


def identity_functor(c: FinCat) -> FinFunctor:
    return FinFunctor(c, c, np.arange(c.n_obj), np.arange(c.n_mor))


def compose_functors(g: FinFunctor, f: FinFunctor) -> FinFunctor:
    """``g∘f``."""
    if f.cod is not g.dom:
        raise ValueError("functors are not composable")
    return FinFunctor(f.dom, g.cod, g.obj_map[f.obj_map], g.mor_map[f.mor_map])


# -- building -------------------------------------------------------------


def build_category(
    objects: Sequence[Hashable],
    morphisms: Sequence[tuple[Hashable, int, int]],
    compose: Callable[[Hashable, Hashable], Hashable],
    identity: Callable[[int], Hashable],
    *,
    obj_labels: Sequence[str] | None = None,
    mor_labels: Sequence[str] | None = None,
    name: str = "",
) -> FinCat:
    """Tabulate a category from structural rules.

    ``morphisms`` lists ``(key, src, tgt)``; ``compose(g_key, f_key)`` returns
    the key of ``g∘f``. The table is filled for every composable pair, so the
    result is only as lawful as the rules; builders rely on the rules being a
    genuine category (tests re-validate).
    """
    keys = [k for k, _, _ in morphisms]
    index = {k: i for i, k in enumerate(keys)}
    if len(index) != len(keys):
        raise ValueError("duplicate morphism keys")
    src = [s for _, s, _ in morphisms]
    tgt = [t for _, _, t in morphisms]
    n = len(keys)
    ident = [index[identity(o)] for o in range(len(objects))]
    comp = np.full((n, n), UNDEF, dtype=np.int64)
    into: list[list[int]] = [[] for _ in objects]
    out: list[list[int]] = [[] for _ in objects]
    for m in range(n):
        into[tgt[m]].append(m)
        out[src[m]].append(m)
    for b in range(len(objects)):
        for g in out[b]:
            kg = keys[g]
            row = comp[g]
            for f in into[b]:
                row[f] = index[compose(kg, keys[f])]
    return FinCat(
        len(objects), src, tgt, ident, comp,
        obj_labels=obj_labels, mor_labels=mor_labels,
        obj_keys=list(objects), mor_keys=keys, name=name,
    )


def full_subcategory(c: FinCat, objects: Iterable[int], name: str = "") -> tuple[FinCat, FinFunctor]:
    """Full subcategory on ``objects`` (kept in the given order) and its inclusion."""
    objs = list(objects)
    pos = {o: i for i, o in enumerate(objs)}
    mors = [m for m in range(c.n_mor) if int(c.src[m]) in pos and int(c.tgt[m]) in pos]
    mpos = {m: i for i, m in enumerate(mors)}
    sub_comp = np.full((len(mors), len(mors)), UNDEF, dtype=np.int64)
    if mors:
        idx = np.array(mors)
        block = c.comp[np.ix_(idx, idx)]
        remap = np.full(c.n_mor + 1, UNDEF, dtype=np.int64)
        remap[idx] = np.arange(len(mors))
        sub_comp = np.where(block == UNDEF, UNDEF, remap[block])
    sub = FinCat(
        len(objs),
        [pos[int(c.src[m])] for m in mors],
        [pos[int(c.tgt[m])] for m in mors],
        [mpos[int(c.ident[o])] for o in objs],
        sub_comp,
        obj_labels=[c.obj_labels[o] for o in objs],
        mor_labels=[c.mor_labels[m] for m in mors],
        obj_keys=[c.obj_keys[o] for o in objs] if c.obj_keys is not None else None,
        mor_keys=[c.mor_keys[m] for m in mors] if c.mor_keys is not None else None,
        name=name or (f"{c.name}|sub" if c.name else ""),
    )
    return sub, FinFunctor(sub, c, objs, mors)


# -- validation -------------------------------------------------------------


def _as_int(x: Any, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
        raise ParseError(f"{what} must be an integer, got {x!r}")
    return int(x)


def category_to_json(c: FinCat) -> dict:
    doc = {
        "objects": c.n_obj,
        "morphisms": [{"src": int(s), "tgt": int(t)} for s, t in zip(c.src, c.tgt)],
        "identities": c.ident.tolist(),
        "comp": c.comp.tolist(),
        "objectLabels": list(c.obj_labels),
        "morphismLabels": list(c.mor_labels),
    }
    if c.name:
        doc["name"] = c.name
    return doc


def validate_category(raw: dict | FinCat) -> FinCat:
    """Check every category axiom exhaustively and return the presentation.

    Accepts the JSON document shape (see :func:`category_to_json`) or an
    existing :class:`FinCat` to re-check.
    """
    if isinstance(raw, FinCat):
        c = raw
    else:
        c = _parse_category(raw)
    n, nm = c.n_obj, c.n_mor
    src, tgt, comp = c.src, c.tgt, c.comp

    for o in range(n):
        i = int(c.ident[o])
        if src[i] != o or tgt[i] != o:
            raise MissingIdentity(o, f" (morphism {i} is not an endomorphism of {o})")

    composable = tgt[None, :] == src[:, None]  # [g, f]
    defined = comp != UNDEF
    bad = np.argwhere(composable != defined)
    if len(bad):
        g, f = map(int, bad[0])
        why = "defined for a non-composable pair" if defined[g, f] else "undefined for a composable pair"
        raise BadCompositionDomain(g, f, why)
    gs, fs = np.nonzero(defined)
    res = comp[gs, fs]
    wrong = (src[res] != src[fs]) | (tgt[res] != tgt[gs])
    if wrong.any():
        k = int(np.argmax(wrong))
        raise BadCompositionDomain(int(gs[k]), int(fs[k]), f"result {int(res[k])} has the wrong source/target")

    for f in range(nm):
        a, b = int(src[f]), int(tgt[f])
        if comp[c.ident[b], f] != f:
            raise MissingIdentity(b, f": id∘{f} != {f}")
        if comp[f, c.ident[a]] != f:
            raise MissingIdentity(a, f": {f}∘id != {f}")

    # (h∘g)∘f == h∘(g∘f) for every composable triple, one (g, f) pair at a time.
    for g, f, gf in zip(gs.tolist(), fs.tolist(), res.tolist()):
        hs = c.out_of(int(tgt[g]))
        if not len(hs):
            continue
        left = comp[comp[hs, g], f]
        right = comp[hs, gf]
        if not np.array_equal(left, right):
            h = int(hs[np.argmax(left != right)])
            raise NonAssociative(h, g, f)
    return c


def _parse_category(raw: dict) -> FinCat:
    if not isinstance(raw, dict):
        raise ParseError("category document must be a JSON object")
    try:
        n = _as_int(raw["objects"], "objects")
        mors = raw["morphisms"]
        idents = raw["identities"]
        table = raw["comp"]
    except KeyError as e:
        raise ParseError(f"missing field {e.args[0]!r}") from None
    if n < 0:
        raise ParseError("objects must be non-negative")
    src, tgt = [], []
    for k, m in enumerate(mors):
        try:
            s, t = _as_int(m["src"], f"morphisms[{k}].src"), _as_int(m["tgt"], f"morphisms[{k}].tgt")
        except (KeyError, TypeError):
            raise ParseError(f"morphisms[{k}] must have integer src and tgt") from None
        if not (0 <= s < n and 0 <= t < n):
            raise ParseError(f"morphisms[{k}] refers to a missing object")
        src.append(s)
        tgt.append(t)
    nm = len(src)
    if len(idents) != n:
        raise ParseError(f"identities must list one morphism per object ({n})")
    ident = [_as_int(i, "identities[]") for i in idents]
    if any(not 0 <= i < nm for i in ident):
        raise ParseError("identities refer to a missing morphism")
    if len(table) != nm or any(len(row) != nm for row in table):
        raise ParseError(f"comp must be a {nm}x{nm} table")
    comp = np.array(table, dtype=np.int64).reshape(nm, nm)
    if ((comp < UNDEF) | (comp >= nm)).any():
        raise ParseError("comp entries must be -1 or morphism indices")
    return FinCat(
        n, src, tgt, ident, comp,
        obj_labels=raw.get("objectLabels"),
        mor_labels=raw.get("morphismLabels"),
        name=raw.get("name", ""),
    )


def validate_functor(raw: dict | FinFunctor, dom: FinCat | None = None, cod: FinCat | None = None) -> FinFunctor:
    """Check that an object/morphism assignment is a functor."""
    if isinstance(raw, FinFunctor):
        F = raw
        dom, cod = F.dom, F.cod
    else:
        if dom is None or cod is None:
            raise ParseError("validate_functor needs dom and cod categories")
        try:
            om = [_as_int(x, "objMap[]") for x in raw["objMap"]]
            mm = [_as_int(x, "morMap[]") for x in raw["morMap"]]
        except KeyError as e:
            raise ParseError(f"missing field {e.args[0]!r}") from None
        if len(om) != dom.n_obj or len(mm) != dom.n_mor:
            raise ParseError("objMap/morMap lengths do not match the domain")
        if any(not 0 <= o < cod.n_obj for o in om) or any(not 0 <= m < cod.n_mor for m in mm):
            raise ParseError("functor maps into a missing object or morphism")
        F = FinFunctor(dom, cod, om, mm)
    om, mm = F.obj_map, F.mor_map
    for m in range(dom.n_mor):
        if cod.src[mm[m]] != om[dom.src[m]] or cod.tgt[mm[m]] != om[dom.tgt[m]]:
            raise AxiomError(f"morphism {m} is sent to {int(mm[m])}, which has the wrong source/target")
    for o in range(dom.n_obj):
        if mm[dom.ident[o]] != cod.ident[om[o]]:
            raise NotPreservingIdentity(o)
    gs, fs = np.nonzero(dom.comp != UNDEF)
    lhs = mm[dom.comp[gs, fs]]
    rhs = cod.comp[mm[gs], mm[fs]]
    bad = lhs != rhs
    if bad.any():
        k = int(np.argmax(bad))
        raise NotPreservingComposite(int(gs[k]), int(fs[k]))
    return F


# -- isomorphisms and skeleta -----------------------------------------------


@dataclass(frozen=True)
class IsoClasses:
    class_of: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]
    witness: dict  # (a, b) -> least-index isomorphism a → b


def inverses(c: FinCat) -> np.ndarray:
    """Per morphism, the index of its inverse or -1."""
    inv = np.full(c.n_mor, UNDEF, dtype=np.int64)
    for f in range(c.n_mor):
        a, b = int(c.src[f]), int(c.tgt[f])
        cands = c.hom(b, a)
        if not len(cands):
            continue
        ok = (c.comp[cands, f] == c.ident[a]) & (c.comp[f, cands] == c.ident[b])
        if ok.any():
            inv[f] = cands[np.argmax(ok)]
    return inv


def iso_classes(c: FinCat) -> IsoClasses:
    inv = inverses(c)
    witness: dict[tuple[int, int], int] = {}
    for f in np.nonzero(inv != UNDEF)[0].tolist():
        key = (int(c.src[f]), int(c.tgt[f]))
        if key not in witness:
            witness[key] = f
    class_of = []
    reps: list[int] = []
    for o in range(c.n_obj):
        for k, r in enumerate(reps):
            if (o, r) in witness:
                class_of.append(k)
                break
        else:
            class_of.append(len(reps))
            reps.append(o)
    classes = tuple(tuple(o for o in range(c.n_obj) if class_of[o] == k) for k in range(len(reps)))
    return IsoClasses(tuple(class_of), classes, witness)


@dataclass(frozen=True)
class CategoryFlags:
    skeletal: bool
    gaunt: bool
    groupoid: bool
    preorder: bool


def category_predicates(c: FinCat) -> CategoryFlags:
    inv = inverses(c)
    isos = np.nonzero(inv != UNDEF)[0]
    skeletal = bool(np.all(c.src[isos] == c.tgt[isos]))
    gaunt = all(c.is_identity(int(f)) for f in isos if c.src[f] == c.tgt[f])
    groupoid = bool(np.all(inv != UNDEF))
    preorder = all(len(h) <= 1 for h in c._homs.values())
    return CategoryFlags(skeletal, gaunt, groupoid, preorder)


@dataclass(frozen=True)
class SkeletonData:
    class_of: tuple[int, ...]
    section: tuple[int, ...]      # least-index representative per class
    chosen_iso: tuple[int, ...]   # per object, an iso onto its representative

    @property
    def n_classes(self) -> int:
        return len(self.section)


def skeleton_data(c: FinCat) -> SkeletonData:
    ic = iso_classes(c)
    section = tuple(cls[0] for cls in ic.classes)
    chosen = []
    for o in range(c.n_obj):
        rep = section[ic.class_of[o]]
        chosen.append(int(c.ident[o]) if o == rep else ic.witness[(o, rep)])
    return SkeletonData(ic.class_of, section, tuple(chosen))
