"""Builder expressions, the built-in fibrations, and workspace persistence.

A builder expression names a category or a fibered category, for example
``finset_skel:2``, ``fam:deloopZ2:1``, ``externalize:walkingIso@finset_skel:2``
or ``stack:gsets:Z2:4:2triv->1``. See :data:`BUILDER_HELP`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import BadIndex, BoundsTooLarge, ParseError, UnknownArtifact, UnknownBuilder
from .fibration import Cleavage, Fibration, as_functor, fibration_failure, is_split, pairing, product
from .fincat import FinCat, FinFunctor, category_to_json, validate_category, validate_functor
from .constructions.bases import (
    NAMED_CATEGORIES,
    arrow_category,
    deloop,
    find_function,
    finset_category,
    finset_skel,
    gset_category,
    monoid_category,
    parse_group,
    set_size,
    trivial_group,
)
from .constructions.derived import skeletal_generic_candidate, split_from_weak, stack_completion, subfibration_from_map
from .constructions.internal import (
    GroupObject,
    Pointed,
    arrow_group_object,
    externalize,
    fam,
    internal_deloop,
    set_group_object,
)

BUILDER_HELP = """\
categories:
  terminal | walkingArrow | walkingIso | discrete2 | twoClassGroupoid | cospan
  idempotent | deloopZ2 | deloopZ3 | deloop:<G> | monoid:<table>
  finset_skel:<N> | gsets:<G>:<N> | arrow:<category> | <file.json>
fibered categories:
  fam:<category>:<N>                      family fibration over finset_skel:<N>
  externalize:<category>[@finset_skel:<N>]  category internal to finite sets
  skeleton:<category>:<N>                 fam with the iso-class representatives as T
  intdeloop:<G>@finset_skel:<N>           externalized delooping of a group in finite sets
  intdeloop:1->Z2@arrow                   the same for the group object 1 → Z2 in arrows of finite sets
  arrow:<category>                        codomain functor
  subfib:<category>:<morphism>            pullbacks of one map
  stack:<category>:<morphism>             stack completion of one map
  split:<fibered category>                split fibration of the distinguished object
  <file.json>                             {"dom", "cod", "objMap", "morMap"[, "cleavage", "T"]}
morphisms are written <src label>-><tgt label>, optionally with a :<label suffix>,
or as a plain index; a leading "pi=" is ignored.
"""

SIZE_LIMIT = {"finset_skel": 4, "gsets": 4, "fam": 3}


@dataclass
class Artifact:
    """A built category or pointed fibered category."""

    expr: str
    kind: str  # "category" | "fibration"
    category: FinCat | None = None
    fibration: Fibration | FinFunctor | None = None
    cleavage: Cleavage | None = None
    T: int | None = None
    extras: dict = field(default_factory=dict)

    @property
    def functor(self) -> FinFunctor:
        return as_functor(self.fibration)


# -- parsing helpers ---------------------------------------------------------------------------


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UnknownBuilder(f"{what} must be an integer, got {text!r}") from None


def _bounded(kind: str, n: int) -> int:
    if n < 0:
        raise UnknownBuilder(f"{kind} bound must be non-negative")
    if n > SIZE_LIMIT[kind]:
        raise BoundsTooLarge(f"{kind} bound {n} exceeds the supported limit {SIZE_LIMIT[kind]}")
    return n


def _group(name: str):
    try:
        return parse_group(name)
    except KeyError as e:
        raise UnknownBuilder(str(e.args[0])) from None


@lru_cache(maxsize=64)
def parse_category(expr: str) -> FinCat:
    """Resolve a category expression."""
    expr = expr.strip()
    if expr in NAMED_CATEGORIES:
        return NAMED_CATEGORIES[expr]()
    head, _, rest = expr.partition(":")
    if head == "finset_skel":
        return finset_skel(_bounded("finset_skel", _int(rest, "finset_skel bound")))
    if head == "gsets" or head.startswith("gsets"):
        parts = rest.split(":") if head == "gsets" else [head[5:], rest]
        if len(parts) != 2:
            raise UnknownBuilder("expected gsets:<group>:<N>")
        return gset_category(_group(parts[0]), _bounded("gsets", _int(parts[1], "gsets bound")))
    if head == "deloop":
        return deloop(_group(rest))
    if head.startswith("deloop") and len(head) > 6:
        return deloop(_group(head[6:]))
    if head == "monoid":
        try:
            table = json.loads(rest)
        except json.JSONDecodeError as e:
            raise UnknownBuilder(f"bad monoid table: {e}") from None
        return validate_category(monoid_category(table, name=f"monoid{rest}"))
    if head == "arrow":
        return arrow_category(parse_category(rest))[0]
    if expr.endswith(".json") or os.path.exists(expr):
        doc = _load_json(expr)
        if "objMap" in doc:
            raise UnknownBuilder(f"{expr} is a functor file, not a category")
        return validate_category(doc)
    raise UnknownBuilder(f"unknown category {expr!r}")


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UnknownBuilder(f"no such file {path!r}") from None
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: malformed JSON ({e.msg} at line {e.lineno})") from None


def resolve_morphism(B: FinCat, ref: str) -> int:
    """A morphism of ``B`` named by index, ``src->tgt`` labels, or ``src->tgt:label``."""
    ref = ref.strip()
    if ref.startswith("pi="):
        ref = ref[3:]
    if ref.lstrip("-").isdigit():
        m = int(ref)
        if not 0 <= m < B.n_mor:
            raise BadIndex(f"morphism {m} is out of range for {B.name} ({B.n_mor} morphisms)")
        return m
    ends, _, suffix = ref.partition(":")
    if "->" not in ends:
        raise UnknownBuilder(f"cannot read morphism {ref!r}; use src->tgt or an index")
    a, b = (s.strip() for s in ends.split("->", 1))
    try:
        oa, ob = B.obj_of_label(a), B.obj_of_label(b)
    except (KeyError, ValueError):
        raise UnknownBuilder(f"{B.name} has no objects labelled {a!r} and {b!r}") from None
    cands = [m for m in B.hom(oa, ob).tolist() if not suffix or B.mor_labels[m].endswith(suffix)]
    if len(cands) != 1:
        opts = ", ".join(f"{m}={B.mor_labels[m]}" for m in B.hom(oa, ob).tolist())
        raise UnknownBuilder(f"{ref!r} names {len(cands)} morphisms in {B.name}; candidates: {opts}")
    return cands[0]


# -- group-object setups -------------------------------------------------------------------------


@lru_cache(maxsize=8)
def set_deloop(group_name: str, n: int) -> tuple[Pointed, GroupObject]:
    """Externalized delooping of a finite group inside finite sets, indexed by sets of size ≤ ``n``."""
    group = _group(group_name)
    sizes = sorted(set(range(n + 1)) | {group.order, group.order ** 2})
    if max(sizes) > 4:
        raise BoundsTooLarge(f"group {group.name} needs sets of size {max(sizes)}")
    B = finset_category(sizes, name=f"finset{sizes}")
    G = set_group_object(B, group)
    index = [o for o in range(B.n_obj) if set_size(B, o) <= n]
    return externalize(internal_deloop(G), index), G


@lru_cache(maxsize=4)
def arrow_deloop(g1_name: str = "Z2") -> tuple[Pointed, GroupObject]:
    """Externalized delooping of the group object ``1 → G`` in arrows of finite sets.

    The base holds all functions between sets of size at most 2 plus the
    diagonal ``1 → 4`` that the product of the carrier with itself needs; the
    index base is the arrow category on the functions between small sets.
    """
    g1 = _group(g1_name)
    if g1.order > 2:
        raise BoundsTooLarge("only groups of order at most 2 fit the arrow base")
    S = finset_category([0, 1, 2, 4], name="finset[0,1,2,4]")
    small = [m for m in range(S.n_mor) if set_size(S, int(S.src[m])) <= 2 and set_size(S, int(S.tgt[m])) <= 2]
    one = next(o for o in range(S.n_obj) if set_size(S, o) == 1)
    extra = []
    if g1.order == 2:
        two = next(o for o in range(S.n_obj) if set_size(S, o) == 2)
        e = find_function(S, one, two, (0,))
        extra = [pairing(S, product(S, two, two), e, e)]
    A, _ = arrow_category(S, small + extra, name="arrow:finset_skel:2+")
    G = arrow_group_object(A, S, trivial_group(), g1, (g1.unit,))
    return externalize(internal_deloop(G), list(range(len(small)))), G


# -- fibered-category builders ----------------------------------------------------------------------


def _pointed(expr: str, pt: Pointed, **extras) -> Artifact:
    q = as_functor(pt.fibration)
    return Artifact(expr, "fibration", q.dom, pt.fibration, pt.splitting, pt.T, dict(extras))


def _split_at(expr: str, what: str) -> tuple[str, str]:
    """Split ``<category>:<last>`` at the final colon."""
    cat, sep, last = expr.rpartition(":")
    if not sep or not cat:
        raise UnknownBuilder(f"expected {what}")
    return cat, last


def build(expr: str) -> Artifact:
    """Materialize a builder expression (memoized; artifacts are read-only)."""
    return _build(expr.strip())


@lru_cache(maxsize=128)
def _build(expr: str) -> Artifact:
    head, _, rest = expr.partition(":")
    if head == "fam":
        cat, n = _split_at(rest, "fam:<category>:<N>")
        fib, cl = fam(parse_category(cat), _bounded("fam", _int(n, "fam bound")))
        return Artifact(expr, "fibration", fib.total, fib, cl, None)
    if head == "externalize":
        cat, _, index = rest.partition("@")
        C = parse_category(cat)
        n = None
        if index:
            ihead, _, ibound = index.partition(":")
            if ihead != "finset_skel":
                raise UnknownBuilder("externalize indexes over finset_skel:<N>")
            n = _bounded("fam", _int(ibound, "index bound"))
        elif C.n_obj > SIZE_LIMIT["fam"]:
            raise BoundsTooLarge(f"{C.name} has {C.n_obj} objects; give a smaller index bound")
        return _pointed(expr, externalize(C, n))
    if head == "skeleton":
        cat, n = _split_at(rest, "skeleton:<category>:<N>")
        return _pointed(expr, skeletal_generic_candidate(parse_category(cat), _bounded("fam", _int(n, "bound"))))
    if head == "intdeloop":
        grp, _, index = rest.partition("@")
        if index == "arrow":
            g0, _, g1 = grp.partition("->")
            if g0 not in ("1", "trivial"):
                raise UnknownBuilder("the arrow setup supports group objects 1 -> G")
            pt, G = arrow_deloop(g1)
        else:
            ihead, _, ibound = index.partition(":")
            if ihead != "finset_skel":
                raise UnknownBuilder("intdeloop:<G>@finset_skel:<N> or intdeloop:1->G@arrow")
            pt, G = set_deloop(grp, _bounded("fam", _int(ibound, "index bound")))
        return _pointed(expr, pt, group=G)
    if head == "arrow":
        B = parse_category(rest)
        A, cod = arrow_category(B)
        fib = Fibration(cod, name=A.name) if fibration_failure(cod) is None else cod
        return Artifact(expr, "fibration", A, fib, None, None)
    if head in ("subfib", "stack"):
        cat, mor = _split_at(rest, f"{head}:<category>:<morphism>")
        if mor.startswith("pi=") or "->" in mor or mor.isdigit():
            B = parse_category(cat)
        else:
            raise UnknownBuilder(f"expected {head}:<category>:<morphism>")
        pi = resolve_morphism(B, mor)
        pt = subfibration_from_map(B, pi) if head == "subfib" else stack_completion(B, pi)
        return _pointed(expr, pt, base=B, pi=pi)
    if head == "split":
        inner = build(rest)
        if inner.T is None:
            raise UnknownBuilder(f"{rest} has no distinguished object to split along")
        if not isinstance(inner.fibration, Fibration):
            raise UnknownBuilder(f"{rest} is not a fibration")
        sw = split_from_weak(inner.fibration, inner.T)
        return Artifact(expr, "fibration", sw.fibration.total, sw.fibration, sw.splitting, sw.T,
                        {"equivalence": sw.equivalence, "checks": sw.checks})
    if expr.endswith(".json") and os.path.exists(expr):
        doc = _load_json(expr)
        if isinstance(doc, dict) and "objMap" in doc:
            return load_fibration_doc(doc, expr)
        return Artifact(expr, "category", validate_category(doc))
    return Artifact(expr, "category", parse_category(expr))


# -- serialization -------------------------------------------------------------------------------


def _category_ref(doc_part) -> FinCat:
    if isinstance(doc_part, str):
        return parse_category(doc_part)
    return validate_category(doc_part)


def load_fibration_doc(doc: dict, expr: str = "<file>") -> Artifact:
    """Read ``{"dom", "cod", "objMap", "morMap"}`` plus optional ``cleavage`` and ``T``."""
    try:
        dom, cod = _category_ref(doc["dom"]), _category_ref(doc["cod"])
    except KeyError as e:
        raise ParseError(f"functor document lacks {e.args[0]!r}") from None
    F = validate_functor(doc, dom, cod)
    fib = Fibration(F, name=doc.get("name", expr)) if fibration_failure(F) is None else F
    cl = None
    if doc.get("cleavage") is not None:
        if not isinstance(fib, Fibration):
            raise ParseError("a cleavage was supplied for a functor that is not a fibration")
        from .fibration import make_cleavage

        cl = make_cleavage(fib, {(int(u), int(e)): int(f) for u, e, f in doc["cleavage"]})
    T = doc.get("T")
    if T is not None and not 0 <= int(T) < dom.n_obj:
        raise BadIndex(f"T = {T} is not an object of the total category")
    return Artifact(expr, "fibration", dom, fib, cl, None if T is None else int(T))


def artifact_to_json(art: Artifact) -> dict:
    if art.kind == "category":
        return {"kind": "category", "expr": art.expr, "category": category_to_json(art.category)}
    q = art.functor
    return {
        "kind": "fibration",
        "expr": art.expr,
        "dom": category_to_json(q.dom),
        "cod": category_to_json(q.cod),
        "objMap": q.obj_map.tolist(),
        "morMap": q.mor_map.tolist(),
        "cleavage": None if art.cleavage is None else [[u, e, f] for (u, e), f in sorted(art.cleavage.choice.items())],
        "T": art.T,
    }


def artifact_from_json(doc: dict) -> Artifact:
    if doc.get("kind") == "category":
        return Artifact(doc.get("expr", ""), "category", validate_category(doc["category"]))
    art = load_fibration_doc(doc, doc.get("expr", "<workspace>"))
    return art


class Workspace:
    """Named artifacts persisted in a JSON file."""

    def __init__(self, path: str | None):
        self.path = path
        self.entries: dict[str, dict] = {}
        if path and os.path.exists(path):
            doc = _load_json(path)
            if not isinstance(doc, dict) or not isinstance(doc.get("artifacts", {}), dict):
                raise ParseError(f"{path}: not a workspace file")
            self.entries = doc.get("artifacts", {})

    def store(self, name: str, art: Artifact) -> None:
        self.entries[name] = artifact_to_json(art)
        if self.path:
            with open(self.path, "w", encoding="utf-8") as fh:
                json.dump({"artifacts": self.entries}, fh)

    def get(self, name: str) -> Artifact:
        if name not in self.entries:
            raise UnknownArtifact(f"no artifact named {name!r} in the workspace")
        return artifact_from_json(self.entries[name])

    def __contains__(self, name: str) -> bool:
        return name in self.entries


def resolve(ref: str, workspace: Workspace | None = None) -> Artifact:
    """A workspace name, a builder expression or a JSON file."""
    if workspace is not None and ref in workspace:
        return workspace.get(ref)
    try:
        return build(ref)
    except UnknownBuilder as e:
        if workspace is not None:
            raise UnknownArtifact(f"{ref!r} is neither a workspace artifact nor a builder expression ({e})") from None
        raise


def resolve_object(art: Artifact, ref: str) -> int:
    """An object of the total category by index, ``T`` or label."""
    E = art.functor.dom
    if ref == "T":
        if art.T is None:
            raise BadIndex(f"{art.expr} has no distinguished object T")
        return art.T
    if ref.lstrip("-").isdigit():
        o = int(ref)
        if not 0 <= o < E.n_obj:
            raise BadIndex(f"object {o} is out of range ({E.n_obj} objects)")
        return o
    try:
        return E.obj_of_label(ref)
    except (KeyError, ValueError):
        raise BadIndex(f"no object labelled {ref!r}") from None


def summarize(art: Artifact) -> dict:
    if art.kind == "category":
        C = art.category
        return {"kind": "category", "name": C.name, "objects": C.n_obj, "morphisms": C.n_mor}
    q = art.functor
    E, B = q.dom, q.cod
    fibers = {B.obj_labels[i]: int((q.obj_map == i).sum()) for i in range(B.n_obj)}
    out = {
        "kind": "fibration" if isinstance(art.fibration, Fibration) else "functor",
        "name": E.name,
        "objects": E.n_obj,
        "morphisms": E.n_mor,
        "base": {"name": B.name, "objects": B.n_obj, "morphisms": B.n_mor},
        "fiberSizes": fibers,
        "isFibration": isinstance(art.fibration, Fibration),
        "cleavage": None if art.cleavage is None else ("split" if is_split(art.cleavage) else "not split"),
        "T": None if art.T is None else {"index": art.T, "label": E.obj_labels[art.T]},
    }
    if "equivalence" in art.extras:
        out["equivalence"] = art.extras["equivalence"]
    return out


# -- built-in suite ----------------------------------------------------------------------------------

BUILTIN_POINTED = (
    "externalize:walkingIso@finset_skel:2",
    "externalize:deloopZ2@finset_skel:1",
    "externalize:deloopZ2@finset_skel:2",
    "externalize:walkingArrow@finset_skel:2",
    "externalize:terminal@finset_skel:2",
    "externalize:idempotent@finset_skel:2",
    "skeleton:walkingIso:2",
    "skeleton:deloopZ2:2",
    "skeleton:walkingArrow:2",
    "skeleton:twoClassGroupoid:2",
    "intdeloop:Z2@finset_skel:2",
    "intdeloop:1@finset_skel:2",
    "intdeloop:1->Z2@arrow",
    "intdeloop:1->1@arrow",
    "subfib:finset_skel:3:2->1",
    "stack:finset_skel:3:2->1",
    "subfib:gsets:Z2:2:2triv->1",
    "stack:gsets:Z2:2:2triv->1",
    "stack:gsets:Z2:4:2triv->1",
)

BUILTIN_UNPOINTED = (
    "fam:walkingIso:2",
    "fam:discrete2:1",
    "fam:deloopZ2:1",
    "fam:twoClassGroupoid:2",
    "arrow:finset_skel:2",
)


def builtin_fibrations() -> list[str]:
    return list(BUILTIN_POINTED) + list(BUILTIN_UNPOINTED)


__all__ = [
    "Artifact", "BUILDER_HELP", "Workspace", "build", "parse_category", "resolve", "resolve_morphism",
    "resolve_object", "summarize", "builtin_fibrations", "set_deloop", "arrow_deloop",
]
