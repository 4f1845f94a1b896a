import pytest

import oracles
from fibgen.catalogue import build, builtin_fibrations
from fibgen.classify import (
    IMPLICATIONS,
    MUTATIONS,
    ROSETTA,
    audit,
    classify_object,
    is_gaunt_generic,
    is_generic,
    is_skeletal_generic,
    is_split_generic,
    is_weak_generic_stack,
    rosetta_name,
)
from fibgen.constructions.derived import split_from_weak, stack_members, subfibration_members
from fibgen.constructions.internal import family_members
from fibgen.constructions.bases import finset_skel
from fibgen.errors import ImplicationViolated, NotGeneric
from fibgen.fibration import cartesian_flags

ORACLE_EXPRS = ["fam:walkingIso:1", "fam:deloopZ2:1", "externalize:deloopZ2", "fam:terminal:2",
                "skeleton:walkingArrow:2", "externalize:walkingIso@finset_skel:2"]


@pytest.mark.parametrize("expr", ORACLE_EXPRS)
def test_generic_flags_match_definition_on_every_object(expr):
    art = build(expr)
    q = art.functor
    for t in range(q.dom.n_obj):
        want = oracles.generic_flags(q, t)
        got = {"generic": bool(is_generic(q, t)), "skeletal": bool(is_skeletal_generic(q, t)),
               "gaunt": bool(is_gaunt_generic(q, t))}
        assert got == want, (t, q.dom.obj_labels[t])


def test_walking_iso_witness_replays():
    art = build("externalize:walkingIso@finset_skel:2")
    fib, T = art.fibration, art.T
    v = is_skeletal_generic(fib, T)
    assert not v
    w = v.witness
    E, q = fib.total, fib.p
    flags = cartesian_flags(q)
    assert len(w["maps"]) == 2 and len(set(w["baseMaps"])) == 2
    for f, u in zip(w["maps"], w["baseMaps"]):
        assert E.src[f] == w["X"] and E.tgt[f] == T
        assert flags[f] and q.mor_map[f] == u
    assert family_members(fib, w["X"]) is not None
    assert is_split_generic(fib, art.cleavage, T)


def test_delooping_counts():
    art = build("externalize:deloopZ2")
    E = art.fibration.total
    hom = E.hom(art.T, art.T)
    assert int(cartesian_flags(art.fibration.p)[hom].sum()) == 2
    rep = classify_object(art.fibration, art.T, art.cleavage)
    assert rep.flags["skeletal"] and not rep.flags["gaunt"]
    assert rep.strongest() == "skeletal"


def test_not_generic_object_is_rejected_by_split_from_weak():
    art = build("stack:gsets:Z2:4:2triv->1")
    assert not is_generic(art.fibration, art.T)
    with pytest.raises(NotGeneric):
        split_from_weak(art.fibration, art.T)
    assert is_weak_generic_stack(art.fibration, art.T)


def test_subfibration_equals_stack_over_finite_sets():
    B = finset_skel(3)
    for pi in range(0, B.n_mor, 7):
        assert subfibration_members(B, pi) == stack_members(B, pi)


@pytest.mark.parametrize("expr", builtin_fibrations())
def test_audit_holds_on_every_builtin_object(expr):
    art = build(expr)
    for t in range(art.functor.dom.n_obj):
        rep = classify_object(art.fibration, t, art.cleavage)
        for strong, weak in IMPLICATIONS:
            if rep.flags.get(strong):
                assert rep.flags.get(weak) is not False


def test_audit_raises_on_violation():
    with pytest.raises(ImplicationViolated):
        audit({"gaunt": True, "skeletal": False})
    audit({"gaunt": False, "skeletal": False})


def test_mutation_hook_is_clean_by_default():
    assert not MUTATIONS


def test_rosetta_names():
    assert "strong generic" in rosetta_name("gaunt")
    assert rosetta_name("acyclic") == ROSETTA["acyclic"][0]
