import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from fibgen.constructions.bases import NAMED_CATEGORIES, finset_skel, gset_category, parse_group
from fibgen.errors import AxiomError, BadCompositionDomain, MissingIdentity, NonAssociative, ParseError
from fibgen.fincat import (
    FinCat,
    category_predicates,
    category_to_json,
    skeleton_data,
    validate_category,
    validate_functor,
)
from fibgen.search import monoid_tables


def _raw(c: FinCat):
    return (c.n_obj, c.src.tolist(), c.tgt.tolist(), c.ident.tolist(), c.comp.tolist())


@pytest.mark.parametrize("name", sorted(NAMED_CATEGORIES))
def test_named_categories_pass_brute_force_axioms(name):
    c = NAMED_CATEGORIES[name]()
    assert oracles.is_category(*_raw(c))
    validate_category(c)


def test_finset_and_gsets_are_categories():
    for c in (finset_skel(2), gset_category(parse_group("Z2"), 2)):
        assert oracles.is_category(*_raw(c))


def test_one_object_two_morphism_tables():
    # identity is morphism 0; the only free entry is e∘e
    valid = []
    for ee in (0, 1):
        comp = [[0, 1], [1, ee]]
        if oracles.is_category(1, [0, 0], [0, 0], [0], comp):
            valid.append(ee)
        try:
            validate_category({"objects": 1, "morphisms": [{"src": 0, "tgt": 0}] * 2,
                               "identities": [0], "comp": comp})
            ours = True
        except AxiomError:
            ours = False
        assert ours == oracles.is_category(1, [0, 0], [0, 0], [0], comp)
    # every full 2x2 table over {0, 1}, identity free to be either morphism
    count = 0
    for ident in (0, 1):
        for entries in itertools.product((0, 1), repeat=4):
            comp = [list(entries[:2]), list(entries[2:])]
            count += oracles.is_category(1, [0, 0], [0, 0], [ident], comp)
    assert count == 4  # two monoids of order 2, each with two labellings
    assert len(valid) == 2


def test_monoid_counts_up_to_iso():
    assert [len(monoid_tables(k)) for k in (1, 2, 3)] == [1, 2, 7]


def test_error_kinds():
    base = {"objects": 1, "morphisms": [{"src": 0, "tgt": 0}] * 2, "identities": [0]}
    with pytest.raises(MissingIdentity):
        validate_category({**base, "comp": [[1, 1], [1, 1]]})
    with pytest.raises(BadCompositionDomain):
        validate_category({"objects": 2, "morphisms": [{"src": 0, "tgt": 0}, {"src": 1, "tgt": 1}],
                           "identities": [0, 1], "comp": [[0, 0], [-1, 1]]})
    with pytest.raises(ParseError):
        validate_category({"objects": 1})
    with pytest.raises(ParseError):
        validate_category({**base, "comp": [[0, 1]]})


def test_non_associative_table_is_caught():
    # three endomorphisms e, a, b: a∘a = b, a∘b = a, b∘a = b, b∘b = a breaks (a∘a)∘b = a∘(a∘b)
    comp = [[0, 1, 2], [1, 2, 1], [2, 2, 1]]
    raw = {"objects": 1, "morphisms": [{"src": 0, "tgt": 0}] * 3, "identities": [0], "comp": comp}
    assert not oracles.is_category(1, [0] * 3, [0] * 3, [0], comp)
    with pytest.raises(NonAssociative):
        validate_category(raw)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=4, max_size=4), st.booleans())
def test_random_monoid_tables_agree_with_oracle(entries, _):
    comp = [[0, 1, 2], [1] + entries[:2], [2] + entries[2:]]
    raw = {"objects": 1, "morphisms": [{"src": 0, "tgt": 0}] * 3, "identities": [0], "comp": comp}
    try:
        validate_category(raw)
        ours = True
    except AxiomError:
        ours = False
    assert ours == oracles.is_category(1, [0] * 3, [0] * 3, [0], comp)


def _is_functor(c, d, om, mm):
    for m in range(c.n_mor):
        if d.src[mm[m]] != om[c.src[m]] or d.tgt[mm[m]] != om[c.tgt[m]]:
            return False
    for o in range(c.n_obj):
        if mm[c.ident[o]] != d.ident[om[o]]:
            return False
    for g, f in itertools.product(range(c.n_mor), repeat=2):
        if c.comp[g, f] != -1 and mm[c.comp[g, f]] != d.comp[mm[g], mm[f]]:
            return False
    return True


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(NAMED_CATEGORIES)))
def test_json_round_trip(name):
    c = NAMED_CATEGORIES[name]()
    d = validate_category(category_to_json(c))
    assert np.array_equal(d.comp, c.comp) and d.obj_labels == c.obj_labels


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["walkingIso", "deloopZ2", "walkingArrow", "idempotent", "cospan"]),
       st.sampled_from(["walkingIso", "deloopZ2", "walkingArrow", "idempotent", "terminal"]), st.data())
def test_random_assignments_agree_with_functor_oracle(a, b, data):
    c, d = NAMED_CATEGORIES[a](), NAMED_CATEGORIES[b]()
    om = data.draw(st.lists(st.integers(0, d.n_obj - 1), min_size=c.n_obj, max_size=c.n_obj))
    mm = data.draw(st.lists(st.integers(0, d.n_mor - 1), min_size=c.n_mor, max_size=c.n_mor))
    try:
        validate_functor({"objMap": om, "morMap": mm}, c, d)
        ours = True
    except AxiomError:
        ours = False
    assert ours == _is_functor(c, d, om, mm)


@pytest.mark.parametrize("name,skeletal,gaunt,classes", [
    ("walkingIso", False, True, 1),
    ("deloopZ2", True, False, 1),
    ("walkingArrow", True, True, 2),
    ("twoClassGroupoid", False, True, 2),
])
def test_category_predicates(name, skeletal, gaunt, classes):
    c = NAMED_CATEGORIES[name]()
    f = category_predicates(c)
    assert (f.skeletal, f.gaunt) == (skeletal, gaunt)
    assert skeleton_data(c).n_classes == classes
