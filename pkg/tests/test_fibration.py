import itertools

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from fibgen.catalogue import build, builtin_fibrations, parse_category
from fibgen.constructions.bases import arrow_category, finset_skel
from fibgen.fibration import (
    cartesian_flags,
    fibration_failure,
    is_fibration,
    is_pullback_square,
    is_split,
    make_cleavage,
    pullback,
)

SMALL = ["fam:walkingIso:1", "fam:deloopZ2:1", "externalize:deloopZ2", "fam:walkingArrow:1",
         "intdeloop:Z2@finset_skel:2", "subfib:finset_skel:3:2->1"]


@pytest.mark.parametrize("expr", SMALL)
def test_cartesian_flags_match_definition(expr):
    q = build(expr).functor
    flags = cartesian_flags(q)
    for f in range(q.dom.n_mor):
        assert bool(flags[f]) == oracles.is_cartesian(q, f), f


def test_cartesian_flags_match_definition_on_codomain_functor():
    A, cod = arrow_category(finset_skel(1))
    flags = cartesian_flags(cod)
    assert [bool(x) for x in flags] == [oracles.is_cartesian(cod, f) for f in range(A.n_mor)]


@pytest.mark.parametrize("name", ["finset_skel:1", "booleanSquare", "cospan", "walkingIso"])
def test_pullback_search_matches_brute_force(name):
    B = parse_category(name)
    for f, g in itertools.product(range(B.n_mor), repeat=2):
        if B.tgt[f] != B.tgt[g]:
            continue
        cone = pullback(B, f, g)
        brute = [(p1, p2) for p1, p2 in itertools.product(range(B.n_mor), repeat=2)
                 if B.src[p1] == B.src[p2] and B.tgt[p1] == B.src[f] and B.tgt[p2] == B.src[g]
                 and oracles.is_pullback(B, f, g, p1, p2)]
        assert (cone is None) == (not brute)
        for p1, p2 in brute:
            assert is_pullback_square(B, f, g, p1, p2)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_pullback_square_random_squares_finset2(data):
    B = finset_skel(2)
    f = data.draw(st.integers(0, B.n_mor - 1))
    g = data.draw(st.sampled_from([m for m in range(B.n_mor) if B.tgt[m] == B.tgt[f]]))
    p1 = data.draw(st.sampled_from([m for m in range(B.n_mor) if B.tgt[m] == B.src[f]]))
    p2 = data.draw(st.sampled_from([m for m in range(B.n_mor) if B.tgt[m] == B.src[g]]))
    if B.src[p1] != B.src[p2]:
        assert not is_pullback_square(B, f, g, p1, p2)
    else:
        assert is_pullback_square(B, f, g, p1, p2) == oracles.is_pullback(B, f, g, p1, p2)


@pytest.mark.parametrize("expr", builtin_fibrations())
def test_builtins_are_fibrations_with_split_canonical_cleavage(expr):
    art = build(expr)
    if art.cleavage is None:
        pytest.skip("no canonical cleavage")
    assert is_fibration(art.fibration)
    assert is_split(art.cleavage)


def test_codomain_fibration_depends_on_pullbacks():
    assert fibration_failure(arrow_category(parse_category("booleanSquare"))[1]) is None
    assert fibration_failure(arrow_category(parse_category("cospan"))[1]) is not None
    # the truncated skeleton of finite sets misses 2x2, so not every square lifts
    assert fibration_failure(arrow_category(finset_skel(2))[1]) is not None


def test_least_index_cleavage_picks_cartesian_lifts():
    fib = build("fam:deloopZ2:1").fibration
    cl = make_cleavage(fib, "leastIndex")
    flags = cartesian_flags(fib.p)
    for f in cl.choice.values():
        assert flags[f]
