import pytest
from hypothesis import given
from hypothesis import strategies as st

from transrobust.fst import Transducer
from transrobust.oracle import GenSpec, oracle_robust, random_transducer
from transrobust.setsim import (
    SetKind,
    SetSimilarity,
    oracle_nondet_robust,
    output_set,
    set_similarity,
)
from transrobust.similarity import manhattan_table, standard_manhattan

MAN = standard_manhattan("abc")
KINDS = list(SetKind)


def test_output_sets(t_nr):
    t = Transducer("a", "bc", ["q", "f"], ["q"], ["f"], [("q", "a", "b", "f"), ("q", "a", "c", "f")])
    assert output_set(t, "a") == {("b",), ("c",)}
    assert output_set(t_nr, "ba") == {("b", "b")}
    assert output_set(t_nr, "ab") == set()


def test_set_similarity_examples():
    directed = SetSimilarity(SetKind.HAUSDORFF_DIRECTED, MAN)
    assert directed({"ab"}, {"ab"}) == 0
    assert SetSimilarity(SetKind.INF_INF, MAN)({"a", "b"}, {"b"}) == 0
    assert directed({"a"}, {"b"}) == 1


def test_directed_and_symmetric_differ():
    left, right = {"a"}, {"a", "bbb"}
    assert SetSimilarity("hausdorff-directed", MAN)(left, right) == 0
    assert SetSimilarity("hausdorff", MAN)(left, right) == 3


def test_empty_sets_are_rejected():
    with pytest.raises(ValueError):
        set_similarity(SetSimilarity(SetKind.INF_INF, MAN), set(), {"a"})


def test_functional_machine_matches_plain_oracle(t_nr):
    d = standard_manhattan("ab")
    table = manhattan_table("ab")
    plain = oracle_robust(t_nr, table, table, 1, 4)
    for kind in KINDS:
        v = oracle_nondet_robust(t_nr, d, SetSimilarity(kind, d), 1, 4)
        assert v.robust == plain.robust and v.bounded == 4


def test_choice_of_letter_is_robust():
    # every a may become b or c; inputs never differ in a way outputs amplify
    t = Transducer("a", "bc", ["q"], ["q"], ["q"], [("q", "a", "b", "q"), ("q", "a", "c", "q")])
    d_in = standard_manhattan("a")
    for kind in (SetKind.HAUSDORFF_DIRECTED, SetKind.INF_INF):
        assert oracle_nondet_robust(t, d_in, SetSimilarity(kind, MAN), 1, 4).robust


def test_growing_directed_distance_is_caught():
    # after an initial b the machine may only write c's; after a, only b's
    t = Transducer("ab", "bc", ["q", "x", "y"], ["q"], ["x", "y"], [
        ("q", "a", "b", "x"), ("q", "b", "c", "y"),
        ("x", "a", "b", "x"), ("y", "a", "c", "y"), ("y", "a", "b", "y"),
    ])
    d_in = standard_manhattan("ab")
    v = oracle_nondet_robust(t, d_in, SetSimilarity(SetKind.HAUSDORFF_DIRECTED, MAN), 1, 4)
    assert not v.robust
    s, u = v.witness
    assert v.d_in == d_in(s, u) == 1 and v.d_out > 1


words = st.text("abc", max_size=4)
sets = st.sets(words, min_size=1, max_size=4)


@given(words, words, st.sampled_from(KINDS))
def test_singletons_collapse(u, v, kind):
    assert SetSimilarity(kind, MAN)({u}, {v}) == MAN(u, v)


@given(sets, st.sampled_from(KINDS))
def test_distance_to_itself_is_zero(a, kind):
    assert SetSimilarity(kind, MAN)(a, a) == 0


@given(sets, sets, sets)
def test_directed_is_antimonotone_in_second_argument(a, b, extra):
    d = SetSimilarity(SetKind.HAUSDORFF_DIRECTED, MAN)
    assert d(a, b | extra) <= d(a, b)


@given(st.integers(0, 10**6))
def test_singleton_outputs_agree_with_plain_oracle(seed):
    t = random_transducer(GenSpec(max_states=3, seed=seed))
    d = standard_manhattan("ab")
    table = manhattan_table("ab")
    plain = oracle_robust(t, table, table, 1, 4)
    v = oracle_nondet_robust(t, d, SetSimilarity(SetKind.HAUSDORFF_SYMMETRIC, d), 1, 4)
    assert v.robust == plain.robust
