import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transrobust.fst import (
    AlphabetError,
    Transducer,
    classify,
    compose,
    domain_automaton,
    identity_transducer,
    is_functional,
    renumber,
    run,
    trim,
    unambiguous,
    words_upto,
)
from transrobust.oracle import GenSpec, random_transducer

from conftest import load_fst


def brute_functional(t, max_len):
    return all(len(run(t, s).outputs) <= 1 for s in words_upto(t.input_alphabet, max_len))


def test_run_on_t_nr(t_nr):
    assert t_nr("aaa") == tuple("aaa")
    assert t_nr("baa") == tuple("bbb")
    assert t_nr("ab") is None
    assert run(t_nr, "").outputs == {()}


def test_run_rejects_foreign_letter(t_nr):
    with pytest.raises(AlphabetError):
        run(t_nr, "ac")


def test_multi_letter_output_and_epsilon():
    t = Transducer("ab", "xy", ["p", "q"], ["p"], ["q"],
                   [("p", "a", ("x", "y"), "q"), ("q", "b", (), "q")])
    assert t("a") == ("x", "y")
    assert t("abb") == ("x", "y")
    assert t("b") is None


def test_symbolic_letters():
    t = Transducer(["go", "stop"], ["on"], ["s"], ["s"], ["s"], [("s", "go", ("on",), "s")])
    assert t(("go", "go")) == ("on", "on")


def test_classify_examples(t_nr):
    c = classify(t_nr)
    assert c.functional and c.deterministic and c.letter_to_letter and c.mealy
    nondet = Transducer("a", "bc", ["q", "f"], ["q"], ["f"],
                        [("q", "a", "b", "f"), ("q", "a", "c", "f")])
    assert not classify(nondet).functional
    same = Transducer("a", "b", ["q", "f", "g"], ["q"], ["f", "g"],
                      [("q", "a", "b", "f"), ("q", "a", "b", "g")])
    c = classify(same)
    assert c.functional and not c.deterministic


def test_total_mealy_is_mealy():
    t = Transducer("ab", "ab", ["q"], ["q"], ["q"], [("q", "a", "b", "q"), ("q", "b", "a", "q")])
    assert classify(t).mealy


def test_functional_with_delay():
    # both runs give "bc" but split it differently
    t = Transducer("ab", "bc", ["q", "l", "r", "f"], ["q"], ["f"], [
        ("q", "a", "b", "l"), ("l", "b", "c", "f"),
        ("q", "a", "bc", "r"), ("r", "b", "", "f"),
    ])
    assert is_functional(t)
    bad = Transducer("ab", "bc", ["q", "l", "r", "f"], ["q"], ["f"], [
        ("q", "a", "b", "l"), ("l", "b", "c", "f"),
        ("q", "a", "bb", "r"), ("r", "b", "", "f"),
    ])
    assert not is_functional(bad)


def test_trim_drops_dead_states():
    t = Transducer("a", "a", ["q", "dead", "lost"], ["q"], ["q"],
                   [("q", "a", "a", "q"), ("q", "a", "a", "dead"), ("lost", "a", "a", "q")])
    assert set(trim(t).states) == {"q"}


def test_trim_of_empty_domain():
    t = Transducer("a", "a", ["q"], ["q"], [], [("q", "a", "a", "q")])
    assert trim(t).states == ()


def test_compose_examples(t_nr):
    two = load_fst("two_letter.fst")
    assert compose(two, identity_transducer("bc"))("a") == ("b", "c")
    twice = compose(t_nr, t_nr)
    assert twice("aaa") == tuple("aaa")
    # bbb is outside the domain of t_nr
    assert twice("baa") is None


def test_domain_automaton(t_nr):
    dom = domain_automaton(t_nr)
    assert dom.accepts("baaa") and not dom.accepts("ab")


def test_renumber_keeps_semantics(t_nr):
    r = renumber(compose(t_nr, t_nr))
    assert all(isinstance(q, str) for q in r.states)
    twice = compose(t_nr, t_nr)
    for s in words_upto("ab", 4):
        assert r(s) == twice(s)


seeds = st.integers(0, 10**6)


@settings(max_examples=200)
@given(seeds)
def test_functionality_matches_enumeration(seed):
    t = random_transducer(GenSpec(max_states=4, max_output=2, min_output=0,
                                  functional_only=False, seed=seed))
    assert is_functional(t) == brute_functional(t, 6)


@given(seeds)
def test_trim_preserves_runs(seed):
    t = random_transducer(GenSpec(max_states=4, max_output=2, min_output=0,
                                  functional_only=False, seed=seed))
    tt = trim(t)
    for s in words_upto("ab", 6):
        assert run(t, s).outputs == run(tt, s).outputs


@given(seeds)
def test_deterministic_runs_have_one_output(seed):
    t = random_transducer(GenSpec(max_states=4, density=0.3, functional_only=False, seed=seed))
    if classify(t).deterministic:
        assert all(len(run(t, s).outputs) <= 1 for s in words_upto("ab", 6))


@given(seeds, seeds)
def test_composition_matches_sequential_runs(seed1, seed2):
    t1 = random_transducer(GenSpec(max_states=3, max_output=2, min_output=0, seed=seed1))
    t2 = random_transducer(GenSpec(max_states=3, max_output=2, min_output=0, seed=seed2))
    both = compose(t1, t2)
    for s in words_upto("ab", 5):
        expected = {o2 for o1 in run(t1, s).outputs for o2 in run(t2, o1).outputs}
        assert run(both, s).outputs == expected


@given(seeds)
def test_unambiguous_keeps_the_function(seed):
    t = random_transducer(GenSpec(max_states=4, max_output=2, min_output=0, density=0.5, seed=seed))
    u = unambiguous(t)
    for s in words_upto("ab", 6):
        assert u(s) == t(s)
