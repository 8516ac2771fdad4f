from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transrobust.fst import Automaton, Transducer, identity_transducer, run, words_upto
from transrobust.oracle import GenSpec, oracle_robust, random_mealy, random_transducer
from transrobust.similarity import (
    convolve,
    distance,
    manhattan_table,
    standard_manhattan,
)
from transrobust.sync import (
    NotSynchronizedError,
    Role,
    RobustnessQuery,
    Status,
    check_k_robust,
    check_synchronized,
    lift_track,
    product_value,
    synchronized_automaton,
)
from transrobust.weighted import LIMAVG, Lasso, WeightedAutomaton, disc, evaluate

from conftest import load_fst


def graph_matches(t, a, max_in, max_out):
    """``a`` accepts ``s (x) u`` exactly when ``t`` maps ``s`` to ``u``."""
    outs = list(words_upto(t.output_alphabet, max_out))
    for s in words_upto(t.input_alphabet, max_in):
        image = t(s)
        for u in outs:
            if a.accepts(convolve([s, u])) != (image == u):
                return (s, u)
    return None


def test_mealy_is_synchronized():
    m = random_mealy(3, seed=4)
    v = check_synchronized(m)
    assert v.synchronized and v.buffer_bound == 0 and v.tail_language == frozenset()


def test_growing_loop_violates_lead_condition():
    v = check_synchronized(load_fst("doubling_loop.fst"))
    assert not v.synchronized and v.condition == "a"
    assert sum(len(e.out) for e in v.witness) > len(v.witness)


def test_silent_loop_violates_tail_condition():
    t = load_fst("eps_loop.fst")
    v = check_synchronized(t)
    assert not v.synchronized and v.condition == "b"
    # the flagged region has infinitely many outputs: c^n for every n
    from_q1 = Transducer(t.input_alphabet, t.output_alphabet, t.states, ["q1"], t.accepting,
                         t.transitions)
    outs = {from_q1(w) for w in words_upto("b", 4)}
    assert outs == {("c",) * n for n in range(5)}


def test_finite_tail_is_synchronized():
    # silent loop, then at most one more letter of output
    t = Transducer("ab", "c", ["q0", "q1"], ["q0"], ["q0", "q1"],
                   [("q0", "a", (), "q0"), ("q0", "b", "c", "q1")])
    v = check_synchronized(t)
    assert v.synchronized and v.tail_language == {(), ("c",)}
    assert graph_matches(t, synchronized_automaton(t), 5, 3) is None


def test_non_functional_is_rejected():
    t = Transducer("a", "bc", ["q", "f"], ["q"], ["f"], [("q", "a", "b", "f"), ("q", "a", "c", "f")])
    with pytest.raises(ValueError):
        check_synchronized(t)


def test_graph_automaton_of_t_nr(t_nr):
    a = synchronized_automaton(t_nr)
    assert len(a.states) == len(t_nr.states)
    assert graph_matches(t_nr, a, 5, 5) is None


def test_graph_automaton_with_buffer():
    t = Transducer("a", "b", ["q0", "q1", "q2"], ["q0"], ["q2"],
                   [("q0", "a", (), "q1"), ("q1", "a", "bb", "q2")])
    a = synchronized_automaton(t)
    assert a.accepts(convolve(["aa", "bb"]))
    assert graph_matches(t, a, 4, 4) is None


def test_graph_automaton_refuses_unsynchronized():
    with pytest.raises(NotSynchronizedError):
        synchronized_automaton(load_fst("doubling_loop.fst"))


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_graph_automaton_random(seed):
    t = random_transducer(GenSpec(max_states=3, min_output=0, max_output=2, seed=seed))
    if check_synchronized(t).synchronized:
        assert graph_matches(t, synchronized_automaton(t), 4, 5) is None


def test_lift_counts_free_letters():
    wa = WeightedAutomaton.over_tracks(["ab", "ab"], ["p", "q"], ["p"], ["q"], [("p", ("a", "b"), 3, "q")])
    lifted = lift_track(wa, Role.IN_PAIR, "ab", "ab")
    moved = [e for e in lifted.transitions if e[0] == "p" and e[1][:2] == ("a", "b")]
    assert len(moved) == 9 and {e[2] for e in moved} == {3}


def test_lifted_distance_is_unchanged(man):
    lifted = lift_track(man.automaton, Role.IN_PAIR, "ab", "ab")
    words = list(words_upto("ab", 2))
    for s in list(words_upto("ab", 3)):
        for t in words:
            base = distance(man, s, t)
            for s2 in words:
                for t2 in words:
                    assert evaluate(lifted, convolve([s, t, s2, t2])) == base


def test_lifted_automaton_keeps_acceptance(t_nr):
    graph = synchronized_automaton(t_nr)
    lifted = lift_track(graph, Role.LEFT_IO, "ab", "ab")
    assert isinstance(lifted, Automaton)
    for s in words_upto("ab", 3):
        for u in words_upto("ab", 3):
            word = convolve([s, "ab", u, "b"])
            assert lifted.accepts(word) == (t_nr(s) == u)


def test_t_nr_is_not_robust(t_nr, man):
    v = check_k_robust(t_nr, RobustnessQuery(1, man, man))
    assert v.status == Status.NOT_ROBUST
    s, u = v.witness
    assert v.d_in == distance(man, s, u) == 1
    assert v.d_out == distance(man, t_nr(s), t_nr(u)) > v.d_in


def test_t_r_is_robust(t_r, man):
    assert check_k_robust(t_r, RobustnessQuery(1, man, man)).status == Status.ROBUST


def test_identity_is_robust():
    d = standard_manhattan("abc")
    assert check_k_robust(identity_transducer("abc"), RobustnessQuery(1, d, d)).robust


def test_discounted_t_nr(t_nr):
    d = standard_manhattan("ab", disc(F(1, 2)))
    v = check_k_robust(t_nr, RobustnessQuery(1, d, d))
    assert v.status == Status.NOT_ROBUST
    s, u = v.witness
    assert distance(d, t_nr(s), t_nr(u)) > distance(d, s, u)


def test_limavg_t_nr_lasso_witness(t_nr):
    d = standard_manhattan("ab", LIMAVG)
    v = check_k_robust(t_nr, RobustnessQuery(1, d, d))
    assert v.status == Status.NOT_ROBUST
    s, u = v.witness
    assert isinstance(s, Lasso) and v.d_out > v.d_in
    assert check_k_robust(load_fst("t_r.fst"), RobustnessQuery(1, d, d)).robust


def test_limavg_needs_letter_to_letter():
    t = load_fst("two_letter.fst")
    d_in = standard_manhattan("a", LIMAVG)
    d_out = standard_manhattan("bc", LIMAVG)
    assert check_k_robust(t, RobustnessQuery(1, d_in, d_out)).status == Status.UNSUPPORTED


def test_unsynchronized_is_rejected():
    t = load_fst("doubling_loop.fst")
    d_in, d_out = standard_manhattan("a"), standard_manhattan("b")
    with pytest.raises(NotSynchronizedError):
        check_k_robust(t, RobustnessQuery(1, d_in, d_out))


def test_query_validation(man):
    with pytest.raises(ValueError):
        RobustnessQuery(0, man, man)
    with pytest.raises(ValueError):
        RobustnessQuery(1, man, standard_manhattan("ab", disc(F(1, 2))))


def test_non_functional_output_similarity(t_nr, man):
    a = man.automaton
    doubled = WeightedAutomaton.over_tracks(["ab", "ab"], ["m", "n"], ["m", "n"], ["m", "n"],
                                            list(a.transitions) + [("n", ("a", "b"), 7, "n")])
    bad = type(man)(doubled, "ab", "ab")
    with pytest.raises(ValueError):
        check_k_robust(t_nr, RobustnessQuery(1, man, bad))


seeds = st.integers(0, 10**6)


@settings(max_examples=25)
@given(seeds, st.sampled_from([1, 2]))
def test_product_value_is_the_gap(seed, K):
    t = random_transducer(GenSpec(max_states=3, seed=seed))
    d = standard_manhattan("ab")
    q = RobustnessQuery(K, d, d)
    dom = [s for s in words_upto("ab", 3) if t(s) is not None]
    for s in dom:
        for u in dom:
            expected = K * distance(d, s, u) - distance(d, t(s), t(u))
            assert product_value(t, q, s, u) == expected


@settings(max_examples=40)
@given(seeds, st.sampled_from([1, 2]))
def test_verdict_agrees_with_oracle(seed, K):
    t = random_transducer(GenSpec(max_states=4, seed=seed))
    assert check_synchronized(t).synchronized
    d = standard_manhattan("ab")
    v = check_k_robust(t, RobustnessQuery(K, d, d))
    table = manhattan_table("ab")
    if v.status == Status.NOT_ROBUST:
        s, u = v.witness
        assert distance(d, t(s), t(u)) > K * distance(d, s, u)
    else:
        assert oracle_robust(t, table, table, K, 6).robust


@settings(max_examples=30)
@given(seeds)
def test_non_letter_to_letter_agrees_with_oracle(seed):
    t = random_transducer(GenSpec(max_states=3, min_output=0, max_output=2, seed=seed))
    if not check_synchronized(t).synchronized:
        return
    d = standard_manhattan("ab")
    v = check_k_robust(t, RobustnessQuery(2, d, d))
    if v.status == Status.NOT_ROBUST:
        s, u = v.witness
        assert run(t, s).accepted and run(t, u).accepted
        assert distance(d, t(s), t(u)) > 2 * distance(d, s, u)
    else:
        table = manhattan_table("ab")
        assert oracle_robust(t, table, table, 2, 6).robust
