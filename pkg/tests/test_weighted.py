from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transrobust.fst import words_upto
from transrobust.oracle import (
    _reach,
    _simple_cycles,
    lasso_infimum,
    lassos_upto,
    oracle_wa,
    random_wa,
)
from transrobust.weighted import (
    LIMAVG,
    NEG_INFINITY,
    SUM,
    Lasso,
    ValueFunctionError,
    WeightedAutomaton,
    disc,
    emptiness_below,
    evaluate,
    is_functional_wa,
    min_mean_cycle,
    run_values,
    scale_weights,
)

from conftest import load_wa

INF = float("inf")


def loops(weights, value_fn=SUM):
    trans = [("s", x, w, "s") for x, w in weights.items()]
    return WeightedAutomaton(list(weights), ["s"], ["s"], ["s"], trans, value_fn)


def all_run_values(a, w):
    """Every accepting run, one path at a time."""
    paths = [(q, []) for q in a.initial]
    for x in w:
        paths = [(d, ws + [wt]) for q, ws in paths for s, y, wt, d in a.transitions
                 if s == q and y == x]
    vf = a.value_fn
    out = []
    for q, ws in paths:
        if q in a.accepting:
            if vf.kind == "disc":
                out.append(sum(vf.discount ** (i + 1) * wt for i, wt in enumerate(ws)))
            else:
                out.append(sum(ws, F(0)))
    return out


def test_sum_value():
    assert evaluate(loops({"a": 2, "b": -1}), "abba") == 2


def test_disc_value():
    assert evaluate(loops({"a": 2}, disc(F(1, 2))), "aa") == F(3, 2)


def test_limavg_lasso():
    a = WeightedAutomaton("ab", ["p", "q"], ["p"], ["p", "q"],
                          [("p", "a", 1, "q"), ("q", "b", 3, "p")], LIMAVG)
    assert evaluate(a, Lasso("", "ab")) == 2


def test_limavg_rejects_finite_words():
    with pytest.raises(ValueFunctionError):
        evaluate(loops({"a": 1}, LIMAVG), "aa")


def test_sum_rejects_lassos():
    with pytest.raises(ValueFunctionError):
        evaluate(loops({"a": 1}), Lasso("", "a"))


def test_disc_infinite_lasso_is_geometric():
    a = loops({"a": 1}, disc(F(1, 2), infinite=True))
    # sum over i >= 1 of (1/2)^i
    assert evaluate(a, Lasso("", "a")) == 1


def test_rejected_word_is_infinite():
    a = WeightedAutomaton("ab", ["p", "q"], ["p"], ["q"], [("p", "a", 1, "q")])
    assert evaluate(a, "b") == INF
    assert evaluate(a, "") == INF


def test_bad_discount():
    with pytest.raises(ValueError):
        disc(F(3, 2))


def parallel(w1, w2):
    return WeightedAutomaton("a", ["p", "x", "y", "f"], ["p"], ["f"], [
        ("p", "a", w1, "x"), ("p", "a", w2, "y"), ("x", "a", 0, "f"), ("y", "a", 0, "f")])


def test_functional_examples():
    assert is_functional_wa(loops({"a": 2, "b": -1}))
    assert not is_functional_wa(parallel(1, 2))
    assert is_functional_wa(parallel(1, 1))
    for w in words_upto("a", 4):
        assert len(set(all_run_values(parallel(1, 1), w))) <= 1


def test_emptiness_examples():
    path = WeightedAutomaton("a", ["p", "q"], ["p"], ["q"], [("p", "a", -1, "q")])
    assert not emptiness_below(path, 0).empty
    assert emptiness_below(loops({"a": 0, "b": 2}), 0).empty


def test_limavg_emptiness_example():
    a = load_wa("limavg.wa")
    res = emptiness_below(a, 0)
    assert not res.empty and res.infimum == -1
    assert evaluate(a, res.witness) == -1
    assert brute_min_mean(a) == res.infimum


def test_negative_cycle_gives_unbounded_infimum():
    a = WeightedAutomaton("ab", ["p", "q"], ["p"], ["q"],
                          [("p", "a", -1, "p"), ("p", "b", 5, "q")])
    res = emptiness_below(a, -100)
    assert not res.empty and res.infimum == NEG_INFINITY
    assert evaluate(a, res.witness) < -100


def test_disc_infinite_emptiness_attained():
    a = loops({"a": -1}, disc(F(1, 2), infinite=True))
    res = emptiness_below(a, 0)
    assert not res.empty and res.attained and evaluate(a, res.witness) == -1


def test_disc_infinite_infimum_not_attained():
    # the cheap loop is not accepting; every accepting run must leave it
    a = WeightedAutomaton("ab", ["p", "f"], ["p"], ["f"], [
        ("p", "a", -1, "p"), ("p", "b", 0, "f"), ("f", "b", 0, "f")], disc(F(1, 2), infinite=True))
    res = emptiness_below(a, F(-9, 10))
    assert res.infimum == -1 and not res.attained
    assert evaluate(a, res.witness) < F(-9, 10)
    assert emptiness_below(a, -1).empty


def test_scale_examples():
    a = loops({"a": 1, "b": 2})
    assert scale_weights(a, 1) == a
    assert evaluate(scale_weights(a, 0), "abab") == 0
    assert evaluate(scale_weights(a, 2), "ab") == 6


def test_min_mean_cycle_examples():
    assert min_mean_cycle(loops({"a": 5}))[0] == 5
    two = WeightedAutomaton("ab", ["p", "q"], ["p"], ["p"], [("p", "a", 1, "q"), ("q", "b", 3, "p")])
    assert min_mean_cycle(two)[0] == 2
    both = WeightedAutomaton("ab", ["p", "q", "r"], ["p"], ["p", "r"], [
        ("p", "a", 1, "q"), ("q", "b", 3, "p"), ("p", "b", 0, "r"), ("r", "a", -1, "r")])
    assert min_mean_cycle(both)[0] == -1
    assert min_mean_cycle(WeightedAutomaton("a", ["p"], ["p"], ["p"], [])) is None


def test_min_mean_cycle_ignores_unaccepting_components():
    a = WeightedAutomaton("ab", ["p", "q"], ["p"], ["p"], [
        ("p", "a", 1, "p"), ("p", "b", 0, "q"), ("q", "a", -5, "q")])
    assert min_mean_cycle(a)[0] == 1


seeds = st.integers(0, 10**6)


@given(seeds, st.sampled_from([SUM, disc(F(1, 2))]))
def test_evaluate_matches_run_enumeration(seed, vf):
    a = random_wa(seed, value_fn=vf)
    for w in words_upto("ab", 6):
        vals = all_run_values(a, w)
        assert evaluate(a, w) == min(vals, default=INF)
        assert run_values(a, w) == set(vals)


@settings(max_examples=30)
@given(seeds)
def test_limavg_evaluate_matches_cycle_enumeration(seed):
    a = random_wa(seed, value_fn=LIMAVG)
    for lasso in lassos_upto("ab", 3, 2):
        assert evaluate(a, lasso) == lasso_infimum(a, lasso)


@given(seeds, st.sampled_from([SUM, disc(F(1, 2))]), st.sampled_from([-1, 0, 1]))
def test_emptiness_witness_reevaluates(seed, vf, lam):
    a = random_wa(seed, value_fn=vf)
    res = emptiness_below(a, lam)
    if not res.empty:
        assert evaluate(a, res.witness) == res.witness_value < lam
    else:
        assert oracle_wa(a, lam, 6).empty


@settings(max_examples=150)
@given(seeds, st.sampled_from([SUM, disc(F(1, 2)), disc(F(2, 3))]))
def test_functionality_matches_run_pairs(seed, vf):
    a = random_wa(seed, density=0.5, weights=(0, 1), value_fn=vf)
    brute = all(len(set(all_run_values(a, w))) <= 1 for w in words_upto("ab", 6))
    assert is_functional_wa(a) == brute


@given(seeds, st.sampled_from([SUM, disc(F(1, 2))]), st.sampled_from([0, 1, 2, F(1, 2)]))
def test_scaling_is_linear(seed, vf, c):
    a = random_wa(seed, value_fn=vf)
    b = scale_weights(a, c)
    for w in words_upto("ab", 5):
        v = evaluate(a, w)
        if v != INF:
            assert evaluate(b, w) == c * v


def brute_min_mean(a):
    succ = {}
    for s, x, w, d in a.transitions:
        succ.setdefault(s, []).append((d, w))
    reach = _reach(succ, list(a.initial))
    reach_of = {v: _reach(succ, [v]) for v in reach}
    best = None
    for nodes, weights in _simple_cycles(succ, reach):
        comp = {v for v in reach_of[nodes[0]] if nodes[0] in reach_of[v]}
        if comp & a.accepting:
            m = sum(weights, F(0)) / len(weights)
            best = m if best is None else min(best, m)
    return best


@given(seeds)
def test_karp_matches_simple_cycles(seed):
    a = random_wa(seed, max_states=8, density=0.2, weights=(-3, 3))
    found = min_mean_cycle(a)
    assert (found[0] if found else None) == brute_min_mean(a)
    if found:
        mean, cycle = found
        assert sum(e[2] for e in cycle) == mean * len(cycle)
        assert all(cycle[i][3] == cycle[(i + 1) % len(cycle)][0] for i in range(len(cycle)))

