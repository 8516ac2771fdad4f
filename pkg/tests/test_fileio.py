import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from transrobust.fileio import (
    FormatError,
    document_kind,
    format_letter,
    format_number,
    parse_any,
    parse_diff,
    parse_fst,
    parse_letter,
    parse_wa,
    serialize_diff,
    serialize_fst,
    serialize_wa,
)
from transrobust.fst import PADCHAR, Transducer, renumber
from transrobust.oracle import GenSpec, random_transducer, random_wa
from transrobust.similarity import INF, DiffTable, convolution_alphabet, manhattan_table
from transrobust.weighted import LIMAVG, SUM, WeightedAutomaton, disc

from conftest import FIXTURES

SERIALIZERS = {Transducer: serialize_fst, WeightedAutomaton: serialize_wa, DiffTable: serialize_diff}


def round_trip(obj):
    return parse_any(SERIALIZERS[type(obj)](obj))


def random_track_wa(seed):
    rng = random.Random(seed)
    tracks = [["a", "b"], ["x", "y", "z"]][: rng.randint(1, 2)] + [["a", "b"]]
    letters = sorted(convolution_alphabet(tracks), key=repr)
    states = [f"s{i}" for i in range(rng.randint(1, 3))]
    trans = [(p, x, F(rng.randint(-6, 6), rng.randint(1, 4)), q)
             for p in states for q in states for x in letters if rng.random() < 0.3]
    vf = rng.choice([SUM, LIMAVG, disc(F(1, 2)), disc(F(9, 10), infinite=True)])
    return WeightedAutomaton.over_tracks(tracks, states, ["s0"], states[-1:], trans, vf)


def random_table(seed):
    rng = random.Random(seed)
    alphabet = ["a", "b", "c"][: rng.randint(1, 3)]
    letters = alphabet + [PADCHAR]
    entries = {}
    for x in letters:
        for y in letters:
            if x == y == PADCHAR or rng.random() < 0.2:
                continue
            entries[(x, y)] = INF if rng.random() < 0.1 else F(rng.randint(0, 9), rng.randint(1, 3))
    return DiffTable(alphabet, entries)


@pytest.mark.parametrize("path", sorted(FIXTURES.iterdir()), ids=lambda p: p.name)
def test_fixture_round_trip(path):
    obj = parse_any(path.read_text())
    assert round_trip(obj) == obj


@given(st.integers(0, 10**6))
def test_random_transducer_round_trip(seed):
    t = random_transducer(GenSpec(max_states=4, min_output=0, max_output=3, input_size=3, seed=seed))
    assert round_trip(t) == t


@given(st.integers(0, 10**6))
def test_random_wa_round_trip(seed):
    a = random_wa(seed, weights=(-5, 5))
    assert round_trip(a) == a
    b = random_track_wa(seed)
    assert round_trip(b) == b


@given(st.integers(0, 10**6))
def test_random_table_round_trip(seed):
    t = random_table(seed)
    assert round_trip(t) == t


def test_manhattan_table_matches_fixture():
    assert parse_diff((FIXTURES / "man.diff").read_text()) == manhattan_table("ab")


def test_kinds():
    assert document_kind("# comment\n\nfst\n") == "fst"
    with pytest.raises(FormatError):
        document_kind("  \n# nothing\n")
    with pytest.raises(FormatError) as err:
        parse_any("nfa\nstates: q\n")
    assert err.value.line == 1


def test_letters():
    assert parse_letter("(a,#)") == ("a", "#")
    assert parse_letter("((a,b),c)") == (("a", "b"), "c")
    assert format_letter(("a", ("b", "#"))) == "(a,(b,#))"
    for bad in ("#", "->", "-", ":", "(a)", "(a,", "(a,,b)", "a,b"):
        with pytest.raises(FormatError):
            parse_letter(bad)
    with pytest.raises(FormatError):
        format_letter("a b")


def test_numbers():
    assert format_number(F(-1, 3)) == "-1/3" and format_number(4) == "4"
    text = "wa\nvalue-fn: disc 9/10\ntracks: 1\nalphabet1: a\nstates: s\ninitial: s\naccepting: s\n" \
           "trans s a -1/3 -> s\n"
    a = parse_wa(text)
    assert a.value_fn == disc(F(9, 10)) and a.transitions[0][2] == F(-1, 3)
    assert a.tracks is None


FST = """fst
input-alphabet: a b
output-alphabet: x
states: p q
initial: p
accepting: q
trans p a : x x -> q
trans q b : - -> q
"""


def test_fst_example():
    t = parse_fst(FST)
    assert t("ab") == ("x", "x") and t("b") is None


def broken(old, new):
    return FST.replace(old, new, 1)


@pytest.mark.parametrize("text, line", [
    (broken("states: p q", "states: p q p"), 4),
    (broken("initial: p", "initial: r"), 5),
    (broken("trans q b : - -> q", "trans q c : - -> q"), 8),
    (broken("trans q b : - -> q", "trans q b : y -> q"), 8),
    (broken("trans q b : - -> q", "trans q b - -> q"), 8),
    (broken("trans q b : - -> q", "trans q b : - -> r"), 8),
    (broken("accepting: q", "accepting: q\ncolour: red"), 7),
    (broken("accepting: q", "accepting: q\naccepting: p"), 7),
    (broken("states: p q", "states: p ->"), 4),
    (broken("input-alphabet: a b", "input-alphabet: a #"), 2),
    ("\n# lead\nwa\n", 3),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(FormatError) as err:
        parse_fst(text)
    assert err.value.line == line and f"line {line}" in str(err.value)


def test_missing_key():
    with pytest.raises(FormatError, match="missing key 'accepting'"):
        parse_fst(broken("accepting: q\n", ""))


WA2 = """wa
value-fn: sum
tracks: 2
alphabet1: a
alphabet2: b
states: s
initial: s
accepting: s
trans s (a,b) 1 -> s
"""


@pytest.mark.parametrize("old, new, line", [
    ("(a,b) 1", "(#,#) 1", 9),
    ("(a,b) 1", "a 1", 9),
    ("(a,b) 1", "(a,c) 1", 9),
    ("(a,b) 1", "(a,b) 1/0", 9),
    ("(a,b) 1", "(a,b) one", 9),
    ("tracks: 2", "tracks: 0", 3),
    ("alphabet2: b", "alphabet3: b", 5),
    ("value-fn: sum", "value-fn: mean", 2),
    ("value-fn: sum", "value-fn: disc 2", 2),
])
def test_wa_errors(old, new, line):
    with pytest.raises(FormatError) as err:
        parse_wa(WA2.replace(old, new))
    assert err.value.line == line


def test_wa_tracks():
    a = parse_wa(WA2)
    assert a.tracks == (frozenset("a"), frozenset("b"))
    assert ("#", "b") in a.alphabet


DIFF = "diff\nalphabet: a b\nentry a b 1\nentry a # inf\n"


def test_diff_example():
    t = parse_diff(DIFF)
    assert t("a", "b") == 1 and t("a", "#") == INF and t("b", "a") == INF


@pytest.mark.parametrize("extra", ["entry # # 0", "entry a b 2", "entry a c 1", "entry a b", "pair a b 1"])
def test_diff_errors(extra):
    with pytest.raises(FormatError) as err:
        parse_diff(DIFF + extra + "\n")
    assert err.value.line == 5


def test_unserializable_states():
    t = Transducer("a", "a", [0], [0], [0], [(0, "a", "a", 0)])
    with pytest.raises(FormatError):
        serialize_fst(t)
    r = renumber(t)
    assert parse_fst(serialize_fst(r)) == r
