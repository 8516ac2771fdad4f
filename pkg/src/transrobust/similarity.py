"""Convolution of words and similarity functions computed by weighted automata."""

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .fst import PAD, PADCHAR, RESERVED, AlphabetError
from .weighted import SUM, Lasso, WeightedAutomaton, convolution_alphabet, evaluate

INF = math.inf


def convolve(words, alphabets=None):
    """Positionwise tuple word, padded with ``#`` past each word's end."""
    words = [tuple(w) for w in words]
    if len(words) < 2:
        raise ValueError("convolution needs at least two words")
    if alphabets is not None:
        for w, alpha in zip(words, alphabets):
            for x in w:
                if x not in alpha:
                    raise AlphabetError(f"letter {x!r} is not in its track alphabet")
    n = max(len(w) for w in words)
    return tuple(
        tuple(w[i] if i < len(w) else PADCHAR for w in words) for i in range(n)
    )


def convolve_lassos(lassos):
    """Convolution of ultimately periodic words, again as a lasso."""
    stem = max(len(x.stem) for x in lassos)
    period = math.lcm(*(len(x.loop) for x in lassos))
    full = [x.prefix(stem + period) for x in lassos]
    word = tuple(zip(*full))
    return Lasso(word[:stem], word[stem:])


def project(word, track):
    """Letters of one track of a convolution word, padding removed."""
    return tuple(x[track] for x in word if x[track] != PADCHAR)


@dataclass(frozen=True)
class DiffTable:
    """Mismatch penalties over ``alphabet + {#}``; missing pairs are infinite."""

    alphabet: frozenset
    entries: dict

    def __post_init__(self):
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        bad = self.alphabet & {PADCHAR}
        if bad:
            raise AlphabetError("the end marker # cannot be an alphabet letter")
        norm = {}
        for (x, y), v in dict(self.entries).items():
            norm[(x, y)] = INF if v == INF else Fraction(v)
        object.__setattr__(self, "entries", norm)

    @property
    def letters(self):
        return sorted(self.alphabet, key=repr) + [PADCHAR]

    def __call__(self, x, y):
        return self.entries.get((x, y), INF)

    def __hash__(self):
        return hash((self.alphabet, frozenset(self.entries.items())))

    @property
    def finite_values(self):
        return [v for (x, y), v in self.entries.items()
                if v != INF and not (x == PADCHAR and y == PADCHAR)]


def manhattan_table(alphabet, penalty=1, end_penalty=None):
    """Standard table: ``penalty`` for a mismatch, ``end_penalty`` against ``#``."""
    end_penalty = penalty if end_penalty is None else end_penalty
    letters = sorted(alphabet, key=repr) + [PADCHAR]
    entries = {}
    for x in letters:
        for y in letters:
            if x == PADCHAR and y == PADCHAR:
                continue
            if x == y:
                entries[(x, y)] = 0
            elif PADCHAR in (x, y):
                entries[(x, y)] = end_penalty
            else:
                entries[(x, y)] = penalty
    return DiffTable(alphabet, entries)


def validate_diff_table(t):
    """List of violated distance axioms; empty when the table is valid."""
    problems = []
    letters = t.letters
    for i, x in enumerate(letters):
        for j, y in enumerate(letters):
            if x == PADCHAR == y:
                continue
            v = t(x, y)
            if v < 0:
                problems.append(("non-negativity", (x, y)))
            if (x == y) != (v == 0):
                problems.append(("identity", (x, y)))
            if i < j and t(y, x) != v:
                problems.append(("symmetry", (x, y)))
    for x, y, z in product(letters, repeat=3):
        if PADCHAR == x == z or PADCHAR == x == y or PADCHAR == y == z:
            continue
        if t(x, z) > t(x, y) + t(y, z):
            problems.append(("triangle", (x, y, z)))
    return problems


@dataclass(frozen=True)
class SimilarityFunction:
    automaton: WeightedAutomaton
    left_alphabet: frozenset
    right_alphabet: frozenset

    def __post_init__(self):
        object.__setattr__(self, "left_alphabet", frozenset(self.left_alphabet))
        object.__setattr__(self, "right_alphabet", frozenset(self.right_alphabet))
        left = self.left_alphabet | {PADCHAR}
        right = self.right_alphabet | {PADCHAR}
        for x in self.automaton.alphabet:
            if not (isinstance(x, tuple) and len(x) == 2 and x[0] in left and x[1] in right):
                raise AlphabetError(f"automaton letter {x!r} is not a pair over the track alphabets")

    @property
    def value_fn(self):
        return self.automaton.value_fn

    def __call__(self, s, t):
        return distance(self, s, t)


def distance(d, s, t):
    if isinstance(s, Lasso) or isinstance(t, Lasso):
        return evaluate(d.automaton, convolve_lassos([s, t]))
    word = convolve([s, t], [d.left_alphabet, d.right_alphabet])
    return evaluate(d.automaton, word)


def build_manhattan_wa(t, value_fn=SUM):
    """One-state automaton summing table penalties; infinite entries are omitted."""
    problems = validate_diff_table(t)
    if problems:
        raise ValueError(f"invalid difference table: {problems[:3]}")
    trans = []
    for x in t.letters:
        for y in t.letters:
            if x == PADCHAR and y == PADCHAR:
                continue
            v = t(x, y)
            if v != INF:
                trans.append(("m", (x, y), v, "m"))
    a = WeightedAutomaton.over_tracks([t.alphabet, t.alphabet], ["m"], ["m"], ["m"], trans, value_fn)
    return SimilarityFunction(a, t.alphabet, t.alphabet)


def standard_manhattan(alphabet, value_fn=SUM):
    return build_manhattan_wa(manhattan_table(alphabet), value_fn)


def table_distance(t, s, u):
    """Direct positionwise sum of penalties with ``#`` padding."""
    total = Fraction(0)
    for x, y in convolve([s, u]):
        total += t(x, y)
    return total


def check_reserved(letters):
    bad = set(letters) & RESERVED
    if bad:
        raise AlphabetError(f"reserved symbols used as letters: {sorted(bad)}")


__all__ = [
    "PAD",
    "PADCHAR",
    "DiffTable",
    "SimilarityFunction",
    "build_manhattan_wa",
    "convolve",
    "convolve_lassos",
    "distance",
    "manhattan_table",
    "project",
    "standard_manhattan",
    "table_distance",
    "validate_diff_table",
]
