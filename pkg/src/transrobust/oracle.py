"""Brute-force ground truth and seeded random instances.

Everything here enumerates: words up to a length bound, lassos up to a
stem and loop bound, runs of automata on each word.  Nothing reuses the
decision procedures it is meant to check.
"""

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm

import numpy as np

from .fst import PADCHAR, Transducer, is_functional, words_upto
from .similarity import INF, DiffTable, table_distance
from .sync import RobustnessVerdict, Status
from .weighted import SUM, Lasso, WeightedAutomaton


def _domain(t, max_len):
    words, outs = [], []
    for s in words_upto(t.input_alphabet, max_len):
        out = t(s)
        if out is not None:
            words.append(s)
            outs.append(out)
    return words, outs


def _encode(words, letters):
    index = {x: i for i, x in enumerate(letters)}
    width = max((len(w) for w in words), default=0)
    arr = np.full((len(words), max(width, 1)), index[PADCHAR], dtype=np.int64)
    for i, w in enumerate(words):
        for j, x in enumerate(w):
            arr[i, j] = index[x]
    return arr


def _table_matrices(table):
    letters = table.letters
    den = lcm(*(v.denominator for v in table.finite_values), 1)
    n = len(letters)
    vals = np.zeros((n, n), dtype=np.int64)
    infinite = np.zeros((n, n), dtype=bool)
    for i, x in enumerate(letters):
        for j, y in enumerate(letters):
            if x == y == PADCHAR:
                continue
            v = table(x, y)
            if v == INF:
                infinite[i, j] = True
            else:
                vals[i, j] = int(v * den)
    return letters, vals, infinite, den


def _pairwise(words, table):
    letters, vals, infinite, den = _table_matrices(table)
    arr = _encode(words, letters)
    a, b = arr[:, None, :], arr[None, :, :]
    return vals[a, b].sum(axis=-1), infinite[a, b].any(axis=-1), den


def _first_table_violation(words, outs, d_in, d_out, K):
    din, din_inf, den_in = _pairwise(words, d_in)
    dout, dout_inf, den_out = _pairwise(outs, d_out)
    # dout / den_out > K * din / den_in, cleared of denominators
    bigger = dout * den_in * K.denominator > K.numerator * din * den_out
    bad = ~din_inf & (dout_inf | bigger)
    hits = np.argwhere(bad)
    if not len(hits):
        return None
    i, j = hits[0]
    return int(i), int(j)


def _call(d, s, u):
    return table_distance(d, s, u) if isinstance(d, DiffTable) else d(s, u)


def oracle_robust(t, d_in, d_out, K, max_len=6):
    """Exhaustive K-robustness check over domain pairs up to ``max_len``.

    ``d_in`` and ``d_out`` are difference tables (vectorised path) or any
    callables on word pairs.  The witness is the first violating pair in
    length-lexicographic order of the left word, then the right word.
    """
    if not is_functional(t):
        raise ValueError("transducer is not functional")
    K = Fraction(K)
    words, outs = _domain(t, max_len)
    if isinstance(d_in, DiffTable) and isinstance(d_out, DiffTable):
        hit = _first_table_violation(words, outs, d_in, d_out, K) if words else None
        pairs = [hit] if hit else []
    else:
        pairs = ((i, j) for i in range(len(words)) for j in range(len(words)))
    for i, j in pairs:
        din = _call(d_in, words[i], words[j])
        if din == INF:
            continue
        dout = _call(d_out, outs[i], outs[j])
        if dout > K * din:
            return RobustnessVerdict(Status.NOT_ROBUST, (words[i], words[j]), din, dout, K,
                                     bounded=max_len)
    return RobustnessVerdict(Status.ROBUST, K=K, bounded=max_len)


def is_violation(t, d_in, d_out, K, s, u):
    s_out, u_out = t(s), t(u)
    if s_out is None or u_out is None:
        return False
    din = _call(d_in, s, u)
    return din != INF and _call(d_out, s_out, u_out) > Fraction(K) * din


def _finite_run_values(a, w):
    """Values of all accepting runs, kept per run (no merging by state)."""
    vf = a.value_fn
    delta = Fraction(vf.discount) if vf.kind == "disc" else None
    runs = [(q, Fraction(0), Fraction(1)) for q in a.initial]
    for x in w:
        nxt = []
        for q, v, k in runs:
            k2 = k * delta if delta is not None else k
            for _, _, wt, d in a.successors(q, x):
                nxt.append((d, v + k2 * wt, k2))
        runs = nxt
    return [v for q, v, _ in runs if q in a.accepting]


def lassos_upto(alphabet, max_loop, max_stem=None):
    """All lassos with ``|stem| <= max_stem`` and ``1 <= |loop| <= max_loop``."""
    max_stem = max_loop if max_stem is None else max_stem
    letters = sorted(alphabet, key=repr)
    stems = list(words_upto(letters, max_stem))
    for n in range(1, max_loop + 1):
        for loop in product(letters, repeat=n):
            for stem in stems:
                yield Lasso(stem, loop)


def _lasso_graph(a, lasso):
    word = lasso.stem + lasso.loop
    n, back = len(word), len(lasso.stem)
    succ = {}
    for q in a.states:
        for pos, x in enumerate(word):
            nxt = pos + 1 if pos + 1 < n else back
            succ[(q, pos)] = [((d, nxt), Fraction(wt)) for _, _, wt, d in a.successors(q, x)]
    starts = [(q, 0) for q in a.initial]
    accepting = {(q, p) for q in a.accepting for p in range(n)}
    return succ, starts, accepting


def _reach(succ, starts):
    seen, stack = set(starts), list(starts)
    while stack:
        v = stack.pop()
        for d, _ in succ.get(v, []):
            if d not in seen:
                seen.add(d)
                stack.append(d)
    return seen


def _simple_cycles(succ, nodes):
    """Every simple cycle as a node list, rooted at its least node (plain DFS)."""
    order = {v: i for i, v in enumerate(sorted(nodes, key=repr))}
    for root in sorted(nodes, key=repr):
        stack = [(root, [root], [])]
        while stack:
            v, path, weights = stack.pop()
            for d, wt in succ.get(v, []):
                if d not in order:
                    continue
                if d == root:
                    yield path, weights + [wt]
                elif order[d] > order[root] and d not in path:
                    stack.append((d, path + [d], weights + [wt]))


def lasso_infimum(a, lasso):
    """Limit-average infimum over Büchi runs: best cycle mean in an accepting reachable SCC."""
    succ, starts, accepting = _lasso_graph(a, lasso)
    reach = _reach(succ, starts)
    reach_of = {v: _reach(succ, [v]) for v in reach}
    best = INF
    for nodes, weights in _simple_cycles(succ, reach):
        head = nodes[0]
        comp = {v for v in reach_of[head] if head in reach_of[v]}
        if comp & accepting:
            best = min(best, sum(weights) / len(weights))
    return best


def lasso_run_values(a, lasso, cap=20000):
    """Values of runs that settle into one simple cycle through an accepting node."""
    vf = a.value_fn
    succ, starts, accepting = _lasso_graph(a, lasso)
    reach = _reach(succ, starts)
    values = set()
    for nodes, weights in _simple_cycles(succ, reach):
        if not set(nodes) & accepting:
            continue
        if vf.kind == "limavg":
            values.add(sum(weights) / len(weights))
            continue
        delta = Fraction(vf.discount)
        cyc, k = Fraction(0), Fraction(1)
        for wt in weights:
            k *= delta
            cyc += k * wt
        loop_value = cyc / (1 - k)
        # simple paths from a start to the cycle head
        stack = [(s, [s], Fraction(0), Fraction(1)) for s in starts]
        while stack:
            v, path, val, k = stack.pop()
            if v == nodes[0]:
                values.add(val + k * loop_value)
                if len(values) > cap:
                    return values
                continue
            for d, wt in succ.get(v, []):
                if d not in path:
                    stack.append((d, path + [d], val + k * delta * wt, k * delta))
    return values


@dataclass(frozen=True)
class OracleEmptiness:
    empty: bool
    best: object
    witness: object = None


def oracle_wa(a, threshold, max_len=8):
    """Bounded emptiness: is some enumerated word's value below ``threshold``?

    Finite-word value functions range over words up to ``max_len``; LimAvg
    over lassos whose stem and loop are at most ``max_len`` long.
    """
    best, witness = oracle_wa_minimum(a, max_len)
    return OracleEmptiness(not best < Fraction(threshold), best, witness if best < threshold else None)


def oracle_wa_minimum(a, max_len):
    vf = a.value_fn
    best, witness = INF, None
    if vf.kind == "limavg":
        words = lassos_upto(a.alphabet, max_len)
        value = lambda w: lasso_infimum(a, w)  # noqa: E731
    elif vf.infinite:
        raise ValueError("no bounded oracle for discounted sums over infinite words")
    else:
        words = words_upto(a.alphabet, max_len)
        value = lambda w: min(_finite_run_values(a, w), default=INF)  # noqa: E731
    for w in words:
        v = value(w)
        if v < best:
            best, witness = v, w
    return best, witness


@dataclass(frozen=True)
class GenSpec:
    max_states: int = 3
    input_size: int = 2
    output_size: int = 2
    density: float = 0.4
    min_output: int = 1
    max_output: int = 1
    functional_only: bool = True
    accept_prob: float = 0.6
    seed: int = 0


_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _alphabet(n):
    if not 1 <= n <= len(_LETTERS):
        raise ValueError("alphabet size out of range")
    return list(_LETTERS[:n])


def random_transducer(g, retries=500):
    """Seeded random transducer; with ``functional_only`` non-functional draws are rejected."""
    if not 0 <= g.min_output <= g.max_output:
        raise ValueError("bad output length range")
    rng = random.Random(g.seed)
    ins, outs = _alphabet(g.input_size), _alphabet(g.output_size)
    for _ in range(retries):
        n = rng.randint(1, g.max_states)
        states = [f"q{i}" for i in range(n)]
        accepting = [q for q in states if rng.random() < g.accept_prob]
        trans = []
        for q in states:
            for x in ins:
                for p in states:
                    if rng.random() < g.density:
                        k = rng.randint(g.min_output, g.max_output)
                        trans.append((q, x, tuple(rng.choice(outs) for _ in range(k)), p))
        t = Transducer(ins, outs, states, ["q0"], accepting, trans)
        if not g.functional_only or is_functional(t):
            return t
    raise ValueError("no functional transducer found within the retry budget")


def random_mealy(n_states, input_size=2, output_size=2, seed=0):
    rng = random.Random(seed)
    ins, outs = _alphabet(input_size), _alphabet(output_size)
    states = [f"q{i}" for i in range(n_states)]
    trans = [(q, x, (rng.choice(outs),), rng.choice(states)) for q in states for x in ins]
    return Transducer(ins, outs, states, ["q0"], states, trans)


def random_wa(seed, max_states=4, alphabet_size=2, density=0.4, weights=(-2, 2),
              value_fn=SUM, accept_prob=0.5):
    rng = random.Random(seed)
    letters = _alphabet(alphabet_size)
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    accepting = [q for q in states if rng.random() < accept_prob]
    trans = [(q, x, rng.randint(*weights), p)
             for q in states for x in letters for p in states if rng.random() < density]
    return WeightedAutomaton(letters, states, ["s0"], accepting, trans, value_fn)


__all__ = [
    "GenSpec",
    "OracleEmptiness",
    "is_violation",
    "lasso_infimum",
    "lasso_run_values",
    "lassos_upto",
    "oracle_robust",
    "oracle_wa",
    "oracle_wa_minimum",
    "random_mealy",
    "random_transducer",
    "random_wa",
]
