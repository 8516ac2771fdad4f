"""Synchronized transducers and the reduction of K-robustness to emptiness.

A functional transducer is synchronized when its graph ``{s (x) T(s)}`` is
regular.  For such transducers robustness is decided on a four-track
product automaton reading ``s (x) t (x) T(s) (x) T(t)`` whose weight is
``K * d_in - d_out``: the transducer is robust iff no word has a negative
value.
"""

import enum
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from . import _graph
from .fst import (
    PADCHAR,
    Automaton,
    is_functional,
    is_letter_to_letter,
    run,
    trim,
)
from .similarity import SimilarityFunction, convolve, convolve_lassos, distance
from .weighted import (
    Lasso,
    WeightedAutomaton,
    _buchi_sccs,
    _lasso_product,
    emptiness_below,
    is_functional_wa,
)


class NotSynchronizedError(ValueError):
    pass


@dataclass(frozen=True)
class SynchronicityVerdict:
    synchronized: bool
    buffer_bound: int = None
    tail_language: frozenset = None
    witness: object = None
    condition: str = None

    def __bool__(self):
        return self.synchronized


def _require_functional(t):
    if not is_functional(t):
        raise ValueError("transducer is not functional")


def _lag_edges(t):
    # weight |u| - 1: the change of (output length - input length)
    return [(e.src, e.dst, len(e.out) - 1, e) for e in t.transitions]


def _shrinking_states(t):
    """States reachable from a cycle whose output is shorter than its input."""
    edges = _lag_edges(t)
    seeds = set()
    for comp in _graph.strongly_connected(t.states, edges):
        inner = [e for e in edges if e[0] in comp and e[1] in comp]
        found = _graph.min_mean_cycle(comp, inner)
        if found is not None and found[0] < 0:
            seeds |= comp
    return _graph.reachable(seeds, edges) if seeds else set()


def _output_language(t, state, limit=100000):
    """All outputs on paths from ``state`` to acceptance; assumes the set is finite."""
    result = set()
    stack = [(state, ())]
    seen = set()
    while stack:
        q, out = stack.pop()
        if (q, out) in seen:
            continue
        seen.add((q, out))
        if len(seen) > limit:
            raise RuntimeError("output language enumeration exceeded its budget")
        if q in t.accepting:
            result.add(out)
        for e in t.transitions:
            if e.src == q:
                stack.append((e.dst, out + e.out))
    return result


def check_synchronized(t):
    """Decide synchronicity of a functional transducer.

    Synchronized iff no trim cycle outputs more letters than it reads, and
    every state reachable from a cycle that outputs fewer letters than it
    reads has a finite output language.
    """
    _require_functional(t)
    t = trim(t)
    edges = _lag_edges(t)
    found = _graph.min_mean_cycle(t.states, [(u, v, -w, e) for u, v, w, e in edges])
    if found is not None and found[0] < 0:
        return SynchronicityVerdict(False, witness=[e[3] for e in found[1]], condition="a")
    flagged = _shrinking_states(t)
    pumping = [(u, v, w, e) for u, v, w, e in edges if u in flagged and v in flagged]
    for comp in _graph.strongly_connected(flagged, pumping):
        for u, v, _, e in pumping:
            if u in comp and v in comp and e.out:
                return SynchronicityVerdict(False, witness=u, condition="b")
    tails = set()
    for q in flagged:
        tails |= _output_language(t, q)
    # cycles never gain lag, so a simple path bounds how far output runs ahead
    bound = max(len(t.states) - 1, 0) * max(t.max_output - 1, 0)
    return SynchronicityVerdict(True, bound, frozenset(tails))


def _cancel(produced, read):
    n = min(len(produced), len(read))
    if produced[:n] != read[:n]:
        return None
    return produced[n:], read[n:]


def synchronized_automaton(t):
    """Automaton over ``(Sigma + #) x (Gamma + #)`` accepting ``s (x) T(s)``.

    Letter-to-letter transducers map directly.  Otherwise states carry the
    produced-but-unread output and the read-but-unproduced output, one of
    which is always empty, plus end-of-track flags.
    """
    verdict = check_synchronized(t)
    if not verdict.synchronized:
        raise NotSynchronizedError(f"transducer is not synchronized (condition {verdict.condition})")
    t = trim(t)
    letters = [(x, y) for x in sorted(t.input_alphabet, key=repr) + [PADCHAR]
               for y in sorted(t.output_alphabet, key=repr) + [PADCHAR]
               if not x == y == PADCHAR]
    if is_letter_to_letter(t):
        return Automaton(letters, t.states, t.initial, t.accepting,
                         [(e.src, (e.letter, e.out[0]), e.dst) for e in t.transitions])
    # the read-ahead side can lag by a letter per silent step as well
    cap = max([len(t.states) * t.max_output] + [len(w) for w in verdict.tail_language])
    starts = [(q, (), (), False, False) for q in sorted(t.initial, key=repr)]
    seen, trans = set(starts), []
    queue = deque(starts)
    while queue:
        state = queue.popleft()
        for letter in letters:
            for nxt in _buffer_step(t, state, letter, cap):
                trans.append((state, letter, nxt))
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    accepting = [s for s in seen if s[0] in t.accepting and not s[1] and not s[2]]
    a = Automaton(letters, sorted(seen, key=repr), starts, accepting, trans)
    return _trim_automaton(a)


def _buffer_step(t, state, letter, cap):
    q, produced, read, end_in, end_out = state
    x, y = letter
    if (end_in and x != PADCHAR) or (end_out and y != PADCHAR):
        return []
    end_in, end_out = end_in or x == PADCHAR, end_out or y == PADCHAR
    if x == PADCHAR:
        moves = [(q, produced)]
    else:
        moves = [(e.dst, produced + e.out) for e in t.successors(q, x)]
    incoming = read if y == PADCHAR else read + (y,)
    result = []
    for q2, out in moves:
        cancelled = _cancel(out, incoming)
        if cancelled is None:
            continue
        p, r = cancelled
        if end_out and p:
            continue
        if len(p) > cap or len(r) > cap:
            continue
        result.append((q2, p, r, end_in, end_out))
    return result


def _trim_automaton(a):
    edges = [(s, d, 0, x) for s, x, d in a.transitions]
    keep = _graph.reachable(a.initial, edges) & _graph.coreachable(a.accepting, edges)
    return Automaton(a.alphabet, [q for q in a.states if q in keep], a.initial & keep,
                     a.accepting & keep,
                     [(s, x, d) for s, x, d in a.transitions if s in keep and d in keep])


class Role(enum.Enum):
    IN_PAIR = (0, 1)
    OUT_PAIR = (2, 3)
    LEFT_IO = (0, 2)
    RIGHT_IO = (1, 3)


DONE = "__done__"


def _closed(letter_pair):
    return letter_pair == (PADCHAR, PADCHAR)


def lift_track(x, role, input_alphabet, output_alphabet):
    """Copy ``x`` onto the four-track alphabet, reading only the tracks of ``role``.

    ``x`` is a WeightedAutomaton or an Automaton over letter pairs.  Free
    tracks range over their alphabet plus ``#``.  Accepting states get a
    weight-0 ``(#, #)`` closure so the selected pair may end before the
    other tracks.
    """
    tracks = [input_alphabet, input_alphabet, output_alphabet, output_alphabet]
    full = [sorted(a, key=repr) + [PADCHAR] for a in tracks]
    i, j = role.value
    free = [k for k in range(4) if k not in (i, j)]
    weighted = isinstance(x, WeightedAutomaton)
    raw = x.transitions if weighted else [(s, l, 0, d) for s, l, d in x.transitions]
    for _, l, _, _ in raw:
        if not (isinstance(l, tuple) and len(l) == 2 and l[0] in full[i] and l[1] in full[j]):
            raise ValueError(f"letter {l!r} does not match the tracks {role.name}")
    trans = []
    closure = [(q, (PADCHAR, PADCHAR), 0, DONE) for q in x.accepting]
    closure.append((DONE, (PADCHAR, PADCHAR), 0, DONE))
    for s, l, w, d in list(raw) + closure:
        for a in full[free[0]]:
            for b in full[free[1]]:
                big = [None] * 4
                big[i], big[j], big[free[0]], big[free[1]] = l[0], l[1], a, b
                if all(c == PADCHAR for c in big):
                    continue
                trans.append((s, tuple(big), w, d))
    states = list(x.states) + [DONE]
    accepting = list(x.accepting) + [DONE]
    alphabet = {e[1] for e in trans}
    if weighted:
        return WeightedAutomaton(alphabet, states, x.initial, accepting, trans, x.value_fn)
    return Automaton(alphabet, states, x.initial, accepting, [(s, l, d) for s, l, _, d in trans])


class Status(str, enum.Enum):
    ROBUST = "ROBUST"
    NOT_ROBUST = "NOT_ROBUST"
    UNSUPPORTED = "UNSUPPORTED"


@dataclass(frozen=True)
class RobustnessQuery:
    K: Fraction
    d_in: SimilarityFunction
    d_out: SimilarityFunction

    def __post_init__(self):
        object.__setattr__(self, "K", Fraction(self.K))
        if self.K <= 0:
            raise ValueError("K must be positive")
        if self.d_in.value_fn != self.d_out.value_fn:
            raise ValueError("input and output similarities use different value functions")


@dataclass(frozen=True)
class RobustnessVerdict:
    status: Status
    witness: tuple = None
    d_in: object = None
    d_out: object = None
    K: object = None
    bound: object = None
    margin_note: str = None
    reason: str = None
    bounded: int = None
    detail: object = None

    @property
    def robust(self):
        return self.status == Status.ROBUST


class _Component:
    """Pair automaton with ``(#, #)`` closure, read on two of the four tracks."""

    def __init__(self, automaton, tracks, weight_scale, infinite):
        self.tracks = tracks
        self.scale = Fraction(weight_scale)
        self.infinite = infinite
        self.accepting = automaton.accepting
        self.initial = automaton.initial
        self.out = {}
        if isinstance(automaton, WeightedAutomaton):
            rows = [(s, l, w, d) for s, l, w, d in automaton.transitions]
        else:
            rows = [(s, l, 0, d) for s, l, d in automaton.transitions]
        for s, l, w, d in rows:
            self.out.setdefault((s, l), []).append((d, w))

    def step(self, state, letter):
        pair = (letter[self.tracks[0]], letter[self.tracks[1]])
        if _closed(pair):
            if self.infinite:
                return []
            if state == DONE or state in self.accepting:
                return [(DONE, 0)]
            return []
        if state == DONE:
            return []
        return [(d, self.scale * w) for d, w in self.out.get((state, pair), [])]

    def is_accepting(self, state):
        return state == DONE or state in self.accepting


def product_automaton(t, query, sync=None):
    """Four-track product ``K*d_in x A_T(left) x A_T(right) x (-d_out)``, built lazily."""
    vf = query.d_in.value_fn
    infinite = vf.infinite
    sync = sync if sync is not None else _transducer_graph(t, infinite)
    comps = [
        _Component(query.d_in.automaton, (0, 1), query.K, infinite),
        _Component(sync, (0, 2), 0, infinite),
        _Component(sync, (1, 3), 0, infinite),
        _Component(query.d_out.automaton, (2, 3), -1, infinite),
    ]
    letters = _product_letters(t, infinite)
    starts = []
    for a in sorted(comps[0].initial, key=repr):
        for b in sorted(comps[1].initial, key=repr):
            for c in sorted(comps[2].initial, key=repr):
                for d in sorted(comps[3].initial, key=repr):
                    starts.append(((a, b, c, d), 0) if infinite else (a, b, c, d))
    seen, trans = set(starts), []
    queue = deque(starts)
    while queue:
        node = queue.popleft()
        parts, counter = (node if infinite else (node, None))
        for letter in letters:
            options = [[]]
            for comp, p in zip(comps, parts):
                nxt = comp.step(p, letter)
                options = [o + [m] for o in options for m in nxt]
                if not options:
                    break
            for combo in options:
                target = tuple(m[0] for m in combo)
                weight = sum(m[1] for m in combo)
                if infinite:
                    k = counter
                    if comps[k].is_accepting(parts[k]):
                        k = (k + 1) % 4
                    target = (target, k)
                trans.append((node, letter, weight, target))
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
    if infinite:
        accepting = [n for n in seen if n[1] == 0 and comps[0].is_accepting(n[0][0])]
    else:
        accepting = [n for n in seen if all(c.is_accepting(p) for c, p in zip(comps, n))]
    alphabet = {e[1] for e in trans}
    return WeightedAutomaton(alphabet, sorted(seen, key=repr), starts, accepting, trans, vf)


def _product_letters(t, infinite):
    ins = sorted(t.input_alphabet, key=repr)
    outs = sorted(t.output_alphabet, key=repr)
    if not infinite:
        ins, outs = ins + [PADCHAR], outs + [PADCHAR]
    return [(a, b, c, d) for a in ins for b in ins for c in outs for d in outs
            if not (a == b == c == d == PADCHAR)]


def _transducer_graph(t, infinite):
    if infinite:
        t = trim(t)
        return Automaton([(e.letter, e.out[0]) for e in t.transitions], t.states, t.initial,
                         t.accepting, [(e.src, (e.letter, e.out[0]), e.dst) for e in t.transitions])
    return synchronized_automaton(t)


def check_k_robust(t, query):
    """Decide K-robustness of a synchronized functional transducer.

    Sum and both discounted sums use case (1) of the reduction: the product
    has a negative-valued word iff the transducer is not K-robust.  LimAvg is
    handled on lassos and needs a letter-to-letter transducer.
    """
    _require_functional(t)
    vf = query.d_in.value_fn
    if vf.infinite and not is_letter_to_letter(trim(t)):
        return RobustnessVerdict(Status.UNSUPPORTED, K=query.K,
                                 reason="infinite-word value functions need a letter-to-letter transducer")
    if not is_functional_wa(query.d_out.automaton):
        raise ValueError("the output similarity automaton is not functional")
    if not vf.infinite:
        sync = check_synchronized(t)
        if not sync.synchronized:
            raise NotSynchronizedError(f"transducer is not synchronized (condition {sync.condition})")
    graph = _transducer_graph(t, vf.infinite)
    product = product_automaton(t, query, graph)
    result = emptiness_below(product, 0)
    if not result.empty:
        return _verdict_from_product_word(t, query, result.witness)
    unbounded = _infinite_output_distance(t, query, graph)
    if unbounded is not None:
        return unbounded
    note = None
    if vf.infinite and vf.kind == "disc" and not result.attained:
        note = "infimum of the product is approached but not attained by a Büchi run"
    if vf.infinite and not all(q in query.d_out.automaton.accepting for q in query.d_out.automaton.states):
        note = (note + "; " if note else "") + \
            "pairs with infinite output distance were not searched (output automaton is not a safety automaton)"
    return RobustnessVerdict(Status.ROBUST, K=query.K, margin_note=note)


def _verdict_from_product_word(t, query, word):
    if isinstance(word, Lasso):
        s = Lasso(tuple(x[0] for x in word.stem), tuple(x[0] for x in word.loop))
        u = Lasso(tuple(x[1] for x in word.stem), tuple(x[1] for x in word.loop))
        s_out = Lasso(tuple(x[2] for x in word.stem), tuple(x[2] for x in word.loop))
        u_out = Lasso(tuple(x[3] for x in word.stem), tuple(x[3] for x in word.loop))
        din, dout = distance(query.d_in, s, u), distance(query.d_out, s_out, u_out)
    else:
        s = tuple(x[0] for x in word if x[0] != PADCHAR)
        u = tuple(x[1] for x in word if x[1] != PADCHAR)
        din, dout = _direct_values(t, query, s, u)
    if not dout > query.K * din:
        raise AssertionError(f"product witness {(s, u)} does not re-validate")
    return RobustnessVerdict(Status.NOT_ROBUST, (s, u), din, dout, query.K)


def _direct_values(t, query, s, u):
    s_out, u_out = t(s), t(u)
    if s_out is None or u_out is None:
        raise AssertionError("witness word outside the domain")
    return distance(query.d_in, s, u), distance(query.d_out, s_out, u_out)


def _subset_step(a, subset, pair):
    if _closed(pair):
        return frozenset({DONE}) if (DONE in subset or subset & a.accepting) else frozenset()
    return frozenset(d for q in subset if q != DONE for s, l, w, d in a._index.get((q, pair), []))


def _infinite_output_distance(t, query, graph):
    """Search for inputs at finite distance whose outputs are at infinite distance.

    The output automaton is determinized on the fly; a witness ends in a
    subset containing no accepting state.  For infinite words only safety
    output automata (all states accepting) are handled.
    """
    dout = query.d_out.automaton
    infinite = query.d_in.value_fn.infinite
    if infinite and not all(q in dout.accepting for q in dout.states):
        return None
    comps = [
        _Component(query.d_in.automaton, (0, 1), 0, infinite),
        _Component(graph, (0, 2), 0, infinite),
        _Component(graph, (1, 3), 0, infinite),
    ]
    letters = _product_letters(t, infinite)
    starts = [((a, b, c), frozenset(dout.initial))
              for a in comps[0].initial for b in comps[1].initial for c in comps[2].initial]
    edges, seen = [], set(starts)
    queue = deque(starts)
    while queue:
        node = queue.popleft()
        parts, subset = node
        if not subset and infinite:
            continue
        for letter in letters:
            options = [[]]
            for comp, p in zip(comps, parts):
                options = [o + [m[0]] for o in options for m in comp.step(p, letter)]
            if not options:
                continue
            nxt_subset = _subset_step(dout, subset, (letter[2], letter[3]))
            for combo in options:
                target = (tuple(combo), nxt_subset)
                edges.append((node, target, 0, letter))
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
    if infinite:
        return _infinite_safety_witness(t, query, starts, edges, comps)
    goals = {n for n in seen
             if all(c.is_accepting(p) for c, p in zip(comps, n[0]))
             and DONE not in n[1] and not (n[1] & dout.accepting)}
    path = _graph.shortest_path(starts, goals, edges)
    if path is None:
        return None
    word = tuple(e[3] for e in path)
    s = tuple(x[0] for x in word if x[0] != PADCHAR)
    u = tuple(x[1] for x in word if x[1] != PADCHAR)
    din, dout_val = _direct_values(t, query, s, u)
    if din == float("inf") or dout_val != float("inf"):
        raise AssertionError("infinite-distance witness does not re-validate")
    return RobustnessVerdict(Status.NOT_ROBUST, (s, u), din, dout_val, query.K)


def _infinite_safety_witness(t, query, starts, edges, comps):
    # a dead output subset reached, followed by a run that the other
    # components accept (generalized Büchi through one SCC per component)
    dead = {e[1] for e in edges if not e[1][1]}
    sub = [e for e in edges if e[0] in dead or e[0][1]]
    for comp in _graph.strongly_connected({n for e in sub for n in e[:2]}, sub):
        if not comp <= dead:
            continue
        inner = [e for e in sub if e[0] in comp and e[1] in comp]
        ok = all(any(c.is_accepting(n[0][k]) for n in comp) for k, c in enumerate(comps))
        if not ok:
            continue
        targets = sorted((n for n in comp), key=repr)
        pre = _graph.shortest_path(starts, targets, sub)
        if pre is None:
            continue
        start = pre[-1][1] if pre else targets[0]
        loop, node = [], start
        for k, c in enumerate(comps):
            goal = {n for n in comp if c.is_accepting(n[0][k])}
            leg = _graph.shortest_path({node}, goal, inner)
            loop += leg
            node = leg[-1][1] if leg else node
        back = _graph.shortest_path({node}, {start}, inner)
        loop += back
        if not loop:
            loop = _graph.shortest_path({start}, {start}, inner) or []
        if not loop:
            from .weighted import _cycle_through

            loop = _cycle_through(start, inner)
        word = Lasso(tuple(e[3] for e in pre), tuple(e[3] for e in loop))
        s = Lasso(tuple(x[0] for x in word.stem), tuple(x[0] for x in word.loop))
        u = Lasso(tuple(x[1] for x in word.stem), tuple(x[1] for x in word.loop))
        return RobustnessVerdict(Status.NOT_ROBUST, (s, u), distance(query.d_in, s, u),
                                 float("inf"), query.K)
    return None


def accepts_lasso(a, lasso):
    """Büchi acceptance of a lasso by an unweighted automaton."""
    w = WeightedAutomaton(a.alphabet, a.states, a.initial, a.accepting,
                          [(s, x, 0, d) for s, x, d in a.transitions])
    starts, edges, accepting = _lasso_product(w, lasso)
    return bool(_buchi_sccs(starts, edges, accepting))


def product_value(t, query, s, u):
    """Value of the product automaton on ``s (x) u (x) T(s) (x) T(u)``."""
    from .weighted import evaluate

    product = product_automaton(t, query)
    word = convolve([s, u, t(s), t(u)])
    if any(x not in product.alphabet for x in word):
        return float("inf")
    return evaluate(product, word)


__all__ = [
    "DONE",
    "NotSynchronizedError",
    "Role",
    "RobustnessQuery",
    "RobustnessVerdict",
    "Status",
    "SynchronicityVerdict",
    "check_k_robust",
    "check_synchronized",
    "convolve_lassos",
    "lift_track",
    "product_automaton",
    "product_value",
    "synchronized_automaton",
]
