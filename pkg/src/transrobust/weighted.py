"""Weighted automata with Sum, discounted-sum and limit-average values.

All arithmetic is over ``Fraction``.  The value of a word is the infimum
over accepting runs; ``math.inf`` stands for "no accepting run" and
``-math.inf`` for an unbounded-below infimum.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

from . import _graph
from .fst import PADCHAR, words_upto

INFINITY = math.inf
NEG_INFINITY = -math.inf


class ValueFunctionError(ValueError):
    """The value function cannot be applied to this kind of word."""


@dataclass(frozen=True)
class ValueFunction:
    kind: str
    discount: Fraction = None
    infinite: bool = False

    def __post_init__(self):
        if self.kind not in ("sum", "disc", "limavg"):
            raise ValueError(f"unknown value function {self.kind!r}")
        if self.kind == "disc":
            d = Fraction(self.discount)
            if not 0 < d < 1:
                raise ValueError("discount factor must lie strictly between 0 and 1")
            object.__setattr__(self, "discount", d)
        elif self.discount is not None:
            raise ValueError("only the discounted sum takes a discount factor")
        if self.kind == "limavg":
            object.__setattr__(self, "infinite", True)
        if self.kind == "sum" and self.infinite:
            raise ValueError("Sum is only defined on finite words")

    @property
    def is_linear(self):
        return self.kind in ("sum", "disc")

    def __str__(self):
        if self.kind == "disc":
            return f"{'disc-inf' if self.infinite else 'disc'} {self.discount}"
        return self.kind


SUM = ValueFunction("sum")
LIMAVG = ValueFunction("limavg")


def disc(delta, infinite=False):
    return ValueFunction("disc", Fraction(delta), infinite)


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic word ``stem . loop^omega``."""

    stem: tuple
    loop: tuple

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(self.stem))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop:
            raise ValueError("lasso loop must be non-empty")

    def prefix(self, n):
        word = list(self.stem)
        while len(word) < n:
            word.extend(self.loop)
        return tuple(word[:n])


def convolution_alphabet(alphabets):
    """Letters of ``A1 (x) ... (x) An``: tuples over ``Ai + {#}``, not all ``#``."""
    tracks = [sorted(a, key=repr) + [PADCHAR] for a in alphabets]
    return frozenset(x for x in product(*tracks) if any(c != PADCHAR for c in x))


@dataclass(frozen=True)
class WeightedAutomaton:
    """Weighted automaton; ``tracks`` records per-track alphabets of convolution inputs."""

    alphabet: frozenset
    states: tuple
    initial: frozenset
    accepting: frozenset
    transitions: tuple
    value_fn: ValueFunction = SUM
    tracks: tuple = field(default=None)

    def __post_init__(self):
        if self.tracks is not None:
            object.__setattr__(self, "tracks", tuple(frozenset(a) for a in self.tracks))
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "states", tuple(dict.fromkeys(self.states)))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        trans = tuple(dict.fromkeys((s, x, Fraction(w), d) for s, x, w, d in self.transitions))
        object.__setattr__(self, "transitions", trans)
        states = set(self.states)
        if states and not self.initial:
            raise ValueError("a non-empty automaton needs an initial state")
        if not self.initial <= states or not self.accepting <= states:
            raise ValueError("initial and accepting states must be declared states")
        for s, x, w, d in trans:
            if s not in states or d not in states:
                raise ValueError(f"transition {(s, x, w, d)} uses an undeclared state")
            if x not in self.alphabet:
                raise ValueError(f"transition letter {x!r} is outside the alphabet")

    @classmethod
    def over_tracks(cls, track_alphabets, states, initial, accepting, transitions, value_fn=SUM):
        return cls(convolution_alphabet(track_alphabets), states, initial, accepting,
                   transitions, value_fn, tuple(track_alphabets))

    @cached_property
    def _index(self):
        idx = defaultdict(list)
        for e in self.transitions:
            idx[(e[0], e[1])].append(e)
        return idx

    def successors(self, state, letter):
        return self._index.get((state, letter), [])

    def edges(self):
        """Transitions as graph edges ``(src, dst, weight, letter)``."""
        return [(s, d, w, x) for s, x, w, d in self.transitions]

    def with_value_fn(self, value_fn):
        return WeightedAutomaton(self.alphabet, self.states, self.initial, self.accepting,
                                 self.transitions, value_fn, self.tracks)


def scale_weights(a, c):
    c = Fraction(c)
    return WeightedAutomaton(a.alphabet, a.states, a.initial, a.accepting,
                             [(s, x, c * w, d) for s, x, w, d in a.transitions],
                             a.value_fn, a.tracks)


def _weight_factor(value_fn, i):
    # coefficient of the i-th weight (1-based)
    return value_fn.discount ** i if value_fn.kind == "disc" else 1


def evaluate(a, w):
    """Infimum over accepting runs of ``a`` on a finite word or a ``Lasso``."""
    vf = a.value_fn
    if isinstance(w, Lasso):
        if vf.kind == "sum" or (vf.kind == "disc" and not vf.infinite):
            raise ValueFunctionError(f"{vf} cannot be used with infinite words")
        return _evaluate_lasso(a, w)
    if vf.infinite:
        raise ValueFunctionError(f"{vf} cannot be used with finite sequences")
    best = {q: Fraction(0) for q in a.initial}
    for i, x in enumerate(w, start=1):
        if x not in a.alphabet:
            raise ValueError(f"letter {x!r} is outside the alphabet")
        k = _weight_factor(vf, i)
        nxt = {}
        for q, val in best.items():
            for _, _, wt, d in a.successors(q, x):
                cand = val + k * wt
                if d not in nxt or cand < nxt[d]:
                    nxt[d] = cand
        best = nxt
        if not best:
            return INFINITY
    finals = [v for q, v in best.items() if q in a.accepting]
    return min(finals) if finals else INFINITY


def _lasso_product(a, lasso):
    """Product of ``a`` with the positions of a lasso word; edges carry the letter."""
    word = lasso.stem + lasso.loop
    n, loop_start = len(word), len(lasso.stem)
    edges = []
    for q in a.states:
        for pos, x in enumerate(word):
            nxt = pos + 1 if pos + 1 < n else loop_start
            for _, _, wt, d in a.successors(q, x):
                edges.append(((q, pos), (d, nxt), wt, x))
    starts = {(q, 0) for q in a.initial}
    accepting = {(q, p) for q in a.accepting for p in range(n)}
    return starts, edges, accepting


def _buchi_sccs(starts, edges, accepting):
    reach = _graph.reachable(starts, edges)
    sub = [e for e in edges if e[0] in reach]
    return [c for c in _graph.strongly_connected(reach, sub) if c & accepting]


def _buchi_live(starts, edges, accepting):
    """Reachable nodes from which some accepting non-trivial SCC is reachable."""
    good = set().union(*_buchi_sccs(starts, edges, accepting))
    reach = _graph.reachable(starts, edges)
    sub = [e for e in edges if e[0] in reach and e[1] in reach]
    return _graph.coreachable(good, sub) & reach if good else set()


def _best_buchi_cycle(starts, edges, accepting):
    """Minimum cycle mean over reachable SCCs that contain an accepting node."""
    best = None
    for comp in _buchi_sccs(starts, edges, accepting):
        inner = [e for e in edges if e[0] in comp and e[1] in comp]
        mean, cycle = _graph.min_mean_cycle(comp, inner)
        if best is None or mean < best[0]:
            best = (mean, cycle, comp, inner)
    return best


def _evaluate_lasso(a, lasso):
    for x in lasso.stem + lasso.loop:
        if x not in a.alphabet:
            raise ValueError(f"letter {x!r} is outside the alphabet")
    starts, edges, accepting = _lasso_product(a, lasso)
    if a.value_fn.kind == "limavg":
        best = _best_buchi_cycle(starts, edges, accepting)
        return INFINITY if best is None else best[0]
    live = _buchi_live(starts, edges, accepting)
    if not live:
        return INFINITY
    sub = [e for e in edges if e[0] in live and e[1] in live]
    values, _ = discounted_values(live, sub, a.value_fn.discount, stop=())
    return min(values[s] for s in starts if s in live)


def discounted_values(nodes, edges, delta, stop):
    """Optimal discounted values by policy iteration.

    ``V(v) = min(0 if v in stop, min over edges delta * (w + V(dst)))``.
    Every node must have a stop option or an outgoing edge inside ``nodes``.
    Returns ``(values, policy)``; ``policy[v]`` is an edge or ``None`` (stop).
    """
    delta = Fraction(delta)
    stop = set(stop)
    out = defaultdict(list)
    for e in edges:
        out[e[0]].append(e)
    for v in out:
        out[v].sort(key=_graph._edge_key)
    policy = {}
    for v in nodes:
        if v in stop:
            policy[v] = None
        elif out[v]:
            policy[v] = out[v][0]
        else:
            raise ValueError(f"node {v!r} has neither a stop option nor a successor")
    while True:
        values = _policy_values(policy, delta)
        changed = False
        for v in nodes:
            cur = values[v]
            best, choice = cur, policy[v]
            if v in stop and 0 < best:
                best, choice = Fraction(0), None
            for e in out[v]:
                cand = delta * (e[2] + values[e[1]])
                if cand < best:
                    best, choice = cand, e
            if choice is not policy[v] and best < cur:
                policy[v] = choice
                changed = True
        if not changed:
            return values, policy


def _policy_values(policy, delta):
    values = {}
    for start in policy:
        if start in values:
            continue
        path, index = [], {}
        v = start
        while v not in values and policy[v] is not None and v not in index:
            index[v] = len(path)
            path.append(policy[v])
            v = policy[v][1]
        if v in index:
            # closed a cycle: V(v) = sum_j delta^(j+1) w_j + delta^L V(v)
            cycle = path[index[v]:]
            total, k = Fraction(0), Fraction(1)
            for e in cycle:
                k *= delta
                total += k * e[2]
            values[v] = total / (1 - k)
            path = path[: index[v]]
        elif v not in values:
            values[v] = Fraction(0)
        for e in reversed(path):
            values[e[0]] = delta * (e[2] + values[e[1]])
    return values


def _trimmed(a):
    edges = a.edges()
    live = _graph.reachable(a.initial, edges) & _graph.coreachable(a.accepting, edges)
    return live, [e for e in edges if e[0] in live and e[1] in live]


def is_functional_wa(a, max_len=6):
    """All accepting runs on each word agree in value.

    Exact for deterministic automata, Sum and finite-word discounting
    (difference self-product); for infinite words this is a bounded check
    over lassos built from words up to ``max_len``.
    """
    if _is_deterministic(a):
        return True
    if a.value_fn.kind == "sum":
        return _sum_functionality_conflict(a) is None
    if not a.value_fn.infinite:
        return _disc_functionality_conflict(a) is None
    return _bounded_functionality_conflict(a, max_len) is None


def _is_deterministic(a):
    return len(a.initial) <= 1 and all(len(v) <= 1 for v in a._index.values())


def _difference_square(a):
    edges = []
    by_letter = defaultdict(list)
    for e in a.transitions:
        by_letter[e[1]].append(e)
    for group in by_letter.values():
        for s1, x, w1, d1 in group:
            for s2, _, w2, d2 in group:
                edges.append(((s1, s2), (d1, d2), w1 - w2, x))
    starts = {(p, q) for p in a.initial for q in a.initial}
    finals = {(p, q) for p in a.accepting for q in a.accepting}
    live = _graph.reachable(starts, edges) & _graph.coreachable(finals, edges)
    edges = [e for e in edges if e[0] in live and e[1] in live]
    return starts & live, finals & live, edges


def _sum_functionality_conflict(a):
    starts, finals, edges = _difference_square(a)
    phi, conflict = _graph.potentials({s: 0 for s in starts}, edges)
    if conflict is not None:
        return conflict[1]
    for node in finals:
        if phi[node] != 0:
            return node
    return None


def _disc_functionality_conflict(a):
    """Like the Sum case with the difference rescaled: ``D' = D / delta + (w1 - w2)``.

    A common suffix maps both differences through the same injective affine
    map, so two values at one live pair state already separate the runs.
    """
    delta = a.value_fn.discount
    starts, finals, edges = _difference_square(a)
    out = defaultdict(list)
    for e in edges:
        out[e[0]].append(e)
    diff = {s: Fraction(0) for s in starts}
    queue = sorted(diff, key=repr)
    while queue:
        u = queue.pop()
        for _, v, w, _ in out[u]:
            val = diff[u] / delta + w
            if v not in diff:
                diff[v] = val
                queue.append(v)
            elif diff[v] != val:
                return v
    for node in finals:
        if diff[node] != 0:
            return node
    return None


def _bounded_functionality_conflict(a, max_len):
    if a.value_fn.infinite:
        from .oracle import lassos_upto

        words = lassos_upto(a.alphabet, max(1, max_len // 2))
    else:
        words = words_upto(a.alphabet, max_len)
    for w in words:
        vals = run_values(a, w)
        if len(vals) > 1:
            return w
    return None


def run_values(a, w):
    """Set of values of all accepting runs on a finite word (or lasso via its product)."""
    if isinstance(w, Lasso):
        from .oracle import lasso_run_values

        return lasso_run_values(a, w)
    vf = a.value_fn
    configs = [(q, Fraction(0)) for q in a.initial]
    for i, x in enumerate(w, start=1):
        k = _weight_factor(vf, i)
        configs = [(d, v + k * wt) for q, v in configs for _, _, wt, d in a.successors(q, x)]
    return {v for q, v in configs if q in a.accepting}


@dataclass(frozen=True)
class Emptiness:
    """Result of ``emptiness_below``.

    ``infimum`` is the exact infimum of word values (``-inf`` if unbounded),
    ``witness`` a word or lasso whose value ``witness_value`` is below the
    threshold, and ``attained`` tells whether the infimum is realised by a
    single word.
    """

    empty: bool
    infimum: object
    witness: object = None
    witness_value: object = None
    attained: bool = True


def emptiness_below(a, threshold):
    """Is there an accepted word of value strictly below ``threshold``?"""
    if isinstance(threshold, float) and not math.isfinite(threshold):
        raise ValueError("threshold must be a finite rational")
    lam = Fraction(threshold)
    vf = a.value_fn
    if vf.kind == "sum":
        return _sum_emptiness(a, lam)
    if vf.kind == "disc" and not vf.infinite:
        return _disc_finite_emptiness(a, lam)
    if vf.kind == "disc":
        return _disc_infinite_emptiness(a, lam)
    return _limavg_emptiness(a, lam)


def _letters(path):
    return tuple(e[3] for e in path)


def _pump(build, evaluator, lam, start=1, limit=1 << 16):
    """Smallest power of two ``n >= start`` with ``evaluator(build(n)) < lam``."""
    n = start
    while n <= limit:
        word = build(n)
        val = evaluator(word)
        if val < lam:
            return word, val
        n *= 2
    raise AssertionError("pumping did not reach the threshold")


def _sum_emptiness(a, lam):
    live, edges = _trimmed(a)
    if not live:
        return Emptiness(True, INFINITY)
    found = _graph.min_mean_cycle(live, edges)
    if found is not None and found[0] < 0:
        cycle = found[1]
        head = cycle[0][0]
        pre = _graph.shortest_path(a.initial & live, {head}, edges)
        post = _graph.shortest_path({head}, a.accepting & live, edges)
        word, val = _pump(
            lambda n: _letters(pre) + _letters(cycle) * n + _letters(post),
            lambda w: evaluate(a, w), lam)
        return Emptiness(False, NEG_INFINITY, word, val, attained=False)
    dist, parent = {}, {}
    for q in a.initial & live:
        dist[q], parent[q] = Fraction(0), None
    for _ in range(len(live)):
        changed = False
        for e in edges:
            if e[0] in dist:
                cand = dist[e[0]] + e[2]
                if e[1] not in dist or cand < dist[e[1]]:
                    dist[e[1]], parent[e[1]] = cand, e
                    changed = True
        if not changed:
            break
    target = min((q for q in a.accepting & live), key=lambda q: (dist[q], repr(q)))
    inf = dist[target]
    path, v = [], target
    while parent[v] is not None:
        path.append(parent[v])
        v = parent[v][0]
    word = _letters(path[::-1])
    if inf < lam:
        return Emptiness(False, inf, word, evaluate(a, word))
    return Emptiness(True, inf, word, inf)


def _follow(policy, start):
    """Walk a policy from ``start``; returns ``(path, cycle)`` (cycle may be empty)."""
    path, index, v = [], {}, start
    while policy.get(v) is not None and v not in index:
        index[v] = len(path)
        path.append(policy[v])
        v = policy[v][1]
    if v in index:
        return path[: index[v]], path[index[v]:]
    return path, []


def _disc_finite_emptiness(a, lam):
    live, edges = _trimmed(a)
    if not live:
        return Emptiness(True, INFINITY)
    values, policy = discounted_values(live, edges, a.value_fn.discount, a.accepting & live)
    start = min(a.initial & live, key=lambda q: (values[q], repr(q)))
    inf = values[start]
    pre, cycle = _follow(policy, start)
    if not cycle:
        word = _letters(pre)
        if inf < lam:
            return Emptiness(False, inf, word, evaluate(a, word))
        return Emptiness(True, inf, word, inf)
    if inf >= lam:
        return Emptiness(True, inf, attained=False)
    head = cycle[0][0]
    post = _graph.shortest_path({head}, a.accepting & live, edges)
    word, val = _pump(
        lambda n: _letters(pre) + _letters(cycle) * n + _letters(post),
        lambda w: evaluate(a, w), lam)
    return Emptiness(False, inf, word, val, attained=False)


def _disc_infinite_emptiness(a, lam):
    edges = a.edges()
    live = _buchi_live(a.initial, edges, a.accepting)
    if not live:
        return Emptiness(True, INFINITY)
    sub = [e for e in edges if e[0] in live and e[1] in live]
    values, policy = discounted_values(live, sub, a.value_fn.discount, stop=())
    start = min(a.initial & live, key=lambda q: (values[q], repr(q)))
    inf = values[start]
    pre, cycle = _follow(policy, start)
    attained = any(e[0] in a.accepting for e in cycle)
    if inf >= lam:
        return Emptiness(True, inf, attained=attained)
    if attained:
        word = Lasso(_letters(pre), _letters(cycle))
        return Emptiness(False, inf, word, evaluate(a, word))
    # detour from the optimal cycle into an accepting SCC, taken later and later
    head = cycle[0][0]
    comps = _buchi_sccs(a.initial, sub, a.accepting)
    targets = set().union(*comps) & a.accepting
    bridge = _graph.shortest_path({head}, targets, sub)
    f = bridge[-1][1] if bridge else head
    comp = next(c for c in comps if f in c)
    inner = [e for e in sub if e[0] in comp and e[1] in comp]
    loop = _cycle_through(f, inner)

    def build(n):
        return Lasso(_letters(pre) + _letters(cycle) * n + _letters(bridge), _letters(loop))

    word, val = _pump(build, lambda w: evaluate(a, w), lam)
    return Emptiness(False, inf, word, val, attained=False)


def _cycle_through(node, edges):
    """Some cycle (edge list) through ``node`` using ``edges``."""
    out = defaultdict(list)
    for e in edges:
        out[e[0]].append(e)
    for e in sorted(out[node], key=_graph._edge_key):
        rest = _graph.shortest_path({e[1]}, {node}, edges)
        if rest is not None:
            return [e] + rest
    raise ValueError(f"no cycle through {node!r}")


def _limavg_emptiness(a, lam):
    edges = a.edges()
    best = _best_buchi_cycle(a.initial, edges, a.accepting)
    if best is None:
        return Emptiness(True, INFINITY)
    mean, cycle, comp, inner = best
    if mean >= lam:
        return Emptiness(True, mean)
    head = cycle[0][0]
    pre = _graph.shortest_path(a.initial, {head}, edges)
    if any(e[0] in a.accepting for e in cycle):
        word = Lasso(_letters(pre), _letters(cycle))
        return Emptiness(False, mean, word, evaluate(a, word))
    to_acc = _graph.shortest_path({head}, comp & a.accepting, inner)
    back = _graph.shortest_path({to_acc[-1][1]}, {head}, inner)
    detour = _letters(to_acc) + _letters(back)

    def build(n):
        return Lasso(_letters(pre), _letters(cycle) * n + detour)

    word, val = _pump(build, lambda w: evaluate(a, w), lam)
    return Emptiness(False, mean, word, val, attained=False)


def min_mean_cycle(a):
    """Minimum cycle mean over reachable SCCs containing an accepting state.

    Returns ``None`` or ``(mean, cycle)`` with ``cycle`` a list of
    ``(src, letter, weight, dst)`` transitions.
    """
    best = _best_buchi_cycle(a.initial, a.edges(), a.accepting)
    if best is None:
        return None
    mean, cycle, _, _ = best
    return mean, [(s, x, w, d) for s, d, w, x in cycle]
