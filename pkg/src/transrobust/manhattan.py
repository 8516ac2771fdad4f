"""Robustness with respect to (generalized) Manhattan distances via cycles.

The transducer is paired with itself.  A transducer is non-robust exactly
when some cycle reading identical letters on both sides makes the two
output streams drift apart: either the cycle outputs are not rotations of
each other, or they are but the output lag on arrival puts them out of
phase.
"""

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from . import _graph
from .fst import PADCHAR, is_functional, run, trim
from .similarity import INF, table_distance, validate_diff_table


@dataclass(frozen=True)
class PairTransducer:
    """Trim self-product; states are ``(phase, p, q)`` with phase both/left/right.

    ``left`` means the right-hand word has ended in an accepting state and
    only the left-hand copy still reads (its partner letter is ``#``);
    ``right`` is symmetric.
    """

    states: tuple
    initial: frozenset
    accepting: frozenset
    transitions: tuple

    def edges(self):
        return [(s, d, 0, (ins, outs)) for s, ins, outs, d in self.transitions]

    @property
    def size(self):
        """States plus the output length carried by each transition."""
        return len(self.states) + sum(
            max(len(u), len(v), 1) for _, _, (u, v), _ in self.transitions)


def pair_transducer(t, table_in=None):
    """Self-product of a functional transducer over input pairs.

    With ``table_in``, transitions whose input pair has infinite penalty
    are dropped, so only pairs at finite input distance survive.
    """
    if not is_functional(t):
        raise ValueError("transducer is not functional")
    t = trim(t)

    def allowed(a, b):
        return table_in is None or table_in(a, b) != INF

    by_src = {}
    for e in t.transitions:
        by_src.setdefault(e.src, []).append(e)
    trans = []
    starts = [("both", p, q) for p in sorted(t.initial, key=repr) for q in sorted(t.initial, key=repr)]
    seen = set(starts)
    queue = deque(starts)
    while queue:
        node = queue.popleft()
        phase, p, q = node
        moves = []
        if phase == "both":
            for e1 in by_src.get(p, []):
                for e2 in by_src.get(q, []):
                    if allowed(e1.letter, e2.letter):
                        moves.append(((e1.letter, e2.letter), (e1.out, e2.out), ("both", e1.dst, e2.dst)))
        if phase in ("both", "left") and q in t.accepting:
            for e1 in by_src.get(p, []):
                if allowed(e1.letter, PADCHAR):
                    moves.append(((e1.letter, PADCHAR), (e1.out, ()), ("left", e1.dst, q)))
        if phase in ("both", "right") and p in t.accepting:
            for e2 in by_src.get(q, []):
                if allowed(PADCHAR, e2.letter):
                    moves.append(((PADCHAR, e2.letter), ((), e2.out), ("right", p, e2.dst)))
        for ins, outs, dst in moves:
            trans.append((node, ins, outs, dst))
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
    accepting = {n for n in seen if n[1] in t.accepting and n[2] in t.accepting}
    edges = [(s, d, 0, None) for s, _, _, d in trans]
    keep = _graph.reachable(starts, edges) & _graph.coreachable(accepting, edges)
    return PairTransducer(
        tuple(sorted(keep, key=repr)),
        frozenset(s for s in starts if s in keep),
        frozenset(accepting & keep),
        tuple(e for e in trans if e[0] in keep and e[3] in keep),
    )


def pair_run(pt, s, u):
    """Output pairs of accepting runs of the pair transducer on ``(s, u)``."""
    s, u = tuple(s), tuple(u)
    n = max(len(s), len(u))
    word = [(s[i] if i < len(s) else PADCHAR, u[i] if i < len(u) else PADCHAR) for i in range(n)]
    configs = {(q, (), ()) for q in pt.initial}
    for letter in word:
        configs = {(d, o1 + a, o2 + b)
                   for q, o1, o2 in configs
                   for src, ins, (a, b), d in pt.transitions if src == q and ins == letter}
    return {(o1, o2) for q, o1, o2 in configs if q in pt.accepting}


def rotation_gaps(u, v):
    """All ``(|x|, |y|)`` with ``u = x.y`` and ``v = y.x``."""
    u, v = tuple(u), tuple(v)
    if len(u) != len(v):
        return set()
    return {(r, len(u) - r) for r in range(len(u) + 1) if u[r:] + u[:r] == v}


@dataclass(frozen=True)
class CycleWitness:
    """A cycle reading equal letters on both sides whose outputs drift apart.

    ``kind`` is ``NOT_ROTATIONS`` or ``BAD_GAP``; for the latter ``lag`` is
    the output-length difference on arrival and ``gaps`` the admissible lags
    modulo the cycle output length.
    """

    kind: str
    prefix: tuple
    cycle: tuple
    suffix: tuple
    lag: int = None
    gaps: frozenset = None
    transducer: object = field(default=None, compare=False, repr=False)
    table_in: object = field(default=None, compare=False, repr=False)
    table_out: object = field(default=None, compare=False, repr=False)

    @property
    def cycle_inputs(self):
        return _concat_pairs(e[3][0] for e in self.cycle)

    @property
    def cycle_outputs(self):
        return _concat_outputs(e[3][1] for e in self.cycle)


def _concat_pairs(pairs):
    left, right = [], []
    for a, b in pairs:
        if a != PADCHAR:
            left.append(a)
        if b != PADCHAR:
            right.append(b)
    return tuple(left), tuple(right)


def _concat_outputs(pairs):
    left, right = (), ()
    for a, b in pairs:
        left, right = left + a, right + b
    return left, right


@dataclass(frozen=True)
class ManhattanVerdict:
    robust: bool
    bound: Fraction = None
    pair_size: int = None
    witness: CycleWitness = None
    k_cyc: int = None
    k_acyc: int = None

    @property
    def k_pair(self):
        """The coarse bound ``|P_T|**2``."""
        return self.pair_size ** 2


def _lag_weight(e):
    u, v = e[3][1]
    return len(v) - len(u)


def _sandwich(table):
    vals = [v for v in table.finite_values if v != 0]
    if not vals:
        return Fraction(1), Fraction(1)
    return min(vals), max(vals)


def check_manhattan_robust(t, table_in, table_out):
    """Decide robustness (existence of some K) for Manhattan-style distances."""
    if not is_functional(t):
        raise ValueError("transducer is not functional")
    for table in (table_in, table_out):
        problems = validate_diff_table(table)
        if problems:
            raise ValueError(f"invalid difference table: {problems[:3]}")
    letters = table_out.letters
    if any(table_out(x, y) == INF for x in letters for y in letters if not x == y == PADCHAR):
        raise ValueError("output tables with infinite penalties are not supported")
    pt = pair_transducer(t, table_in)
    edges = pt.edges()
    both = [e for e in edges if e[0][0] == "both" and e[1][0] == "both"]
    zero = [e for e in both if e[3][0][0] == e[3][0][1]]
    witness = _find_witness(pt, edges, both, zero)
    if witness is not None:
        return ManhattanVerdict(False, pair_size=pt.size, witness=CycleWitness(
            *witness, transducer=t, table_in=table_in, table_out=table_out))
    ell = max((len(e.out) for e in trim(t).transitions), default=0)
    k_cyc = 0
    for comp in _graph.strongly_connected(pt.states, edges):
        inner = [e for e in edges if e[0] in comp and e[1] in comp]
        if any(e[3][0][0] != e[3][0][1] for e in inner):
            # longest simple cycle output, bounded by the component size
            k_cyc = max(k_cyc, len(comp) * ell)
    k_acyc = max(len(pt.states) - 1, 0) * ell
    k_plain = max(k_cyc, k_acyc, 1)
    c_in, _ = _sandwich(table_in)
    _, c_out = _sandwich(table_out)
    bound = Fraction(k_plain) * c_out / c_in
    return ManhattanVerdict(True, bound, pt.size, k_cyc=k_cyc, k_acyc=k_acyc)


def _find_witness(pt, edges, both, zero):
    nodes = {e[0] for e in zero} | {e[1] for e in zero}
    finals = pt.accepting
    # a closed walk whose output lengths differ
    for comp in sorted(_graph.strongly_connected(nodes, zero), key=lambda c: sorted(map(repr, c))):
        inner = [(e[0], e[1], _lag_weight(e), e[3]) for e in zero
                 if e[0] in comp and e[1] in comp]
        for sign in (1, -1):
            signed = [(u, v, sign * w, lab) for u, v, w, lab in inner]
            found = _graph.min_mean_cycle(comp, signed)
            if found is not None and found[0] < 0:
                cycle = tuple((u, v, 0, lab) for u, v, _, lab in found[1])
                head = cycle[0][0]
                prefix = _graph.shortest_path(pt.initial, {head}, both)
                suffix = _graph.shortest_path({head}, finals, edges)
                return "NOT_ROTATIONS", tuple(prefix), cycle, tuple(suffix)
    for cyc in _graph.simple_cycles(nodes, zero, limit=50000):
        cycle = tuple(cyc)
        v, w = _concat_outputs(e[3][1] for e in cycle)
        if not v:
            continue
        head = cycle[0][0]
        gaps = rotation_gaps(v, w)
        if not gaps:
            prefix = _graph.shortest_path(pt.initial, {head}, both)
            suffix = _graph.shortest_path({head}, finals, edges)
            return "NOT_ROTATIONS", tuple(prefix), cycle, tuple(suffix)
        period = len(v)
        admissible = frozenset(r % period for r, _ in gaps)
        found = _lag_residue_path(pt, both, head, period, admissible)
        if found is not None:
            prefix, lag = found
            suffix = _graph.shortest_path({head}, finals, edges)
            return "BAD_GAP", tuple(prefix), cycle, tuple(suffix), lag, admissible
    return None


def _lag_residue_path(pt, both, target, period, admissible):
    """Shortest prefix reaching ``target`` with output lag outside ``admissible`` (mod period)."""
    out = _graph.successors(both)
    starts = [(q, 0) for q in sorted(pt.initial, key=repr)]
    parent = {s: None for s in starts}
    lag = {s: 0 for s in starts}
    queue = deque(starts)
    while queue:
        node = queue.popleft()
        q, res = node
        if q == target and res not in admissible:
            path, cur = [], node
            while parent[cur] is not None:
                prev, e = parent[cur]
                path.append(e)
                cur = prev
            return path[::-1], lag[node]
        for e in sorted(out[q], key=_graph._edge_key):
            step = _lag_weight(e)
            nxt = (e[1], (res + step) % period)
            if nxt not in parent:
                parent[nxt] = (node, e)
                lag[nxt] = lag[node] + step
                queue.append(nxt)
    return None


def _pumped_words(w, n):
    pre = _concat_pairs(e[3][0] for e in w.prefix)
    cyc = _concat_pairs(e[3][0] for e in w.cycle)
    post = _concat_pairs(e[3][0] for e in w.suffix)
    s = pre[0] + cyc[0] * n + post[0]
    u = pre[1] + cyc[1] * n + post[1]
    return s, u


def pump_witness(w, K, limit=1 << 14):
    """Input pair ``prefix . cycle^n . suffix`` violating K-robustness, re-checked exactly."""
    K = Fraction(K)
    t = w.transducer
    n = 1
    while n <= limit:
        s, u = _pumped_words(w, n)
        s_out, u_out = t(s), t(u)
        if s_out is None or u_out is None:
            raise AssertionError("pumped words left the domain")
        d_in = table_distance(w.table_in, s, u)
        d_out = table_distance(w.table_out, s_out, u_out)
        if d_in != INF and d_out > K * d_in:
            return s, u
        n *= 2
    raise AssertionError("pumping did not produce a violation")


__all__ = [
    "CycleWitness",
    "ManhattanVerdict",
    "PairTransducer",
    "check_manhattan_robust",
    "pair_run",
    "pair_transducer",
    "pump_witness",
    "rotation_gaps",
]
