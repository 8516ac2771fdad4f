"""Finite-state transducers over finite words.

Letters are arbitrary hashable symbols (usually short strings, sometimes
tuples for product alphabets).  Words are tuples of letters; ``"abc"`` is
accepted wherever a word is expected and means ``("a", "b", "c")``.
"""

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

PADCHAR = "#"
"""End-of-string filler used inside convolution letters."""

PAD = "PAD"
"""Explicit alignment letter of padded machines."""

RESERVED = frozenset({PADCHAR, PAD})


class AlphabetError(ValueError):
    """A word uses a letter outside the declared alphabet."""


def as_word(w):
    return tuple(w)


def words_upto(alphabet, max_len):
    """All words over ``alphabet`` of length <= max_len, length-lexicographic."""
    letters = sorted(alphabet, key=repr)
    for n in range(max_len + 1):
        for w in product(letters, repeat=n):
            yield w


@dataclass(frozen=True)
class Transition:
    src: object
    letter: object
    out: tuple
    dst: object


@dataclass(frozen=True)
class Transducer:
    """FST ``(Sigma, Gamma, Q, Q0, E, F)`` with final-state acceptance."""

    input_alphabet: frozenset
    output_alphabet: frozenset
    states: tuple
    initial: frozenset
    accepting: frozenset
    transitions: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "input_alphabet", frozenset(self.input_alphabet))
        object.__setattr__(self, "output_alphabet", frozenset(self.output_alphabet))
        object.__setattr__(self, "states", tuple(dict.fromkeys(self.states)))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        trans = tuple(
            e if isinstance(e, Transition) else Transition(e[0], e[1], tuple(e[2]), e[3])
            for e in self.transitions
        )
        object.__setattr__(self, "transitions", tuple(dict.fromkeys(trans)))
        states = set(self.states)
        if states and not self.initial:
            raise ValueError("a non-empty transducer needs an initial state")
        if not self.initial <= states or not self.accepting <= states:
            raise ValueError("initial and accepting states must be declared states")
        for e in self.transitions:
            if e.src not in states or e.dst not in states:
                raise ValueError(f"transition {e} uses an undeclared state")
            if e.letter not in self.input_alphabet:
                raise AlphabetError(f"transition {e} reads a letter outside the input alphabet")
            for x in e.out:
                if x not in self.output_alphabet:
                    raise AlphabetError(f"transition {e} writes {x!r} outside the output alphabet")

    @cached_property
    def _index(self):
        idx = defaultdict(list)
        for e in self.transitions:
            idx[(e.src, e.letter)].append(e)
        return idx

    def successors(self, state, letter):
        return self._index.get((state, letter), [])

    @cached_property
    def max_output(self):
        return max((len(e.out) for e in self.transitions), default=0)

    def check_word(self, s):
        s = as_word(s)
        for x in s:
            if x not in self.input_alphabet:
                raise AlphabetError(f"letter {x!r} is not in the input alphabet")
        return s

    def __call__(self, s):
        """Output of a functional transducer on ``s`` or ``None`` outside the domain."""
        outs = run(self, s).outputs
        if len(outs) > 1:
            raise ValueError(f"transducer is not functional on {s!r}")
        return next(iter(outs), None)


def empty_transducer(input_alphabet=(), output_alphabet=()):
    return Transducer(input_alphabet, output_alphabet, (), (), (), ())


@dataclass(frozen=True)
class RunVerdict:
    accepted: bool
    outputs: frozenset


def run(t, s):
    """All outputs of accepting runs of ``t`` on the finite word ``s``."""
    s = t.check_word(s)
    configs = {(q, ()) for q in t.initial}
    for x in s:
        nxt = set()
        for q, out in configs:
            for e in t.successors(q, x):
                nxt.add((e.dst, out + e.out))
        configs = nxt
        if not configs:
            break
    outputs = frozenset(out for q, out in configs if q in t.accepting)
    return RunVerdict(bool(outputs), outputs)


@dataclass(frozen=True)
class Classification:
    functional: bool
    deterministic: bool
    letter_to_letter: bool
    mealy: bool


def is_deterministic(t):
    return len(t.initial) <= 1 and all(len(v) <= 1 for v in t._index.values())


def is_letter_to_letter(t):
    return all(len(e.out) == 1 for e in t.transitions)


def is_mealy(t):
    return is_deterministic(t) and is_letter_to_letter(t) and t.accepting == frozenset(t.states)


def classify(t):
    return Classification(
        functional=is_functional(t),
        deterministic=is_deterministic(t),
        letter_to_letter=is_letter_to_letter(t),
        mealy=is_mealy(t),
    )


def _graph_edges(t):
    return [(e.src, e.dst, 0, e) for e in t.transitions]


def useful_states(t):
    from ._graph import coreachable, reachable

    edges = _graph_edges(t)
    return reachable(t.initial, edges) & coreachable(t.accepting, edges)


def trim(t):
    """Restrict to states reachable from an initial state and co-reachable to acceptance."""
    keep = useful_states(t)
    if not keep:
        return empty_transducer(t.input_alphabet, t.output_alphabet)
    return Transducer(
        t.input_alphabet,
        t.output_alphabet,
        [q for q in t.states if q in keep],
        t.initial & keep,
        t.accepting & keep,
        [e for e in t.transitions if e.src in keep and e.dst in keep],
    )


def _delay_step(delay, u, v):
    """Advance the unmatched output suffix; ``None`` if outputs diverge.

    ``delay`` is ``(side, word)``: side 0 means the first run is ahead by
    ``word``, side 1 the second run.
    """
    side, rest = delay
    left = (rest if side == 0 else ()) + u
    right = (rest if side == 1 else ()) + v
    n = min(len(left), len(right))
    if left[:n] != right[:n]:
        return None
    if len(left) > n:
        return (0, left[n:])
    if len(right) > n:
        return (1, right[n:])
    return (0, ())


def square(t):
    """Self-product on equal inputs: edges ``((p, q), (p', q'), 0, (e1, e2))``."""
    edges = []
    by_letter = defaultdict(list)
    for e in t.transitions:
        by_letter[e.letter].append(e)
    for group in by_letter.values():
        for e1 in group:
            for e2 in group:
                edges.append(((e1.src, e2.src), (e1.dst, e2.dst), 0, (e1, e2)))
    return edges


def functionality_witness(t):
    """``None`` if ``t`` is functional, otherwise the offending pair state."""
    from ._graph import coreachable, reachable

    t = trim(t)
    edges = square(t)
    starts = {(p, q) for p in t.initial for q in t.initial}
    finals = {(p, q) for p in t.accepting for q in t.accepting}
    live = reachable(starts, edges) & coreachable(finals, edges)
    out = defaultdict(list)
    for e in edges:
        if e[0] in live and e[1] in live:
            out[e[0]].append(e)
    delay = {s: (0, ()) for s in starts if s in live}
    queue = deque(sorted(delay, key=repr))
    while queue:
        node = queue.popleft()
        if node in finals and delay[node][1]:
            return node
        for src, dst, _, (e1, e2) in out[node]:
            nxt = _delay_step(delay[node], e1.out, e2.out)
            if nxt is None:
                return dst
            if dst not in delay:
                delay[dst] = nxt
                queue.append(dst)
            elif delay[dst] != nxt:
                return dst
    return None


def is_functional(t):
    return functionality_witness(t) is None


def is_unambiguous(t):
    """At most one accepting run per input word."""
    from ._graph import coreachable, reachable

    t = trim(t)
    if len(t.initial) > 1:
        return False
    edges = square(t)
    starts = {(p, p) for p in t.initial}
    finals = {(p, q) for p in t.accepting for q in t.accepting}
    live = reachable(starts, edges) & coreachable(finals, edges)
    return all(e1 == e2 for src, dst, _, (e1, e2) in edges if src in live and dst in live)


def unambiguous(t):
    """Equivalent transducer keeping only the lexicographically least run.

    States are ``(q, D)`` where ``D`` holds the states reached by runs that
    are lexicographically smaller on the prefix read so far; a run is kept
    iff it accepts and no smaller run does.  For functional ``t`` the
    transduction is unchanged.
    """
    t = trim(t)
    if is_unambiguous(t):
        return t
    order = {e: i for i, e in enumerate(t.transitions)}
    init = sorted(t.initial, key=repr)
    starts = [(q, frozenset(init[:i])) for i, q in enumerate(init)]
    states, trans, seen = [], [], set(starts)
    queue = deque(starts)
    while queue:
        q, smaller = queue.popleft()
        states.append((q, smaller))
        for x in sorted(t.input_alphabet, key=repr):
            post = {e.dst for p in smaller for e in t.successors(p, x)}
            for e in t.successors(q, x):
                below = {f.dst for f in t.successors(q, x) if order[f] < order[e]}
                nxt = (e.dst, frozenset(post | below))
                trans.append(((q, smaller), x, e.out, nxt))
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    accepting = [s for s in states if s[0] in t.accepting and not (s[1] & t.accepting)]
    return trim(Transducer(t.input_alphabet, t.output_alphabet, states, starts, accepting, trans))


def _read_through(t, state, word):
    """All ``(output, end_state)`` for paths of ``t`` from ``state`` reading ``word``."""
    configs = {((), state)}
    for x in word:
        configs = {(out + e.out, e.dst) for out, q in configs for e in t.successors(q, x)}
    return configs


def compose(t1, t2):
    """Transducer for ``t2`` applied after ``t1``."""
    if not t1.output_alphabet <= t2.input_alphabet:
        raise AlphabetError("output alphabet of the first transducer must feed the second")
    states = [(p, q) for p in t1.states for q in t2.states]
    trans = []
    for e in t1.transitions:
        for q in t2.states:
            for out, q2 in _read_through(t2, q, e.out):
                trans.append(((e.src, q), e.letter, out, (e.dst, q2)))
    return Transducer(
        t1.input_alphabet,
        t2.output_alphabet,
        states,
        [(p, q) for p in t1.initial for q in t2.initial],
        [(p, q) for p in t1.accepting for q in t2.accepting],
        trans,
    )


def identity_transducer(alphabet):
    alphabet = sorted(alphabet, key=repr)
    return Transducer(alphabet, alphabet, ["id"], ["id"], ["id"],
                      [("id", x, (x,), "id") for x in alphabet])


@dataclass(frozen=True)
class Automaton:
    """Nondeterministic finite automaton with final-state acceptance."""

    alphabet: frozenset
    states: tuple
    initial: frozenset
    accepting: frozenset
    transitions: tuple

    def __post_init__(self):
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "states", tuple(dict.fromkeys(self.states)))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "transitions", tuple(dict.fromkeys(tuple(e) for e in self.transitions)))

    @cached_property
    def _index(self):
        idx = defaultdict(list)
        for src, x, dst in self.transitions:
            idx[(src, x)].append(dst)
        return idx

    def accepts(self, w):
        current = set(self.initial)
        for x in w:
            current = {d for q in current for d in self._index.get((q, x), ())}
            if not current:
                return False
        return bool(current & self.accepting)


def domain_automaton(t):
    return Automaton(
        t.input_alphabet,
        t.states,
        t.initial,
        t.accepting,
        [(e.src, e.letter, e.dst) for e in t.transitions],
    )


def renumber(t, prefix="q"):
    """Same transducer with states renamed ``q0, q1, ...`` in declaration order."""
    name = {q: f"{prefix}{i}" for i, q in enumerate(t.states)}
    return Transducer(
        t.input_alphabet,
        t.output_alphabet,
        [name[q] for q in t.states],
        [name[q] for q in t.initial],
        [name[q] for q in t.accepting],
        [(name[e.src], e.letter, e.out, name[e.dst]) for e in t.transitions],
    )
