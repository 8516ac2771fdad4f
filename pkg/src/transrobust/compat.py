"""Pad-expanded words, the canonical letter-to-letter transducer and isometry reductions.

A transducer that is not synchronized can still be checked when it can be
rewritten into a letter-to-letter one over alphabets extended by the pad
letter ``PAD``, provided the similarity functions can be lifted to padded
words without changing their values.  Whether that lifting is faithful is
undecidable in general, so the checks here are bounded.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product

from .fst import (
    PAD,
    PADCHAR,
    AlphabetError,
    Transducer,
    identity_transducer,
    is_functional,
    is_letter_to_letter,
    is_mealy,
    trim,
    unambiguous,
    words_upto,
)
from .similarity import INF, SimilarityFunction
from .sync import RobustnessQuery, Status, check_k_robust
from .weighted import ValueFunctionError, WeightedAutomaton, _weight_factor, is_functional_wa


def depad(w):
    return tuple(x for x in w if x != PAD)


def is_pad_expansion(padded, base):
    """True iff deleting every ``PAD`` from ``padded`` leaves ``base``."""
    return depad(padded) == tuple(base)


def _require_pad_free(t):
    if PAD in t.input_alphabet or PAD in t.output_alphabet:
        raise AlphabetError("the pad letter is reserved")


def canonical_transducer(t):
    """Letter-to-letter rewriting of a functional transducer.

    Long outputs are spread over a chain of fresh states that read ``PAD``;
    empty outputs become a single ``PAD``.  The transducer is made
    unambiguous first, otherwise two runs splitting the same output
    differently could emit different padded words.
    """
    _require_pad_free(t)
    if not is_functional(t):
        raise ValueError("transducer is not functional")
    t = unambiguous(trim(t))
    states = list(t.states)
    trans = []
    for e in t.transitions:
        out = e.out or (PAD,)
        if len(out) == 1:
            trans.append((e.src, e.letter, out, e.dst))
            continue
        mids = [("mid", e.src, e.letter, e.out, e.dst, i) for i in range(1, len(out))]
        states.extend(mids)
        chain = [e.src] + mids + [e.dst]
        letters = [e.letter] + [PAD] * (len(out) - 1)
        for i, (x, y) in enumerate(zip(letters, out)):
            trans.append((chain[i], x, (y,), chain[i + 1]))
    return Transducer(
        t.input_alphabet | {PAD},
        t.output_alphabet | {PAD},
        states,
        t.initial,
        t.accepting,
        trans,
    )


def expansion_image(c, s):
    """Pad-free outputs of accepting runs of ``c`` on pad-expansions of ``s``."""
    s = tuple(s)
    start = [(q, 0, ()) for q in c.initial]
    seen, stack, result = set(start), list(start), set()
    while stack:
        q, i, out = stack.pop()
        if i == len(s) and q in c.accepting:
            result.add(out)
        letters = ([s[i]] if i < len(s) else []) + ([PAD] if PAD in c.input_alphabet else [])
        for x in letters:
            for e in c.successors(q, x):
                nxt = (e.dst, i + (x != PAD), out + depad(e.out))
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    return result


def skipping_variant(m):
    """Reads ``(x, 1)`` as ``x`` through ``m`` and skips ``(x, 0)`` silently."""
    if not is_mealy(m):
        raise ValueError("the skipping variant is defined for Mealy machines")
    _require_pad_free(m)
    letters = sorted(m.input_alphabet, key=repr)
    trans = [(e.src, (e.letter, 1), e.out, e.dst) for e in m.transitions]
    trans += [(q, (x, 0), (), q) for q in m.states for x in letters]
    alphabet = [(x, flag) for x in letters for flag in (0, 1)]
    return Transducer(alphabet, m.output_alphabet, m.states, m.initial, m.accepting, trans)


def skip_filter(w):
    return tuple(x for x, flag in w if flag == 1)


def pad_closure(t):
    """Adds a ``PAD/PAD`` loop everywhere and writes ``PAD`` for empty outputs."""
    _require_pad_free(t)
    trans = [(e.src, e.letter, e.out or (PAD,), e.dst) for e in t.transitions]
    trans += [(q, PAD, (PAD,), q) for q in t.states]
    return Transducer(t.input_alphabet | {PAD}, t.output_alphabet | {PAD},
                      t.states, t.initial, t.accepting, trans)


def plain_letter(x):
    return x != PAD


def _identity(x):
    return x


def pad_lift_similarity(d, left_alphabet=None, right_alphabet=None,
                        meaningful=plain_letter, project=_identity):
    """Similarity on padded words that runs ``d`` on the meaningful letters only.

    Positions where both letters are meaningful feed ``d`` the projected
    pair, positions where neither is leave the state unchanged at weight 0,
    and mixed positions have no transition.  Past the end of the shorter
    word the longer one is fed against ``#`` in the same way.

    Non-meaningful positions still count as positions, so with discounting
    the lifted values drift from the base ones.
    """
    left = frozenset(left_alphabet) if left_alphabet is not None else d.left_alphabet | {PAD}
    right = frozenset(right_alphabet) if right_alphabet is not None else d.right_alphabet | {PAD}
    if PAD not in left or PAD not in right:
        raise AlphabetError("padded alphabets must contain the pad letter")
    a = d.automaton
    by_letter = {}
    for s, x, w, q in a.transitions:
        by_letter.setdefault(x, []).append((s, w, q))

    def kind(x):
        if x == PADCHAR:
            return "end"
        return "real" if x != PAD and meaningful(x) else "skip"

    def base(x):
        return PADCHAR if x == PADCHAR else project(x)

    trans = []
    for x in sorted(left, key=repr) + [PADCHAR]:
        for y in sorted(right, key=repr) + [PADCHAR]:
            if x == PADCHAR == y:
                continue
            kinds = {kind(x), kind(y)}
            if kinds <= {"real", "end"}:
                for s, w, q in by_letter.get((base(x), base(y)), []):
                    trans.append((s, (x, y), w, q))
            elif kinds <= {"skip", "end"}:
                trans.extend((q, (x, y), 0, q) for q in a.states)
    lifted = WeightedAutomaton.over_tracks([left, right], a.states, a.initial, a.accepting,
                                           trans, a.value_fn)
    return SimilarityFunction(lifted, left, right)


@dataclass(frozen=True)
class CompatibilityBundle:
    """Canonical transducer plus lifted similarities and the base ones they must agree with.

    ``base_in`` and ``base_out`` are callables on unpadded words.
    """

    canonical: Transducer
    d_in_pad: SimilarityFunction
    d_out_pad: SimilarityFunction
    base_in: object = field(compare=False)
    base_out: object = field(compare=False)
    notes: tuple = ()

    def __post_init__(self):
        if not is_letter_to_letter(self.canonical):
            raise ValueError("canonical transducer must be letter-to-letter")
        if not is_functional(self.canonical):
            raise ValueError("canonical transducer must be functional")


_BOUNDED_NOTES = (
    "C1 is machine-checked",
    "C2 and C3 are checked on bounded words only; exact checking is undecidable",
)


def compatibility_bundle(t, d_in, d_out):
    """Bundle with the canonical transducer and default lifts (``PAD`` is the only filler)."""
    return CompatibilityBundle(
        canonical_transducer(t),
        pad_lift_similarity(d_in),
        pad_lift_similarity(d_out),
        d_in,
        d_out,
        _BOUNDED_NOTES,
    )


def _skip_meaningful(x):
    return x != PAD and x[1] == 1


def _skip_project(x):
    return x[0]


def skipping_bundle(m, d_in, d_out):
    """Bundle for the skipping variant of ``m``; input distance compares kept letters."""
    t = skipping_variant(m)
    padded = t.input_alphabet | {PAD}

    def base_in(s, u):
        return d_in(skip_filter(s), skip_filter(u))

    return CompatibilityBundle(
        pad_closure(t),
        pad_lift_similarity(d_in, padded, padded, _skip_meaningful, _skip_project),
        pad_lift_similarity(d_out),
        base_in,
        d_out,
        _BOUNDED_NOTES,
    )


@dataclass(frozen=True)
class CompatibilityReport:
    c1: bool
    c2: bool
    c3: bool
    c1_reason: str = None
    c2_witness: tuple = None
    c3_witness: tuple = None
    max_len: int = None
    pad_budget: int = None
    bounded: bool = True

    @property
    def ok(self):
        return self.c1 and self.c2 and self.c3


def _step_values(a, config, letter, i):
    k = _weight_factor(a.value_fn, i)
    nxt = {}
    for q, v in config.items():
        for _, _, w, d in a.successors(q, letter):
            val = v + (w if k == 1 else k * w)
            if d not in nxt or val < nxt[d]:
                nxt[d] = val
    return nxt


def _agreement_violation(d_pad, base, max_len, pad_budget):
    """First padded pair (depth-first) whose lifted value differs from the base value."""
    a = d_pad.automaton
    left = sorted(d_pad.left_alphabet - {PAD}, key=repr)
    right = sorted(d_pad.right_alphabet - {PAD}, key=repr)
    cache = {}

    def options(letters, real, pads, ended):
        if ended:
            return [PADCHAR]
        opts = list(letters) if real < max_len else []
        if pads < pad_budget:
            opts.append(PAD)
        return opts + [PADCHAR]

    def grow(word, base_word, pads, x):
        if x == PADCHAR:
            return word, base_word, pads
        if x == PAD:
            return word + (x,), base_word, pads + 1
        return word + (x,), base_word + (x,), pads

    # a track is (padded word, base word, pads used, ended)
    root = (((), (), 0, False), ((), (), 0, False), {q: Fraction(0) for q in a.initial})
    stack = [root]
    while stack:
        (s, sb, sp, s_end), (u, ub, up, u_end), config = stack.pop()
        finals = [v for q, v in config.items() if q in a.accepting]
        if finals:
            key = (sb, ub)
            if key not in cache:
                cache[key] = base(sb, ub)
            if min(finals) != cache[key]:
                return s, u, min(finals), cache[key]
        i = max(len(s), len(u)) + 1
        for x in options(left, len(sb), sp, s_end):
            for y in options(right, len(ub), up, u_end):
                if x == PADCHAR == y:
                    continue
                nxt = _step_values(a, config, (x, y), i)
                if nxt:
                    stack.append(((*grow(s, sb, sp, x), x == PADCHAR),
                                  (*grow(u, ub, up, y), y == PADCHAR), nxt))
    return None


def _expansion_search(c, din, dout):
    """Memoized test: do aligned pad-expansions of a word pair exist through ``c``?"""
    memo = {}

    def step_set(a, states, letter):
        return frozenset(d for q in states for _, _, _, d in a.successors(q, letter))

    def track_moves(word, q, ended):
        # (letter, output, next state, consumed, ended)
        if ended:
            return [(PADCHAR, PADCHAR, q, False, True)]
        moves = []
        letters = ([(word[0], True)] if word else []) + [(PAD, False)]
        for x, consumed in letters:
            for e in c.successors(q, x):
                moves.append((x, e.out[0], e.dst, consumed, False))
        if not word and q in c.accepting:
            moves.append((PADCHAR, PADCHAR, q, False, True))
        return moves

    def successors(ss, uu, node):
        cs, cu, sin, sout, s_end, u_end = node
        for x, ox, cs2, xs, xe in track_moves(ss, cs, s_end):
            for y, oy, cu2, ys, ye in track_moves(uu, cu, u_end):
                if xe and ye:
                    continue
                sin2 = step_set(din, sin, (x, y))
                if not sin2:
                    continue
                sout2 = step_set(dout, sout, (ox, oy))
                if not sout2:
                    continue
                yield (ss[1:] if xs else ss, uu[1:] if ys else uu,
                       (cs2, cu2, sin2, sout2, xe, ye))

    def goal(node):
        cs, cu, sin, sout, s_end, u_end = node
        return ((s_end or cs in c.accepting) and (u_end or cu in c.accepting)
                and sin & din.accepting and sout & dout.accepting)

    def solve(ss, uu, node):
        key = (ss, uu, node)
        if key in memo:
            return memo[key]
        memo[key] = False
        closure, stack = {node}, [node]
        found = False
        while stack and not found:
            n = stack.pop()
            if not ss and not uu and goal(n):
                found = True
                break
            for ss2, uu2, n2 in successors(ss, uu, n):
                if (ss2, uu2) == (ss, uu):
                    if n2 not in closure:
                        closure.add(n2)
                        stack.append(n2)
                elif solve(ss2, uu2, n2):
                    found = True
                    break
        memo[key] = found
        return found

    def exists(s, u):
        for q in c.initial:
            for p in c.initial:
                node = (q, p, frozenset(din.initial), frozenset(dout.initial), False, False)
                if solve(tuple(s), tuple(u), node):
                    return True
        return False

    return exists


def check_compatibility_bounded(t, bundle, max_len=4, pad_budget=2):
    """Check the three compatibility conditions; C2 and C3 only up to ``max_len``."""
    vin, vout = bundle.d_in_pad.value_fn, bundle.d_out_pad.value_fn
    c1, reason = True, None
    if not (vin.is_linear and vout.is_linear and vin == vout):
        c1, reason = False, f"value functions {vin} and {vout} are not one linear function"
    elif not is_functional_wa(bundle.d_out_pad.automaton):
        c1, reason = False, "the padded output similarity is not functional"
    c2_witness = (_agreement_violation(bundle.d_in_pad, bundle.base_in, max_len, pad_budget)
                  or _agreement_violation(bundle.d_out_pad, bundle.base_out, max_len, pad_budget))
    exists = _expansion_search(bundle.canonical, bundle.d_in_pad.automaton,
                               bundle.d_out_pad.automaton)
    domain = [s for s in words_upto(t.input_alphabet, max_len) if t(s) is not None]
    c3_witness = None
    for s in domain:
        for u in domain:
            if bundle.base_in(s, u) != INF and not exists(s, u):
                c3_witness = (s, u)
                break
        if c3_witness:
            break
    return CompatibilityReport(c1, c2_witness is None, c3_witness is None, reason,
                               c2_witness, c3_witness, max_len, pad_budget)


def check_k_robust_via_compat(t, bundle, K):
    """K-robustness of ``t`` read off the canonical transducer of ``bundle``.

    The transfer is sound only for compatible bundles; a padded witness is
    projected back to ``t`` and re-checked there.
    """
    query = RobustnessQuery(K, bundle.d_in_pad, bundle.d_out_pad)
    verdict = check_k_robust(bundle.canonical, query)
    if verdict.status != Status.NOT_ROBUST:
        return verdict
    sp, up = verdict.witness
    s, u = depad(sp), depad(up)
    s_out, u_out = t(s), t(u)
    if s_out is None or u_out is None:
        raise AssertionError("padded witness projects outside the domain")
    din, dout = bundle.base_in(s, u), bundle.base_out(s_out, u_out)
    if not dout > query.K * din:
        raise AssertionError("padded witness does not transfer; the bundle is not compatible")
    return replace(verdict, witness=(s, u), d_in=din, d_out=dout,
                   detail={"padded_witness": (sp, up)})


@dataclass(frozen=True)
class IsometryReport:
    holds: bool
    counterexample: tuple = None
    max_len: int = None
    bounded: bool = True

    def __bool__(self):
        return self.holds


def _domain(t, max_len):
    return [(s, t(s)) for s in words_upto(t.input_alphabet, max_len) if t(s) is not None]


def check_isometry_bounded(t, d_in, d_out, max_len=4):
    """Does ``t`` preserve distances between all domain words up to ``max_len``?"""
    if not is_functional(t):
        raise ValueError("transducer is not functional")
    dom = _domain(t, max_len)
    for s, s_out in dom:
        for u, u_out in dom:
            a, b = d_in(s, u), d_out(s_out, u_out)
            if a != b:
                return IsometryReport(False, (s, u, a, b), max_len)
    return IsometryReport(True, max_len=max_len)


def stutter(w):
    """Drops every letter equal to its predecessor; strings stay strings."""
    out = [x for i, x in enumerate(w) if i == 0 or w[i - 1] != x]
    return "".join(out) if isinstance(w, str) else tuple(out)


def stutter_projection(alphabet):
    letters = sorted(alphabet, key=repr)
    states = ["start"] + [("last", x) for x in letters]
    trans = [(q, x, () if q == ("last", x) else (x,), ("last", x))
             for q in states for x in letters]
    return Transducer(letters, letters, states, ["start"], states, trans)


class ReductionError(ValueError):
    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class ReductionRecord:
    projection: Transducer
    projection_isometry: bool
    composition_holds: bool
    max_len: int
    bounded: bool = True


def _stutter_free_part(t):
    trans = []
    states = [(q, last) for q in t.states for last in [None] + sorted(t.input_alphabet, key=repr)]
    for e in t.transitions:
        for q, last in states:
            if q == e.src and last != e.letter:
                trans.append(((q, last), e.letter, e.out, (e.dst, e.letter)))
    return trim(Transducer(t.input_alphabet, t.output_alphabet, states,
                           [(q, None) for q in t.initial],
                           [s for s in states if s[0] in t.accepting], trans))


def stuttering_reduction(t, d_in, d_out, max_len=5):
    """Restriction of ``t`` to stuttering-free inputs, plus the bounded evidence for it."""
    if not is_functional(t):
        raise ValueError("transducer is not functional")
    dom = _domain(t, max_len)
    for s, s_out in dom:
        if len(s_out) != len(stutter(s)):
            raise ReductionError("output length differs from the pruned input length", (s,))
    classes = {}
    for s, s_out in dom:
        rep = classes.setdefault(stutter(s), (s, s_out))
        if rep[1] != s_out:
            raise ReductionError("output is not stuttering invariant", (rep[0], s))
    everything = list(words_upto(t.input_alphabet, max_len))
    for s, _ in dom:
        rep = classes[stutter(s)][0]
        if rep == s:
            continue
        for w in everything:
            if d_in(s, w) != d_in(rep, w):
                raise ReductionError("input similarity is not stuttering invariant", (rep, s, w))
    projection = stutter_projection(t.input_alphabet)
    reduced = _stutter_free_part(t)
    composition = all(t(s) == reduced(stutter(s)) for s in everything)
    iso = check_isometry_bounded(projection, d_in, d_in, max_len).holds
    return reduced, ReductionRecord(projection, iso, composition, max_len)


def letter_width_reduction(t):
    """Packs uniform-width outputs into tuple letters; returns ``(packed, unpacker)``."""
    widths = {len(e.out) for e in t.transitions}
    if len(widths) > 1 or 0 in widths:
        raise ValueError(f"outputs must share one positive width, found {sorted(widths)}")
    width = widths.pop() if widths else 1
    if width == 1:
        return t, identity_transducer(t.output_alphabet)
    letters = list(product(sorted(t.output_alphabet, key=repr), repeat=width))
    packed = Transducer(t.input_alphabet, letters, t.states, t.initial, t.accepting,
                        [(e.src, e.letter, (tuple(e.out),), e.dst) for e in t.transitions])
    unpacker = Transducer(letters, t.output_alphabet, ["p"], ["p"], ["p"],
                          [("p", x, x, "p") for x in letters])
    return packed, unpacker


def widen_similarity(d, width):
    """Similarity on ``width``-tuples equal to ``d`` on the flattened words (Sum only)."""
    if d.value_fn.kind != "sum":
        raise ValueFunctionError("tuple packing preserves values only for Sum")
    a = d.automaton
    left = list(product(sorted(d.left_alphabet, key=repr), repeat=width))
    right = list(product(sorted(d.right_alphabet, key=repr), repeat=width))

    def spread(x):
        return (PADCHAR,) * width if x == PADCHAR else x

    trans = []
    for x in left + [PADCHAR]:
        for y in right + [PADCHAR]:
            if x == PADCHAR == y:
                continue
            flat = list(zip(spread(x), spread(y)))
            for q in a.states:
                configs = {(q, Fraction(0))}
                for letter in flat:
                    configs = {(dst, v + w) for p, v in configs
                               for _, _, w, dst in a.successors(p, letter)}
                for dst, v in configs:
                    trans.append((q, (x, y), v, dst))
    wide = WeightedAutomaton.over_tracks([left, right], a.states, a.initial, a.accepting,
                                         trans, a.value_fn)
    return SimilarityFunction(wide, left, right)


__all__ = [
    "CompatibilityBundle",
    "CompatibilityReport",
    "IsometryReport",
    "ReductionError",
    "ReductionRecord",
    "canonical_transducer",
    "check_compatibility_bounded",
    "check_isometry_bounded",
    "check_k_robust_via_compat",
    "compatibility_bundle",
    "depad",
    "expansion_image",
    "is_pad_expansion",
    "letter_width_reduction",
    "pad_closure",
    "pad_lift_similarity",
    "skip_filter",
    "skipping_bundle",
    "skipping_variant",
    "stutter",
    "stutter_projection",
    "stuttering_reduction",
    "widen_similarity",
]
