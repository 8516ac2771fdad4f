"""Line-based text formats for transducers, weighted automata and difference tables.

Each document starts with its kind (``fst``, ``wa`` or ``diff``), then
``key: value`` header lines, then body lines.  Letters and states are
whitespace-free tokens; tuple letters are written ``(x,y)``.  Lines whose
first non-blank character is ``#`` are comments.
"""

from fractions import Fraction

from .fst import PAD, PADCHAR, AlphabetError, Transducer
from .similarity import INF, DiffTable
from .weighted import ValueFunction, WeightedAutomaton

EPSILON = "-"
ARROW = "->"
COLON = ":"
SYNTAX = frozenset({EPSILON, ARROW, COLON, PADCHAR})


class FormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def _split_tuple(body, line):
    parts, depth, cur = [], 0, ""
    for ch in body:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += (ch == "(") - (ch == ")")
        if depth < 0:
            raise FormatError(f"unbalanced parentheses in {body!r}", line)
        cur += ch
    if depth:
        raise FormatError(f"unbalanced parentheses in {body!r}", line)
    parts.append(cur)
    return parts


def parse_letter(token, line=None, allow_end=False):
    """``a`` is a plain letter, ``(a,#)`` a tuple letter; ``#`` only inside tuples."""
    if token.startswith("("):
        if not token.endswith(")"):
            raise FormatError(f"malformed tuple letter {token!r}", line)
        parts = _split_tuple(token[1:-1], line)
        if len(parts) < 2 or any(not p for p in parts):
            raise FormatError(f"malformed tuple letter {token!r}", line)
        return tuple(parse_letter(p, line, allow_end=True) for p in parts)
    if token == PADCHAR and allow_end:
        return PADCHAR
    if token in SYNTAX or any(c in token for c in "(),"):
        raise FormatError(f"reserved symbol {token!r} cannot be a letter", line)
    return token


def format_letter(x):
    if isinstance(x, tuple):
        return "(" + ",".join(format_letter(c) for c in x) + ")"
    if not isinstance(x, str) or not x or any(c.isspace() or c in "()," for c in x):
        raise FormatError(f"letter {x!r} has no text form")
    return x


def _format_state(q):
    if not isinstance(q, str) or not q or any(c.isspace() for c in q) or q in SYNTAX | {PAD}:
        raise FormatError(f"state {q!r} has no text form; renumber states first")
    return q


def _parse_state(token, line):
    if token in SYNTAX or token == PAD:
        raise FormatError(f"reserved symbol {token!r} cannot name a state", line)
    return token


def _lines(text):
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield n, line


class _Document:
    """Header dictionary and body lines of one document."""

    def __init__(self, text, kind, keys):
        lines = list(_lines(text))
        if not lines or lines[0][1] != kind:
            first = lines[0][0] if lines else 1
            raise FormatError(f"expected a {kind!r} header", first)
        self.header, self.where, self.body = {}, {}, []
        for n, line in lines[1:]:
            head, sep, rest = line.partition(":")
            key = head.strip()
            if sep and " " not in key and not line.startswith(("trans ", "entry ")):
                if keys is not None and key not in keys:
                    raise FormatError(f"unknown key {key!r}", n)
                if key in self.header:
                    raise FormatError(f"duplicate key {key!r}", n)
                self.header[key] = rest.split()
                self.where[key] = n
            else:
                self.body.append((n, line.split()))

    def get(self, key, required=True):
        if key not in self.header:
            if required:
                raise FormatError(f"missing key {key!r}")
            return None
        return self.header[key]


def _unique(tokens, what, line):
    seen = set()
    for x in tokens:
        if x in seen:
            raise FormatError(f"duplicate {what} {x!r}", line)
        seen.add(x)
    return tokens


_FST_KEYS = ("input-alphabet", "output-alphabet", "states", "initial", "accepting")


def parse_fst(text):
    doc = _Document(text, "fst", _FST_KEYS)
    ins = _unique([parse_letter(x, doc.where.get("input-alphabet")) for x in doc.get("input-alphabet")],
                  "letter", doc.where.get("input-alphabet"))
    outs = _unique([parse_letter(x, doc.where.get("output-alphabet"))
                    for x in doc.get("output-alphabet")], "letter", doc.where.get("output-alphabet"))
    states = _unique([_parse_state(q, doc.where.get("states")) for q in doc.get("states")],
                     "state", doc.where.get("states"))
    declared = set(states)

    def known(qs, n):
        for q in qs:
            if q not in declared:
                raise FormatError(f"undeclared state {q!r}", n)
        return qs

    initial = known(doc.get("initial"), doc.where.get("initial"))
    accepting = known(doc.get("accepting"), doc.where.get("accepting"))
    trans = []
    for n, toks in doc.body:
        # trans SRC IN : OUT... -> DST
        if len(toks) < 6 or toks[0] != "trans" or toks[3] != COLON or toks[-2] != ARROW:
            raise FormatError("expected 'trans SRC IN : OUT... -> DST'", n)
        src, dst = known([toks[1], toks[-1]], n)
        letter = parse_letter(toks[2], n)
        if letter not in ins:
            raise FormatError(f"undeclared input letter {toks[2]!r}", n)
        out_toks = toks[4:-2]
        if out_toks == [EPSILON]:
            out = ()
        else:
            out = tuple(parse_letter(x, n) for x in out_toks)
            for x in out:
                if x not in outs:
                    raise FormatError(f"undeclared output letter {x!r}", n)
        trans.append((src, letter, out, dst))
    try:
        return Transducer(ins, outs, states, initial, accepting, trans)
    except (ValueError, AlphabetError) as err:
        raise FormatError(str(err)) from err


def _sorted_letters(letters):
    return sorted(letters, key=repr)


def serialize_fst(t):
    lines = [
        "fst",
        "input-alphabet: " + " ".join(format_letter(x) for x in _sorted_letters(t.input_alphabet)),
        "output-alphabet: " + " ".join(format_letter(x) for x in _sorted_letters(t.output_alphabet)),
        "states: " + " ".join(_format_state(q) for q in t.states),
        "initial: " + " ".join(q for q in t.states if q in t.initial),
        "accepting: " + " ".join(q for q in t.states if q in t.accepting),
    ]
    for e in t.transitions:
        out = " ".join(format_letter(x) for x in e.out) if e.out else EPSILON
        lines.append(f"trans {e.src} {format_letter(e.letter)} : {out} -> {e.dst}")
    return "\n".join(lines) + "\n"


def _parse_number(token, line):
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"malformed number {token!r}", line) from None


def format_number(v):
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def parse_value_fn(tokens, line=None):
    try:
        if tokens == ["sum"]:
            return ValueFunction("sum")
        if tokens == ["limavg"]:
            return ValueFunction("limavg")
        if len(tokens) == 2 and tokens[0] in ("disc", "disc-inf"):
            return ValueFunction("disc", _parse_number(tokens[1], line), tokens[0] == "disc-inf")
    except FormatError:
        raise
    except ValueError as err:
        raise FormatError(str(err), line) from err
    raise FormatError(f"unknown value function {' '.join(tokens)!r}", line)


def format_value_fn(vf):
    if vf.kind == "disc":
        return f"{'disc-inf' if vf.infinite else 'disc'} {format_number(vf.discount)}"
    return vf.kind


def parse_wa(text):
    doc = _Document(text, "wa", None)
    raw_tracks = doc.get("tracks")
    if len(raw_tracks) != 1 or not raw_tracks[0].isdigit() or int(raw_tracks[0]) < 1:
        raise FormatError("tracks must be a positive integer", doc.where["tracks"])
    k = int(raw_tracks[0])
    allowed = {"value-fn", "tracks", "states", "initial", "accepting"} | {f"alphabet{i}" for i in range(1, k + 1)}
    for key, n in doc.where.items():
        if key not in allowed:
            raise FormatError(f"unknown key {key!r}", n)
    vf = parse_value_fn(doc.get("value-fn"), doc.where["value-fn"])
    alphabets = []
    for i in range(1, k + 1):
        n = doc.where.get(f"alphabet{i}")
        alphabets.append(_unique([parse_letter(x, n) for x in doc.get(f"alphabet{i}")], "letter", n))
    states = _unique([_parse_state(q, doc.where.get("states")) for q in doc.get("states")],
                     "state", doc.where.get("states"))
    declared = set(states)
    for key in ("initial", "accepting"):
        for q in doc.get(key):
            if q not in declared:
                raise FormatError(f"undeclared state {q!r}", doc.where[key])
    trans = []
    for n, toks in doc.body:
        # trans SRC LETTER WEIGHT -> DST
        if len(toks) != 6 or toks[0] != "trans" or toks[4] != ARROW:
            raise FormatError("expected 'trans SRC LETTER WEIGHT -> DST'", n)
        for q in (toks[1], toks[5]):
            if q not in declared:
                raise FormatError(f"undeclared state {q!r}", n)
        letter = parse_letter(toks[2], n, allow_end=False)
        if k == 1:
            if letter not in alphabets[0]:
                raise FormatError(f"undeclared letter {toks[2]!r}", n)
        else:
            if not isinstance(letter, tuple) or len(letter) != k:
                raise FormatError(f"letter {toks[2]!r} must be a {k}-tuple", n)
            for c, alpha in zip(letter, alphabets):
                if c != PADCHAR and c not in alpha:
                    raise FormatError(f"undeclared letter {c!r} in {toks[2]!r}", n)
            if all(c == PADCHAR for c in letter):
                raise FormatError("the all-# letter is not part of a convolution alphabet", n)
        trans.append((toks[1], letter, _parse_number(toks[3], n), toks[5]))
    try:
        if k == 1:
            return WeightedAutomaton(alphabets[0], states, doc.get("initial"), doc.get("accepting"),
                                     trans, vf)
        return WeightedAutomaton.over_tracks(alphabets, states, doc.get("initial"),
                                             doc.get("accepting"), trans, vf)
    except ValueError as err:
        raise FormatError(str(err)) from err


def serialize_wa(a):
    tracks = a.tracks if a.tracks is not None else (a.alphabet,)
    lines = ["wa", f"value-fn: {format_value_fn(a.value_fn)}", f"tracks: {len(tracks)}"]
    for i, alpha in enumerate(tracks, start=1):
        lines.append(f"alphabet{i}: " + " ".join(format_letter(x) for x in _sorted_letters(alpha)))
    lines += [
        "states: " + " ".join(_format_state(q) for q in a.states),
        "initial: " + " ".join(q for q in a.states if q in a.initial),
        "accepting: " + " ".join(q for q in a.states if q in a.accepting),
    ]
    for s, x, w, d in a.transitions:
        lines.append(f"trans {s} {format_letter(x)} {format_number(w)} -> {d}")
    return "\n".join(lines) + "\n"


def parse_diff(text):
    doc = _Document(text, "diff", ("alphabet",))
    n0 = doc.where.get("alphabet")
    alphabet = _unique([parse_letter(x, n0) for x in doc.get("alphabet")], "letter", n0)
    known = set(alphabet) | {PADCHAR}
    entries = {}
    for n, toks in doc.body:
        # entry X Y VALUE
        if len(toks) != 4 or toks[0] != "entry":
            raise FormatError("expected 'entry X Y VALUE'", n)
        x, y = toks[1], toks[2]
        for c in (x, y):
            if c not in known:
                raise FormatError(f"undeclared letter {c!r}", n)
        if x == PADCHAR == y:
            raise FormatError("the (#, #) entry is not allowed", n)
        if (x, y) in entries:
            raise FormatError(f"duplicate entry for {(x, y)}", n)
        entries[(x, y)] = INF if toks[3] == "inf" else _parse_number(toks[3], n)
    return DiffTable(alphabet, entries)


def serialize_diff(t):
    lines = ["diff", "alphabet: " + " ".join(format_letter(x) for x in _sorted_letters(t.alphabet))]
    for (x, y), v in t.entries.items():
        value = "inf" if v == INF else format_number(v)
        lines.append(f"entry {format_letter(x) if x != PADCHAR else x} "
                     f"{format_letter(y) if y != PADCHAR else y} {value}")
    return "\n".join(lines) + "\n"


def document_kind(text):
    for _, line in _lines(text):
        return line.split()[0]
    raise FormatError("empty document")


def parse_any(text):
    kind = document_kind(text)
    parsers = {"fst": parse_fst, "wa": parse_wa, "diff": parse_diff}
    if kind not in parsers:
        raise FormatError(f"unknown document kind {kind!r}", 1)
    return parsers[kind](text)


__all__ = [
    "FormatError",
    "document_kind",
    "format_letter",
    "parse_any",
    "parse_diff",
    "parse_fst",
    "parse_letter",
    "parse_wa",
    "serialize_diff",
    "serialize_fst",
    "serialize_wa",
]
