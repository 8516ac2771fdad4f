"""Command-line front end.

Exit codes: 0 when the checked property holds (or the command simply
succeeded), 1 when it is refuted, 2 for usage and input errors.
"""

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .compat import (
    check_compatibility_bounded,
    check_isometry_bounded,
    check_k_robust_via_compat,
    compatibility_bundle,
    canonical_transducer,
    pad_lift_similarity,
    skipping_bundle,
    skipping_variant,
)
from .fileio import (
    FormatError,
    document_kind,
    format_number,
    parse_diff,
    parse_fst,
    parse_value_fn,
    parse_wa,
    serialize_fst,
    serialize_wa,
)
from .fst import AlphabetError, classify, compose, renumber
from .manhattan import check_manhattan_robust, pump_witness
from .oracle import GenSpec, oracle_robust, random_mealy, random_transducer, random_wa
from .setsim import SetKind, SetSimilarity, oracle_nondet_robust
from .similarity import (
    INF,
    DiffTable,
    SimilarityFunction,
    build_manhattan_wa,
    convolve,
    convolve_lassos,
    distance,
    manhattan_table,
    table_distance,
)
from .sync import NotSynchronizedError, RobustnessQuery, Status, check_k_robust, check_synchronized
from .weighted import Lasso, ValueFunctionError, emptiness_below, evaluate

EXIT_OK, EXIT_REFUTED, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def parse_word(arg):
    """``-`` is the empty word; text with spaces splits on them, otherwise one letter per character."""
    if arg in ("-", ""):
        return ()
    return tuple(arg.split()) if any(c.isspace() for c in arg) else tuple(arg)


def parse_word_or_lasso(arg):
    if "|" in arg:
        stem, loop = arg.split("|", 1)
        return Lasso(parse_word(stem), parse_word(loop))
    return parse_word(arg)


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from err


def load_fst(path):
    return parse_fst(_read(path))


def load_similarity(path, value_fn=None):
    """A similarity from a ``wa`` file (two tracks) or a ``diff`` table."""
    text = _read(path)
    kind = document_kind(text)
    if kind == "diff":
        return build_manhattan_wa(parse_diff(text), value_fn or parse_value_fn(["sum"]))
    if kind == "wa":
        a = parse_wa(text)
        if a.tracks is None or len(a.tracks) != 2:
            raise UsageError(f"{path}: a similarity needs a two-track automaton")
        if value_fn is not None:
            a = a.with_value_fn(value_fn)
        return SimilarityFunction(a, a.tracks[0], a.tracks[1])
    raise UsageError(f"{path}: expected a 'wa' or 'diff' document")


def load_table(path):
    text = _read(path)
    if document_kind(text) != "diff":
        raise UsageError(f"{path}: expected a 'diff' document")
    return parse_diff(text)


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_number(x)
    if isinstance(x, float) and x == INF:
        return "inf"
    if isinstance(x, Lasso):
        return {"stem": _jsonable(x.stem), "loop": _jsonable(x.loop)}
    if isinstance(x, tuple):
        return [_token(c) for c in x]
    if isinstance(x, int):
        return x
    return x if x is None or isinstance(x, (str, bool, list, dict)) else str(x)


def _token(x):
    if isinstance(x, tuple):
        return "(" + ",".join(_token(c) for c in x) + ")"
    return str(x)


def _word_text(w):
    if isinstance(w, Lasso):
        return f"{_word_text(w.stem)} ({_word_text(w.loop)})^w"
    return " ".join(_token(x) for x in w) if w else "-"


class Report:
    """Collects a verdict; prints text or JSON at the end."""

    def __init__(self, command, fmt):
        self.command, self.fmt = command, fmt
        self.data = {"command": command}
        self.lines = []

    def say(self, line):
        self.lines.append(line)

    def set(self, **fields):
        self.data.update(fields)

    def witness(self, s, t, d_in=None, d_out=None, k=None):
        self.data["witness"] = {"s": _jsonable(s), "t": _jsonable(t), "d_in": _jsonable(d_in),
                                "d_out": _jsonable(d_out), "k": _jsonable(k)}
        self.say(f"witness: {_word_text(s)} / {_word_text(t)}")
        if d_in is not None:
            self.say(f"d_in = {_jsonable(d_in)}, d_out = {_jsonable(d_out)}")

    def emit(self, out):
        if self.fmt == "json":
            out.write(json.dumps({k: _jsonable(v) if not isinstance(v, dict) else v
                                  for k, v in self.data.items()}, sort_keys=True) + "\n")
        else:
            out.write("\n".join(self.lines) + ("\n" if self.lines else ""))


def _verdict(report, verdict):
    report.set(verdict=verdict.status.value)
    report.say(verdict.status.value)
    if verdict.bounded is not None:
        report.set(bounded={"max_len": verdict.bounded})
        report.say(f"(bounded check up to length {verdict.bounded})")
    if verdict.status == Status.NOT_ROBUST:
        s, t = verdict.witness
        report.witness(s, t, verdict.d_in, verdict.d_out, verdict.K)
        return EXIT_REFUTED
    if verdict.margin_note:
        report.set(note=verdict.margin_note)
        report.say(f"note: {verdict.margin_note}")
    if verdict.status == Status.UNSUPPORTED:
        report.set(reason=verdict.reason)
        report.say(f"reason: {verdict.reason}")
        return EXIT_ERROR
    return EXIT_OK


def _value_fn(args):
    return parse_value_fn(args.value_fn.split()) if getattr(args, "value_fn", None) else None


def cmd_classify(args, report):
    t = load_fst(args.fst)
    c = classify(t)
    flags = {"functional": c.functional, "deterministic": c.deterministic,
             "letter_to_letter": c.letter_to_letter, "mealy": c.mealy}
    flags["synchronized"] = check_synchronized(t).synchronized if c.functional else None
    report.set(verdict=flags)
    for k, v in flags.items():
        report.say(f"{k}: {'n/a' if v is None else ('yes' if v else 'no')}")
    return EXIT_OK


def cmd_robust(args, report):
    t = load_fst(args.fst)
    vf = _value_fn(args)
    query = RobustnessQuery(Fraction(args.k), load_similarity(args.din, vf), load_similarity(args.dout, vf))
    return _verdict(report, check_k_robust(t, query))


def cmd_manhattan(args, report):
    t = load_fst(args.fst)
    tin = load_table(args.din) if args.din else manhattan_table(t.input_alphabet)
    tout = load_table(args.dout) if args.dout else manhattan_table(t.output_alphabet)
    v = check_manhattan_robust(t, tin, tout)
    report.set(pair_size=v.pair_size, k_pair=v.k_pair)
    if v.robust:
        report.set(verdict="ROBUST", bound=v.bound)
        report.say("ROBUST")
        report.say(f"bound: K <= {format_number(v.bound)}")
        report.say(f"|P| = {v.pair_size}, K^T = |P|^2 = {v.k_pair}")
        return EXIT_OK
    w = v.witness
    report.set(verdict="NOT_ROBUST", cycle_kind=w.kind)
    report.say(f"NOT_ROBUST ({w.kind})")
    ins, outs = w.cycle_inputs, w.cycle_outputs
    report.say(f"cycle inputs: {_word_text(ins[0])} / {_word_text(ins[1])}; "
               f"outputs: {_word_text(outs[0])} / {_word_text(outs[1])}")
    K = Fraction(args.k) if args.k else Fraction(1)
    s, u = pump_witness(w, K)
    report.witness(s, u, table_distance(tin, s, u), table_distance(tout, t(s), t(u)), K)
    return EXIT_REFUTED


def cmd_distance(args, report):
    d = load_similarity(args.sim, _value_fn(args))
    s, t = parse_word_or_lasso(args.s), parse_word_or_lasso(args.t)
    value = distance(d, s, t)
    report.set(verdict="OK", value=value)
    report.say(str(_jsonable(value)))
    return EXIT_OK


def cmd_eval(args, report):
    a = parse_wa(_read(args.wa))
    if args.below is not None:
        e = emptiness_below(a, Fraction(args.below))
        report.set(verdict="EMPTY" if e.empty else "NONEMPTY", infimum=e.infimum)
        report.say(f"{'EMPTY' if e.empty else 'NONEMPTY'} below {args.below}")
        report.say(f"infimum: {_jsonable(e.infimum)}")
        if not e.empty:
            report.set(witness={"word": _jsonable(e.witness), "value": _jsonable(e.witness_value)})
            report.say(f"witness: {_word_text(e.witness)} with value {_jsonable(e.witness_value)}")
            return EXIT_REFUTED
        return EXIT_OK
    words = [parse_word_or_lasso(w) for w in args.words]
    k = 1 if a.tracks is None else len(a.tracks)
    if len(words) != k:
        raise UsageError(f"the automaton reads {k} track(s); got {len(words)} word(s)")
    if k == 1:
        word = words[0]
    elif all(isinstance(w, Lasso) for w in words):
        word = convolve_lassos(words)
    elif any(isinstance(w, Lasso) for w in words):
        raise UsageError("either all words are lassos or none is")
    else:
        word = convolve(words)
    value = evaluate(a, word)
    report.set(verdict="OK", value=value)
    report.say(str(_jsonable(value)))
    return EXIT_OK


def _write_fst(t, report, out):
    text = serialize_fst(renumber(t))
    report.set(verdict="OK", document=text)
    report.say(text.rstrip("\n"))
    if out:
        Path(out).write_text(text)
    return EXIT_OK


def cmd_compose(args, report):
    return _write_fst(compose(load_fst(args.first), load_fst(args.second)), report, args.output)


def cmd_canonicalize(args, report):
    return _write_fst(canonical_transducer(load_fst(args.fst)), report, args.output)


def cmd_pad_lift(args, report):
    d = load_similarity(args.sim, _value_fn(args))
    text = serialize_wa(pad_lift_similarity(d).automaton)
    report.set(verdict="OK", document=text)
    report.say(text.rstrip("\n"))
    if args.output:
        Path(args.output).write_text(text)
    return EXIT_OK


def cmd_compat(args, report):
    m = load_fst(args.fst)
    vf = _value_fn(args)
    d_in, d_out = load_similarity(args.din, vf), load_similarity(args.dout, vf)
    if args.skip:
        t, bundle = skipping_variant(m), skipping_bundle(m, d_in, d_out)
    else:
        t, bundle = m, compatibility_bundle(m, d_in, d_out)
    r = check_compatibility_bounded(t, bundle, args.max_len, args.pad_budget)
    report.set(verdict="COMPATIBLE" if r.ok else "NOT_COMPATIBLE",
               conditions={"C1": r.c1, "C2": r.c2, "C3": r.c3},
               bounded={"max_len": args.max_len, "pad_budget": args.pad_budget})
    report.say("COMPATIBLE" if r.ok else "NOT_COMPATIBLE")
    report.say(f"C1: {'yes' if r.c1 else 'no'}" + (f" ({r.c1_reason})" if r.c1_reason else ""))
    report.say(f"C2: {'yes' if r.c2 else 'no'}" + (f" (at {_jsonable(r.c2_witness)})" if r.c2_witness else ""))
    report.say(f"C3: {'yes' if r.c3 else 'no'}" + (f" (at {_jsonable(r.c3_witness)})" if r.c3_witness else ""))
    report.say(f"(bounded check up to length {args.max_len}, pad budget {args.pad_budget})")
    if not r.ok:
        return EXIT_REFUTED
    if args.k is not None:
        v = check_k_robust_via_compat(t, bundle, Fraction(args.k))
        report.set(robust=v.status.value)
        report.say(f"robustness: {v.status.value}")
        if v.status == Status.NOT_ROBUST:
            report.witness(*v.witness, v.d_in, v.d_out, v.K)
            return EXIT_REFUTED
    return EXIT_OK


def cmd_isometry(args, report):
    t = load_fst(args.fst)
    vf = _value_fn(args)
    r = check_isometry_bounded(t, load_similarity(args.din, vf), load_similarity(args.dout, vf), args.max_len)
    report.set(verdict="ISOMETRY" if r.holds else "NOT_ISOMETRY", bounded={"max_len": args.max_len})
    report.say("ISOMETRY" if r.holds else "NOT_ISOMETRY")
    report.say(f"(bounded check up to length {args.max_len})")
    if not r.holds:
        report.witness(*r.counterexample)
        return EXIT_REFUTED
    return EXIT_OK


def cmd_nondet(args, report):
    t = load_fst(args.fst)
    vf = _value_fn(args)
    sim = SetSimilarity(SetKind(args.kind), load_similarity(args.dout, vf))
    v = oracle_nondet_robust(t, load_similarity(args.din, vf), sim, Fraction(args.k), args.max_len)
    return _verdict(report, v)


def _oracle_distance(path, vf):
    text = _read(path)
    if document_kind(text) == "diff" and vf is None:
        return parse_diff(text)
    return load_similarity(path, vf)


def cmd_oracle(args, report):
    t = load_fst(args.fst)
    vf = _value_fn(args)
    d_in, d_out = _oracle_distance(args.din, vf), _oracle_distance(args.dout, vf)
    if isinstance(d_in, DiffTable) != isinstance(d_out, DiffTable):
        d_in = build_manhattan_wa(d_in) if isinstance(d_in, DiffTable) else d_in
        d_out = build_manhattan_wa(d_out) if isinstance(d_out, DiffTable) else d_out
    return _verdict(report, oracle_robust(t, d_in, d_out, Fraction(args.k), args.max_len))


def cmd_gen(args, report):
    if args.kind == "mealy":
        text = serialize_fst(random_mealy(args.states, args.inputs, args.outputs, args.seed))
    elif args.kind == "fst":
        g = GenSpec(max_states=args.states, input_size=args.inputs, output_size=args.outputs,
                    density=args.density, min_output=args.min_out, max_output=args.max_out,
                    functional_only=not args.any, seed=args.seed)
        text = serialize_fst(random_transducer(g))
    else:
        vf = _value_fn(args) or parse_value_fn(["sum"])
        text = serialize_wa(random_wa(args.seed, args.states, args.inputs, args.density, value_fn=vf))
    report.set(verdict="OK", document=text)
    report.say(text.rstrip("\n"))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", choices=("text", "json"), default="text",
                        help="output format (default: text)")
    vf = argparse.ArgumentParser(add_help=False)
    vf.add_argument("--value-fn", help="override the value function, e.g. 'sum' or 'disc 1/2'")
    sims = argparse.ArgumentParser(add_help=False)
    sims.add_argument("--din", required=True, help="input similarity (wa or diff file)")
    sims.add_argument("--dout", required=True, help="output similarity (wa or diff file)")
    bound = argparse.ArgumentParser(add_help=False)
    bound.add_argument("--max-len", type=int, default=4, help="word length bound (default: 4)")

    p = argparse.ArgumentParser(prog="transrobust", description="Lipschitz robustness of transducers")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="structural properties of a transducer")
    c.add_argument("fst")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("robust", parents=[common, sims, vf], help="decide K-robustness")
    c.add_argument("--k", required=True)
    c.add_argument("fst")
    c.set_defaults(func=cmd_robust)

    c = sub.add_parser("manhattan-robust", parents=[common],
                       help="decide robustness for Manhattan-style distances")
    c.add_argument("--din", help="input diff table (default: standard)")
    c.add_argument("--dout", help="output diff table (default: standard)")
    c.add_argument("--k", help="constant the pumped witness must violate (default: 1)")
    c.add_argument("fst")
    c.set_defaults(func=cmd_manhattan)

    c = sub.add_parser("distance", parents=[common, vf], help="evaluate a similarity on two words")
    c.add_argument("--sim", required=True)
    c.add_argument("s")
    c.add_argument("t")
    c.set_defaults(func=cmd_distance)

    c = sub.add_parser("eval", parents=[common], help="evaluate a weighted automaton or test emptiness")
    c.add_argument("--below", help="test for a word with value below this threshold")
    c.add_argument("wa")
    c.add_argument("words", nargs="*", help="one word per track; 'stem|loop' for a lasso")
    c.set_defaults(func=cmd_eval)

    c = sub.add_parser("compose", parents=[common], help="compose two transducers (second after first)")
    c.add_argument("first")
    c.add_argument("second")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_compose)

    c = sub.add_parser("canonicalize", parents=[common], help="canonical letter-to-letter transducer")
    c.add_argument("fst")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_canonicalize)

    c = sub.add_parser("pad-lift", parents=[common, vf], help="lift a similarity to padded words")
    c.add_argument("sim")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_pad_lift)

    c = sub.add_parser("compat-check", parents=[common, sims, vf, bound],
                       help="bounded compatibility check, optionally followed by a robustness check")
    c.add_argument("--pad-budget", type=int, default=2)
    c.add_argument("--skip", action="store_true", help="treat the machine as the base of a skipping variant")
    c.add_argument("--k")
    c.add_argument("fst")
    c.set_defaults(func=cmd_compat)

    c = sub.add_parser("isometry-check", parents=[common, sims, vf, bound], help="bounded isometry check")
    c.add_argument("fst")
    c.set_defaults(func=cmd_isometry)

    c = sub.add_parser("nondet-robust", parents=[common, sims, vf, bound],
                       help="bounded robustness check with a set similarity")
    c.add_argument("--kind", choices=[k.value for k in SetKind], default=SetKind.HAUSDORFF_DIRECTED.value)
    c.add_argument("--k", required=True)
    c.add_argument("fst")
    c.set_defaults(func=cmd_nondet)

    c = sub.add_parser("oracle", parents=[common, sims, vf, bound], help="brute-force robustness check")
    c.add_argument("--k", required=True)
    c.add_argument("fst")
    c.set_defaults(func=cmd_oracle)

    c = sub.add_parser("gen", parents=[common, vf], help="random instance")
    c.add_argument("--kind", choices=("fst", "mealy", "wa"), default="fst")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--states", type=int, default=3)
    c.add_argument("--inputs", type=int, default=2)
    c.add_argument("--outputs", type=int, default=2)
    c.add_argument("--density", type=float, default=0.4)
    c.add_argument("--min-out", type=int, default=1)
    c.add_argument("--max-out", type=int, default=1)
    c.add_argument("--any", action="store_true", help="allow non-functional transducers")
    c.set_defaults(func=cmd_gen)
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    report = Report(args.command, args.report)
    try:
        code = args.func(args, report)
    except (UsageError, FormatError, AlphabetError, ValueFunctionError,
            NotSynchronizedError, ValueError) as exc:
        err.write(f"transrobust {args.command}: {exc}\n")
        return EXIT_ERROR
    report.emit(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
