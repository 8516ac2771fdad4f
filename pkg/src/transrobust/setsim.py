"""Set similarities over output sets of nondeterministic transducers.

Robustness with respect to these is undecidable in general, so the only
checker here enumerates word pairs up to a length bound.
"""

import enum
from dataclasses import dataclass
from fractions import Fraction

from .fst import run, words_upto
from .similarity import INF
from .sync import RobustnessVerdict, Status


class SetKind(str, enum.Enum):
    HAUSDORFF_DIRECTED = "hausdorff-directed"
    HAUSDORFF_SYMMETRIC = "hausdorff"
    INF_INF = "inf-inf"


@dataclass(frozen=True)
class SetSimilarity:
    kind: SetKind
    base: object

    def __post_init__(self):
        object.__setattr__(self, "kind", SetKind(self.kind))

    def __call__(self, left, right):
        return set_similarity(self, left, right)


def output_set(t, s):
    return set(run(t, s).outputs)


def _directed(base, left, right):
    return max(min(base(x, y) for y in right) for x in left)


def set_similarity(sim, left, right):
    """Aggregate the base similarity over two finite non-empty sets."""
    if not left or not right:
        raise ValueError("set similarities are defined on non-empty sets")
    left = sorted(left, key=repr)
    right = sorted(right, key=repr)
    if sim.kind == SetKind.HAUSDORFF_DIRECTED:
        return _directed(sim.base, left, right)
    if sim.kind == SetKind.HAUSDORFF_SYMMETRIC:
        return max(_directed(sim.base, left, right), _directed(sim.base, right, left))
    return min(sim.base(x, y) for x in left for y in right)


def oracle_nondet_robust(t, d_in, sim, K, max_len=4):
    """Exhaustive check of the set version of K-robustness on domain words up to ``max_len``."""
    K = Fraction(K)
    outputs = {}
    for s in words_upto(t.input_alphabet, max_len):
        outs = output_set(t, s)
        if outs:
            outputs[s] = outs
    for s, s_outs in outputs.items():
        for u, u_outs in outputs.items():
            din = d_in(s, u)
            if din == INF:
                continue
            dout = sim(s_outs, u_outs)
            if dout > K * din:
                return RobustnessVerdict(Status.NOT_ROBUST, (s, u), din, dout, K, bounded=max_len)
    return RobustnessVerdict(Status.ROBUST, K=K, bounded=max_len)


__all__ = [
    "SetKind",
    "SetSimilarity",
    "oracle_nondet_robust",
    "output_set",
    "set_similarity",
]
