"""Lipschitz robustness of finite-state transducers."""

from .fst import PAD, PADCHAR, Transducer, classify, compose, run, trim
from .similarity import DiffTable, SimilarityFunction, convolve, manhattan_table, standard_manhattan
from .sync import RobustnessQuery, RobustnessVerdict, Status, check_k_robust, check_synchronized
from .weighted import LIMAVG, SUM, Lasso, WeightedAutomaton, disc, emptiness_below, evaluate

__all__ = [
    "LIMAVG",
    "PAD",
    "PADCHAR",
    "SUM",
    "DiffTable",
    "Lasso",
    "RobustnessQuery",
    "RobustnessVerdict",
    "SimilarityFunction",
    "Status",
    "Transducer",
    "WeightedAutomaton",
    "check_k_robust",
    "check_synchronized",
    "classify",
    "compose",
    "convolve",
    "disc",
    "emptiness_below",
    "evaluate",
    "manhattan_table",
    "run",
    "standard_manhattan",
    "trim",
]
