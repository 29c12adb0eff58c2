"""Discrete Frechet distance between planar point sequences.

``decide_naive`` / ``frechet_naive`` run the quadratic dynamic program;
``decide`` runs the layered block-automaton procedure and ``optimize``
searches the pairwise distances with it.  All paths share one distance
predicate and agree exactly.
"""

from .core import (
    DEFAULT_PARAMS,
    ConfigurationError,
    FrechetError,
    InvalidInputError,
    InvalidPathError,
    MoveModel,
    Point2,
    PointSeq,
    TableMode,
    TuningParams,
    check_traversal,
    within,
)
from .naive import decide_naive, frechet_naive, reach_matrix
from .pipeline import decide, decide_sq, plan
from .selection import count_pairs_within, kth_distance, optimize

__all__ = [
    "DEFAULT_PARAMS",
    "ConfigurationError",
    "FrechetError",
    "InvalidInputError",
    "InvalidPathError",
    "MoveModel",
    "Point2",
    "PointSeq",
    "TableMode",
    "TuningParams",
    "check_traversal",
    "within",
    "decide_naive",
    "frechet_naive",
    "reach_matrix",
    "decide",
    "decide_sq",
    "plan",
    "count_pairs_within",
    "kth_distance",
    "optimize",
]

__version__ = "0.1.0"
