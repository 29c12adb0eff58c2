"""Quadratic dynamic program over the reachability matrix.

This is the reference the block-automaton pipeline is checked against, so
it is kept deliberately plain: one pass per row of ``A``, two rolling rows.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import (
    InvalidInputError,
    MoveModel,
    PointSeq,
    as_points,
    check_delta,
    pairwise_sq,
    sq_dist_nb,
)

#: ``frechet_naive`` refuses instances larger than this many pairs.
MAX_NAIVE_PAIRS = 10**6


@njit(cache=True)
def _dp(a, b, dsq, diag, keep):
    """Fill the reachability matrix row by row.

    ``keep[i]`` selects rows to copy into the returned ``(keep.sum(), n)``
    array.  Returns ``(rows, last_cell)``.
    """
    m = a.shape[0]
    n = b.shape[0]
    bx = b[:, 0].copy()
    by = b[:, 1].copy()
    nkeep = 0
    for i in range(m):
        if keep[i]:
            nkeep += 1
    out = np.zeros((nkeep, n), dtype=np.uint8)
    prev = np.zeros(n, dtype=np.uint8)
    cur = np.zeros(n, dtype=np.uint8)
    if sq_dist_nb(a[0, 0], a[0, 1], bx[0], by[0]) > dsq:
        return out, False
    k = 0
    for i in range(m):
        ax = a[i, 0]
        ay = a[i, 1]
        if i == 0:
            c = np.uint8(1)
            cur[0] = c
            for j in range(1, n):
                w = np.uint8(sq_dist_nb(ax, ay, bx[j], by[j]) <= dsq)
                c = c & w
                cur[j] = c
        else:
            c = prev[0] & np.uint8(sq_dist_nb(ax, ay, bx[0], by[0]) <= dsq)
            cur[0] = c
            if diag:
                for j in range(1, n):
                    w = np.uint8(sq_dist_nb(ax, ay, bx[j], by[j]) <= dsq)
                    c = w & (prev[j] | c | prev[j - 1])
                    cur[j] = c
            else:
                for j in range(1, n):
                    w = np.uint8(sq_dist_nb(ax, ay, bx[j], by[j]) <= dsq)
                    c = w & (prev[j] | c)
                    cur[j] = c
        if keep[i]:
            out[k, :] = cur
            k += 1
        prev, cur = cur, prev
    return out, prev[n - 1] == 1


def _prepare(A, B, model):
    A = as_points(A, "A")
    B = as_points(B, "B")
    return A, B, MoveModel.parse(model)


def reach_rows_sq(A: PointSeq, B: PointSeq, delta_sq: float, model: MoveModel, rows) -> np.ndarray:
    """Rows of ``M`` for the given 0-based indices, returned in ascending order."""
    keep = np.zeros(len(A), dtype=np.bool_)
    keep[np.asarray(rows, dtype=np.int64)] = True
    out, _ = _dp(A.xy, B.xy, float(delta_sq), model.diagonal, keep)
    return out.astype(bool)


def reach_matrix(A, B, delta: float, model: MoveModel | str = MoveModel.ORTHOGONAL) -> np.ndarray:
    """The full ``m x n`` boolean matrix ``M``; ``M[i, j]`` is 0-based here."""
    A, B, model = _prepare(A, B, model)
    delta = check_delta(delta)
    keep = np.ones(len(A), dtype=np.bool_)
    out, _ = _dp(A.xy, B.xy, delta * delta, model.diagonal, keep)
    return out.astype(bool)


def decide_naive_sq(A: PointSeq, B: PointSeq, delta_sq: float, model: MoveModel) -> bool:
    keep = np.zeros(len(A), dtype=np.bool_)
    _, last = _dp(A.xy, B.xy, float(delta_sq), model.diagonal, keep)
    return bool(last)


def decide_naive(A, B, delta: float, model: MoveModel | str = MoveModel.ORTHOGONAL) -> bool:
    """Is the discrete Frechet distance at most ``delta``?"""
    A, B, model = _prepare(A, B, model)
    delta = check_delta(delta)
    return decide_naive_sq(A, B, delta * delta, model)


def frechet_naive_sq(A, B, model: MoveModel | str = MoveModel.ORTHOGONAL) -> float:
    """Squared discrete Frechet distance by binary search over all pairs."""
    A, B, model = _prepare(A, B, model)
    if len(A) * len(B) > MAX_NAIVE_PAIRS:
        raise InvalidInputError(
            f"{len(A)} x {len(B)} pairs exceed the oracle limit of {MAX_NAIVE_PAIRS}; "
            "use the fast path (selection.optimize)"
        )
    cand = np.unique(pairwise_sq(A, B))
    lo, hi = 0, len(cand) - 1
    # cand[-1] is always feasible: every placement is within range
    while lo < hi:
        mid = (lo + hi) // 2
        if decide_naive_sq(A, B, float(cand[mid]), model):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])


def frechet_naive(A, B, model: MoveModel | str = MoveModel.ORTHOGONAL) -> float:
    return math.sqrt(frechet_naive_sq(A, B, model))
