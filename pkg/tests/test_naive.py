import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfrechet.core import InvalidInputError, MoveModel, PointSeq, pairwise_sq
from dfrechet.naive import MAX_NAIVE_PAIRS, decide_naive, decide_naive_sq, frechet_naive, frechet_naive_sq, reach_matrix
from oracles import bfs_reach

A2 = [(0, 0), (2, 0)]
B2 = [(0, 1), (2, 1)]
ORTH, DIAG = MoveModel.ORTHOGONAL, MoveModel.WITH_DIAGONAL


def test_reach_examples():
    assert reach_matrix([(0, 0)], [(0, 0)], 0).tolist() == [[True]]
    assert reach_matrix(A2, B2, 1, ORTH).astype(int).tolist() == [[1, 0], [0, 0]]
    assert reach_matrix(A2, B2, 1, DIAG).astype(int).tolist() == [[1, 0], [0, 1]]


def test_decide_examples():
    assert decide_naive(A2, B2, 1, ORTH) is False
    assert decide_naive(A2, B2, math.sqrt(5), ORTH) is True
    assert decide_naive(A2, B2, 1, DIAG) is True


def test_frechet_examples():
    assert frechet_naive([(0, 0)], [(3, 4)]) == 5.0
    assert frechet_naive(A2, B2, ORTH) == math.sqrt(5)
    assert frechet_naive(A2, B2, DIAG) == 1.0


def test_empty_and_bad_input():
    with pytest.raises(InvalidInputError):
        decide_naive([], B2, 1)
    with pytest.raises(InvalidInputError):
        decide_naive(A2, B2, -1)


def test_refuses_huge_instance():
    n = int(math.isqrt(MAX_NAIVE_PAIRS)) + 1
    A = np.zeros((n, 2))
    with pytest.raises(InvalidInputError):
        frechet_naive(A, A)


def _instance(rng, m, n, grid=False):
    if grid:
        return rng.integers(0, 4, size=(m, 2)).astype(float), rng.integers(0, 4, size=(n, 2)).astype(float)
    return rng.uniform(0, 4, size=(m, 2)), rng.uniform(0, 4, size=(n, 2))


@pytest.mark.parametrize("seed", range(40))
def test_reach_matches_bfs(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 100, size=2)
    A, B = _instance(rng, m, n, grid=seed % 3 == 0)
    D = pairwise_sq(PointSeq(A), PointSeq(B))
    dsq = float(rng.choice(D.ravel()))
    for model in (ORTH, DIAG):
        M = reach_matrix(A, B, math.sqrt(dsq), model)
        # use the squared value directly so the oracle sees the same threshold
        ref = bfs_reach(A, B, math.sqrt(dsq) ** 2, model.diagonal)
        assert M.tolist() == ref


pts = st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=8)


@given(pts, pts, st.floats(0, 6), st.floats(0, 6))
def test_decide_monotone(A, B, d1, d2):
    lo, hi = sorted((d1, d2))
    for model in (ORTH, DIAG):
        if decide_naive(A, B, lo, model):
            assert decide_naive(A, B, hi, model)


@given(pts, pts)
def test_frechet_is_critical(A, B):
    Ap, Bp = PointSeq(A), PointSeq(B)
    D = np.unique(pairwise_sq(Ap, Bp))
    for model in (ORTH, DIAG):
        v = frechet_naive_sq(Ap, Bp, model)
        assert v in D
        assert decide_naive_sq(Ap, Bp, v, model)
        for d in D[D < v]:
            assert not decide_naive_sq(Ap, Bp, float(d), model)


@given(pts, pts)
def test_diagonal_not_larger(A, B):
    assert frechet_naive(A, B, DIAG) <= frechet_naive(A, B, ORTH)
