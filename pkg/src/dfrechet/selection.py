"""Exact optimisation by searching the pairwise distances.

The answer is always one of the ``m*n`` pairwise distances, namely the
smallest one at which the decision procedure says yes.  The search keeps a
value interval ``(lo, hi]`` known to contain it, splits it at a distance of
roughly median rank (found by random sampling and rank counting), and
enumerates the last few thousand candidates outright.

Everything is done on squared distances; one square root is taken at the
very end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .arrangement import DiskSet, depth_sum
from .core import (
    DEFAULT_PARAMS,
    FrechetError,
    InvalidInputError,
    MoveModel,
    PointSeq,
    TuningParams,
    as_points,
    check_delta,
    sq_dist_nb,
)
from .pipeline import decide_sq

#: interval size (in pairs) below which candidates are enumerated
ENUM_THRESHOLD = 4096
#: group cap; building costs cubic in the group, locating only logarithmic
MAX_GROUP = 32


class TooManyPairsError(FrechetError, ValueError):
    pass


@dataclass(frozen=True)
class RankInterval:
    """``lo < hi`` squared distances with ``count_le_lo < count_le_hi``."""

    lo: float
    hi: float
    count_le_lo: int
    count_le_hi: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidInputError(f"empty interval ({self.lo}, {self.hi}]")

    @property
    def size(self) -> int:
        return self.count_le_hi - self.count_le_lo


# --------------------------------------------------------------------------
# counting


def _group_size(n: int) -> int:
    return max(1, min(math.isqrt(n - 1) + 1 if n > 1 else 1, MAX_GROUP))


def count_pairs_within_sq(A, B, delta_sq: float) -> int:
    """``|{(i, j) : sq_dist(a_i, b_j) <= delta_sq}|`` by arrangement depth."""
    A = as_points(A, "A")
    B = as_points(B, "B")
    delta_sq = float(delta_sq)
    if delta_sq < 0:
        return 0
    if delta_sq == 0.0:
        # a zero radius has no arrangement; compare coordinates outright
        return _count_brute(A.xy, B.xy, 0.0)
    g = _group_size(len(B))
    total = 0
    for start in range(0, len(A), g):
        total += depth_sum(DiskSet(A.xy[start : start + g], radius_sq=delta_sq), B)
    return total


def count_pairs_within(A, B, delta: float) -> int:
    delta = check_delta(delta)
    return count_pairs_within_sq(A, B, delta * delta)


@njit(cache=True)
def _count_brute(a, b, dsq):
    c = 0
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            if sq_dist_nb(a[i, 0], a[i, 1], b[j, 0], b[j, 1]) <= dsq:
                c += 1
    return c


# --------------------------------------------------------------------------
# enumeration endgame


@njit(cache=True)
def _grid_scan(a, order, keys, b, x0, y0, w, lo, hi, limit, out):
    """Squared distances in ``(lo, hi]``; returns the count, or -1 past ``limit``."""
    cnt = 0
    for j in range(b.shape[0]):
        bx = b[j, 0]
        by = b[j, 1]
        gx = np.int64(math.floor((bx - x0) / w))
        gy = np.int64(math.floor((by - y0) / w))
        for ddx in range(-1, 2):
            for ddy in range(-1, 2):
                kx = gx + ddx
                ky = gy + ddy
                key = kx * np.int64(4294967296) + ky
                p = np.searchsorted(keys, key)
                while p < keys.shape[0] and keys[p] == key:
                    i = order[p]
                    d = sq_dist_nb(a[i, 0], a[i, 1], bx, by)
                    if d > lo and d <= hi:
                        if cnt >= limit:
                            return -1
                        out[cnt] = d
                        cnt += 1
                    p += 1
    return cnt


def enumerate_pairs_in(A, B, lo: float, hi: float, threshold: int = ENUM_THRESHOLD) -> np.ndarray:
    """Sorted multiset of squared distances ``d`` with ``lo < d <= hi``.

    Raises :class:`TooManyPairsError` if more than ``threshold`` pairs
    qualify; shrink the interval first.
    """
    A = as_points(A, "A")
    B = as_points(B, "B")
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise InvalidInputError(f"empty interval ({lo}, {hi}]")
    if hi < 0:
        return np.zeros(0)
    a, b = A.xy, B.xy
    x0 = min(a[:, 0].min(), b[:, 0].min()) - 1.0
    y0 = min(a[:, 1].min(), b[:, 1].min()) - 1.0
    span = max(a[:, 0].max(), b[:, 0].max(), a[:, 1].max(), b[:, 1].max()) - min(x0, y0) + 1.0
    # widen slightly so rounding never pushes a qualifying pair two cells apart,
    # and coarsen if the grid would not fit 32-bit cell indices
    w = max(math.sqrt(hi) * (1.0 + 1e-9), span / 2.0**30, 1e-300)
    gx = np.floor((a[:, 0] - x0) / w).astype(np.int64)
    gy = np.floor((a[:, 1] - y0) / w).astype(np.int64)
    keys = gx * np.int64(4294967296) + gy
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    out = np.empty(threshold, dtype=np.float64)
    cnt = _grid_scan(a, order, keys, b, x0, y0, w, lo, hi, threshold, out)
    if cnt < 0:
        raise TooManyPairsError(f"more than {threshold} pairs in ({lo}, {hi}]")
    return np.sort(out[:cnt])


# --------------------------------------------------------------------------
# selection


def _sample_in(a, b, lo, hi, rng, want, max_draws=1 << 22):
    found = []
    got = 0
    drawn = 0
    batch = 4096
    while got < want and drawn < max_draws:
        i = rng.integers(0, len(a), batch)
        j = rng.integers(0, len(b), batch)
        dx = a[i, 0] - b[j, 0]
        dy = a[i, 1] - b[j, 1]
        d = dx * dx + dy * dy
        d = d[(d > lo) & (d <= hi)]
        found.append(d)
        got += len(d)
        drawn += batch
        batch = min(batch * 2, 1 << 18)
    return np.sort(np.concatenate(found)) if found else np.zeros(0)


@dataclass
class SearchTrace:
    """What the optimiser did: decide calls, counting passes, final interval."""

    decide_calls: int = 0
    count_calls: int = 0
    enumerations: int = 0
    steps: list[tuple[float, bool]] = field(default_factory=list)


def _bounds(A: PointSeq, B: PointSeq) -> float:
    """A finite squared threshold at or above every pairwise squared distance."""
    pts = np.vstack([A.xy, B.xy])
    ext = pts.max(axis=0) - pts.min(axis=0)
    return float(ext @ ext) * 1.01 + 1e-300


def _initial_interval(A, B) -> RankInterval:
    return RankInterval(-1.0, _bounds(A, B), 0, len(A) * len(B))


def _kth(A: PointSeq, B: PointSeq, k: int, rng, iv: RankInterval, threshold: int, trace: SearchTrace | None):
    """``(v, count_le_v)`` for the ``k``-th smallest squared distance inside ``iv``."""
    lo, hi, clo, chi = iv.lo, iv.hi, iv.count_le_lo, iv.count_le_hi

    def count(v):
        if trace is not None:
            trace.count_calls += 1
        return count_pairs_within_sq(A, B, v)

    while chi - clo > threshold:
        q = _sample_in(A.xy, B.xy, lo, hi, rng, 1024)
        if len(q) == 0:
            # sampling starved: bisect on value instead
            pivots = [0.5 * (max(lo, 0.0) + hi)]
        else:
            # bracket the target rank by two sample order statistics
            f = (k - clo) / (chi - clo)
            r = math.sqrt(len(q))
            picks = (int(f * len(q) - r), int(f * len(q) + r))
            pivots = sorted({float(q[i]) for i in picks if 0 <= i < len(q)})
            if not pivots:
                pivots = [float(q[min(max(int(f * len(q)), 0), len(q) - 1)])]
        moved = False
        for p in pivots:
            if not lo < p < hi:
                continue
            c = count(p)
            if c >= k:
                hi, chi = p, c
            else:
                lo, clo = p, c
            moved = True
        if not moved:
            # every pivot sits on hi: the answer is hi unless a smaller value has rank k
            below = float(np.nextafter(hi, -np.inf))
            if below <= lo:
                return hi, chi
            c = count(below)
            if c < k:
                return hi, chi
            hi, chi = below, c
    vals = enumerate_pairs_in(A, B, lo, hi, threshold)
    if trace is not None:
        trace.enumerations += 1
    if len(vals) != chi - clo:
        raise FrechetError(f"enumeration found {len(vals)} pairs, counting found {chi - clo}")
    v = float(vals[k - clo - 1])
    return v, clo + int(np.searchsorted(vals, v, side="right"))


def kth_distance_sq(A, B, k: int, *, seed: int | np.random.Generator = 0, interval: RankInterval | None = None, threshold: int = ENUM_THRESHOLD, trace: SearchTrace | None = None) -> float:
    """The ``k``-th smallest squared pairwise distance (1-based, with multiplicity).

    ``interval`` may warm-start the search; it must satisfy
    ``count_le_lo < k <= count_le_hi``.
    """
    A = as_points(A, "A")
    B = as_points(B, "B")
    mn = len(A) * len(B)
    k = int(k)
    if not 1 <= k <= mn:
        raise InvalidInputError(f"rank {k} outside 1..{mn}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    iv = interval or _initial_interval(A, B)
    if not iv.count_le_lo < k <= iv.count_le_hi:
        raise InvalidInputError(f"rank {k} not inside {iv}")
    return _kth(A, B, k, rng, iv, threshold, trace)[0]


def kth_distance(A, B, k: int, **kw) -> float:
    """The ``k``-th smallest pairwise distance (not squared)."""
    return math.sqrt(kth_distance_sq(A, B, k, **kw))


def optimize_sq(A, B, params: TuningParams = DEFAULT_PARAMS, model=MoveModel.ORTHOGONAL, *, seed: int = 0, threshold: int = ENUM_THRESHOLD, trace: SearchTrace | None = None) -> float:
    """Squared discrete Frechet distance, exactly one of the pairwise values."""
    A = as_points(A, "A")
    B = as_points(B, "B")
    model = MoveModel.parse(model)
    rng = np.random.default_rng(seed)
    trace = trace if trace is not None else SearchTrace()

    def feasible(v):
        ok = decide_sq(A, B, v, params, model)
        trace.decide_calls += 1
        trace.steps.append((v, ok))
        return ok

    iv = _initial_interval(A, B)
    # invariant: lo infeasible (or below every distance), hi feasible
    while iv.size > threshold:
        k = iv.count_le_lo + (iv.size + 1) // 2
        v, c = _kth(A, B, k, rng, iv, threshold, trace)
        if v == iv.hi:
            # ties at hi: split below it instead, or stop if nothing is below
            below = float(np.nextafter(v, -np.inf))
            if below <= iv.lo:
                break
            cb = count_pairs_within_sq(A, B, below)
            trace.count_calls += 1
            if cb == iv.count_le_lo:
                iv = RankInterval(below, iv.hi, cb, iv.count_le_hi)
                break
            sub = RankInterval(iv.lo, below, iv.count_le_lo, cb)
            v, c = _kth(A, B, iv.count_le_lo + (sub.size + 1) // 2, rng, sub, threshold, trace)
        if feasible(v):
            iv = RankInterval(iv.lo, v, iv.count_le_lo, c)
        else:
            iv = RankInterval(v, iv.hi, c, iv.count_le_hi)
    if float(np.nextafter(iv.hi, -np.inf)) <= iv.lo:
        # (lo, hi] holds a single representable value
        cand = np.array([iv.hi])
    else:
        trace.enumerations += 1
        cand = np.unique(enumerate_pairs_in(A, B, iv.lo, iv.hi, threshold))
    if len(cand) == 0:
        raise FrechetError("no pairwise distance in the final interval")
    # the largest candidate is feasible unless hi itself was never tested,
    # which only happens before any split, when hi bounds every distance
    lo_i, hi_i = 0, len(cand) - 1
    while lo_i < hi_i:
        mid = (lo_i + hi_i) // 2
        if feasible(float(cand[mid])):
            hi_i = mid
        else:
            lo_i = mid + 1
    return float(cand[lo_i])


def optimize(A, B, params: TuningParams = DEFAULT_PARAMS, model=MoveModel.ORTHOGONAL, **kw) -> float:
    """Discrete Frechet distance via the fast decision procedure."""
    return math.sqrt(optimize_sq(A, B, params, model, **kw))
