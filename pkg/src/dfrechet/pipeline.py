"""Layered decision procedure built on per-block compact automata.

``A`` is cut into layers of ``t*(s-1)+1`` points and each layer into
blocks of ``s`` points; neighbours share one endpoint.  A flag stream
carries row ``r`` of the reachability matrix, where ``a_r`` is the first
point of the part of ``A`` not yet processed.  Each layer locates every
B-point among its disks once, packs the face labels into chunk words once,
and then every block turns the incoming flag row into the row of its last
point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

from .arrangement import DiskSet, block_masks, bounding_box, build_face_structure, direct_face_labels, locate_all
from .automaton import (
    BlockSpec,
    EncodingOverflowError,
    FlagStream,
    build_compact,
    moore_output,
    start_state,
)
from .core import (
    DEFAULT_PARAMS,
    MoveModel,
    PointSeq,
    TuningParams,
    as_points,
    check_delta,
    sq_dist,
)

__all__ = [
    "FlagStream",
    "LayerPlan",
    "DecideStats",
    "plan",
    "init_flags",
    "process_layer",
    "decide",
    "decide_sq",
]


@dataclass(frozen=True)
class LayerPlan:
    """Index ranges (1-based, inclusive) of layers and of their blocks."""

    m: int
    n: int
    layers: tuple[tuple[int, int], ...]
    blocks: tuple[tuple[tuple[int, int], ...], ...]

    def __len__(self) -> int:
        return len(self.layers)


def _split(lo: int, hi: int, span: int) -> tuple[tuple[int, int], ...]:
    if lo == hi:
        return ((lo, hi),)
    out = []
    start = lo
    while start < hi:
        end = min(start + span - 1, hi)
        out.append((start, end))
        start = end
    return tuple(out)


def plan(m: int, n: int, params: TuningParams = DEFAULT_PARAMS) -> LayerPlan:
    if m < 1 or n < 1:
        raise ValueError("m and n must be at least 1")
    layers = _split(1, m, params.layer_span)
    blocks = tuple(_split(lo, hi, params.block_size) for lo, hi in layers)
    return LayerPlan(m, n, layers, blocks)


def init_flags(A, B, delta: float, tau: int = DEFAULT_PARAMS.chunk_len) -> FlagStream | None:
    """The stream ``(1, 0, ..., 0)``, or None when the start pair is too far apart."""
    delta = check_delta(delta)
    return _init_flags_sq(as_points(A, "A"), as_points(B, "B"), delta * delta, tau)


def _init_flags_sq(A: PointSeq, B: PointSeq, delta_sq: float, tau: int) -> FlagStream | None:
    if sq_dist(A[0], B[0]) > delta_sq:
        return None
    n = len(B)
    mu = -(-(n - 1) // tau) if n > 1 else 0
    return FlagStream(1, np.zeros(mu, dtype=np.uint64), n, tau)


@njit(cache=True)
def _fill_face_words(faces, beta, tau, out):
    out[:] = 0
    for p in range(faces.shape[0]):
        k = p // tau
        i = p - k * tau
        out[k] |= np.uint64(faces[p]) << np.uint64(tau + beta * i)


def face_words(faces: np.ndarray, beta: int, tau: int) -> np.ndarray:
    """Face parts of the chunk codes for the label string ``faces`` (positions ``2..n``)."""
    out = np.empty(-(-len(faces) // tau), dtype=np.uint64)
    _fill_face_words(np.ascontiguousarray(faces, dtype=np.int64), beta, tau, out)
    return out


@dataclass
class DecideStats:
    """Counters filled in by :func:`decide` when one is passed in."""

    layers: int = 0
    blocks: int = 0
    max_faces: int = 0
    max_beta: int = 0
    memo_entries: int = 0
    degenerate_points: int = 0
    early_exit: bool = False
    active_words: int = 0
    face_counts: list[int] = field(default_factory=list)


def _layer_faces(xy: np.ndarray, pts: np.ndarray, delta_sq: float, method: str):
    if method == "direct" or delta_sq == 0.0:
        tab, F = direct_face_labels(xy, delta_sq, pts)
        return tab, F, 0
    disks = DiskSet(xy, radius_sq=delta_sq)
    tab, loc = build_face_structure(disks)
    F = locate_all(loc, tab, pts)
    return tab, F, loc.degenerate_hits


@njit(cache=True)
def _box_run_end(pts, box, start):
    j = start
    while j < pts.shape[0]:
        x = pts[j, 0]
        y = pts[j, 1]
        if x < box[0] or x > box[1] or y < box[2] or y > box[3]:
            return j
        j += 1
    return pts.shape[0]


def _active_words(flags: FlagStream, pts: np.ndarray, box: np.ndarray) -> tuple[int, int] | None:
    """Word range ``[k0, k1)`` outside which every block of the layer outputs zero.

    A set flag at position ``j`` can only spread rightwards while the
    B-points stay inside some disk, hence inside the layer's box.  None
    means no flag is set at all.
    """
    tau = flags.tau
    nz = np.flatnonzero(flags.words)
    if flags.first:
        j0 = 0
    elif len(nz):
        w = int(flags.words[nz[0]])
        j0 = 1 + int(nz[0]) * tau + ((w & -w).bit_length() - 1)
    else:
        return None
    last = 1 + int(nz[-1]) * tau + int(flags.words[nz[-1]]).bit_length() - 1 if len(nz) else 0
    j1 = _box_run_end(pts, box, last)
    k0 = (j0 - 1) // tau if j0 >= 1 else 0
    k1 = (j1 - 2) // tau + 1 if j1 >= 2 else k0
    return k0, max(k0, k1)


def process_layer(layer, B, delta: float, flags: FlagStream, params: TuningParams = DEFAULT_PARAMS, model=MoveModel.ORTHOGONAL) -> FlagStream:
    """Advance ``flags`` from the layer's first point to its last."""
    delta = check_delta(delta)
    layer = as_points(layer, "A")
    return _process_layer_sq(layer.xy, as_points(B, "B"), delta * delta, flags, params, MoveModel.parse(model))


def _process_layer_sq(xy, B: PointSeq, delta_sq: float, flags: FlagStream, params: TuningParams, model: MoveModel, stats: DecideStats | None = None, blocks=None) -> FlagStream:
    n = len(B)
    tau = params.chunk_len
    if flags.n != n or flags.tau != tau:
        raise ValueError(f"flag stream covers {flags.n} positions in words of {flags.tau}; expected {n} and {tau}")
    K = len(xy)
    mu = len(flags.words)
    pts = B.xy
    if params.skip_inert:
        box, _ = bounding_box(xy, delta_sq)
        window = _active_words(flags, pts, box)
        if window is None:
            return FlagStream(0, np.zeros(mu, dtype=np.uint64), n, tau)
        k0, k1 = window
    else:
        k0, k1 = 0, mu
    # point 0 feeds the start states, the window's points feed the chunks
    hi = min(n, 1 + k1 * tau)
    sub = pts if (k0, k1) == (0, mu) else np.concatenate([pts[:1], pts[1 + k0 * tau : hi]])
    tab, F, ndeg = _layer_faces(xy, sub, delta_sq, params.point_location)
    beta = params.face_label_bits if params.face_label_bits is not None else tab.beta
    params.check_word(beta)
    if tab.L > (1 << beta):
        raise EncodingOverflowError(f"layer has {tab.L} face labels; {beta} label bits hold only {1 << beta}")
    e0F = face_words(F[1:], beta, tau)
    last_len = (n - 1) - (mu - 1) * tau if k1 == mu and mu else tau
    f1 = int(F[0])
    if blocks is None:
        blocks = _split(0, K - 1, params.block_size)
    cur = flags
    for lo, hi_ in blocks:
        spec = BlockSpec(block_masks(tab, lo, hi_), hi_ - lo + 1, beta)
        st = start_state(spec, f1, cur.first)
        aut = build_compact(spec, beta, tau, model, params.table_mode, params.eager_budget)
        _, part = aut.run_words(st.valid, e0F, cur.words[k0:k1], last_len)
        out = part if (k0, k1) == (0, mu) else np.zeros(mu, dtype=np.uint64)
        if out is not part:
            out[k0:k1] = part
        cur = FlagStream(moore_output(spec, st), out, n, tau)
        if stats is not None:
            stats.blocks += 1
            stats.memo_entries += aut.memo_size
    if stats is not None:
        stats.layers += 1
        stats.max_faces = max(stats.max_faces, tab.L)
        stats.max_beta = max(stats.max_beta, beta)
        stats.degenerate_points += ndeg
        stats.face_counts.append(tab.L)
        stats.active_words += k1 - k0
    return cur


LayerHook = Callable[[int, tuple[int, int], FlagStream], None]


def decide_sq(A, B, delta_sq: float, params: TuningParams = DEFAULT_PARAMS, model=MoveModel.ORTHOGONAL, *, stats: DecideStats | None = None, on_layer: LayerHook | None = None) -> bool:
    """Decision on a squared threshold: is some traversal within ``sqrt(delta_sq)``?

    ``on_layer(i, (lo, hi), flags)`` is called after each layer with the
    stream for row ``hi`` (1-based).  Layers stop early once no flag is set.
    """
    A = as_points(A, "A")
    B = as_points(B, "B")
    model = MoveModel.parse(model)
    delta_sq = float(delta_sq)
    if not (delta_sq >= 0.0 and math.isfinite(delta_sq)):
        raise ValueError(f"squared threshold must be finite and non-negative, got {delta_sq!r}")
    flags = _init_flags_sq(A, B, delta_sq, params.chunk_len)
    if flags is None:
        return False
    lp = plan(len(A), len(B), params)
    xy = A.xy
    for i, (lo, hi) in enumerate(lp.layers):
        local = tuple((b0 - lo, b1 - lo) for b0, b1 in lp.blocks[i])
        flags = _process_layer_sq(xy[lo - 1 : hi], B, delta_sq, flags, params, model, stats, local)
        if on_layer is not None:
            on_layer(i, (lo, hi), flags)
        if not flags.first and not flags.words.any():
            if stats is not None:
                stats.early_exit = i + 1 < len(lp.layers)
            return False
    return bool(flags.last)


def decide(A, B, delta: float, params: TuningParams = DEFAULT_PARAMS, model=MoveModel.ORTHOGONAL, **kw) -> bool:
    """Is the discrete Frechet distance of ``A`` and ``B`` at most ``delta``?"""
    delta = check_delta(delta)
    return decide_sq(A, B, delta * delta, params, model, **kw)
