"""Face structure and point location for an arrangement of congruent disks.

Faces are identified by the set of disks containing them (their membership
bitmask), so two connected faces with the same containing set share one
label.  Point location uses a vertical slab decomposition: breakpoints at
circle extremes and pairwise intersections, and inside each slab the arcs
sorted bottom-to-top with one membership mask per cell.

Bitmasks wider than one word are stored as ``W = ceil(K / 64)`` uint64
words, little-endian.  At the Python surface masks are plain ints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .core import InvalidInputError, as_points, sq_dist_nb

#: relative tolerance for breakpoint dedup and "point on an arc" detection
TOL = 1e-12
#: relative window inside which arc ordering at the query abscissa is re-checked
Y_WINDOW = 1e-8

_HASH_MUL = np.uint64(0x9E3779B97F4A7C15)


# --------------------------------------------------------------------------
# compiled helpers


@njit(cache=True, inline="always")
def _row_hash(masks, r):
    h = np.uint64(0xCBF29CE484222325)
    for w in range(masks.shape[1]):
        h = (h ^ masks[r, w]) * _HASH_MUL
        h ^= h >> np.uint64(29)
    return h


@njit(cache=True)
def _table_find(slots, labels, row):
    """Label whose mask equals ``row`` (1 x W array), or -1."""
    cap = slots.shape[0]
    W = labels.shape[1]
    h = np.uint64(0xCBF29CE484222325)
    for w in range(W):
        h = (h ^ row[w]) * _HASH_MUL
        h ^= h >> np.uint64(29)
    i = np.int64(h & np.uint64(cap - 1))
    while True:
        lab = slots[i]
        if lab < 0:
            return np.int64(-1)
        same = True
        for w in range(W):
            if labels[lab, w] != row[w]:
                same = False
                break
        if same:
            return lab
        i = (i + 1) & (cap - 1)


@njit(cache=True)
def _arc_y(cx, cy, rsq, k, up, x):
    dx = x - cx[k]
    t = rsq - dx * dx
    if t < 0.0:
        t = 0.0
    s = math.sqrt(t)
    if up:
        return cy[k] + s
    return cy[k] - s


@njit(cache=True)
def _build(cx, cy, rsq, W, tol):
    K = cx.shape[0]
    r = math.sqrt(rsq)
    # breakpoints
    raw = np.empty(2 * K + K * (K - 1), dtype=np.float64)
    nb = 0
    for k in range(K):
        raw[nb] = cx[k] - r
        raw[nb + 1] = cx[k] + r
        nb += 2
    four = 4.0 * rsq
    for i in range(K):
        for j in range(i + 1, K):
            dx = cx[j] - cx[i]
            dy = cy[j] - cy[i]
            d2 = dx * dx + dy * dy
            if d2 <= 0.0 or d2 > four:
                continue
            d = math.sqrt(d2)
            h2 = rsq - 0.25 * d2
            h = math.sqrt(h2) if h2 > 0.0 else 0.0
            mx = 0.5 * (cx[i] + cx[j])
            raw[nb] = mx - h * (dy / d)
            raw[nb + 1] = mx + h * (dy / d)
            nb += 2
    raw = np.sort(raw[:nb])
    xs = np.empty(nb, dtype=np.float64)
    nx = 0
    for v in raw:
        if nx == 0 or v - xs[nx - 1] > tol:
            xs[nx] = v
            nx += 1
    xs = xs[:nx]
    S = nx - 1
    # arcs per slab
    slab_ptr = np.zeros(S + 1, dtype=np.int64)
    for s in range(S):
        mid = 0.5 * (xs[s] + xs[s + 1])
        c = 0
        for k in range(K):
            if abs(mid - cx[k]) < r:
                c += 2
        slab_ptr[s + 1] = slab_ptr[s] + c
    na = slab_ptr[S]
    arc_circ = np.empty(na, dtype=np.int32)
    arc_up = np.empty(na, dtype=np.uint8)
    ncell = na + S
    cell_masks = np.zeros((ncell, W), dtype=np.uint64)
    cell_thin = np.zeros(ncell, dtype=np.uint8)
    ybuf = np.empty(2 * K, dtype=np.float64)
    cbuf = np.empty(2 * K, dtype=np.int32)
    ubuf = np.empty(2 * K, dtype=np.uint8)
    cur = np.zeros(W, dtype=np.uint64)
    for s in range(S):
        mid = 0.5 * (xs[s] + xs[s + 1])
        c = 0
        for k in range(K):
            if abs(mid - cx[k]) < r:
                for up in range(2):
                    ybuf[c] = _arc_y(cx, cy, rsq, k, up == 1, mid)
                    cbuf[c] = k
                    ubuf[c] = up
                    c += 1
        order = np.argsort(ybuf[:c], kind="mergesort")
        p0 = slab_ptr[s]
        base = p0 + s
        cur[:] = 0
        cell_masks[base, :] = cur
        for t in range(c):
            o = order[t]
            arc_circ[p0 + t] = cbuf[o]
            arc_up[p0 + t] = ubuf[o]
            k = cbuf[o]
            bit = np.uint64(1) << np.uint64(k % 64)
            if ubuf[o] == 1:
                cur[k // 64] &= ~bit
            else:
                cur[k // 64] |= bit
            cell_masks[base + t + 1, :] = cur
            if t > 0 and ybuf[o] - ybuf[order[t - 1]] <= tol:
                cell_thin[base + t] = 1
    return xs, slab_ptr, arc_circ, arc_up, cell_masks, cell_thin


@njit(cache=True)
def _label_cells(cell_masks, cell_thin, W):
    """Dense labels for distinct non-thin cell masks; label 0 is the empty mask."""
    ncell = cell_masks.shape[0]
    cap = 16
    while cap < 2 * (ncell + 1):
        cap *= 2
    slots = np.full(cap, -1, dtype=np.int64)
    labels = np.zeros((ncell + 1, W), dtype=np.uint64)
    slots[np.int64(_row_hash(labels, 0) & np.uint64(cap - 1))] = 0
    L = 1
    cell_label = np.full(ncell, -1, dtype=np.int64)
    for c in range(ncell):
        if cell_thin[c]:
            continue
        found = _table_find(slots, labels, cell_masks[c])
        if found < 0:
            labels[L, :] = cell_masks[c]
            i = np.int64(_row_hash(labels, L) & np.uint64(cap - 1))
            while slots[i] >= 0:
                i = (i + 1) & (cap - 1)
            slots[i] = L
            found = L
            L += 1
        cell_label[c] = found
    return labels[:L].copy(), slots, cell_label


@njit(cache=True)
def _direct_mask(cx, cy, rsq, px, py, out):
    out[:] = 0
    for k in range(cx.shape[0]):
        if sq_dist_nb(cx[k], cy[k], px, py) <= rsq:
            out[k // 64] |= np.uint64(1) << np.uint64(k % 64)


@njit(cache=True)
def _locate_one(px, py, cx, cy, rsq, xs, slab_ptr, arc_circ, arc_up, cell_masks, cell_label, box, tol, ywin, tol_r):
    """Label of the cell containing (px, py); -1 if the point is degenerate."""
    if px < box[0] or px > box[1] or py < box[2] or py > box[3]:
        return np.int64(0)
    S = slab_ptr.shape[0] - 1
    s = np.searchsorted(xs, px) - 1
    # s is the slab with xs[s] < px <= xs[s+1]
    if s < 0 or s >= S:
        if px < xs[0] - tol or px > xs[S] + tol:
            return np.int64(0)
        return np.int64(-1)
    if px - xs[s] <= tol or xs[s + 1] - px <= tol:
        return np.int64(-1)
    p0 = slab_ptr[s]
    na = slab_ptr[s + 1] - p0
    lo = 0
    hi = na
    while lo < hi:
        mid = (lo + hi) // 2
        y = _arc_y(cx, cy, rsq, arc_circ[p0 + mid], arc_up[p0 + mid] == 1, px)
        if y < py:
            lo = mid + 1
        else:
            hi = mid
    cell = p0 + s + lo
    # re-check every arc close to the query with the shared predicate
    t = lo - 1
    while t >= 0:
        k = arc_circ[p0 + t]
        if _arc_y(cx, cy, rsq, k, arc_up[p0 + t] == 1, px) < py - ywin:
            break
        d2 = sq_dist_nb(cx[k], cy[k], px, py)
        if abs(d2 - rsq) <= tol_r:
            return np.int64(-1)
        inside = d2 <= rsq
        bit = (cell_masks[cell, k // 64] >> np.uint64(k % 64)) & np.uint64(1)
        if inside != (bit == 1):
            return np.int64(-1)
        t -= 1
    t = lo
    while t < na:
        k = arc_circ[p0 + t]
        if _arc_y(cx, cy, rsq, k, arc_up[p0 + t] == 1, px) > py + ywin:
            break
        d2 = sq_dist_nb(cx[k], cy[k], px, py)
        if abs(d2 - rsq) <= tol_r:
            return np.int64(-1)
        inside = d2 <= rsq
        bit = (cell_masks[cell, k // 64] >> np.uint64(k % 64)) & np.uint64(1)
        if inside != (bit == 1):
            return np.int64(-1)
        t += 1
    return cell_label[cell]


@njit(cache=True)
def _locate_many(pts, cx, cy, rsq, xs, slab_ptr, arc_circ, arc_up, cell_masks, cell_label, box, tol, ywin, tol_r, slots, labels, out):
    """Locate every point; degenerate ones go through the direct predicate.

    Returns the number of degenerate points.  Entries left at -1 carry a
    membership mask that is not (yet) a label and need interning.
    """
    W = labels.shape[1]
    row = np.zeros(W, dtype=np.uint64)
    ndeg = 0
    for i in range(pts.shape[0]):
        px = pts[i, 0]
        py = pts[i, 1]
        lab = _locate_one(px, py, cx, cy, rsq, xs, slab_ptr, arc_circ, arc_up, cell_masks, cell_label, box, tol, ywin, tol_r)
        if lab < 0:
            ndeg += 1
            _direct_mask(cx, cy, rsq, px, py, row)
            lab = _table_find(slots, labels, row)
        out[i] = lab
    return ndeg


@njit(cache=True)
def _masks_direct(pts, cx, cy, rsq, W):
    out = np.zeros((pts.shape[0], W), dtype=np.uint64)
    for i in range(pts.shape[0]):
        _direct_mask(cx, cy, rsq, pts[i, 0], pts[i, 1], out[i])
    return out


# --------------------------------------------------------------------------
# public types


def _row_to_int(row) -> int:
    v = 0
    for w, word in enumerate(row):
        v |= int(word) << (64 * w)
    return v


def _int_to_row(value: int, W: int) -> np.ndarray:
    return np.array([(value >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(W)], dtype=np.uint64)


class DiskSet:
    """Congruent closed disks; ``radius_sq`` is the predicate threshold."""

    __slots__ = ("centers", "radius_sq")

    def __init__(self, centers, radius: float | None = None, radius_sq: float | None = None):
        pts = as_points(centers)
        if (radius is None) == (radius_sq is None):
            raise InvalidInputError("give exactly one of radius / radius_sq")
        if radius_sq is None:
            radius = float(radius)
            radius_sq = radius * radius
        radius_sq = float(radius_sq)
        if not math.isfinite(radius_sq) or radius_sq <= 0.0:
            raise InvalidInputError("disk radius must be positive")
        self.centers = pts
        self.radius_sq = radius_sq

    @property
    def radius(self) -> float:
        return math.sqrt(self.radius_sq)

    def __len__(self):
        return len(self.centers)


class FaceTable:
    """Dense labels ``0..L-1`` for the distinct membership masks of a layer.

    Label 0 is always the empty mask (the unbounded face).  Masks realised
    only by degenerate query points are appended on first sight by
    :func:`locate_all`, after which the table should be treated as final.
    """

    def __init__(self, n_disks: int, masks: np.ndarray, slots: np.ndarray):
        self.n_disks = n_disks
        self.words = masks.shape[1]
        self._masks = masks
        self._slots = slots
        self._extra: list[int] = []
        self._extra_rows: list[np.ndarray] = []
        self._index: dict[int, int] | None = None

    @property
    def L(self) -> int:
        return len(self._masks) + len(self._extra)

    @property
    def beta(self) -> int:
        return max(1, math.ceil(math.log2(self.L))) if self.L > 1 else 1

    @property
    def masks(self) -> np.ndarray:
        """``(L, W)`` uint64 membership words, indexed by label."""
        if self._extra_rows:
            self._masks = np.vstack([self._masks, *self._extra_rows])
            self._extra_rows.clear()
            self._extra.clear()
            # rebuild the compiled lookup so every label is findable
            self._slots = _rehash(self._masks)
        return self._masks

    def membership_of(self, label: int) -> int:
        if label < 0 or label >= self.L:
            raise InvalidInputError(f"face label {label} out of range 0..{self.L - 1}")
        base = len(self._masks)
        if label >= base:
            return self._extra[label - base]
        return _row_to_int(self._masks[label])

    def label_of(self, mask: int) -> int | None:
        if self._index is None:
            self._index = {_row_to_int(row): i for i, row in enumerate(self._masks)}
            base = len(self._masks)
            for i, v in enumerate(self._extra):
                self._index[v] = base + i
        return self._index.get(int(mask))

    def intern(self, mask: int) -> int:
        found = self.label_of(mask)
        if found is not None:
            return found
        label = self.L
        self._extra.append(int(mask))
        self._extra_rows.append(_int_to_row(int(mask), self.words)[None, :])
        self._index[int(mask)] = label
        return label

    def labels(self):
        return range(self.L)

    def __repr__(self):
        return f"<FaceTable K={self.n_disks} L={self.L} beta={self.beta}>"


def _rehash(masks: np.ndarray) -> np.ndarray:
    thin = np.zeros(len(masks), dtype=np.uint8)
    relabelled, slots, cell_label = _label_cells(masks, thin, masks.shape[1])
    # masks are distinct, so labels are preserved; guard anyway
    if not np.array_equal(cell_label, np.arange(len(masks))):
        raise AssertionError("face table rehash changed labels")
    return slots


@dataclass
class SlabLocator:
    """Vertical slab decomposition over one :class:`DiskSet`."""

    disks: DiskSet
    xs: np.ndarray
    slab_ptr: np.ndarray
    arc_circ: np.ndarray
    arc_up: np.ndarray
    cell_masks: np.ndarray
    cell_label: np.ndarray
    box: np.ndarray
    tol: float
    ywin: float
    tol_r: float
    degenerate_hits: int = field(default=0)

    @property
    def n_slabs(self) -> int:
        return len(self.slab_ptr) - 1

    def slab_cells(self, s: int) -> np.ndarray:
        """Membership words of the cells of slab ``s``, bottom to top."""
        a, b = self.slab_ptr[s], self.slab_ptr[s + 1]
        return self.cell_masks[a + s : b + s + 1]

    def cell_sample(self, s: int, c: int) -> tuple[float, float]:
        """An interior point of cell ``c`` of slab ``s`` (mid-slab abscissa)."""
        cx, cy = self.disks.centers.xy[:, 0], self.disks.centers.xy[:, 1]
        x = 0.5 * (self.xs[s] + self.xs[s + 1])
        p0, p1 = self.slab_ptr[s], self.slab_ptr[s + 1]
        ys = [_arc_y(cx, cy, self.disks.radius_sq, self.arc_circ[t], self.arc_up[t] == 1, x) for t in range(p0, p1)]
        if not ys:
            return x, 0.0
        if c == 0:
            return x, ys[0] - 1.0
        if c == len(ys):
            return x, ys[-1] + 1.0
        return x, 0.5 * (ys[c - 1] + ys[c])


def build_face_structure(disks: DiskSet) -> tuple[FaceTable, SlabLocator]:
    """Build the face labels and the point locator for ``disks``."""
    xy = disks.centers.xy
    K = len(xy)
    W = max(1, -(-K // 64))
    cx = np.ascontiguousarray(xy[:, 0])
    cy = np.ascontiguousarray(xy[:, 1])
    rsq = disks.radius_sq
    r = math.sqrt(rsq)
    scale = max(1.0, float(np.abs(xy).max())) + r
    tol = TOL * scale
    xs, slab_ptr, arc_circ, arc_up, cell_masks, cell_thin = _build(cx, cy, rsq, W, tol)
    masks, slots, cell_label = _label_cells(cell_masks, cell_thin, W)
    box = np.array(
        [cx.min() - r - tol, cx.max() + r + tol, cy.min() - r - tol, cy.max() + r + tol],
        dtype=np.float64,
    )
    loc = SlabLocator(
        disks=disks,
        xs=xs,
        slab_ptr=slab_ptr,
        arc_circ=arc_circ,
        arc_up=arc_up,
        cell_masks=cell_masks,
        cell_label=cell_label,
        box=box,
        tol=tol,
        ywin=Y_WINDOW * scale,
        tol_r=TOL * scale * (2.0 * r + TOL * scale),
    )
    return FaceTable(K, masks, slots), loc


def _run_locate(loc: SlabLocator, tab: FaceTable, pts: np.ndarray) -> np.ndarray:
    xy = loc.disks.centers.xy
    cx = np.ascontiguousarray(xy[:, 0])
    cy = np.ascontiguousarray(xy[:, 1])
    pts = np.ascontiguousarray(pts, dtype=np.float64).reshape(-1, 2)
    out = np.empty(len(pts), dtype=np.int64)
    if len(pts) == 0:
        return out
    masks = tab.masks
    ndeg = _locate_many(
        pts, cx, cy, loc.disks.radius_sq, loc.xs, loc.slab_ptr, loc.arc_circ, loc.arc_up,
        loc.cell_masks, loc.cell_label, loc.box, loc.tol, loc.ywin, loc.tol_r,
        tab._slots, masks, out,
    )
    loc.degenerate_hits += int(ndeg)
    missing = np.flatnonzero(out < 0)
    if len(missing):
        rows = _masks_direct(pts[missing], cx, cy, loc.disks.radius_sq, tab.words)
        for i, row in zip(missing, rows):
            out[i] = tab.intern(_row_to_int(row))
        tab.masks  # fold the new labels into the compiled lookup
    return out


def locate(loc: SlabLocator, tab: FaceTable, p) -> int:
    """Face label of point ``p``: the label of ``{k : within(center_k, p)}``."""
    q = as_points([p])
    return int(_run_locate(loc, tab, q.xy)[0])


def locate_all(loc: SlabLocator, tab: FaceTable, B) -> np.ndarray:
    """Labels for every point of ``B`` (order preserved, int64 array)."""
    if B is None or len(B) == 0:
        return np.empty(0, dtype=np.int64)
    pts = B.xy if hasattr(B, "xy") else np.asarray(B, dtype=np.float64)
    return _run_locate(loc, tab, pts)


def brute_membership(disks: DiskSet, p) -> int:
    """Membership mask of ``p`` by one predicate call per disk."""
    px, py = float(p[0]), float(p[1])
    v = 0
    for k, (x, y) in enumerate(disks.centers.xy):
        dx = float(x) - px
        dy = float(y) - py
        if dx * dx + dy * dy <= disks.radius_sq:
            v |= 1 << k
    return v


def block_restrict(tab: FaceTable, face: int, block_range: tuple[int, int]) -> int:
    """Layer mask of ``face`` cut down to disks ``lo..hi`` (0-based, inclusive), shifted to bit 0."""
    lo, hi = block_range
    if not (0 <= lo <= hi < tab.n_disks):
        raise InvalidInputError(f"block range {block_range} outside 0..{tab.n_disks - 1}")
    width = hi - lo + 1
    return (tab.membership_of(face) >> lo) & ((1 << width) - 1)


def block_masks(tab: FaceTable, lo: int, hi: int) -> np.ndarray:
    """:func:`block_restrict` for every label at once, as a uint64 array (width <= 64)."""
    width = hi - lo + 1
    if width > 64:
        raise InvalidInputError("a block holds at most 64 disks")
    masks = tab.masks
    w0, off = divmod(lo, 64)
    out = masks[:, w0] >> np.uint64(off)
    if off and w0 + 1 < masks.shape[1]:
        out = out | (masks[:, w0 + 1] << np.uint64(64 - off))
    if width < 64:
        out = out & np.uint64((1 << width) - 1)
    return np.ascontiguousarray(out, dtype=np.uint64)


def bounding_box(disks_xy: np.ndarray, radius_sq: float) -> tuple[np.ndarray, float]:
    """Box outside which no point is within any disk, widened by the tolerance."""
    r = math.sqrt(radius_sq)
    scale = max(1.0, float(np.abs(disks_xy).max())) + r
    tol = TOL * scale
    cx, cy = disks_xy[:, 0], disks_xy[:, 1]
    box = np.array([cx.min() - r - tol, cx.max() + r + tol, cy.min() - r - tol, cy.max() + r + tol])
    return box, tol


def in_box(box: np.ndarray, pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    return (x >= box[0]) & (x <= box[1]) & (y >= box[2]) & (y <= box[3])


def direct_face_labels(disks_xy: np.ndarray, radius_sq: float, B) -> tuple[FaceTable, np.ndarray]:
    """Face table and labels from direct membership tests, no locator.

    Points outside the disks' bounding box get the empty face without a
    test; the rest cost ``K`` predicate calls each.  Label 0 is the empty
    mask and labels are assigned only to memberships that actually occur.
    """
    xy = np.ascontiguousarray(disks_xy, dtype=np.float64)
    K = len(xy)
    W = max(1, -(-K // 64))
    pts = B.xy if hasattr(B, "xy") else np.asarray(B, dtype=np.float64).reshape(-1, 2)
    box, _ = bounding_box(xy, radius_sq)
    hit = np.flatnonzero(in_box(box, pts))
    out = np.zeros(len(pts), dtype=np.int64)
    rows = _masks_direct(np.ascontiguousarray(pts[hit]), np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1]), float(radius_sq), W)
    masks, slots, lab = _label_cells(rows, np.zeros(len(rows), dtype=np.uint8), W)
    out[hit] = lab
    return FaceTable(K, masks, slots), out


@njit(cache=True)
def _depth_many(pts, cx, cy, rsq, xs, slab_ptr, arc_circ, arc_up, cell_masks, cell_idx, cell_depth, box, tol, ywin, tol_r):
    total = 0
    ndeg = 0
    for i in range(pts.shape[0]):
        px = pts[i, 0]
        py = pts[i, 1]
        c = _locate_one(px, py, cx, cy, rsq, xs, slab_ptr, arc_circ, arc_up, cell_masks, cell_idx, box, tol, ywin, tol_r)
        if c < 0:
            ndeg += 1
            for k in range(cx.shape[0]):
                if sq_dist_nb(cx[k], cy[k], px, py) <= rsq:
                    total += 1
        else:
            total += cell_depth[c]
    return total, ndeg


def depth_sum(disks: DiskSet, B) -> int:
    """Sum over the points of ``B`` of the number of disks containing them.

    Same slab structure and degeneracy handling as :func:`locate_all`, but
    each cell carries its depth instead of a face label.
    """
    pts = B.xy if hasattr(B, "xy") else np.asarray(B, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        return 0
    xy = disks.centers.xy
    K = len(xy)
    W = max(1, -(-K // 64))
    cx = np.ascontiguousarray(xy[:, 0])
    cy = np.ascontiguousarray(xy[:, 1])
    rsq = disks.radius_sq
    box, tol = bounding_box(xy, rsq)
    r = math.sqrt(rsq)
    scale = max(1.0, float(np.abs(xy).max())) + r
    xs, slab_ptr, arc_circ, arc_up, cell_masks, cell_thin = _build(cx, cy, rsq, W, tol)
    depth = np.bitwise_count(cell_masks).sum(axis=1).astype(np.int64)
    # the cell index doubles as the "label"; thin cells force the direct test
    idx = np.where(cell_thin == 1, -1, np.arange(len(cell_masks)))
    total, _ = _depth_many(
        np.ascontiguousarray(pts, dtype=np.float64), cx, cy, rsq, xs, slab_ptr, arc_circ, arc_up,
        cell_masks, idx, depth, box, tol, Y_WINDOW * scale, TOL * scale * (2.0 * r + TOL * scale),
    )
    return int(total)
