"""Shared domain types, the distance predicate and the traversal model.

Every comparison between an A-point and a B-point in this package goes
through :func:`sq_dist` (or its compiled twin :func:`sq_dist_nb`) followed by
``<= delta_sq``.  Both evaluate ``dx*dx + dy*dy`` in the same IEEE order, so
the quadratic oracle and the automaton pipeline see bit-identical answers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit

WORD_BITS = 64


class FrechetError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(FrechetError, ValueError):
    pass


class InvalidPathError(FrechetError, ValueError):
    pass


class ConfigurationError(FrechetError, ValueError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


class MoveModel(enum.Enum):
    """Which simultaneous hops the frogs may make."""

    ORTHOGONAL = "orthogonal"
    WITH_DIAGONAL = "diagonal"

    @property
    def diagonal(self) -> bool:
        return self is MoveModel.WITH_DIAGONAL

    @classmethod
    def parse(cls, value: "MoveModel | str") -> "MoveModel":
        if isinstance(value, MoveModel):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        if key in ("withdiagonal", "with_diagonal", "diag"):
            return cls.WITH_DIAGONAL
        raise InvalidInputError(f"unknown move model {value!r}")


class TableMode(enum.Enum):
    EAGER = "eager"
    LAZY = "lazy"

    @classmethod
    def parse(cls, value: "TableMode | str") -> "TableMode":
        if isinstance(value, TableMode):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidInputError(f"unknown table mode {value!r}") from None


class PointSeq:
    """An immutable ordered sequence of planar points.

    The coordinates live in a read-only ``(len, 2)`` float64 array, which is
    what the compiled kernels consume directly.
    """

    __slots__ = ("_xy", "role")

    def __init__(self, points, role: str = ""):
        xy = np.array(points, dtype=np.float64, copy=True)
        if xy.size == 0:
            xy = xy.reshape(0, 2)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise InvalidInputError(f"expected a sequence of (x, y) pairs, got shape {xy.shape}")
        if len(xy) == 0:
            raise InvalidInputError("a point sequence needs at least one point")
        if not np.all(np.isfinite(xy)):
            raise InvalidInputError("point coordinates must be finite")
        xy.flags.writeable = False
        self._xy = xy
        self.role = role

    @property
    def xy(self) -> np.ndarray:
        return self._xy

    def __len__(self) -> int:
        return len(self._xy)

    def __getitem__(self, i: int) -> Point2:
        x, y = self._xy[i]
        return Point2(float(x), float(y))

    def __iter__(self):
        for x, y in self._xy:
            yield Point2(float(x), float(y))

    def __eq__(self, other):
        if not isinstance(other, PointSeq):
            return NotImplemented
        return np.array_equal(self._xy, other._xy)

    def __hash__(self):
        return hash(self._xy.tobytes())

    def __repr__(self):
        tag = f" {self.role}" if self.role else ""
        return f"<PointSeq{tag} len={len(self)}>"


def as_points(seq, role: str = "") -> PointSeq:
    """Coerce lists/arrays into a :class:`PointSeq` (no copy if already one)."""
    if isinstance(seq, PointSeq):
        return seq
    return PointSeq(seq, role=role)


def _coords(p) -> tuple[float, float]:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InvalidInputError(f"non-finite point {p!r}")
    return x, y


def sq_dist(p, q) -> float:
    px, py = _coords(p)
    qx, qy = _coords(q)
    dx = px - qx
    dy = py - qy
    return dx * dx + dy * dy


@njit(cache=True, inline="always")
def sq_dist_nb(px, py, qx, qy):
    dx = px - qx
    dy = py - qy
    return dx * dx + dy * dy


def check_delta(delta: float) -> float:
    delta = float(delta)
    if not math.isfinite(delta) or delta < 0:
        raise InvalidInputError(f"delta must be a finite non-negative number, got {delta!r}")
    return delta


def within(p, q, delta: float) -> bool:
    """True iff ``q`` lies in the closed disk of radius ``delta`` around ``p``."""
    delta = check_delta(delta)
    return sq_dist(p, q) <= delta * delta


def within_sq(p, q, delta_sq: float) -> bool:
    return sq_dist(p, q) <= delta_sq


Traversal = Sequence[tuple[int, int]]


def check_traversal(path: Traversal, A, B, delta: float, model: MoveModel | str = MoveModel.ORTHOGONAL) -> bool:
    """Validate a frog traversal given as 1-based index pairs.

    Raises :class:`InvalidPathError` when an index lies outside ``A`` or
    ``B``; every other defect (wrong endpoints, illegal hop, leash too short)
    makes the function return False.
    """
    A = as_points(A, "A")
    B = as_points(B, "B")
    model = MoveModel.parse(model)
    dsq = check_delta(delta) ** 2
    m, n = len(A), len(B)
    steps = [(int(i), int(j)) for i, j in path]
    for i, j in steps:
        if not (1 <= i <= m and 1 <= j <= n):
            raise InvalidPathError(f"index pair ({i}, {j}) outside 1..{m} x 1..{n}")
    if not steps or steps[0] != (1, 1) or steps[-1] != (m, n):
        return False
    for i, j in steps:
        if not within_sq(A[i - 1], B[j - 1], dsq):
            return False
    for (i0, j0), (i1, j1) in zip(steps, steps[1:]):
        di, dj = i1 - i0, j1 - j0
        if (di, dj) in ((1, 0), (0, 1)):
            continue
        if (di, dj) == (1, 1) and model.diagonal:
            continue
        return False
    return True


POINT_LOCATION = ("direct", "slab")


@dataclass(frozen=True)
class TuningParams:
    """Sizes of the block/layer/chunk decomposition.

    ``block_size`` counts A-points per block including the endpoint shared
    with the next block, so a layer of ``blocks_per_layer`` blocks spans
    ``blocks_per_layer * (block_size - 1) + 1`` points.  ``face_label_bits``
    pins the label width; ``None`` sizes it per layer from the face count.
    ``point_location`` picks how a layer maps B-points to face labels:
    ``"direct"`` tests the disks of the layer's bounding box hits one by
    one, ``"slab"`` builds the slab locator.  Both give the same memberships.
    ``skip_inert`` restricts each layer to the B-positions that can change:
    from the first set flag to the end of the run of B-points inside the
    layer's bounding box that holds the last set flag.  Elsewhere every
    valid set is empty, so the skipped outputs are zero either way.
    """

    block_size: int = 8
    blocks_per_layer: int = 8
    chunk_len: int = 4
    face_label_bits: int | None = None
    table_mode: TableMode = TableMode.LAZY
    eager_budget: int = 1 << 22
    point_location: str = "direct"
    skip_inert: bool = True

    def __post_init__(self):
        object.__setattr__(self, "table_mode", TableMode.parse(self.table_mode))
        if self.point_location not in POINT_LOCATION:
            raise ConfigurationError(f"point_location must be one of {POINT_LOCATION}, got {self.point_location!r}")
        if self.block_size < 2:
            raise ConfigurationError("block_size must be at least 2")
        if self.block_size > WORD_BITS:
            raise ConfigurationError(f"block_size is capped at {WORD_BITS} (one machine word per valid set)")
        if self.blocks_per_layer < 1:
            raise ConfigurationError("blocks_per_layer must be at least 1")
        if self.chunk_len < 1:
            raise ConfigurationError("chunk_len must be at least 1")
        if self.face_label_bits is not None:
            if self.face_label_bits < 1:
                raise ConfigurationError("face_label_bits must be at least 1")
            self.check_word(self.face_label_bits)

    def check_word(self, beta: int) -> None:
        if self.chunk_len * (beta + 1) > WORD_BITS:
            raise ConfigurationError(
                f"chunk_len * (face_label_bits + 1) = {self.chunk_len} * {beta + 1} exceeds "
                f"the {WORD_BITS}-bit word; lower chunk_len or use smaller layers"
            )

    @property
    def layer_span(self) -> int:
        return self.blocks_per_layer * (self.block_size - 1) + 1

    def n_chunks(self, n: int) -> int:
        return -(-(n - 1) // self.chunk_len) if n > 1 else 0

    def n_layers(self, m: int) -> int:
        return -(-(m - 1) // (self.layer_span - 1)) if m > 1 else 1

    def replace(self, **changes) -> "TuningParams":
        fields = dict(
            block_size=self.block_size,
            blocks_per_layer=self.blocks_per_layer,
            chunk_len=self.chunk_len,
            face_label_bits=self.face_label_bits,
            table_mode=self.table_mode,
            eager_budget=self.eager_budget,
            point_location=self.point_location,
            skip_inert=self.skip_inert,
        )
        fields.update(changes)
        return TuningParams(**fields)


DEFAULT_PARAMS = TuningParams()


def pairwise_sq(A: PointSeq, B: PointSeq) -> np.ndarray:
    """All ``m*n`` squared distances, evaluated exactly like :func:`sq_dist`."""
    a = A.xy
    b = B.xy
    dx = a[:, 0][:, None] - b[:, 0][None, :]
    dy = a[:, 1][:, None] - b[:, 1][None, :]
    return dx * dx + dy * dy

