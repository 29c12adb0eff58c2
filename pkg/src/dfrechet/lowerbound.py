"""Disk configurations on which one block has exponentially many states.

``m`` red unit disks sit on the x-axis at spacing ``eps`` going left; each
red disk has a blue partner ``2 - eps/2`` to its right, so partners overlap
in a thin lens while a blue disk misses every red disk further left.  The
A-sequence alternates blue, red, blue, red, ...

Walking the B-frog through the lens points ``b_1..b_m`` keeps every red
disk reachable.  Stepping up to ``b'_k``, just above lens ``k`` and outside
both of its disks, strands the A-frog's red option ``D_{2k}``.  So choosing
which detours to take selects the exact subset of red disks that are still
reachable at the final point ``b_{m+1}``, which lies in every red disk and
in no blue one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .automaton import AggregateState, BlockSpec, StepInput, start_state, transition_basic
from .core import FrechetError, InvalidInputError, MoveModel, PointSeq, sq_dist
from .naive import reach_matrix

MAX_M = 20
MAX_VERIFY_M = 12


class ConstructionError(FrechetError, RuntimeError):
    pass


@dataclass(frozen=True)
class LbInstance:
    """A generated configuration; indices below are 1-based as in the docs."""

    m: int
    epsilon: float
    A: PointSeq
    lens: tuple[tuple[float, float], ...]
    above: tuple[tuple[float, float], ...]
    deep: tuple[float, float]
    radius: float = 1.0

    def red(self, k: int) -> int:
        """0-based A-index of red disk ``D_{2k}``."""
        return 2 * k - 1

    def blue(self, k: int) -> int:
        return 2 * k - 2

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "epsilon": self.epsilon,
            "radius": self.radius,
            "A": self.A.xy.tolist(),
            "lens": [list(p) for p in self.lens],
            "above": [list(p) for p in self.above],
            "deep": list(self.deep),
        }


def _membership(centers: np.ndarray, p, rsq: float) -> int:
    v = 0
    for k, c in enumerate(centers):
        if sq_dist(c, p) <= rsq:
            v |= 1 << k
    return v


def expected_lens(m: int, i: int) -> int:
    """Membership of ``b_i``: reds ``D_2..D_{2i}`` and blues ``D_{2i-1}..D_{2m-1}``."""
    v = 0
    for k in range(1, i + 1):
        v |= 1 << (2 * k - 1)
    for k in range(i, m + 1):
        v |= 1 << (2 * k - 2)
    return v


def expected_deep(m: int) -> int:
    return sum(1 << (2 * k - 1) for k in range(1, m + 1))


def check_instance(inst: LbInstance) -> list[str]:
    """Every membership the construction promises, tested with the shared predicate."""
    m = inst.m
    xy = inst.A.xy
    rsq = inst.radius * inst.radius
    problems = []
    for i in range(1, m + 1):
        want = expected_lens(m, i)
        got = _membership(xy, inst.lens[i - 1], rsq)
        if got != want:
            problems.append(f"b_{i}: membership {got:#x}, expected {want:#x}")
        want_above = want & ~(1 << (2 * i - 2)) & ~(1 << (2 * i - 1))
        got = _membership(xy, inst.above[i - 1], rsq)
        if got != want_above:
            problems.append(f"b'_{i}: membership {got:#x}, expected {want_above:#x}")
    got = _membership(xy, inst.deep, rsq)
    if got != expected_deep(m):
        problems.append(f"b_{m + 1}: membership {got:#x}, expected {expected_deep(m):#x}")
    for k in range(1, m + 1):
        p, r = xy[inst.blue(k)], xy[inst.red(k)]
        if not sq_dist(p, r) <= 4 * rsq:
            problems.append(f"D_{2 * k - 1} and D_{2 * k} do not meet")
        if k < m and not sq_dist(p, xy[inst.red(k + 1)]) > 4 * rsq:
            problems.append(f"D_{2 * k - 1} meets D_{2 * k + 2}")
    return problems


def generate(m: int) -> LbInstance:
    if not 1 <= m <= MAX_M:
        raise InvalidInputError(f"m must be in 1..{MAX_M}, got {m}")
    eps = 1.0 / (4 * m)
    reds = [(-(k - 1) * eps, 0.0) for k in range(1, m + 1)]
    blues = [(x + 2.0 - eps / 2, 0.0) for x, _ in reds]
    centers = np.array([c for pair in zip(blues, reds) for c in pair], dtype=np.float64)
    lens = [(x + 1.0 - eps / 4, 0.0) for x, _ in reds]
    above = []
    for i, (bx, _) in enumerate(lens, start=1):
        # leaving height of the two lens disks, then of the lowest other disk kept
        y_star = math.sqrt(1.0 - (1.0 - eps / 4) ** 2)
        keep = expected_lens(m, i) & ~(0b11 << (2 * i - 2))
        exits = [math.sqrt(max(0.0, 1.0 - (bx - centers[k, 0]) ** 2)) for k in range(2 * m) if keep >> k & 1]
        ceiling = min(exits) if exits else y_star + 1.0
        above.append((bx, 0.5 * (y_star + ceiling)))
    inst = LbInstance(m, eps, PointSeq(centers, "A"), tuple(lens), tuple(above), (0.0, 0.0))
    problems = check_instance(inst)
    if problems:
        raise ConstructionError(f"m={m}: " + "; ".join(problems))
    return inst


def sequence_for_subset(inst: LbInstance, S) -> PointSeq:
    """``B_S``: the lens walk with a detour above lens ``k`` for every red ``k`` not in ``S``.

    ``S`` holds red indices ``k`` in ``1..m`` (the disk ``D_{2k}``).
    """
    S = set(int(k) for k in S)
    if not S <= set(range(1, inst.m + 1)):
        raise InvalidInputError(f"subset {sorted(S)} is not inside 1..{inst.m}")
    pts = []
    for k in range(1, inst.m + 1):
        pts.append(inst.lens[k - 1])
        if k not in S:
            pts.append(inst.above[k - 1])
    pts.append(inst.deep)
    return PointSeq(pts, "B")


def red_mask(S) -> int:
    return sum(1 << (2 * k - 1) for k in S)


@dataclass
class LbReport:
    m: int
    subsets: int = 0
    distinct_states: int = 0
    mismatches: list[tuple[tuple[int, ...], int, int]] = field(default_factory=list)
    naive_mismatches: list[tuple[tuple[int, ...], int, int]] = field(default_factory=list)
    diagonal_distinct: int | None = None

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.naive_mismatches and self.distinct_states == 2**self.m

    def summary(self) -> str:
        head = f"m={self.m}: {self.distinct_states} distinct final states over {self.subsets} subsets (expected {2**self.m})"
        if self.diagonal_distinct is not None:
            head += f"; diagonal moves: {self.diagonal_distinct}"
        if self.mismatches:
            S, got, want = self.mismatches[0]
            head += f"; automaton mismatch for S={list(S)}: {got:#x} != {want:#x}"
        if self.naive_mismatches:
            S, got, want = self.naive_mismatches[0]
            head += f"; DP mismatch for S={list(S)}: {got:#x} != {want:#x}"
        return head


def _run_block(inst: LbInstance, B: PointSeq, model: MoveModel) -> AggregateState:
    xy = inst.A.xy
    s = 2 * inst.m
    masks = [_membership(xy, p, inst.radius**2) for p in B]
    spec = BlockSpec.from_masks(masks, s)
    # every position gets its own label; only memberships matter
    flag = 1 if sq_dist(xy[0], B[0]) <= inst.radius**2 else 0
    state = start_state(spec, 0, flag)
    for i in range(1, len(B)):
        state = transition_basic(spec, state, StepInput(i, 0), model)
    return AggregateState(masks[-1], state.valid)


def _subsets(m: int):
    for r in range(m + 1):
        yield from combinations(range(1, m + 1), r)


def verify_exponential(inst: LbInstance, model=MoveModel.ORTHOGONAL, with_diagonal: bool = True) -> LbReport:
    """Run the single block ``a_1..a_2m`` on every ``B_S`` and compare with ``S``.

    The final valid set must be exactly the red disks of ``S``, and the
    quadratic DP must agree on which A-points reach the last B-point.  With
    ``with_diagonal`` the distinct-state count under diagonal moves is
    recorded as well, without being checked.
    """
    if inst.m > MAX_VERIFY_M:
        raise InvalidInputError(f"verification enumerates 2^m subsets; m is capped at {MAX_VERIFY_M}")
    model = MoveModel.parse(model)
    rep = LbReport(inst.m)
    finals = set()
    diag_finals = set()
    for S in _subsets(inst.m):
        B = sequence_for_subset(inst, S)
        want = red_mask(S)
        st = _run_block(inst, B, model)
        finals.add(st)
        if st.valid != want:
            rep.mismatches.append((S, st.valid, want))
        col = reach_matrix(inst.A, B, inst.radius, model)[:, -1]
        got = sum(1 << i for i in np.flatnonzero(col))
        if got != want:
            rep.naive_mismatches.append((S, got, want))
        if with_diagonal and not model.diagonal:
            diag_finals.add(_run_block(inst, B, MoveModel.WITH_DIAGONAL))
        rep.subsets += 1
    rep.distinct_states = len(finals)
    if with_diagonal and not model.diagonal:
        rep.diagonal_distinct = len(diag_finals)
    return rep
