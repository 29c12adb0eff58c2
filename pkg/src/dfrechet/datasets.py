"""Seeded point-sequence generators."""

from __future__ import annotations

import numpy as np

from .core import PointSeq

KINDS = ("random-walk", "uniform", "perturbed")


def random_walk(n: int, seed: int = 0, step: float = 1.0) -> PointSeq:
    rng = np.random.default_rng(seed)
    return PointSeq(np.cumsum(rng.normal(scale=step, size=(n, 2)), axis=0), "A")


def uniform(n: int, seed: int = 0, size: float = 4.0) -> PointSeq:
    rng = np.random.default_rng(seed)
    return PointSeq(rng.uniform(0.0, size, size=(n, 2)))


def perturbed(base: PointSeq, seed: int = 0, noise: float = 0.5) -> PointSeq:
    rng = np.random.default_rng(seed)
    return PointSeq(base.xy + rng.normal(scale=noise, size=base.xy.shape), "B")


def generate(kind: str, n: int, seed: int = 0) -> PointSeq:
    if kind == "random-walk":
        return random_walk(n, seed)
    if kind == "uniform":
        return uniform(n, seed)
    if kind == "perturbed":
        # a noisy copy of the walk with the same seed
        return perturbed(random_walk(n, seed), seed + 1)
    raise ValueError(f"unknown generator {kind!r}; choose from {KINDS}")


def walk_pair(n: int, seed: int = 0, noise: float = 0.5) -> tuple[PointSeq, PointSeq]:
    """A random walk and a noisy copy of it: similar curves of equal length."""
    A = random_walk(n, seed)
    return A, perturbed(A, seed + 1, noise)


def staircase_sq(A: PointSeq, B: PointSeq) -> float:
    """Squared leash length of the traversal ``(1,1),(2,1),(2,2),(3,2),...``.

    For equal lengths this is a feasible threshold, so a decision at this
    value answers yes after doing all of its work.
    """
    a, b = A.xy, B.xy
    k = min(len(a), len(b))
    d = a[:k] - b[:k]
    best = float((d * d).sum(axis=1).max())
    if k > 1:
        e = a[1:k] - b[: k - 1]
        best = max(best, float((e * e).sum(axis=1).max()))
    return best
