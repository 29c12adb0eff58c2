"""Timing harness: quadratic DP against the layered automaton pipeline."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

from .core import DEFAULT_PARAMS, MoveModel, TuningParams
from .datasets import staircase_sq, walk_pair
from .lowerbound import generate as lb_generate
from .lowerbound import verify_exponential
from .naive import decide_naive_sq
from .pipeline import decide_sq

BENCH_FIELDS = ("n", "m", "naive_ms", "fast_ms", "ratio", "answer", "agree", "params")
LB_FIELDS = ("m", "subsets", "states", "expected", "ok")


@dataclass
class BenchRow:
    n: int
    m: int
    naive_ms: float | None
    fast_ms: float | None
    ratio: float | None
    answer: bool
    agree: bool | None
    params: str

    def as_dict(self) -> dict:
        return asdict(self)


def params_tag(p: TuningParams) -> str:
    return f"s={p.block_size},t={p.blocks_per_layer},tau={p.chunk_len},{p.table_mode.value},{p.point_location}" + ("" if p.skip_inert else ",full")


def _best_of(fn, repeat: int) -> tuple[float, object]:
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def warm_up(params: TuningParams = DEFAULT_PARAMS, model=MoveModel.ORTHOGONAL) -> None:
    """Compile every kernel on a tiny instance so timings exclude JIT."""
    A, B = walk_pair(300, 0)
    dsq = staircase_sq(A, B)
    decide_sq(A, B, dsq, params, model)
    decide_naive_sq(A, B, dsq, MoveModel.parse(model))


def run_walks(sizes, seed: int = 0, algo: str = "both", params: TuningParams = DEFAULT_PARAMS, model=MoveModel.ORTHOGONAL, repeat: int = 1) -> list[BenchRow]:
    """One row per size ``n`` (= ``m``): a random walk against a noisy copy.

    The threshold is the leash of the lock-step staircase traversal, so the
    answer is yes and neither algorithm can stop early.
    """
    model = MoveModel.parse(model)
    warm_up(params, model)
    rows = []
    for i, n in enumerate(sizes):
        A, B = walk_pair(int(n), seed + i)
        dsq = staircase_sq(A, B)
        tn = tf = None
        rn = rf = None
        if algo in ("naive", "both"):
            tn, rn = _best_of(lambda: decide_naive_sq(A, B, dsq, model), repeat)
        if algo in ("fast", "both"):
            tf, rf = _best_of(lambda: decide_sq(A, B, dsq, params, model), repeat)
        answer = bool(rf if rf is not None else rn)
        rows.append(
            BenchRow(
                n=int(n),
                m=int(n),
                naive_ms=None if tn is None else round(tn * 1e3, 3),
                fast_ms=None if tf is None else round(tf * 1e3, 3),
                ratio=None if tn is None or tf is None else round(tn / tf, 3),
                answer=answer,
                agree=None if rn is None or rf is None else bool(rn) == bool(rf),
                params=params_tag(params),
            )
        )
    return rows


def run_lowerbound(ms) -> list[dict]:
    rows = []
    for m in ms:
        rep = verify_exponential(lb_generate(int(m)), with_diagonal=False)
        rows.append({"m": int(m), "subsets": rep.subsets, "states": rep.distinct_states, "expected": 2 ** int(m), "ok": rep.ok})
    return rows


def format_table(rows: list[dict], fields) -> str:
    cells = [[("-" if r[f] is None else str(r[f])) for f in fields] for r in rows]
    widths = [max(len(f), *(len(c[i]) for c in cells)) if cells else len(f) for i, f in enumerate(fields)]
    line = lambda vals: "| " + " | ".join(v.rjust(w) for v, w in zip(vals, widths)) + " |"
    out = [line(fields), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    out += [line(c) for c in cells]
    return "\n".join(out)
