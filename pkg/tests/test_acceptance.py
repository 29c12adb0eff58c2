"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import time
import tracemalloc
from pathlib import Path

import numpy as np
from acceptance_log import RESULTS
from dfrechet.arrangement import DiskSet, brute_membership, build_face_structure, locate_all
from dfrechet.automaton import (
    BlockSpec,
    FlagStream,
    build_compact,
    chunk_inputs,
    decode_chunk,
    encode_chunk,
    run_basic,
    run_compact,
    start_state,
)
from dfrechet.bench import run_walks
from dfrechet.core import MoveModel, PointSeq, TableMode, TuningParams, pairwise_sq
from dfrechet.datasets import random_walk
from dfrechet.lowerbound import generate, verify_exponential
from dfrechet.naive import decide_naive_sq, frechet_naive_sq, reach_rows_sq
from dfrechet.pipeline import decide_sq, face_words
from dfrechet.selection import optimize_sq

ORTH, DIAG = MoveModel.ORTHOGONAL, MoveModel.WITH_DIAGONAL
MODELS = (ORTH, DIAG)
ROOT = Path(__file__).resolve().parents[1]

SETTINGS = [
    TuningParams(),
    TuningParams(block_size=2, blocks_per_layer=1, chunk_len=1),
    TuningParams(block_size=3, blocks_per_layer=2, chunk_len=2),
    TuningParams(block_size=4, blocks_per_layer=3, chunk_len=1, table_mode=TableMode.EAGER),
    TuningParams(block_size=16, blocks_per_layer=2, chunk_len=5, point_location="slab"),
    TuningParams(block_size=6, blocks_per_layer=1, chunk_len=8),
    TuningParams(skip_inert=False),
    TuningParams(block_size=2, blocks_per_layer=1, chunk_len=1, skip_inert=False),
]


def report(capsys, k, ok, detail):
    RESULTS[k] = (bool(ok), detail)
    with capsys.disabled():
        print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def random_delta_sq(rng, D):
    v = float(rng.choice(D))
    r = rng.random()
    if r < 0.25:
        return float(np.nextafter(v, 0.0))
    if r < 0.5:
        return float(np.nextafter(v, np.inf))
    if r < 0.75:
        return v * float(rng.uniform(0.9, 1.1))
    return v


def test_c01_decide_oracle_equivalence(capsys):
    rng = np.random.default_rng(20240101)
    t0 = time.perf_counter()
    bad = []
    runs = 0
    N = 10_000
    for t in range(N):
        m, n = (int(v) for v in rng.integers(1, 41, size=2))
        A = PointSeq(rng.uniform(0, 4, size=(m, 2)))
        B = PointSeq(rng.uniform(0, 4, size=(n, 2)))
        dsq = random_delta_sq(rng, pairwise_sq(A, B).ravel())
        for model in MODELS:
            want = decide_naive_sq(A, B, dsq, model)
            for k, p in enumerate(SETTINGS):
                runs += 1
                if decide_sq(A, B, dsq, p, model) != want:
                    bad.append((t, model.value, k))
    secs = time.perf_counter() - t0
    ok = not bad and secs < 300
    report(capsys, 1, ok, f"{N} instances x {len(SETTINGS)} settings x 2 models = {runs} decisions, {len(bad)} disagreements, {secs:.1f} s")


def test_c02_optimize_oracle_equivalence(capsys):
    rng = np.random.default_rng(7)
    bad = []
    N = 1000
    for t in range(N):
        m, n = (int(v) for v in rng.integers(1, 31, size=2))
        if t % 4 == 0:
            # integer grids produce many tied distances
            A, B = rng.integers(0, 5, size=(m, 2)).astype(float), rng.integers(0, 5, size=(n, 2)).astype(float)
        else:
            A, B = rng.uniform(0, 4, size=(m, 2)), rng.uniform(0, 4, size=(n, 2))
        model = MODELS[t % 2]
        p = SETTINGS[t % len(SETTINGS)]
        got = optimize_sq(A, B, p, model, seed=t, threshold=(16, 4096)[t % 2])
        want = frechet_naive_sq(A, B, model)
        if got != want or math.sqrt(got) != math.sqrt(want):
            bad.append((t, got, want))
    report(capsys, 2, not bad, f"{N} instances, {len(bad)} values differing from the DP")


def test_c03_compact_vs_basic(capsys):
    rng = np.random.default_rng(3)
    bad = []
    eager_runs = 0
    N = 10_000
    for t in range(N):
        s = int(rng.integers(1, 11))
        L = int(rng.integers(1, 9))
        masks = [int(v) for v in rng.integers(0, 1 << s, size=L)]
        if t % 2:
            masks = [v | int(rng.integers(0, 1 << s)) for v in masks]
        spec = BlockSpec.from_masks(masks, s)
        n = int(rng.integers(0, 65))
        faces = rng.integers(0, L, size=n).tolist()
        flags = (rng.random(n) < rng.random()).astype(int).tolist()
        model = MODELS[t % 2]
        tau = int(rng.integers(1, 7))
        start = start_state(spec, int(rng.integers(0, L)), int(rng.integers(0, 2)))
        ref, outs = run_basic(spec, start, list(zip(faces, flags)), model)
        chunks = chunk_inputs(faces, flags, spec.beta, tau)
        modes = [TableMode.LAZY]
        if tau * (spec.beta + 1) <= 12:
            modes.append(TableMode.EAGER)
            eager_runs += 1
        results = []
        for mode in modes:
            final, fs = run_compact(build_compact(spec, spec.beta, tau, model, mode), start, chunks)
            results.append((final.valid, fs.to_bits().astype(int).tolist()))
            if final.valid != ref.valid or fs.to_bits()[1:].astype(int).tolist() != outs:
                bad.append((t, mode.value))
        if len(results) == 2 and results[0] != results[1]:
            bad.append((t, "eager!=lazy"))
    report(capsys, 3, not bad, f"{N} cases ({eager_runs} also in eager mode), {len(bad)} mismatches")


def test_c04_encoding(capsys):
    rng = np.random.default_rng(4)
    beta, tau = 5, 4
    N = 100_000
    faces = rng.integers(0, 1 << beta, size=(N, tau))
    flags = rng.integers(0, 2, size=(N, tau))
    codes = {}
    errors = 0
    for f, g in zip(faces.tolist(), flags.tolist()):
        c = encode_chunk(f, g, beta, tau)
        e0F = sum(fi << (beta * i + tau) for i, fi in enumerate(f))
        e0P = sum(gi << i for i, gi in enumerate(g))
        if c.face_part != e0F or c.flag_part != e0P or c.code != e0F + e0P or c.code != e0F | e0P:
            errors += 1
        if decode_chunk(c) != (f, g):
            errors += 1
        codes.setdefault(c.code, set()).add((tuple(f), tuple(g)))
    distinct_chunks = len({(tuple(f), tuple(g)) for f, g in zip(faces.tolist(), flags.tolist())})
    collisions = sum(len(v) - 1 for v in codes.values())
    # the packed layer words agree with the per-chunk face parts and flag words
    row = rng.integers(0, 1 << beta, size=4001)
    bits = rng.integers(0, 2, size=4001)
    words = face_words(row[1:], beta, tau)
    fs = FlagStream.from_bits(bits, tau)
    for k, (fw, gw) in enumerate(zip(words, fs.words)):
        part = row[1 + k * tau : 1 + (k + 1) * tau].tolist()
        fl = bits[1 + k * tau : 1 + (k + 1) * tau].tolist()
        c = encode_chunk(part, fl, beta, tau)
        if int(fw) != c.face_part or int(gw) != c.flag_part:
            errors += 1
    ok = errors == 0 and collisions == 0
    report(capsys, 4, ok, f"{N} chunks ({distinct_chunks} distinct) at beta={beta}, tau={tau}: {errors} identity failures, {collisions} collisions")


def test_c05_lowerbound(capsys):
    details = []
    ok = True
    t12 = None
    for m in range(1, 13):
        t0 = time.perf_counter()
        rep = verify_exponential(generate(m))
        dt = time.perf_counter() - t0
        if m == 12:
            t12 = dt
        ok &= rep.ok and rep.distinct_states == 2**m and rep.subsets == 2**m
        details.append(f"{m}:{rep.distinct_states}")
    ok &= t12 < 120
    report(capsys, 5, ok, f"distinct final states per m = {' '.join(details)}; m=12 took {t12:.1f} s")


def test_c06_locator(capsys):
    rng = np.random.default_rng(6)
    queries = 0
    wrong = 0
    degenerate = 0
    for t in range(200):
        K = int(rng.integers(1, 65))
        spread = float(rng.uniform(0.5, 8))
        if t % 5 == 0:
            xy = rng.integers(0, 6, size=(K, 2)).astype(float)
            r = 1.0
        else:
            xy = rng.uniform(0, spread, size=(K, 2))
            r = float(rng.uniform(0.2, 2.5))
        ds = DiskSet(xy, radius=r)
        tab, loc = build_face_structure(ds)
        pts = rng.uniform(xy.min() - r - 1, xy.max() + r + 1, size=(500, 2))
        # a tenth of the queries on or next to a circle
        k = rng.integers(0, K, size=50)
        th = rng.uniform(0, 2 * np.pi, size=50)
        pts[:50] = xy[k] + r * np.c_[np.cos(th), np.sin(th)]
        if t % 5 == 0:
            pts[50:100] = rng.integers(-1, 7, size=(50, 2))
        before = loc.degenerate_hits
        labels = locate_all(loc, tab, pts)
        degenerate += loc.degenerate_hits - before
        for p, f in zip(pts, labels):
            queries += 1
            if tab.membership_of(int(f)) != brute_membership(ds, p):
                wrong += 1
    report(capsys, 6, wrong == 0, f"{queries} queries over 200 disk sets, {wrong} wrong memberships, {degenerate} resolved by the direct predicate")


def test_c07_flag_rows(capsys):
    rng = np.random.default_rng(77)
    bad = 0
    checked = 0
    multi = 0
    for t in range(500):
        m = int(rng.integers(1, 400))
        n = int(rng.integers(1, max(2, min(400, 100_000 // m))))
        A = np.cumsum(rng.normal(size=(m, 2)), axis=0)
        B = A[np.linspace(0, m - 1, n).astype(int)] + rng.normal(scale=0.4, size=(n, 2))
        Ap, Bp = PointSeq(A), PointSeq(B)
        model = MODELS[t % 2]
        p = SETTINGS[t % len(SETTINGS)]
        if t % 3 == 0:
            dsq = frechet_naive_sq(Ap, Bp, model)
        else:
            dsq = random_delta_sq(rng, pairwise_sq(Ap, Bp).ravel())
        M = reach_rows_sq(Ap, Bp, dsq, model, range(m))
        rows = []

        def hook(i, span, flags):
            rows.append(span)
            nonlocal bad, checked
            checked += 1
            if flags.to_bits().tolist() != M[span[1] - 1].astype(bool).tolist():
                bad += 1

        decide_sq(Ap, Bp, dsq, p, model, on_layer=hook)
        multi += len(rows) > 1
        # once the flags die out the remaining rows are empty too
        if rows and rows[-1][1] < m and M[rows[-1][1] - 1 :].any():
            bad += 1
    report(capsys, 7, bad == 0, f"500 instances, {checked} layer rows compared ({multi} instances with several layers), {bad} mismatches")


def _memory_instance(m, n):
    A = random_walk(m, 1).xy
    t = np.linspace(0, m - 1, n)
    i = np.minimum(np.floor(t).astype(int), m - 2)
    f = (t - i)[:, None]
    B = A[i] * (1 - f) + A[i + 1] * f
    B = B + np.random.default_rng(3).normal(scale=0.1, size=B.shape)
    return PointSeq(A), PointSeq(B)


def _peak(m, n, dsq=16.0):
    A, B = _memory_instance(m, n)
    decide_sq(A, B, dsq)
    tracemalloc.start()
    tracemalloc.reset_peak()
    base = tracemalloc.get_traced_memory()[0]
    res = decide_sq(A, B, dsq)
    peak = tracemalloc.get_traced_memory()[1] - base
    tracemalloc.stop()
    return peak, res


def test_c08_space_scaling(capsys):
    p1, r1 = _peak(2**12, 2**15)
    p2, r2 = _peak(2**12, 2**16)
    ratio = p2 / p1
    ok = ratio <= 2.5 and r1 and r2
    report(capsys, 8, ok, f"peak traced allocation {p1} B at n=2^15, {p2} B at n=2^16, ratio {ratio:.2f} (answers {r1}, {r2})")


def test_c09_bench_report(capsys):
    doc = ROOT / "docs" / "bench.md"
    rows = run_walks([2**e for e in range(12, 17)], seed=0, algo="both")
    ratios = [r.ratio for r in rows]
    mono = all(a <= b for a, b in zip(ratios, ratios[1:]))
    agree = all(r.agree for r in rows)
    shipped = doc.exists() and "naive_ms" in doc.read_text() and "ratio" in doc.read_text()
    ok = mono and agree and ratios[-1] >= 1.5 and shipped
    report(capsys, 9, ok, f"speedups at n=2^12..2^16: {ratios}; nondecreasing={mono}; agree={agree}; docs/bench.md present={shipped}")


def test_c10_monotone(capsys):
    rng = np.random.default_rng(10)
    violations = 0
    for t in range(200):
        m, n = (int(v) for v in rng.integers(1, 41, size=2))
        A = PointSeq(rng.uniform(0, 4, size=(m, 2)))
        B = PointSeq(rng.uniform(0, 4, size=(n, 2)))
        D = np.sort(pairwise_sq(A, B).ravel())
        lo, hi = float(D[0]) * 0.9, float(D[-1]) * 1.1
        deltas = np.sort(np.concatenate([rng.choice(D, size=10), rng.uniform(lo, hi, size=10)]))
        p = SETTINGS[t % len(SETTINGS)]
        for model in MODELS:
            fast = [decide_sq(A, B, float(v), p, model) for v in deltas]
            slow = [decide_naive_sq(A, B, float(v), model) for v in deltas]
            violations += fast != sorted(fast)
            violations += slow != sorted(slow)
    report(capsys, 10, violations == 0, f"200 instances x 20 thresholds x 2 models, {violations} non-monotone sequences")
