"""Command-line interface.

Exit codes: 0 success, 1 bad input or usage, 2 the naive and fast paths
disagree (or a lower-bound verification fails).  Every option can also be
set through an environment variable ``DFRECHET_<COMMAND>_<OPTION>``, e.g.
``DFRECHET_DECIDE_DELTA``; flags given on the command line win.
"""

from __future__ import annotations

import json
import sys
import time

import click

from . import bench as benchmod
from .core import FrechetError, MoveModel, TuningParams
from .datasets import KINDS, generate
from .lowerbound import MAX_M, MAX_VERIFY_M, sequence_for_subset, verify_exponential
from .lowerbound import generate as lb_generate
from .naive import MAX_NAIVE_PAIRS, decide_naive, frechet_naive
from .pipeline import decide
from .pointio import FORMATS, format_points, read_points
from .selection import SearchTrace, optimize

ENV_PREFIX = "DFRECHET"
EXIT_INPUT = 1
EXIT_MISMATCH = 2


def fmt_float(v: float) -> str:
    # shortest repr that round-trips; never more than 17 significant digits
    return repr(float(v))


def tuning_options(f):
    opts = [
        click.option("--block-size", type=int, default=8, show_default=True, help="A-points per block (s)."),
        click.option("--blocks-per-layer", type=int, default=8, show_default=True, help="Blocks per layer (t)."),
        click.option("--chunk-len", type=int, default=4, show_default=True, help="B-positions per chunk (tau)."),
        click.option("--table-mode", type=click.Choice(["lazy", "eager"]), default="lazy", show_default=True),
        click.option("--point-location", type=click.Choice(["direct", "slab"]), default="direct", show_default=True),
        click.option("--skip-inert/--no-skip-inert", default=True, show_default=True, help="Only run the B-range each layer can touch."),
        click.option("--model", type=click.Choice(["orthogonal", "diagonal"]), default="orthogonal", show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _params(kw) -> TuningParams:
    return TuningParams(
        block_size=kw.pop("block_size"),
        blocks_per_layer=kw.pop("blocks_per_layer"),
        chunk_len=kw.pop("chunk_len"),
        table_mode=kw.pop("table_mode"),
        point_location=kw.pop("point_location"),
        skip_inert=kw.pop("skip_inert"),
    )


def _emit(obj: dict, fmt: str, lines: list[str]) -> None:
    if fmt == "json":
        click.echo(json.dumps(obj))
    else:
        for line in lines:
            click.echo(line)


def _inputs(a, b, fmt):
    return read_points(a, fmt, "A"), read_points(b, fmt, "B")


@click.group(context_settings={"auto_envvar_prefix": ENV_PREFIX, "help_option_names": ["-h", "--help"]})
def cli():
    """Discrete Frechet distance: quadratic DP and block-automaton decision."""


@cli.command("decide")
@click.option("--a", "a_path", required=True, type=click.Path(), help="A-sequence (CSV or JSON).")
@click.option("--b", "b_path", required=True, type=click.Path(), help="B-sequence (CSV or JSON).")
@click.option("--delta", required=True, type=float)
@click.option("--algo", type=click.Choice(["naive", "fast", "both"]), default="fast", show_default=True)
@click.option("--input-format", type=click.Choice(FORMATS), default=None, help="Default: from the file extension.")
@click.option("--format", "out_fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@tuning_options
def cmd_decide(a_path, b_path, delta, algo, input_format, out_fmt, **kw):
    """Is the discrete Frechet distance at most DELTA?"""
    model = MoveModel.parse(kw.pop("model"))
    params = _params(kw)
    A, B = _inputs(a_path, b_path, input_format)
    res = {}
    times = {}
    if algo in ("naive", "both"):
        t0 = time.perf_counter()
        res["naive"] = decide_naive(A, B, delta, model)
        times["naive"] = time.perf_counter() - t0
    if algo in ("fast", "both"):
        t0 = time.perf_counter()
        res["fast"] = decide(A, B, delta, params, model)
        times["fast"] = time.perf_counter() - t0
    answer = res.get("fast", res.get("naive"))
    agree = None if len(res) < 2 else res["naive"] == res["fast"]
    lines = ["true" if answer else "false"]
    if agree is not None:
        lines.append("agreement: " + ("yes" if agree else "NO"))
    lines += [f"time {k}: {v * 1e3:.3f} ms" for k, v in times.items()]
    _emit({"result": answer, "agreement": agree, "results": res, "seconds": times}, out_fmt, lines)
    if agree is False:
        sys.exit(EXIT_MISMATCH)


@cli.command("compute")
@click.option("--a", "a_path", required=True, type=click.Path())
@click.option("--b", "b_path", required=True, type=click.Path())
@click.option("--algo", type=click.Choice(["naive", "fast", "both"]), default="fast", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed of the rank search's sampling.")
@click.option("--input-format", type=click.Choice(FORMATS), default=None)
@click.option("--format", "out_fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@tuning_options
def cmd_compute(a_path, b_path, algo, seed, input_format, out_fmt, **kw):
    """Compute the discrete Frechet distance."""
    model = MoveModel.parse(kw.pop("model"))
    params = _params(kw)
    A, B = _inputs(a_path, b_path, input_format)
    if algo in ("naive", "both") and len(A) * len(B) > MAX_NAIVE_PAIRS:
        raise click.UsageError(f"--algo {algo} is limited to {MAX_NAIVE_PAIRS} pairs; use --algo fast")
    res = {}
    times = {}
    trace = SearchTrace()
    if algo in ("naive", "both"):
        t0 = time.perf_counter()
        res["naive"] = frechet_naive(A, B, model)
        times["naive"] = time.perf_counter() - t0
    if algo in ("fast", "both"):
        t0 = time.perf_counter()
        res["fast"] = optimize(A, B, params, model, seed=seed, trace=trace)
        times["fast"] = time.perf_counter() - t0
    value = res.get("fast", res.get("naive"))
    agree = None if len(res) < 2 else res["naive"] == res["fast"]
    lines = [fmt_float(value)]
    if agree is not None:
        lines.append("agreement: " + ("yes" if agree else "NO"))
    if "fast" in res:
        lines.append(f"decide calls: {trace.decide_calls}, counting passes: {trace.count_calls}, enumerations: {trace.enumerations}")
    lines += [f"time {k}: {v * 1e3:.3f} ms" for k, v in times.items()]
    _emit(
        {
            "distance": value,
            "agreement": agree,
            "results": res,
            "decide_calls": trace.decide_calls if "fast" in res else None,
            "seconds": times,
        },
        out_fmt,
        lines,
    )
    if agree is False:
        sys.exit(EXIT_MISMATCH)


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise click.BadParameter("empty list")
    return out


@cli.command("bench")
@click.option("--sizes", default="10..12", show_default=True, help="Exponents e (n = 2^e) as 'a..b' or comma list; m values for --family lowerbound.")
@click.option("--family", type=click.Choice(["random-walk", "lowerbound"]), default="random-walk", show_default=True)
@click.option("--algo", type=click.Choice(["naive", "fast", "both"]), default="both", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--repeat", type=int, default=1, show_default=True, help="Best of this many runs per size.")
@click.option("--format", "out_fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@tuning_options
def cmd_bench(sizes, family, algo, seed, repeat, out_fmt, **kw):
    """Time naive against fast decisions, or count lower-bound states."""
    model = MoveModel.parse(kw.pop("model"))
    params = _params(kw)
    try:
        values = _int_list(sizes)
    except ValueError:
        raise click.BadParameter(f"cannot parse {sizes!r}", param_hint="--sizes") from None
    if family == "lowerbound":
        if max(values) > MAX_VERIFY_M or min(values) < 1:
            raise click.BadParameter(f"m must lie in 1..{MAX_VERIFY_M}", param_hint="--sizes")
        rows = benchmod.run_lowerbound(values)
        fields = benchmod.LB_FIELDS
        bad = any(not r["ok"] for r in rows)
    else:
        rows = [r.as_dict() for r in benchmod.run_walks([2**e for e in values], seed, algo, params, model, repeat)]
        fields = benchmod.BENCH_FIELDS
        bad = any(r["agree"] is False for r in rows)
    if out_fmt == "json":
        click.echo(json.dumps({"family": family, "rows": rows}))
    else:
        click.echo(benchmod.format_table(rows, fields))
    if bad:
        sys.exit(EXIT_MISMATCH)


@cli.command("gen-random")
@click.option("--n", type=int, required=True)
@click.option("--kind", type=click.Choice(KINDS), default="random-walk", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "out_fmt", type=click.Choice(FORMATS), default="csv", show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Output file (default: stdout).")
def cmd_gen_random(n, kind, seed, out_fmt, out):
    """Write a seeded random point sequence."""
    if n < 1:
        raise click.BadParameter("n must be at least 1", param_hint="--n")
    _write(format_points(generate(kind, n, seed), out_fmt), out)


def _write(text: str, out) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


@cli.command("gen-lowerbound")
@click.option("--m", type=int, required=True, help=f"Number of red/blue disk pairs (1..{MAX_M}).")
@click.option("--subset", default=None, help="Red disks kept (1-based, comma list); adds the matching B-sequence.")
@click.option("--part", type=click.Choice(["instance", "A", "B"]), default="instance", show_default=True)
@click.option("--format", "out_fmt", type=click.Choice(FORMATS), default="json", show_default=True, help="For --part A/B.")
@click.option("--out", type=click.Path(), default=None)
def cmd_gen_lowerbound(m, subset, part, out_fmt, out):
    """Emit the exponential-state disk configuration."""
    if not 1 <= m <= MAX_M:
        raise click.BadParameter(f"m must lie in 1..{MAX_M}", param_hint="--m")
    inst = lb_generate(m)
    S = None
    if subset is not None:
        S = _int_list(subset) if subset.strip() else []
    if part == "A":
        text = format_points(inst.A, out_fmt)
    elif part == "B":
        if S is None:
            raise click.UsageError("--part B needs --subset")
        text = format_points(sequence_for_subset(inst, S), out_fmt)
    else:
        d = inst.to_dict()
        if S is not None:
            d["subset"] = sorted(S)
            d["B"] = sequence_for_subset(inst, S).xy.tolist()
        text = json.dumps(d) + "\n"
    _write(text, out)


@cli.command("verify-lowerbound")
@click.option("--m", type=int, required=True, help=f"1..{MAX_VERIFY_M}")
@click.option("--model", type=click.Choice(["orthogonal", "diagonal"]), default="orthogonal", show_default=True)
@click.option("--format", "out_fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
def cmd_verify_lowerbound(m, model, out_fmt):
    """Check that every subset of red disks is a distinct reachable state."""
    if not 1 <= m <= MAX_VERIFY_M:
        raise click.BadParameter(f"m must lie in 1..{MAX_VERIFY_M}", param_hint="--m")
    rep = verify_exponential(lb_generate(m), model)
    _emit(
        {
            "m": m,
            "subsets": rep.subsets,
            "distinct_states": rep.distinct_states,
            "expected": 2**m,
            "diagonal_distinct": rep.diagonal_distinct,
            "ok": rep.ok,
        },
        out_fmt,
        [rep.summary(), "ok" if rep.ok else "FAILED"],
    )
    if not rep.ok:
        sys.exit(EXIT_MISMATCH)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="dfrechet", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_INPUT
    except click.ClickException as e:
        e.show()
        return EXIT_INPUT
    except FrechetError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_INPUT
    except SystemExit as e:
        return int(e.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
