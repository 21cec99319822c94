"""Command-line front end.

    durable-patterns generate --n 500 --seed 1 --out pts.csv
    durable-patterns triangles pts.csv --tau 5 --eps 0.1 --sorted
    durable-patterns incremental pts.csv --eps 0.1 < taus.txt

Records go to stdout (NDJSON by default, or CSV); a one-line summary goes to
stderr. Exit codes: 0 ok, 1 engine or input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from typing import Callable, Iterable, TextIO

from . import oracle as orc
from .aggregate import PairRecord, UNION_FACTOR, report_sum_pairs, report_union_pairs
from .core import Dataset, InputError, Metric
from .dataio import LIFESPAN_MODELS, generate, load, write_csv
from .durable_ball import DurableBallStructure
from .incremental import IncrementalSession
from .linf import DurableRangeStructure, report_triangles_exact_linf
from .patterns import (
    PatternRecord,
    TriangleRecord,
    report_cliques,
    report_paths,
    report_stars,
    report_triangles,
)

logger = logging.getLogger("durable_patterns")

PATTERN_COMMANDS = ("cliques", "paths", "stars")


# -- record formatting ------------------------------------------------------------

def record_fields(rec) -> dict:
    if isinstance(rec, TriangleRecord):
        q, s = sorted((rec.q, rec.s))
        return {"anchor": rec.anchor, "q": q, "s": s, "t0": rec.t0, "t1": rec.t1}
    if isinstance(rec, PairRecord):
        return {"p": rec.p, "q": rec.q, "agg": rec.agg, "value": rec.value}
    if isinstance(rec, PatternRecord):
        return {"kind": rec.kind, "members": list(rec.members), "anchor": rec.anchor,
                "t0": rec.t0, "t1": rec.t1}
    raise TypeError(f"unknown record type {type(rec).__name__}")


def sort_key(fields: dict):
    if "anchor" in fields and "q" in fields:
        return (fields["anchor"], fields["q"], fields["s"])
    if "agg" in fields:
        return (fields["p"], fields["q"])
    return (fields["anchor"], fields["members"])


class Emitter:
    """Streams records as NDJSON or CSV, or buffers them for ``--sorted``."""

    def __init__(self, out: TextIO, fmt: str = "ndjson", sort: bool = False) -> None:
        self.out = out
        self.fmt = fmt
        self.sort = sort
        self.count = 0
        self._buffer: list[dict] = []
        self._csv = None

    def __call__(self, rec) -> None:
        self.count += 1
        fields = record_fields(rec)
        if self.sort:
            self._buffer.append(fields)
        else:
            self._write(fields)

    def _write(self, fields: dict) -> None:
        if self.fmt == "ndjson":
            self.out.write(json.dumps(fields) + "\n")
            return
        if self._csv is None:
            self._csv = csv.writer(self.out, lineterminator="\n")
            self._csv.writerow(list(fields))
        self._csv.writerow([" ".join(map(str, v)) if isinstance(v, list) else
                            (repr(v) if isinstance(v, float) else v) for v in fields.values()])

    def flush(self) -> None:
        if self._buffer:
            self._buffer.sort(key=sort_key)
            for fields in self._buffer:
                self._write(fields)
            self._buffer.clear()
        self.out.flush()


# -- oracle adapters ------------------------------------------------------------

def _oracle_records(args, ds: Dataset) -> Iterable:
    starts, ends = ds.start_list, ds.end_list
    cmd = args.command
    if cmd in ("triangles", "linf-exact"):
        for p, a, b in sorted(orc.oracle_triangles(ds, args.tau)):
            yield TriangleRecord(p, a, b, starts[p], min(ends[p], ends[a], ends[b]))
        return
    if cmd == "sum-pairs":
        vals = orc.sum_values(ds)
        for key in sorted(k for k, v in vals.items() if v >= args.tau):
            yield PairRecord(key[0], key[1], "sum", vals[key])
        return
    if cmd == "union-pairs":
        vals = orc.union_values(ds, args.kappa)
        for key in sorted(k for k, v in vals.items() if v >= args.tau):
            yield PairRecord(key[0], key[1], "union", vals[key])
        return
    if cmd == "cliques":
        found = []
        for c in sorted(orc.oracle_cliques(ds, args.m, args.tau)):
            p = max(c, key=lambda i: (starts[i], i))
            rest = tuple(sorted(x for x in c if x != p))
            found.append((p, (p, *rest)))
    elif cmd == "paths":
        found = [(max(t, key=lambda i: (starts[i], i)), t)
                 for t in sorted(orc.oracle_paths(ds, args.m, args.tau))]
    else:
        found = []
        for c, leaves in sorted(orc.oracle_stars(ds, args.m, args.tau)):
            t = (c, *leaves)
            found.append((max(t, key=lambda i: (starts[i], i)), t))
    kind = {"cliques": "clique", "paths": "path", "stars": "star"}[cmd]
    for p, members in found:
        yield PatternRecord(kind, members, p, starts[p], min(ends[x] for x in members))


# -- commands -------------------------------------------------------------------

def _load(args) -> Dataset:
    metric = Metric.linf() if args.command == "linf-exact" else Metric.parse(args.metric)
    return load(args.input, metric)


def _summary(ds: Dataset, args, out: int, build_ms: float, query_ms: float) -> None:
    eps = getattr(args, "eps", None)
    tau = getattr(args, "tau", None)
    print(f"n={ds.n} eps={eps if eps is not None else '-'} tau={tau if tau is not None else '-'} "
          f"out={out} build_ms={build_ms:.1f} query_ms={query_ms:.1f}", file=sys.stderr)


def _engine(args, ds: Dataset, emit: Emitter) -> tuple[float, float]:
    cmd = args.command
    t0 = time.perf_counter()
    if cmd == "linf-exact":
        structure = DurableRangeStructure(ds)
    else:
        structure = DurableBallStructure(ds, with_aggregates=cmd in ("sum-pairs", "union-pairs"))
    t1 = time.perf_counter()
    th = args.threads
    if cmd == "triangles":
        report_triangles(structure, args.tau, args.eps, emit, th)
    elif cmd == "cliques":
        report_cliques(structure, args.m, args.tau, args.eps, emit, th)
    elif cmd == "paths":
        report_paths(structure, args.m, args.tau, args.eps, emit, th)
    elif cmd == "stars":
        report_stars(structure, args.m, args.tau, args.eps, emit, th)
    elif cmd == "sum-pairs":
        report_sum_pairs(structure, args.tau, args.eps, emit, th)
    elif cmd == "union-pairs":
        report_union_pairs(structure, args.tau, args.kappa, args.eps, emit, th)
    elif cmd == "linf-exact":
        report_triangles_exact_linf(structure, args.tau, emit, th)
    t2 = time.perf_counter()
    return (t1 - t0) * 1e3, (t2 - t1) * 1e3


def cmd_report(args, out: TextIO) -> int:
    ds = _load(args)
    emit = Emitter(out, args.format, args.sorted)
    if args.oracle:
        t0 = time.perf_counter()
        for rec in _oracle_records(args, ds):
            emit(rec)
        build_ms, query_ms = 0.0, (time.perf_counter() - t0) * 1e3
    else:
        build_ms, query_ms = _engine(args, ds, emit)
    emit.flush()
    _summary(ds, args, emit.count, build_ms, query_ms)
    return 0


def cmd_generate(args, out: TextIO) -> int:
    ds = generate(args.n, args.d, args.clusters, args.lifespan, args.seed, args.spread,
                  args.horizon, args.mean_length)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(ds, fh)
    else:
        write_csv(ds, out)
    return 0


def cmd_incremental(args, out: TextIO, stdin: TextIO) -> int:
    ds = _load(args)
    t0 = time.perf_counter()
    session = IncrementalSession(DurableBallStructure(ds), args.eps, args.threads)
    logger.info("session ready in %.1f ms", (time.perf_counter() - t0) * 1e3)
    for raw in stdin:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "quit":
            break
        if parts[0] == "reset" and len(parts) == 1:
            session.reset()
            print("#reset", file=out)
            continue
        if parts[0] != "tau" or len(parts) != 2:
            print(f"error: expected 'tau <value>', 'reset' or 'quit', got {line!r}", file=sys.stderr)
            continue
        try:
            tau = float(parts[1])
            emit = Emitter(out, args.format, args.sorted)
            k = session.query(tau, emit)
        except (ValueError, InputError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            continue
        emit.flush()
        print(f"#delta={k} #cumulative={session.cumulative}", file=out)
        out.flush()
    return 0


def cmd_oracle(args, out: TextIO) -> int:
    """Cross-check the engine against the brute-force oracle on one instance."""
    ds = _load(args)
    problem = args.problem
    eps, tau = args.eps, args.tau
    if problem == "triangles":
        got: list = []
        report_triangles(DurableBallStructure(ds), tau, eps, got.append)
        keys = [r.key() for r in got]
        exact, relaxed = orc.oracle_triangles(ds, tau), orc.oracle_triangles(ds, tau, eps)
    elif problem == "sum-pairs":
        got = []
        report_sum_pairs(DurableBallStructure(ds, with_aggregates=True), tau, eps, got.append)
        keys = [r.key() for r in got]
        exact = orc.oracle_sum_pairs(ds, tau)
        relaxed = orc.oracle_sum_pairs(ds, tau, eps)
    elif problem == "union-pairs":
        got = []
        report_union_pairs(DurableBallStructure(ds, with_aggregates=True), tau, args.kappa, eps,
                           got.append)
        keys = [r.key() for r in got]
        exact = orc.oracle_union_pairs(ds, tau, args.kappa)
        relaxed = orc.oracle_union_pairs(ds, UNION_FACTOR * tau, args.kappa, eps)
    else:
        got = []
        R = DurableRangeStructure(Dataset(ds.points, Metric.linf(), ds.dim))
        report_triangles_exact_linf(R, tau, got.append)
        keys = [r.key() for r in got]
        exact = relaxed = orc.oracle_triangles(R.ds, tau)
    found = set(keys)
    missing = len(exact - found)
    extra = len(found - relaxed)
    dups = len(keys) - len(found)
    ok = missing == 0 and extra == 0 and dups == 0
    print(json.dumps({"problem": problem, "engine": len(found), "exact": len(exact),
                      "relaxed": len(relaxed), "missing": missing, "extra": extra,
                      "duplicates": dups, "ok": ok}), file=out)
    return 0 if ok else 1


# -- argument parsing -------------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _eps(text: str) -> float:
    v = float(text)
    if not (0 < v <= 1):
        raise argparse.ArgumentTypeError("eps must lie in (0, 1]")
    return v


def _tau(text: str) -> float:
    v = float(text)
    if not (v >= 0) or math.isinf(v):
        raise argparse.ArgumentTypeError("tau must be a finite number >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="durable-patterns",
                                     description="Report durable patterns in temporal point sets.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    gen = sub.add_parser("generate", help="write a synthetic clustered dataset")
    gen.add_argument("--n", type=_positive_int, required=True)
    gen.add_argument("--d", type=_positive_int, default=2)
    gen.add_argument("--clusters", type=_positive_int, default=4)
    gen.add_argument("--lifespan", choices=LIFESPAN_MODELS, default="exponential")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--spread", type=float, default=0.05, help="cluster standard deviation")
    gen.add_argument("--horizon", type=float, default=100.0)
    gen.add_argument("--mean-length", type=float, default=10.0)
    gen.add_argument("--out", help="output path (default stdout)")

    def common(p: argparse.ArgumentParser, eps: bool = True, metric: bool = True) -> None:
        p.add_argument("input", help="dataset CSV")
        p.add_argument("--tau", type=_tau, required=True)
        if eps:
            p.add_argument("--eps", type=_eps, default=0.1)
        if metric:
            p.add_argument("--metric", default="l2", help="l1, l2, linf or lp:<alpha>")
        p.add_argument("--oracle", action="store_true", help="use the brute-force oracle")
        p.add_argument("--sorted", action="store_true", help="buffer and sort the output")
        p.add_argument("--threads", type=_positive_int, default=1)
        p.add_argument("--format", choices=("ndjson", "csv"), default="ndjson")

    common(sub.add_parser("triangles", help="durable triangles"))
    for name in PATTERN_COMMANDS:
        p = sub.add_parser(name, help=f"durable {name}")
        common(p)
        p.add_argument("--m", type=int, required=True, help="pattern size")
    common(sub.add_parser("sum-pairs", help="SUM-durable pairs"))
    p = sub.add_parser("union-pairs", help="UNION-durable pairs")
    common(p)
    p.add_argument("--kappa", type=_positive_int, required=True)
    common(sub.add_parser("linf-exact", help="exact triangles under the max-norm"),
           eps=False, metric=False)

    inc = sub.add_parser("incremental", help="REPL reading 'tau <value>' lines from stdin")
    inc.add_argument("input")
    inc.add_argument("--eps", type=_eps, default=0.1)
    inc.add_argument("--metric", default="l2")
    inc.add_argument("--threads", type=_positive_int, default=1)
    inc.add_argument("--sorted", action="store_true")
    inc.add_argument("--format", choices=("ndjson", "csv"), default="ndjson")

    orc_p = sub.add_parser("oracle", help="cross-check engine output against the oracle")
    orc_p.add_argument("input")
    orc_p.add_argument("--problem", choices=("triangles", "sum-pairs", "union-pairs", "linf-exact"),
                       default="triangles")
    orc_p.add_argument("--tau", type=_tau, required=True)
    orc_p.add_argument("--eps", type=_eps, default=0.1)
    orc_p.add_argument("--kappa", type=_positive_int, default=2)
    orc_p.add_argument("--metric", default="l2")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("DP_LOG", "off").strip().lower()
    if level == "off":
        logging.getLogger("durable_patterns").setLevel(logging.CRITICAL + 1)
        return
    if level not in ("info", "debug"):
        level = "info"
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if level == "debug" else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None, stdout: TextIO | None = None,
         stdin: TextIO | None = None) -> int:
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging()
    handlers: dict[str, Callable[[], int]] = {
        "generate": lambda: cmd_generate(args, out),
        "incremental": lambda: cmd_incremental(args, out, stdin or sys.stdin),
        "oracle": lambda: cmd_oracle(args, out),
    }
    try:
        return handlers.get(args.command, lambda: cmd_report(args, out))()
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
