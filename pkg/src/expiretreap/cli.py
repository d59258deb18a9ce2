"""``expiretreap`` command line: generate, bench, demo, verify.

Exit codes: 0 on success, 1 when the command ran but failed (I/O,
configuration or a verification mismatch), 2 for usage errors.
The seed flags default to ``$EXPIRE_TREAP_SEED`` (or 0).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import fields
from typing import Optional, Sequence

from expiretreap import bench as bench_mod
from expiretreap.errors import ConfigError, InvariantViolation
from expiretreap.store import CADENCE, EAGER, ExpirableStore, SimulatedClock
from expiretreap.treap import INFINITY
from expiretreap.verify import OracleMismatch, run_suite
from expiretreap.workload import BModelParams, generate, parse_lifetime, read_trace, write_trace

SEED_ENV = "EXPIRE_TREAP_SEED"


class CliError(Exception):
    """A failure worth one line on stderr and exit status 1."""


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise CliError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _lifetime(text: str):
    try:
        return parse_lifetime(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _writable_dir_of(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise CliError(f"{path}: directory {parent} does not exist")
    if not os.access(parent, os.W_OK):
        raise CliError(f"{path}: directory {parent} is not writable")


# -- subcommands -----------------------------------------------------------------

def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        params = BModelParams(args.b, args.l, args.n, seed)
    except ValueError as e:
        raise CliError(str(e)) from None
    if args.out != "-":
        _writable_dir_of(args.out)
    trace = generate(params, args.lifetime, bucket_ms=args.bucket_ms)
    if args.out == "-":
        write_trace(trace, sys.stdout)
    else:
        try:
            write_trace(trace, args.out)
        except OSError as e:
            raise CliError(f"{args.out}: {e.strerror}") from None
        print(f"wrote {trace.total} records in {len(trace.counts)} buckets to {args.out}")
    return 0


def cmd_bench(args) -> int:
    try:
        cfg = bench_mod.load_config(args.config)
    except ConfigError as e:
        raise CliError(str(e)) from None
    if args.seed is not None:
        cfg = bench_mod.ScenarioConfig(**{**cfg.to_dict(), "seed": args.seed})
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as e:
        raise CliError(f"{args.out}: {e.strerror}") from None
    if not os.access(args.out, os.W_OK):
        raise CliError(f"{args.out}: not writable")
    report = bench_mod.run_scenario(cfg)
    stem = os.path.splitext(os.path.basename(args.config))[0]
    try:
        paths = bench_mod.write_reports(report, args.out, stem=stem)
    except OSError as e:
        raise CliError(str(e)) from None
    for key in ("structure", "rows", "maintenance_ms", "throughput_p50", "peak_memory_proxy",
                "ops_per_second", "seconds", "visited"):
        if key in report.summary:
            print(f"{key}: {bench_mod._fmt(report.summary[key])}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_demo(args) -> int:
    if not os.path.isfile(args.trace):
        raise CliError(f"{args.trace}: no such file")
    try:
        trace = read_trace(args.trace)
    except (OSError, ValueError) as e:
        raise CliError(f"{args.trace}: {e}") from None
    expired = [0]

    def hook(rec) -> None:
        expired[0] += 1

    store = ExpirableStore(SimulatedClock(0), on_expire=hook, cadence_ms=args.cadence,
                           strategy=EAGER if args.eager else CADENCE, seed=trace.params.seed)
    every = max(1, len(trace.records) // max(1, args.reports))
    t0 = time.perf_counter()
    print("time_ms,inserted,expired,live,physical")
    inserted = 0
    for i, recs in enumerate(trace.records):
        now = i * trace.bucket_ms
        store.advance(now - store.now())
        for key, life in recs:
            store.put(key, INFINITY if life == INFINITY else now + life, i)
            inserted += 1
        if (i + 1) % every == 0 or i == len(trace.records) - 1:
            print(f"{now},{inserted},{expired[0]},{store.live_count()},{store.physical_size}")
    elapsed = time.perf_counter() - t0
    print(f"# {inserted} puts, {expired[0]} expirations, {elapsed:.2f} s", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    t0 = time.perf_counter()
    try:
        result = run_suite(args.runs, args.ops, seed=seed)
    except (OracleMismatch, InvariantViolation) as e:
        print(f"verify: FAIL: {e}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - t0
    print(f"verify: PASS: {len(result.runs)} run(s), {result.total_ops} ops, "
          f"{result.invariant_checks} invariant walks, seed {seed}, {elapsed:.1f} s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expiretreap", description=__doc__.splitlines()[0],
                                allow_abbrev=False)
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    g = sub.add_parser("generate", help="write a B-Model workload trace", allow_abbrev=False)
    g.add_argument("--b", type=float, default=0.5, help="bias in [0.5, 1.0) (default 0.5)")
    g.add_argument("--l", type=int, default=10, help="aggregation level: 2**l buckets (default 10)")
    g.add_argument("--n", type=int, required=True, help="total number of records")
    g.add_argument("--lifetime", type=_lifetime, default=parse_lifetime("fixed:1000"),
                   help="fixed:D, uniform:LO:HI, exp:MEAN or inf, in ms (default fixed:1000)")
    g.add_argument("--bucket-ms", type=_positive, default=1, help="bucket width in ms (default 1)")
    g.add_argument("--seed", type=int, default=None, help=f"seed (default ${SEED_ENV} or 0)")
    g.add_argument("--out", default="-", help="output file, '-' for stdout (default)")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="run a scenario file and write CSV reports", allow_abbrev=False,
                       description="Scenario files hold key = value lines; keys: "
                       + ", ".join(f.name for f in fields(bench_mod.ScenarioConfig)) + ".")
    b.add_argument("--config", required=True, help="scenario file")
    b.add_argument("--out", default="results", help="output directory (default results/)")
    b.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("demo", help="replay a trace through the expirable store", allow_abbrev=False)
    d.add_argument("--trace", required=True, help="trace file written by 'generate'")
    d.add_argument("--cadence", type=_positive, default=100, help="sweep cadence in ms (default 100)")
    d.add_argument("--eager", action="store_true", help="sweep at each expiration instead of on a cadence")
    d.add_argument("--reports", type=_positive, default=10, help="progress lines to print (default 10)")
    d.set_defaults(func=cmd_demo)

    v = sub.add_parser("verify", help="run the randomised oracle-equivalence suite", allow_abbrev=False)
    v.add_argument("--ops", type=_positive, default=10_000, help="operations per run (default 10000)")
    v.add_argument("--runs", type=_positive, default=1, help="number of runs (default 1)")
    v.add_argument("--seed", type=int, default=None, help=f"base seed (default ${SEED_ENV} or 0)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        return args.func(args)
    except CliError as e:
        print(f"expiretreap {args.command}: {e}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
