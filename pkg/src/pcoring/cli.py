"""Command-line entry point: ``pcoring <command> ...``.

Exit codes: 0 success, 2 usage or spec error, 3 engine invariant
violation, 4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import WorstCase, classify, critical_sweep, distance_vector, worst_case_state
from .engine import run
from .exceptions import EngineInvariantError, PcoError
from .model import Direction, critical_coupling
from .specfile import SpecError, bundled_names, parse_spec, read_spec_text
from .verify import SUITES, run_suite

log = logging.getLogger("pcoring")

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_VERIFY = 0, 2, 3, 4


def _overrides(args) -> dict:
    o = {
        "n": args.n,
        "direction": args.direction,
        "coupling": args.l,
        "tie": args.tie,
        "eps": args.eps,
        "horizon_rounds": args.horizon_rounds,
        "seed": args.seed,
        "init": args.init,
        "w": args.w,
        "record_every": args.record_every,
    }
    if args.refractory:
        o["refractory"] = list(args.refractory)
    return {k: (v if isinstance(v, list) else None if v is None else str(v)) for k, v in o.items()}


def _simulate_one(job):
    """Run one spec; returns (name, csv text, json text). Top-level for pickling."""
    text, overrides = job
    spec = parse_spec(text, overrides)
    outcome = run(spec.config)
    extra = {"name": spec.name, "spec": text,
             "overrides": {k: v for k, v in overrides.items() if v is not None}}
    if spec.expected is not None:
        extra["expected"] = spec.expected.value
    return spec.name, outcome.trajectory.to_csv(), outcome.to_json(**extra) + "\n", outcome.verdict.value, outcome.t_sync


def _map(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_simulate(args) -> int:
    refs = args.spec or [None]
    overrides = _overrides(args)
    jobs = []
    for ref in refs:
        text = read_spec_text(ref) if ref else ""
        spec = parse_spec(text, overrides)  # validate before fanning out
        if spec.kind != "simulate":
            raise SpecError(f"spec {spec.name!r} is a {spec.kind}; use 'pcoring sweep'")
        jobs.append((text, overrides))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, csv_text, json_text, verdict, t_sync in _map(_simulate_one, jobs, args.jobs):
        (out / f"{name}.csv").write_text(csv_text)
        (out / f"{name}.json").write_text(json_text)
        ts = "-" if t_sync is None else f"{t_sync:.6f}"
        print(f"{name}\t{verdict}\tt_sync={ts}")
    return EXIT_OK


def _write_rows(rows, header, dest):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if dest:
        Path(dest).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _parse_range(text: str) -> tuple:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise SpecError(f"range {text!r} must be LO:HI")
    return int(lo), int(hi)


def cmd_critical(args) -> int:
    if args.sweep:
        lo, hi = _parse_range(args.sweep)
        rows = [(n, d, repr(float(v))) for n, d, v in critical_sweep(lo, hi)]
        _write_rows(rows, ("n", "direction", "l_star"), args.out)
        return EXIT_OK
    if args.size is None or args.ring is None:
        raise SpecError("critical needs N and DIRECTION, or --sweep LO:HI")
    print(f"{critical_coupling(args.size, Direction.parse(args.ring)):.6g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in suites:
        for res in run_suite(name, seed=args.seed, trials=args.trials, n=args.n):
            ok = ok and res.passed
            print(json.dumps(res.as_dict(), sort_keys=True), flush=True)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_worst_case(args) -> int:
    state = worst_case_state(args.size, args.coupling, WorstCase(args.which))
    cls = classify(state)
    v = distance_vector(state)
    rows = [(k + 1, repr(float(x)), repr(float(g))) for k, (x, g) in enumerate(zip(state.phases, v.components))]
    _write_rows(rows, ("node", "phase", "gap_to_next"), args.out)
    print(f"# class={cls.tag.value} length={cls.length:.12g} max_gap={v.max:.12g}", file=sys.stderr)
    return EXIT_OK


def _parse_grid(text: str) -> list:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise SpecError(f"grid {text!r} must be START:STOP:COUNT")
        a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
        return [float(v) for v in np.linspace(a, b, k)]
    return [float(v) for v in text.split(",") if v.strip()]


def _sweep_point(job):
    text, overrides = job
    spec = parse_spec(text, overrides)
    o = run(spec.config)
    return (spec.config.topology.coupling, o.verdict.value,
            "" if o.t_sync is None else repr(o.t_sync), repr(o.rounds))


def cmd_sweep(args) -> int:
    text = read_spec_text(args.spec)
    spec = parse_spec(text, _overrides(args))
    if spec.kind == "critical-sweep":
        lo, hi = spec.n_range
        rows = [(n, d, repr(float(v))) for n, d, v in critical_sweep(lo, hi)]
        _write_rows(rows, ("n", "direction", "l_star"), args.out)
        return EXIT_OK
    if not args.l_values:
        raise SpecError("--l-values is required for a simulate spec")
    base = _overrides(args)
    jobs = [(text, {**base, "coupling": repr(l)}) for l in _parse_grid(args.l_values)]
    rows = _map(_sweep_point, jobs, args.jobs)
    _write_rows(rows, ("l", "verdict", "t_sync", "rounds"), args.out)
    return EXIT_OK


def _add_run_flags(p):
    p.add_argument("--n", type=int, help="ring size")
    p.add_argument("--direction", help="uni or bi")
    p.add_argument("--l", type=float, help="coupling strength in (0, 1]")
    p.add_argument("--refractory", action="append", metavar="NODE:LEN",
                   help="dead zone for a 1-based node, e.g. 1:pi (repeatable)")
    p.add_argument("--tie", choices=("advance", "delay"), help="response at exactly pi")
    p.add_argument("--eps", type=float, help="synchronization tolerance")
    p.add_argument("--horizon-rounds", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--init", help="worst-case:KIND, phases:a,b,..., random, random-semicircle")
    p.add_argument("--w", help="natural frequency (angle syntax allowed)")
    p.add_argument("--record-every", type=float, help="flow sampling stride in time units")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcoring",
                                     description="Pulse-coupled oscillators on cycle graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one or more experiment specs",
                       epilog=f"bundled specs: {', '.join(bundled_names())}")
    p.add_argument("spec", nargs="*", help="spec file or bundled spec name")
    _add_run_flags(p)
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("critical", help="critical coupling for a ring")
    p.add_argument("size", nargs="?", type=int, metavar="N")
    p.add_argument("ring", nargs="?", metavar="DIRECTION")
    p.add_argument("--sweep", metavar="LO:HI", help="CSV over a range of sizes")
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("verify", help="randomized property suites")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--n", type=int, help="ring size for the thresholds suite")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("worst-case", help="print a worst-case initial state")
    p.add_argument("size", type=int, metavar="N")
    p.add_argument("coupling", type=float, metavar="L")
    p.add_argument("which", choices=[w.value for w in WorstCase])
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_worst_case)

    p = sub.add_parser("sweep", help="verdicts over a coupling grid, or a critical-coupling curve")
    p.add_argument("spec")
    _add_run_flags(p)
    p.add_argument("--l-values", help="START:STOP:COUNT or comma list")
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EngineInvariantError as exc:
        log.error("invariant violated: %s", exc)
        return EXIT_INVARIANT
    except (SpecError, PcoError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
