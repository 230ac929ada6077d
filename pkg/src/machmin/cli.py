"""Command-line front end: generate, solve, run, compare, certify.

Exit codes: 0 success / feasible, 1 infeasible run or rejected certificate,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import glob
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import certify as cert_mod
from . import gen as gen_mod
from .engine import simulate, verify
from .oracle import demand_lower_bound, feasible, min_machines
from .schedulers import (
    CMSScheduler,
    DoublingWrapper,
    EDFScheduler,
    HybridA,
    HybridAdaptive,
    SJFScheduler,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CSV_HEADER = [
    "instance", "scheduler", "m_star", "machines_used", "machines_busy", "feasible",
    "failure_time", "failure_source", "failure_reason", "events", "wall_time_s",
]
DEFAULT_MATRIX = ["edf:c=1", "edf:c=4", "sjf:c=4", "cms:c=4", "hybrid", "hybrid-adaptive"]
_BASE = {"edf": EDFScheduler, "sjf": SJFScheduler, "cms": CMSScheduler}


class UsageError(Exception):
    pass


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")


def _constants(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError:
        parts = ()
    if len(parts) != 3 or min(parts) < 1:
        raise argparse.ArgumentTypeError("constants must be three positive ints: C_EDF,C_SJF,C_CMS")
    return parts


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_scheduler(spec: str, m_star: int | None, speed: Fraction = Fraction(1), trace: bool = False):
    """Scheduler from a matrix spec such as ``edf:c=4``, ``cms:m=3``,
    ``hybrid:16,8,8``, ``hybrid-adaptive`` or ``doubling-edf``.

    ``c=`` multiplies ``m_star``; ``m=`` is an absolute machine count.
    """
    name, _, arg = spec.partition(":")
    if name in _BASE:
        key, _, val = arg.partition("=")
        if key not in ("c", "m") or not val.isdigit():
            raise UsageError(f"{spec!r}: expected {name}:c=<int> or {name}:m=<int>")
        m = int(val) * (m_star if key == "c" else 1)
        if m < 1:
            raise UsageError(f"{spec!r}: needs at least one machine")
        return CMSScheduler(m, trace=trace) if name == "cms" else _BASE[name](m)
    if name in ("hybrid", "hybrid-adaptive"):
        try:
            consts = _constants(arg) if arg else (16, 8, 8)
        except argparse.ArgumentTypeError as e:
            raise UsageError(str(e))
        if name == "hybrid":
            return HybridA(m_star, *consts, trace=trace)
        return HybridAdaptive(*consts, speed=speed)
    if name.startswith("doubling-") and name[9:] in _BASE:
        return DoublingWrapper(_BASE[name[9:]], speed, label=name[9:])
    raise UsageError(f"unknown scheduler spec {spec!r}")


# --- commands ---------------------------------------------------------------


def cmd_gen(args) -> int:
    spec = gen_mod.GenSpec(kind=args.kind, n=args.n, horizon=args.horizon, max_size=args.max_size,
                           seed=args.seed, l1=args.l1, l2=args.l2, m=args.m, rho0=args.rho0)
    try:
        inst = gen_mod.generate(spec)
    except ValueError as e:
        raise UsageError(str(e))
    _write(gen_mod.dumps(inst), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = gen_mod.load(args.instance)
    if not inst.jobs:
        _write("m*=0\n", args.out)
        return EXIT_OK
    m = min_machines(inst, args.speed)
    lines = [f"m*={m}", f"demand_lower_bound={demand_lower_bound(inst, args.speed)}"]
    if args.witness:
        res = feasible(inst, m, args.speed, want_witness=True)
        report = verify(res.witness, inst, m, args.speed)
        lines.append(f"witness_verified={'yes' if report.ok else 'no'}")
        lines += [f"piece {p.start} {p.end} machine={p.machine} job={p.job}" for p in res.witness]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _run_spec(args) -> str:
    if args.alg in _BASE:
        if args.doubling:
            return f"doubling-{args.alg}"
        if args.machines is None:
            raise UsageError(f"--alg {args.alg} needs --machines")
        if args.machines < 1:
            raise UsageError(f"--alg {args.alg} needs --machines >= 1")
        return f"{args.alg}:m={args.machines}"
    consts = ",".join(map(str, args.constants))
    return f"{args.alg}:{consts}"


def cmd_run(args) -> int:
    inst = gen_mod.load(args.instance)
    spec = _run_spec(args)
    m_star = args.mstar
    if args.alg == "hybrid" and m_star is None:
        m_star = min_machines(inst) if inst.jobs else 1
    if m_star is not None and m_star < 1:
        raise UsageError("--mstar must be >= 1")
    sched = build_scheduler(spec, m_star, args.speed, trace=args.trace)
    res = simulate(sched, inst, args.speed)
    out = res.to_dict()
    out["scheduler"] = spec
    out["verified"] = bool(verify(res.schedule, inst, res.machines_used, args.speed)) if res.feasible else False
    if args.trace:
        out["trace"] = _jsonable(res.trace)
    _write(json.dumps(out, indent=1, sort_keys=True) + "\n", args.out)
    return EXIT_OK if res.feasible else EXIT_FAIL


def _compare_one(task):
    path, spec, timing = task
    inst = gen_mod.load(path)
    m_star = min_machines(inst) if inst.jobs else 0
    sched = build_scheduler(spec, max(m_star, 1))
    t0 = time.perf_counter()
    res = simulate(sched, inst)
    wall = time.perf_counter() - t0
    f = res.failure
    return [path, spec, m_star, res.machines_used, res.machines_busy, int(res.feasible),
            "" if f is None else str(f.time), "" if f is None else f.source,
            "" if f is None else f.reason, res.events, f"{wall:.6f}" if timing else "-"]


def _workers() -> int:
    n = os.cpu_count() or 1
    cap = os.environ.get("MACHMIN_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError("MACHMIN_THREADS must be an integer")
    return n


def cmd_compare(args) -> int:
    paths = []
    for pat in args.instances:
        hits = sorted(glob.glob(pat))
        paths += hits if hits else [pat]
    for p in paths:
        if not os.path.exists(p):
            raise UsageError(f"no such instance: {p}")
    matrix = args.alg or DEFAULT_MATRIX
    for spec in matrix:
        build_scheduler(spec, 1)  # reject bad specs before any work
    tasks = [(p, s, args.timing) for p in paths for s in matrix]
    workers = min(_workers(), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_compare_one, tasks))
    else:
        rows = [_compare_one(t) for t in tasks]
    order = {s: k for k, s in enumerate(matrix)}
    rows.sort(key=lambda r: (r[0], order[r[1]]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    _write(buf.getvalue(), args.csv)
    return EXIT_OK


def cmd_certify(args) -> int:
    if args.from_run:
        if len(args.paths) != 1:
            raise UsageError("certify --from-run takes exactly one INSTANCE")
        if args.machines is None or args.machines < 1:
            raise UsageError("certify --from-run needs --machines >= 1")
        inst = gen_mod.load(args.paths[0])
        run = simulate(SJFScheduler(args.machines), inst)
        if run.failure is None:
            _write(f"sjf on {args.machines} machines is feasible; nothing to certify\n", None)
            return EXIT_FAIL
        try:
            pair = cert_mod.extract_sjf_certificate(run, inst, args.l1, args.l2)
        except ValueError as e:
            raise UsageError(str(e))
        if args.out:
            _write(pair.to_json(), args.out)
    else:
        if len(args.paths) != 2:
            raise UsageError("certify takes CERTIFICATE INSTANCE")
        with open(args.paths[0]) as fh:
            pair = cert_mod.CriticalPair.from_json(fh.read())
        inst = gen_mod.load(args.paths[1])
    try:
        strong = cert_mod.check_critical(pair, inst)
        weak = cert_mod.check_weakly_critical(pair, inst)
    except KeyError as e:
        raise UsageError(str(e.args[0]))
    lines = []
    for label, res in (("critical", strong), ("weakly critical", weak)):
        if res.ok:
            lines.append(f"{label}: yes")
        else:
            where = f" at t={res.witness_time}" if res.witness_time is not None else ""
            who = f" job={res.witness_job}" if res.witness_job is not None else ""
            lines.append(f"{label}: no ({res.condition}{where}{who}: {res.detail})")
    bound = cert_mod.implied_lower_bound(pair.mu, pair.beta, pair.alpha)
    lines.append(f"implied_bound_shape={bound:.12g}")
    sys.stdout.write("\n".join(lines) + "\n")
    accepted = weak.ok if args.from_run else (strong.ok or weak.ok)
    return EXIT_OK if accepted else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="machmin", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded instance")
    g.add_argument("--kind", required=True, choices=gen_mod.KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--horizon", type=int, default=100)
    g.add_argument("--max-size", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--l1", type=_frac)
    g.add_argument("--l2", type=_frac)
    g.add_argument("--m", type=int, help="very_tight: relative laxity <= 1/m")
    g.add_argument("--rho0", type=_frac, help="loose: relative laxity >= rho0")
    g.add_argument("-o", "--out")
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("oracle", help="compute m* exactly")
    o.add_argument("instance")
    o.add_argument("--speed", type=_frac, default=Fraction(1))
    o.add_argument("--witness", action="store_true")
    o.add_argument("-o", "--out")
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("run", help="simulate one online scheduler")
    r.add_argument("instance")
    r.add_argument("--alg", required=True, choices=["edf", "sjf", "cms", "hybrid", "hybrid-adaptive"])
    r.add_argument("--machines", type=int, help="pool size for edf/sjf, m_cms for cms")
    r.add_argument("--mstar", type=int, help="hybrid: m* parameter (default: oracle value)")
    r.add_argument("--constants", type=_constants, default=(16, 8, 8), help="C_EDF,C_SJF,C_CMS")
    r.add_argument("--doubling", action="store_true", help="edf/sjf/cms: wrap in the doubling scheme")
    r.add_argument("--speed", type=_frac, default=Fraction(1))
    r.add_argument("--trace", action="store_true", help="include the CMS decision/budget log")
    r.add_argument("-o", "--out")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="run a scheduler matrix over instances, emit CSV")
    c.add_argument("instances", nargs="+", help="instance files or glob patterns")
    c.add_argument("--alg", action="append", help=f"scheduler spec (repeatable); default {DEFAULT_MATRIX}")
    c.add_argument("--csv")
    c.add_argument("--timing", action="store_true", help="fill the wall_time_s column")
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("certify", help="check a critical-pair certificate")
    k.add_argument("paths", nargs="+", metavar="PATH", help="CERTIFICATE INSTANCE, or INSTANCE with --from-run")
    k.add_argument("--from-run", action="store_true", help="extract the certificate from an SJF failure")
    k.add_argument("--machines", type=int)
    k.add_argument("--l1", type=_frac)
    k.add_argument("--l2", type=_frac)
    k.add_argument("-o", "--out", help="--from-run: write the extracted certificate here")
    k.set_defaults(func=cmd_certify)
    return ap


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"machmin {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print(f"machmin {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
