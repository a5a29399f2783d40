"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from gmpy2 import mpq

from .combinatorics import divisor_sigma
from .identities import build_side, default_param_suite, get_identity, list_identities, verify_identity
from .partitions import partition_divisor_sum
from .scalars import format_rational, parse_rational, scalar_to_json
from .series import format_series, series_to_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
U64 = (1 << 64) - 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- argument helpers ------------------------------------------------------------

def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= U64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _unit_float(text: str) -> float:
    if "/" in text:
        v = float(parse_rational(text))
    else:
        v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return v


def _params(pairs) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise UsageError(f"parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _write_json(path: str, records: list):
    try:
        if path == "-":
            json.dump(records, sys.stdout, indent=2)
            sys.stdout.write("\n")
        else:
            Path(path).write_text(json.dumps(records, indent=2) + "\n")
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc


class _IOFailure(Exception):
    pass


# -- verify ------------------------------------------------------------------------

def _known_ids() -> list:
    return [d.id for d in list_identities()]


def _select(suite_args) -> list:
    known = _known_ids()
    chosen = []
    for arg in suite_args or ["all"]:
        for ident in arg.split(","):
            ident = ident.strip()
            if not ident:
                continue
            if ident == "all":
                chosen.extend(known)
            elif ident in known:
                chosen.append(ident)
            else:
                raise UsageError(f"unknown identity {ident!r}")
    seen = set()
    return [i for i in chosen if not (i in seen or seen.add(i))]


def parse_suite_file(text: str) -> list:
    """Lines of ``<id> key=value ...``; '#' starts a comment. Returns (id, params) pairs."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        ident, *rest = line.split()
        try:
            out.append((ident, _params(rest)))
        except UsageError as exc:
            raise UsageError(f"suite file line {lineno}: {exc}") from None
    return out


def _plan(args) -> list:
    """(id, binding) pairs in deterministic order: by id, then binding index."""
    known = set(_known_ids())
    plan = []
    try:
        if args.suite_file:
            try:
                text = Path(args.suite_file).read_text()
            except OSError as exc:
                raise _IOFailure(str(exc)) from exc
            for ident, params in parse_suite_file(text):
                if ident not in known:
                    raise UsageError(f"unknown identity {ident!r}")
                order = args.order or 20
                plan.append((ident, get_identity(ident).bind(params, order, order)))
        else:
            overrides = _params(args.params)
            for ident in _select(args.suite):
                desc = get_identity(ident)
                if overrides:
                    order = args.order or 20
                    plan.append((ident, desc.bind(overrides, order, order)))
                elif args.order:
                    # one tier: identical bindings (parameter-free entries) collapse to one
                    bindings = []
                    for p in desc.suite:
                        b = desc.bind(p, args.order, args.order)
                        if b not in bindings:
                            bindings.append(b)
                    plan.extend((ident, b) for b in bindings)
                else:
                    plan.extend((ident, b) for b in default_param_suite(ident))
    except (ValueError, KeyError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    return sorted(enumerate(plan), key=lambda x: (x[1][0], x[0]))


def _run_one(item):
    ident, binding = item
    return verify_identity(ident, binding)


def cmd_verify(args) -> int:
    plan = [p for _, p in _plan(args)]
    if args.jobs > 1 and len(plan) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            reports = list(pool.map(_run_one, plan))
    else:
        reports = [_run_one(p) for p in plan]
    status = EXIT_OK
    for r in reports:
        tag = r.outcome.upper()
        if r.expected_fail:
            tag += " (informational)"
        elif not r.passed:
            status = EXIT_FAIL
        params = " ".join(f"{k}={v}" for k, v in r.binding.to_json().items())
        line = f"{tag:24s} {r.id:30s} nq={r.nq} nt={r.nt} {params}".rstrip()
        if not args.quiet:
            print(line)
            if r.mismatch:
                mm = r.mismatch
                print(f"    first mismatch at {mm['monomial']}: {mm['sides'][0]}={_show(mm['left'])}"
                      f" {mm['sides'][1]}={_show(mm['right'])}")
            for note in r.notes:
                print(f"    note: {note}")
    npass = sum(r.passed for r in reports)
    print(f"{npass}/{len(reports)} checks passed")
    if args.json:
        recs = []
        for r in reports:
            rec = r.to_json("verify")
            rec["expected_fail"] = r.expected_fail
            recs.append(rec)
        _write_json(args.json, recs)
    return status


def _show(v) -> str:
    if isinstance(v, list):
        return format_rational(mpq(int(v[0]), int(v[1])))
    return json.dumps(v)


# -- series ---------------------------------------------------------------------------

def cmd_series(args) -> int:
    if "/" not in args.target:
        raise UsageError("target must be <id>/<side>")
    ident, side = args.target.split("/", 1)
    if ident not in _known_ids():
        raise UsageError(f"unknown identity {ident!r}")
    desc = get_identity(ident)
    if side not in desc.side_names:
        raise UsageError(f"{ident} has no side {side!r}; sides are {', '.join(desc.side_names)}")
    order = args.order or 10
    try:
        binding = desc.bind(_params(args.params), order, args.nt or order)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    start = time.perf_counter()
    s = build_side(ident, side, binding)
    millis = (time.perf_counter() - start) * 1000
    print(format_series(s))
    if args.json:
        _write_json(args.json, [{
            "command": "series", "id": ident, "params": binding.to_json(), "nq": binding.nq,
            "nt": binding.nt, "outcome": "ok", "side": side, "series": series_to_json(s),
            "millis": round(millis, 3)}])
    return EXIT_OK


# -- simulate ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    from .stochastic import DagModel, dag_sample, heap_sample

    start = time.perf_counter()
    rows = []
    if args.kind == "dag":
        if args.p is None:
            raise UsageError("simulate dag needs --p")
        if args.n < 1:
            raise UsageError("--n must be at least 1")
        batch = dag_sample(DagModel(args.n, args.p), args.seed, args.trials, jobs=args.jobs)
        mean, var = batch.gap_estimates()
        rows = [("E(n - gamma)", mean, 4), ("Var(gamma)", var, 5)]
        rec = batch.to_json()
        header = f"dag n={args.n} p={args.p!r} trials={args.trials} seed={args.seed}"
    else:
        if args.q is None:
            raise UsageError("simulate heap needs --q")
        sample = heap_sample(args.q, args.seed, args.trials, jobs=args.jobs)
        rows = [("K1 (mean)", sample.mean, 5), ("K2 (variance)", sample.variance, 5),
                ("K3", sample.third_cumulant, 5)]
        rec = sample.to_json()
        header = f"heap q={args.q!r} trials={args.trials} seed={args.seed}"
    ok = all(e.within(k) for _, e, k in rows)
    print(header)
    print(f"{'quantity':16s} {'estimate':>14s} {'std err':>12s} {'limit':>14s} {'z':>8s}  band")
    for name, e, k in rows:
        verdict = "inside" if e.within(k) else "OUTSIDE"
        print(f"{name:16s} {e.value:14.8f} {e.se:12.8f} {e.exact:14.8f} {e.z:8.3f}  {verdict} {k} se")
    if args.json:
        rec.update({"nq": None, "nt": None, "outcome": "pass" if ok else "fail",
                    "estimates": {name: e.to_json() for name, e, _ in rows},
                    "millis": round((time.perf_counter() - start) * 1000, 3)})
        _write_json(args.json, [rec])
    return EXIT_OK


# -- partitions ------------------------------------------------------------------------

def cmd_partitions(args) -> int:
    try:
        cs = [parse_rational(c) for c in args.c.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    start = time.perf_counter()
    bad = []
    count = 0
    for c in cs:
        for m in range(args.max_m + 1):
            for n in range(1, args.max_n + 1):
                count += 1
                lhs = partition_divisor_sum(n, m, c)
                rhs = divisor_sigma(m, c, n)
                if lhs != rhs:
                    bad.append({"n": n, "m": m, "c": format_rational(c),
                                "partition_sum": scalar_to_json(lhs), "sigma": scalar_to_json(rhs)})
    millis = (time.perf_counter() - start) * 1000
    print(f"{count - len(bad)}/{count} partition sums agree with sigma_(m,c)(n) "
          f"(n <= {args.max_n}, m <= {args.max_m}, c in {{{', '.join(format_rational(c) for c in cs)}}})")
    for b in bad[:20]:
        print(f"    mismatch {b}")
    if args.json:
        rec = {"command": "partitions", "params": {"max_n": str(args.max_n), "max_m": str(args.max_m),
                                                   "c": args.c},
               "nq": args.max_n, "nt": args.max_n, "outcome": "fail" if bad else "pass",
               "millis": round(millis, 3)}
        if bad:
            rec["mismatch"] = bad[0]
        _write_json(args.json, [rec])
    return EXIT_FAIL if bad else EXIT_OK


# -- limit -----------------------------------------------------------------------------

def cmd_limit(args) -> int:
    from .stochastic import limit_verify

    try:
        f = [parse_rational(x) for x in args.f.split(",")] if args.f else None
        b = parse_rational(args.b) if args.b else None
        rep = limit_verify(args.mode, f=f, b=b, a=args.a, nq=args.order, nt=args.order)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    params = " ".join(f"{k}={v}" for k, v in rep.to_json()["params"].items())
    print(f"{rep.outcome.upper():8s} {rep.mode} {params} nq={rep.nq} "
          f"stabilized at l={rep.stabilization_index}")
    if args.show:
        print(format_series(rep.limit))
    if args.json:
        _write_json(args.json, [rep.to_json()])
    return EXIT_OK if rep.passed else EXIT_FAIL


# -- report ----------------------------------------------------------------------------

def cmd_report(args) -> int:
    from .report import load_schema, validate_records

    merged = []
    for path in args.inputs:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise _IOFailure(str(exc)) from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: not JSON: {exc}") from None
        if not isinstance(data, list):
            raise UsageError(f"{path}: expected a JSON array of records")
        merged.extend(data)
    problems = validate_records(merged, load_schema())
    if problems:
        for p in problems[:10]:
            print(f"schema: {p}", file=sys.stderr)
        return EXIT_USAGE
    merged.sort(key=lambda r: (r.get("command", ""), r.get("id", "")))
    counts = {}
    failing = 0
    for r in merged:
        counts[r["outcome"]] = counts.get(r["outcome"], 0) + 1
        if r["outcome"] in ("fail", "unstable") and not r.get("expected_fail", False):
            failing += 1
    summary = ", ".join(f"{v} {k}" for k, v in sorted(counts.items()))
    print(f"{len(merged)} records: {summary}")
    if args.json:
        _write_json(args.json, merged)
    return EXIT_FAIL if failing else EXIT_OK


# -- entry point -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qdivisor", description="Exact checks of divisor-generating q-series identities.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run identity verification suites")
    v.add_argument("--suite", action="append", help="identity ids, comma separated, or 'all' (repeatable)")
    v.add_argument("--suite-file", help="file of '<id> key=value ...' lines")
    v.add_argument("--order", type=_positive_int, help="truncation tier: Nq = Nt = ORDER")
    v.add_argument("--params", action="append", metavar="KEY=VAL",
                   help="run one binding per identity with these overrides (rationals as p/q)")
    v.add_argument("--json", metavar="PATH", help="write JSON records ('-' for stdout)")
    v.add_argument("--jobs", type=_positive_int, default=1)
    v.add_argument("--quiet", action="store_true", help="print only the summary line")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("series", help="print the coefficients of one side of an identity")
    s.add_argument("target", help="<id>/<side>, e.g. kluyver/divisor")
    s.add_argument("--order", type=_positive_int, help="Nq (default 10)")
    s.add_argument("--nt", type=_positive_int, help="total-degree bound (default: Nq)")
    s.add_argument("--params", action="append", metavar="KEY=VAL")
    s.add_argument("--json", metavar="PATH")
    s.set_defaults(func=cmd_series)

    m = sub.add_parser("simulate", help="Monte Carlo for the digraph and heap models")
    m.add_argument("kind", choices=("dag", "heap"))
    m.add_argument("--n", type=_positive_int, default=12, help="vertex count (dag)")
    m.add_argument("--p", type=_unit_float, help="edge probability (dag)")
    m.add_argument("--q", type=_unit_float, help="heap parameter")
    m.add_argument("--trials", type=_positive_int, default=200_000)
    m.add_argument("--seed", type=_seed, default=0)
    m.add_argument("--jobs", type=_positive_int, default=1)
    m.add_argument("--json", metavar="PATH")
    m.set_defaults(func=cmd_simulate)

    t = sub.add_parser("partitions", help="compare distinct-partition sums with divisor sums")
    t.add_argument("--max-n", type=_positive_int, default=40)
    t.add_argument("--max-m", type=int, default=4)
    t.add_argument("--c", default="1,1/2,-1/3", help="comma-separated weights")
    t.add_argument("--json", metavar="PATH")
    t.set_defaults(func=cmd_partitions)

    lim = sub.add_parser("limit", help="check a limit theorem for the t_n recurrence")
    lim.add_argument("mode", choices=("acs-poly", "two-var-poly", "periodic", "geometric-b", "ceiling"))
    lim.add_argument("--f", help="coefficients c0,c1,... or a period pattern f(1),...,f(N)")
    lim.add_argument("--b", help="base for geometric-b")
    lim.add_argument("--a", choices=("zero", "formal"), default="zero")
    lim.add_argument("--order", type=_positive_int, default=25)
    lim.add_argument("--show", action="store_true", help="print the stabilized series")
    lim.add_argument("--json", metavar="PATH")
    lim.set_defaults(func=cmd_limit)

    r = sub.add_parser("report", help="validate and merge JSON report files")
    r.add_argument("inputs", nargs="+")
    r.add_argument("--json", metavar="PATH", help="write the merged array")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qdivisor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _IOFailure as exc:
        print(f"qdivisor: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
