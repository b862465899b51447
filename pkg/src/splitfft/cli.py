"""``splitfft verify|bench|predict`` command-line driver.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 resource error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import analysis
from .bench import (CSV_FIELDS, BenchConfig, rows_to_csv, run_bench, run_predict,
                    run_verify, verify_instance)
from .kernel import Symmetry
from .kernel_io import KernelFormatError, load_generator
from .split import ExecutionPolicy
from .tensor import ContractError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

log = logging.getLogger("splitfft")


def _range(spec: str) -> tuple[int, int]:
    lo, _, hi = spec.partition("-")
    return int(lo), int(hi or lo)


def _is_prime(k: int) -> bool:
    return k >= 2 and all(k % p for p in range(2, int(k ** 0.5) + 1))


def _prime_factors(k: int) -> list[int]:
    out, p = [], 2
    while p * p <= k:
        while k % p == 0:
            out.append(p)
            k //= p
        p += 1
    if k > 1:
        out.append(k)
    return out


def parse_sizes(text: str) -> list[int]:
    """Size list: ``4,8,16``, or a family ``pow2:2-256``, ``range:2-10``,
    ``primeprod:2-40`` (products of distinct primes), ``primes:2-40``."""
    family, sep, rest = text.partition(":")
    if not sep:
        return [int(x) for x in text.split(",") if x]
    lo, hi = _range(rest)
    if family == "pow2":
        return [1 << k for k in range(hi.bit_length()) if lo <= 1 << k <= hi]
    if family == "range":
        return list(range(lo, hi + 1))
    if family == "primes":
        return [k for k in range(lo, hi + 1) if _is_prime(k)]
    if family == "primeprod":
        out = []
        for k in range(max(lo, 2), hi + 1):
            f = _prime_factors(k)
            if len(f) > 1 and len(set(f)) == len(f):
                out.append(k)
        return out
    raise argparse.ArgumentTypeError(f"unknown size family {family!r}")


def parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _sizes_arg(text):
    try:
        return parse_sizes(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dims", type=parse_ints, default=[1, 2, 3],
                        help="comma-separated level counts")
    common.add_argument("--sizes", type=_sizes_arg, default=[4, 8],
                        help="per-level lengths: list or family (pow2:2-64, range:2-9, ...)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--variance", type=float, default=1.0)
    run.add_argument("--reps", type=int, default=3)
    run.add_argument("--policy", choices=["lazy", "parallel"], default="lazy")
    run.add_argument("--tasks", type=int, default=2)
    run.add_argument("--symmetry", choices=[s.value for s in Symmetry], default="general")
    run.add_argument("--oracle-cap", type=int, default=4096)

    parser = argparse.ArgumentParser(prog="splitfft", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", parents=[common, run],
                            help="check split vs embed vs dense oracle")
    verify.add_argument("--generator", default=None,
                        help="JSON generator spec to verify instead of random instances")
    sub.add_parser("bench", parents=[common, run], help="time split vs embed")
    predict = sub.add_parser("predict", parents=[common], help="closed-form model ratios")
    predict.add_argument("preset", nargs="?", choices=["table1"])
    return parser


def _config(args) -> BenchConfig:
    policy = ExecutionPolicy(args.policy, tasks=args.tasks)
    return BenchConfig(dims=args.dims, sizes=args.sizes, seed=args.seed,
                       variance=args.variance, repetitions=args.reps, policy=policy,
                       symmetry=args.symmetry, oracle_cap=args.oracle_cap)


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_verify(args) -> int:
    if args.generator:
        g = load_generator(args.generator)
        rng = np.random.default_rng(args.seed)
        v = rng.normal(size=g.levels) + 1j * rng.normal(size=g.levels)
        policy = ExecutionPolicy(args.policy, tasks=args.tasks)
        records = [verify_instance(g, v, policy, args.oracle_cap)]
        ok = records[0]["status"] == "PASS"
    else:
        ok, records = run_verify(_config(args))
    for rec in records:
        log.info("d=%s levels=%s %s max_rel_err=%.3e", rec.get("d", len(rec["levels"])),
                 rec["levels"], rec["status"], rec["max_rel_err"])
    if args.format == "json":
        _emit(args, json.dumps({"pass": ok, "instances": records}, indent=2) + "\n")
    else:
        fields = ["levels", "symmetry", "seed", "max_rel_err", "status"]
        rows = [{**{f: r.get(f, "") for f in fields},
                 "levels": "x".join(map(str, r["levels"]))} for r in records]
        _emit(args, rows_to_csv(rows, fields))
    worst = max(r["max_rel_err"] for r in records)
    print(f"{'PASS' if ok else 'FAIL'}: {len(records)} instances, max rel err {worst:.3e}",
          file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_bench(args) -> int:
    rows, summary = run_bench(_config(args))
    if args.format == "json":
        _emit(args, json.dumps({"rows": rows, "summary": summary}, indent=2) + "\n")
    else:
        _emit(args, rows_to_csv(rows, CSV_FIELDS))
        if args.out:
            with open(args.out + ".summary.json", "w") as fh:
                json.dump(summary, fh, indent=2)
    for case in summary:
        if case["status"] != "ok":
            print(f"d={case['d']} n={case['n']}: {case['status']}", file=sys.stderr)
            continue
        rec = case["reconciliation"]
        print(f"d={case['d']} n={case['n']}: wall ratio (embed/split, median) "
              f"{case['wall_ratio_median']:.3f}, peak ratio {rec['peak_ratio']:.3f}, "
              f"model R_c {rec['model_r_c']:.3f}", file=sys.stderr)
    return EXIT_OK


def _cmd_predict(args) -> int:
    if args.preset == "table1":
        table = analysis.table1()
        if args.format == "json":
            _emit(args, json.dumps(table, indent=2) + "\n")
        else:
            rows = [{"ratio": name, **dict(zip(map(str, table["dims"]), table[name]))}
                    for name in ("R_c", "R_m", "R_m_sym")]
            _emit(args, rows_to_csv(rows, ["ratio"] + [str(d) for d in table["dims"]]))
        return EXIT_OK
    rows = run_predict(args.dims, args.sizes)
    if args.format == "json":
        _emit(args, json.dumps(rows, indent=2) + "\n")
    else:
        _emit(args, rows_to_csv(rows, list(rows[0]) if rows else []))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"verify": _cmd_verify, "bench": _cmd_bench, "predict": _cmd_predict}
    try:
        return handlers[args.command](args)
    except (ContractError, KernelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryError:
        print("error: out of memory", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
