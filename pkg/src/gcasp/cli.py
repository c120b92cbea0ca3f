"""Command-line entry point: ``gcasp {gen,encode,solve,verify,bench}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional

from .bench import FAMILIES, BenchSpec, make_instance, parse_grid, run_bench, solve_instance
from .csp import InstanceFormatError, parse_instance, serialize_instance
from .encoders import ConEncoding, ConfigError, EncodingConfig, VarEncoding, encode_instance
from .program import serialize_program
from .verify import THEOREMS, verify_theorems

EXIT_SAT, EXIT_UNSAT, EXIT_LIMIT = 10, 20, 30
EXIT_USAGE = 2

_DEFAULT_VAR = {
    ConEncoding.DIRECT: VarEncoding.DIRECT,
    ConEncoding.SUPPORT: VarEncoding.DIRECT,
    ConEncoding.KSUPPORT: VarEncoding.DIRECT,
    ConEncoding.RANGE: VarEncoding.RANGE,
    ConEncoding.BOUND: VarEncoding.BOUND,
}


def _con_enc(text: str) -> tuple[ConEncoding, int]:
    name, _, k = text.partition(":")
    try:
        enc = ConEncoding(name)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown constraint encoding {text!r}") from None
    if k and enc is not ConEncoding.KSUPPORT:
        raise argparse.ArgumentTypeError("only ksupport takes a :K suffix")
    try:
        return enc, int(k) if k else (2 if enc is ConEncoding.KSUPPORT else 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k in {text!r}") from None


def config_from_args(args: argparse.Namespace) -> EncodingConfig:
    enc, k = args.con_enc
    var = VarEncoding(args.var_enc) if args.var_enc else _DEFAULT_VAR[enc]
    cfg = EncodingConfig(var, enc, k=k, hall_cap=args.hall_cap,
                         permutation_strengthening=args.permutation_strengthening)
    cfg.check()
    return cfg


def _read_instance(path: str):
    with open(path, "rb") as fh:
        return parse_instance(fh.read())


def _write(path: Optional[str], data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def cmd_gen(args: argparse.Namespace) -> int:
    params = {"n": args.n}
    if args.family == "latin":
        params.update(fill=args.fill, seed=args.seed, mode=args.mode)
    _write(args.out, serialize_instance(make_instance(args.family, params)))
    return 0


def cmd_encode(args: argparse.Namespace) -> int:
    encoded = encode_instance(_read_instance(args.instance), config_from_args(args))
    _write(args.out, serialize_program(encoded.program))
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    instance = _read_instance(args.instance)
    solved = solve_instance(instance, config_from_args(args), args.seed, args.max_time_ms, args.max_conflicts)
    doc = {"status": solved.result.status, **solved.result.stats, "total_ms": round(solved.time_ms, 3)}
    if solved.assignment is not None:
        doc["solution"] = {instance.variables[v].name: x for v, x in sorted(solved.assignment.items())}
    print(json.dumps(doc, sort_keys=True))
    return {"SAT": EXIT_SAT, "UNSAT": EXIT_UNSAT}.get(solved.result.status, EXIT_LIMIT)


def cmd_verify(args: argparse.Namespace) -> int:
    report = verify_theorems(args.trials, args.seed, args.max_n, args.max_d, args.theorem)
    for line in report.lines():
        print(line)
    for suite in report.suites:
        for failure in suite.failures[:5]:
            print(f"  {suite.theorem}: {failure}", file=sys.stderr)
    return 0 if report.ok else 1


def cmd_bench(args: argparse.Namespace) -> int:
    spec = BenchSpec(args.family, parse_grid(args.grid), [e.strip() for e in args.encodings.split(",") if e.strip()],
                     args.max_time_ms, args.max_conflicts, args.seed, args.workers, args.max_memory_mb)
    for row in run_bench(spec, args.jsonl):
        print(row.to_json())
    return 0


def _encoding_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument("--var-enc", choices=[v.value for v in VarEncoding],
                   help="variable ladders (default follows --con-enc)")
    p.add_argument("--con-enc", type=_con_enc, default=(ConEncoding.SUPPORT, 1),
                   help="direct | support | ksupport:K | range | bound")
    p.add_argument("--hall-cap", type=int, help="largest Hall interval posted by range/bound")
    p.add_argument("--permutation-strengthening", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcasp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a benchmark instance as JSON")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--fill", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["from_complete", "random"], default="from_complete")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("encode", help="print the ground program for an instance")
    _encoding_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("solve", help="solve an instance; exit 10 SAT, 20 UNSAT, 30 LIMIT")
    _encoding_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-time-ms", type=float)
    p.add_argument("--max-conflicts", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="randomised propagation-strength checks")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-n", type=int, default=5)
    p.add_argument("--max-d", type=int, default=5)
    p.add_argument("--theorem", choices=[*THEOREMS, "all"], default="all")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a family over a parameter grid")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--grid", required=True, help='e.g. "n=8..12" or "n=9;fill=0.1..0.9:0.1;seed=0..9"')
    p.add_argument("--encodings", default="S,B,R")
    p.add_argument("--jsonl")
    p.add_argument("--max-time-ms", type=float)
    p.add_argument("--max-conflicts", type=int)
    p.add_argument("--max-memory-mb", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (InstanceFormatError, ConfigError, ValueError, OSError) as exc:
        print(f"gcasp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
