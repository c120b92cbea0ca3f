"""Benchmark runner: instance families x encodings -> JSON-lines rows."""

from __future__ import annotations

import itertools
import json
import math
import resource
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

from .csp import CspInstance, satisfies
from .encoders import EncodedInstance, EncodingConfig, encode_instance, lowered_tight_program, named_config
from .engine import Engine, SolveResult, extract_csp_solution
from .generators import gen_graceful_double_wheel, gen_latin, gen_php
from .nogoods import compile_program
from .oracles import MAX_ENUM, enumerate_solutions

FAMILIES = ("php", "latin", "graceful")


@dataclass
class BenchRow:
    family: str
    parameters: dict
    encoding: str
    status: str
    decisions: int = 0
    conflicts: int = 0
    propagations: int = 0
    time_ms: float = 0.0
    seed: int = 0
    verified: Optional[bool] = None

    def __post_init__(self):
        if self.status not in ("SAT", "UNSAT", "LIMIT"):
            raise ValueError(f"bad status {self.status!r}")
        if self.time_ms < 0:
            raise ValueError("negative time")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class BenchSpec:
    family: str
    grid: list  # list of parameter dicts
    encodings: list = field(default_factory=lambda: ["S", "B", "R"])
    max_time_ms: Optional[float] = None
    max_conflicts: Optional[int] = None
    seed: int = 0
    workers: int = 1
    max_memory_mb: Optional[int] = None  # enforced in pool workers only


@dataclass
class Solved:
    result: SolveResult
    encoded: EncodedInstance
    assignment: Optional[dict]
    time_ms: float


def solve_instance(instance: CspInstance, config: EncodingConfig, seed: int = 0,
                   max_time_ms: Optional[float] = None, max_conflicts: Optional[int] = None) -> Solved:
    """Encode, lower, compile and search; the time covers the whole pipeline."""
    t0 = time.perf_counter()
    encoded = encode_instance(instance, config)
    db = compile_program(lowered_tight_program(encoded))
    remaining = None
    if max_time_ms is not None:
        remaining = max(0.0, max_time_ms - (time.perf_counter() - t0) * 1000.0)
    result = Engine(db, seed=seed).solve(max_conflicts=max_conflicts, max_time_ms=remaining)
    assignment = extract_csp_solution(result.model, encoded) if result.status == "SAT" else None
    return Solved(result, encoded, assignment, (time.perf_counter() - t0) * 1000.0)


def make_instance(family: str, params: dict) -> CspInstance:
    if family == "php":
        return gen_php(int(params["n"]))
    if family == "latin":
        return gen_latin(int(params["n"]), float(params.get("fill", 0.0)), int(params.get("seed", 0)),
                         params.get("mode", "from_complete"))
    if family == "graceful":
        return gen_graceful_double_wheel(int(params["n"]))
    raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")


def config_for(family: str, encoding: str) -> EncodingConfig:
    # Graceful labelling tables always use the direct table encoding.
    return named_config(encoding, tables_direct=family == "graceful")


def _search_space(instance: CspInstance) -> int:
    return math.prod(v.size for v in instance.variables)


def verify_result(instance: CspInstance, solved: Solved) -> Optional[bool]:
    """Re-check SAT answers with ``satisfies`` and small UNSAT answers by enumeration."""
    if solved.result.status == "SAT":
        return satisfies(instance, solved.assignment)
    if solved.result.status == "UNSAT" and _search_space(instance) <= MAX_ENUM:
        return not enumerate_solutions(instance)
    return None


def run_one(family: str, params: dict, encoding: str, seed: int = 0,
            max_time_ms: Optional[float] = None, max_conflicts: Optional[int] = None) -> BenchRow:
    instance = make_instance(family, params)
    solved = solve_instance(instance, config_for(family, encoding), seed, max_time_ms, max_conflicts)
    stats = solved.result.stats
    return BenchRow(family, dict(params), encoding, solved.result.status, stats["decisions"],
                    stats["conflicts"], stats["propagations"], round(solved.time_ms, 3), seed,
                    verify_result(instance, solved))


def _run_job(job: tuple, max_memory_mb: Optional[int] = None) -> BenchRow:
    if max_memory_mb is not None:
        limit = max_memory_mb * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
    try:
        return run_one(*job)
    except MemoryError:
        family, params, encoding, seed = job[:4]
        return BenchRow(family, dict(params), encoding, "LIMIT", seed=seed)


def run_bench(spec: BenchSpec, jsonl: Optional[str] = None) -> list[BenchRow]:
    """One row per (grid point, encoding), sorted by parameters then encoding."""
    jobs = [(spec.family, params, enc, spec.seed, spec.max_time_ms, spec.max_conflicts)
            for params in spec.grid for enc in spec.encodings]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_run_job, jobs, itertools.repeat(spec.max_memory_mb)))
    else:
        rows = [_run_job(j) for j in jobs]
    order = {enc: i for i, enc in enumerate(spec.encodings)}
    rows.sort(key=lambda r: (json.dumps(r.parameters, sort_keys=True), order[r.encoding]))
    if jsonl is not None:
        with open(jsonl, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(row.to_json() + "\n")
    return rows


def _values(text: str) -> list:
    """``3``, ``1,2,5``, ``8..12`` (inclusive) or ``0.1..0.9:0.2``."""
    if ".." in text:
        span, _, step = text.partition(":")
        lo, hi = span.split("..")
        if step or "." in lo or "." in hi:
            lo_f, hi_f, st = float(lo), float(hi), float(step or 1)
            count = int(round((hi_f - lo_f) / st)) + 1
            return [round(lo_f + i * st, 10) for i in range(count)]
        return list(range(int(lo), int(hi) + 1))
    out = []
    for item in text.split(","):
        try:
            out.append(int(item))
        except ValueError:
            try:
                out.append(float(item))
            except ValueError:
                out.append(item)
    return out


def parse_grid(text: str) -> list[dict]:
    """Cartesian product of ``key=values`` items separated by ``;``."""
    keys, columns = [], []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        key, sep, vals = part.partition("=")
        if not sep:
            raise ValueError(f"grid item {part!r} needs key=values")
        keys.append(key.strip())
        columns.append(_values(vals.strip()))
    return [dict(zip(keys, combo)) for combo in itertools.product(*columns)]


def rows_from_jsonl(lines: Iterable[str]) -> list[BenchRow]:
    return [BenchRow(**json.loads(line)) for line in lines if line.strip()]
