"""Acceptance checks, one per criterion; each records a PASS/FAIL line shown in the pytest summary."""

import itertools
import random
import time

import pytest

from conftest import engine_solutions, oracle_solutions, random_tight_program, record
from gcasp.bench import solve_instance, verify_result
from gcasp.csp import CspInstance, Kind, alldifferent, permutation, table
from gcasp.encoders import ConEncoding, ConfigError, all_configs, encode_instance, lowered_tight_program, named_config
from gcasp.generators import gen_graceful_double_wheel, gen_latin, gen_php
from gcasp.nogoods import compile_program, solutions_equal_answer_sets
from gcasp.oracles import brute_force_answer_sets
from gcasp.program import AUX, Program, translate_cardinality
from gcasp.verify import random_mixed_instance, run_suite

TRIALS = 200
SEED = 2024


def _suite_detail(rep, seconds=None) -> str:
    text = f"{rep.passed}/{rep.trials} trials"
    if rep.theorem == "1":
        text += f", {rep.witnesses} strict witnesses"
    if seconds is not None:
        text += f", {seconds:.1f} s"
    return text


def test_c1_support_equals_arc_consistency():
    t0 = time.perf_counter()
    rep = run_suite("2", TRIALS, SEED, max_n=5, max_d=5)
    elapsed = time.perf_counter() - t0
    ok = rep.trials >= 200 and rep.ok and elapsed < 60.0
    assert record(1, ok, _suite_detail(rep, elapsed)), rep.failures[:3]


def test_c2_direct_contains_arc_consistency():
    rep = run_suite("1", TRIALS, SEED, max_n=5, max_d=5)
    ok = rep.trials >= 200 and rep.ok and rep.witnesses >= 1
    assert record(2, ok, _suite_detail(rep)), rep.failures[:3]


def test_c3_range_equals_range_consistency():
    reps = [run_suite(t, TRIALS, SEED, max_n=6, max_d=6) for t in ("4", "c2")]
    ok = all(r.trials >= 200 and r.ok for r in reps)
    detail = "; ".join(f"{r.theorem}: {_suite_detail(r)}" for r in reps)
    assert record(3, ok, detail), [r.failures[:3] for r in reps]


def test_c4_bound_equals_bound_consistency():
    reps = [run_suite(t, TRIALS, SEED, max_n=6, max_d=6) for t in ("5", "c3")]
    ok = all(r.trials >= 200 and r.ok for r in reps)
    detail = "; ".join(f"{r.theorem}: {_suite_detail(r)}" for r in reps)
    assert record(4, ok, detail), [r.failures[:3] for r in reps]


def test_c5_ksupport_conflicts_match_extensions():
    rep = run_suite("3", 100, SEED, max_n=5, max_d=5)
    assert record(5, rep.trials >= 100 and rep.ok, _suite_detail(rep)), rep.failures[:3]


def test_c6_hall_cap_monotone():
    rep = run_suite("hall", TRIALS, SEED, max_n=6, max_d=6)
    assert record(6, rep.ok, _suite_detail(rep) + " (h = 1, 3, full under R and B)"), rep.failures[:3]


def test_c7_php_refuted_by_propagation():
    problems = []
    slowest = 0.0
    for name in ("B", "R"):
        for n in range(4, 16):
            solved = solve_instance(gen_php(n), named_config(name))
            slowest = max(slowest, solved.time_ms)
            st = solved.result.stats
            if solved.result.status != "UNSAT" or st["decisions"] != 0 or solved.time_ms >= 1000.0:
                problems.append((name, n, solved.result.status, st["decisions"], round(solved.time_ms)))
    s_decisions = []
    for n in range(4, 10):
        solved = solve_instance(gen_php(n), named_config("S"))
        if solved.result.status != "UNSAT":
            problems.append(("S", n, solved.result.status))
        s_decisions.append(solved.result.stats["decisions"])
    growing = all(d > 0 for d in s_decisions) and all(a < b for a, b in zip(s_decisions, s_decisions[1:]))
    ok = not problems and growing
    detail = f"B/R n=4..15 slowest {slowest:.0f} ms; S decisions n=4..9 {s_decisions}"
    assert record(7, ok, detail), problems


def _card_program(rng: random.Random) -> tuple[Program, list[int], list[bool], int]:
    n = rng.randint(1, 6)
    k = rng.randint(1, n)
    signs = [rng.random() < 0.7 for _ in range(n)]
    p = Program()
    atoms = [AUX(i) for i in range(n)]
    p.add_choice(atoms)
    p.add_cardinality(k, [p.p(a) if s else p.n(a) for a, s in zip(atoms, signs)])
    return p, [p.intern(a) for a in atoms], signs, k


def test_c8_cardinality_lowering_sound():
    rng = random.Random(SEED)
    bad = 0
    for _ in range(100):
        p, ids, signs, k = _card_program(rng)
        got = {frozenset(a for a in s if a in ids) for s in brute_force_answer_sets(translate_cardinality(p))}
        want = set()
        for bits in itertools.product([False, True], repeat=len(ids)):
            if sum(b == s for b, s in zip(bits, signs)) < k:
                want.add(frozenset(a for a, b in zip(ids, bits) if b))
        bad += got != want
    assert record(8, bad == 0, f"{100 - bad}/100 programs"), bad


def test_c9_completion_nogoods_match_answer_sets():
    rng = random.Random(SEED)
    checked = bad = 0
    while checked < 100:
        p = random_tight_program(rng, max_atoms=6)
        if compile_program(p).num_props > 18:
            continue
        checked += 1
        bad += not solutions_equal_answer_sets(p)
    assert record(9, bad == 0, f"{checked - bad}/{checked} programs"), bad


def _bijection_corpus(rng: random.Random, count: int) -> list[CspInstance]:
    out = []
    while len(out) < count:
        if len(out) % 3 == 2:
            n = rng.randint(2, 4)
            lo = rng.randint(0, 2)
            cons = [permutation(*range(n))]
            if rng.random() < 0.5:
                cons.append(table((0, 1), [(lo, lo + 1)], "forbidden"))
            out.append(CspInstance.build([(lo, lo + n - 1)] * n, cons))
        else:
            out.append(random_mixed_instance(rng, 4, 4))
    return out


def _needs_binary(inst: CspInstance, cfg) -> bool:
    return cfg.constraint_encoding is ConEncoding.SUPPORT and any(
        c.kind is Kind.TABLE and c.arity != 2 for c in inst.constraints)


def test_c10_solution_bijection():
    rng = random.Random(SEED)
    corpus = _bijection_corpus(rng, 50)
    configs = all_configs()
    compared = skipped = 0
    mismatches = []
    for i, inst in enumerate(corpus):
        want = oracle_solutions(inst)
        for cfg in configs:
            if _needs_binary(inst, cfg):
                with pytest.raises(ConfigError):
                    encode_instance(inst, cfg)
                skipped += 1
                continue
            compared += 1
            if engine_solutions(inst, cfg) != want:
                mismatches.append((i, cfg.name))
    ok = not mismatches
    detail = f"{len(configs)} configs x {len(corpus)} instances, {compared} compared, " \
             f"{skipped} support-on-ternary skipped"
    assert record(10, ok, detail), mismatches[:5]


def test_c11_benchmarks():
    problems = []
    slowest = 0.0
    for fill in [round(0.1 * i, 1) for i in range(1, 10)]:
        for seed in range(10):
            inst = gen_latin(9, fill, seed=seed)
            solved = solve_instance(inst, named_config("S"), max_time_ms=10_000)
            slowest = max(slowest, solved.time_ms)
            if solved.result.status != "SAT" or not verify_result(inst, solved) or solved.time_ms >= 10_000:
                problems.append(("LSP", fill, seed, solved.result.status))
    ggp = []
    dw3 = gen_graceful_double_wheel(3)
    for name in ("S", "B"):
        solved = solve_instance(dw3, named_config(name, tables_direct=True), max_time_ms=60_000)
        ggp.append(f"{name} {solved.result.status} {solved.time_ms / 1000:.1f} s")
        if solved.result.status != "SAT" or not verify_result(dw3, solved) or solved.time_ms >= 60_000:
            problems.append(("DW_3", name, solved.result.status))
    ok = not problems
    detail = f"LSP 9x9 90 instances slowest {slowest:.0f} ms; DW_3: {', '.join(ggp)}"
    assert record(11, ok, detail), problems


def _alldiff_size(name: str, n: int, d: int) -> tuple[int, int]:
    enc = encode_instance(CspInstance.build([(1, d)] * n, [alldifferent(*range(n))]), named_config(name))
    low = lowered_tight_program(enc)
    return len(low.rules), len(compile_program(low).nogoods)


def test_c12_alldifferent_scaling():
    n = 33
    targets = {"S": 4.0, "R": 8.0}
    ratios = {}
    for name in targets:
        small, big = _alldiff_size(name, n, 8), _alldiff_size(name, n, 16)
        ratios[name] = (big[0] / small[0], big[1] / small[1])
    ok = all(abs(r - targets[name]) <= 0.2 * targets[name] for name, pair in ratios.items() for r in pair)
    detail = ", ".join(f"{name} rules x{r[0]:.2f} nogoods x{r[1]:.2f} (target {targets[name]:.0f} +/- 20%)"
                       for name, r in ratios.items())
    assert record(12, ok, f"n={n}, d 8 -> 16: {detail}"), ratios
