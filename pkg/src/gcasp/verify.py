"""Randomised check that unit propagation on each encoding reaches the promised consistency.

Every suite draws seeded instances, restricts domains by injecting ladder
literals, propagates to a fixpoint and compares the decoded domains with an
oracle from ``oracles``.  Failures are collected, never raised.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .csp import CspInstance, Domain, alldifferent, table
from .encoders import ConEncoding, EncodedInstance, EncodingConfig, VarEncoding, encode_instance, lowered_tight_program
from .engine import Engine, extract_domains
from .generators import gen_php
from .nogoods import compile_program
from .oracles import (
    ac3_binary_decomposition, bound_consistent_domains, fixpoint, range_consistent_domains,
    relational_k_extension_exists,
)
from .program import B, E, R

THEOREMS = ("1", "2", "3", "4", "5", "c2", "c3", "hall")
SUITE_TITLES = {
    "1": "direct encoding contains arc consistency",
    "2": "support encoding equals arc consistency",
    "3": "2-support conflicts match relational extension",
    "4": "range encoding equals range consistency",
    "5": "bound encoding equals bound consistency",
    "c2": "range all-different equals range consistency",
    "c3": "bound all-different equals bound consistency",
    "hall": "Hall caps prune monotonically",
}

SUPPORT_CFG = EncodingConfig(VarEncoding.DIRECT, ConEncoding.SUPPORT)
DIRECT_CFG = EncodingConfig(VarEncoding.DIRECT, ConEncoding.DIRECT)
RANGE_CFG = EncodingConfig(VarEncoding.RANGE, ConEncoding.RANGE)
BOUND_CFG = EncodingConfig(VarEncoding.BOUND, ConEncoding.BOUND)

Doms = Optional[dict]  # var -> Domain, None when failed


@dataclass
class SuiteReport:
    theorem: str
    trials: int = 0
    passed: int = 0
    witnesses: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.trials and not self.failures and (self.theorem != "1" or self.witnesses > 0)

    def line(self) -> str:
        extra = f", {self.witnesses} strict witnesses" if self.theorem == "1" else ""
        return (f"[{self.theorem}] {SUITE_TITLES[self.theorem]}: {self.passed}/{self.trials} passed{extra}"
                f" -> {'PASS' if self.ok else 'FAIL'}")


@dataclass
class VerifyReport:
    suites: list

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.suites)

    def lines(self) -> list[str]:
        return [s.line() for s in self.suites]


# -- random corpora ------------------------------------------------------------

def _domains(rng: random.Random, n: int, max_d: int) -> list[tuple[int, int]]:
    out = []
    for _ in range(n):
        lo = rng.randint(0, 2)
        out.append((lo, lo + rng.randint(2, max(2, max_d)) - 1))
    return out


def _random_table(rng: random.Random, scope: tuple, doms: list) -> object:
    space = [()]
    for v in scope:
        lo, hi = doms[v]
        space = [t + (x,) for t in space for x in range(lo, hi + 1)]
    density = rng.uniform(0.2, 0.8)
    tuples = [t for t in space if rng.random() < density]
    return table(scope, tuples, rng.choice(["allowed", "forbidden"]))


def random_binary_instance(rng: random.Random, max_n: int, max_d: int) -> CspInstance:
    n = rng.randint(2, max(2, max_n))
    doms = _domains(rng, n, max_d)
    cons = []
    for _ in range(rng.randint(1, n + 1)):
        x, y = rng.sample(range(n), 2)
        cons.append(_random_table(rng, (x, y), doms))
    return CspInstance.build(doms, cons)


def random_alldiff_instance(rng: random.Random, max_n: int, max_d: int) -> CspInstance:
    n = rng.randint(2, max(2, max_n))
    lo = rng.randint(0, 2)
    doms = [(lo + rng.randint(0, 1), lo + rng.randint(1, max(1, max_d - 1))) for _ in range(n)]
    doms = [(a, max(a, b)) for a, b in doms]
    return CspInstance.build(doms, [alldifferent(*range(n))])


def random_mixed_instance(rng: random.Random, max_n: int, max_d: int) -> CspInstance:
    """Either an all-different or one or two tables of arity 2 or 3."""
    if rng.random() < 0.5:
        return random_alldiff_instance(rng, max_n, max_d)
    n = rng.randint(3, max(3, max_n))
    doms = _domains(rng, n, min(max_d, 5))
    cons = []
    for _ in range(rng.randint(1, 2)):
        arity = rng.choice([2, 3])
        cons.append(_random_table(rng, tuple(rng.sample(range(n), arity)), doms))
    return CspInstance.build(doms, cons)


# -- injections ------------------------------------------------------------------

def _lit(enc: EncodedInstance, sym: tuple, true: bool) -> Optional[int]:
    aid = enc.program.lookup(sym)
    if aid is None:
        return None
    return 2 * aid if true else 2 * aid + 1


def random_subsets(rng: random.Random, instance: CspInstance) -> dict:
    state = {}
    for var in instance.variables:
        vals = [x for x in range(var.lo, var.hi + 1) if rng.random() < 0.7]
        state[var.id] = Domain.from_values(vals or [rng.randint(var.lo, var.hi)])
    return state


def random_intervals(rng: random.Random, instance: CspInstance) -> dict:
    state = {}
    for var in instance.variables:
        a = rng.randint(var.lo, var.hi)
        b = rng.randint(var.lo, var.hi)
        if rng.random() < 0.4:
            a, b = var.lo, var.hi
        state[var.id] = Domain(min(a, b), max(a, b))
    return state


def inject_values(enc: EncodedInstance, state: dict) -> list[int]:
    """``F e(v,i)`` for every value removed from the initial domain."""
    lits = []
    for var in enc.instance.variables:
        lay = enc.var_map[var.id]
        for x in range(var.lo, var.hi + 1):
            if x not in state[var.id]:
                lits.append(_lit(enc, E(var.id, lay.shift(x)), False))
    return lits


def inject_range(enc: EncodedInstance, state: dict) -> list[int]:
    """``T r(v,l,u)``, ``F r(v,1,l-1)``, ``F r(v,u+1,d)`` for the interval ``[l,u]``."""
    lits = []
    for var in enc.instance.variables:
        lay = enc.var_map[var.id]
        l, u, d = lay.shift(state[var.id].min), lay.shift(state[var.id].max), lay.d
        lits.append(_lit(enc, R(var.id, l, u), True))
        if l > 1:
            lits.append(_lit(enc, R(var.id, 1, l - 1), False))
        if u < d:
            lits.append(_lit(enc, R(var.id, u + 1, d), False))
    return [x for x in lits if x is not None]


def inject_bound(enc: EncodedInstance, state: dict) -> list[int]:
    """``T b(v,u)`` and ``F b(v,l-1)`` for the interval ``[l,u]``."""
    lits = []
    for var in enc.instance.variables:
        lay = enc.var_map[var.id]
        l, u = lay.shift(state[var.id].min), lay.shift(state[var.id].max)
        lits.append(_lit(enc, B(var.id, u), True))
        if l > 1:
            lits.append(_lit(enc, B(var.id, l - 1), False))
    return [x for x in lits if x is not None]


def up_domains(enc: EncodedInstance, assumptions: list[int], ladder: Optional[str] = None) -> Doms:
    """Domains at the unit-propagation fixpoint after ``assumptions``; None on conflict."""
    engine = Engine(compile_program(lowered_tight_program(enc)))
    out = engine.assume(assumptions)
    if out.is_conflict:
        return None
    doms = {}
    for var in enc.instance.variables:
        dom = extract_domains(out.values, enc, var.id, ladder)
        if dom is None:
            return None
        doms[var.id] = dom
    return doms


def _sets(doms: Doms) -> Optional[dict]:
    return None if doms is None else {v: set(d.values()) for v, d in doms.items()}


def _contains(big: Doms, small: Doms) -> bool:
    if small is None:
        return True
    if big is None:
        return False
    return all(set(small[v].values()) <= set(big[v].values()) for v in small)


# -- suites ----------------------------------------------------------------------

def _equality_witness(d: int) -> bool:
    """Direct encoding misses pruning on ``x = y`` that AC-3 performs."""
    inst = CspInstance.build([(1, d), (1, d)], [table((0, 1), [(a, a) for a in range(1, d + 1)])])
    state = {0: Domain(1, 2), 1: Domain(1, d)}
    enc = encode_instance(inst, DIRECT_CFG)
    up = up_domains(enc, inject_values(enc, state))
    ac = ac3_binary_decomposition(inst, state)
    return _contains(up, ac) and _sets(up) != _sets(ac)


def _compare_suite(theorem: str, trials: int, rng: random.Random, make: Callable, restrict: Callable,
                   cfg: EncodingConfig, inject: Callable, oracle: Callable, ladder: Optional[str],
                   compare: Callable) -> SuiteReport:
    rep = SuiteReport(theorem)
    for t in range(trials):
        inst = make(rng)
        state = restrict(rng, inst)
        enc = encode_instance(inst, cfg)
        up = up_domains(enc, inject(enc, state), ladder)
        expected = oracle(inst, state)
        rep.trials += 1
        if compare(up, expected):
            rep.passed += 1
        else:
            rep.failures.append({"trial": t, "up": _sets(up), "oracle": _sets(expected)})
    return rep


def _equal(up: Doms, expected: Doms) -> bool:
    return _sets(up) == _sets(expected)


def _equal_bounds(up: Doms, expected: Doms) -> bool:
    if up is None or expected is None:
        return up is None and expected is None
    return all((up[v].min, up[v].max) == (expected[v].min, expected[v].max) for v in up)


def _ksupport_suite(trials: int, rng: random.Random, max_d: int) -> SuiteReport:
    rep = SuiteReport("3")
    cfg = EncodingConfig(VarEncoding.DIRECT, ConEncoding.KSUPPORT, k=2)
    for t in range(trials):
        doms = _domains(rng, 3, min(max_d, 5))
        c = _random_table(rng, (0, 1, 2), doms)
        inst = CspInstance.build(doms, [c])
        enc = encode_instance(inst, cfg)
        engine = Engine(compile_program(lowered_tight_program(enc)))
        state = inst.domains()
        ok = True
        for i, j in ((0, 1), (0, 2), (1, 2)):
            li, lj = enc.var_map[i], enc.var_map[j]
            for a in state[i].values():
                for b in state[j].values():
                    lits = [2 * enc.program.lookup(E(i, li.shift(a))), 2 * enc.program.lookup(E(j, lj.shift(b)))]
                    conflict = engine.probe(lits).is_conflict
                    extends = relational_k_extension_exists(c, state, {i: a, j: b})
                    if conflict == extends:
                        ok = False
                        rep.failures.append({"trial": t, "pair": ((i, a), (j, b)), "conflict": conflict})
        rep.trials += 1
        rep.passed += ok
    return rep


def _pruned(inst: CspInstance, state: dict, doms: Doms) -> set:
    before = {(v, x) for v, d in state.items() for x in d.values()}
    if doms is None:
        return before
    return before - {(v, x) for v, d in doms.items() for x in d.values()}


def _hall_suite(trials: int, rng: random.Random, max_n: int, max_d: int) -> SuiteReport:
    rep = SuiteReport("hall")
    caps = (1, 3, None)
    for t in range(trials):
        if t % 4 == 0:
            inst = gen_php(rng.randint(2, max(2, max_n)))
        else:
            inst = random_alldiff_instance(rng, max_n, max_d)
        state = random_intervals(rng, inst)
        ok = True
        for base, inject in ((RANGE_CFG, inject_range), (BOUND_CFG, inject_bound)):
            pruned = []
            for h in caps:
                cfg = EncodingConfig(base.variable_encoding, base.constraint_encoding, hall_cap=h)
                enc = encode_instance(inst, cfg)
                pruned.append(_pruned(inst, state, up_domains(enc, inject(enc, state))))
            if not (pruned[0] <= pruned[1] <= pruned[2]):
                ok = False
                rep.failures.append({"trial": t, "encoding": base.constraint_encoding.value,
                                     "pruned": [sorted(p) for p in pruned]})
        rep.trials += 1
        rep.passed += ok
    return rep


def run_suite(theorem: str, trials: int, seed: int = 0, max_n: int = 5, max_d: int = 5) -> SuiteReport:
    rng = random.Random(f"{theorem}:{seed}")
    binary = lambda r: random_binary_instance(r, max_n, max_d)  # noqa: E731
    mixed = lambda r: random_mixed_instance(r, max_n, max_d)  # noqa: E731
    alldiff = lambda r: random_alldiff_instance(r, max_n, max_d)  # noqa: E731
    rc = lambda inst, st: fixpoint(inst, st, range_consistent_domains)  # noqa: E731
    bc = lambda inst, st: fixpoint(inst, st, bound_consistent_domains)  # noqa: E731
    if theorem == "1":
        rep = _compare_suite("1", trials, rng, binary, random_subsets, DIRECT_CFG, inject_values,
                             ac3_binary_decomposition, "e", _contains)
        rep.witnesses = sum(_equality_witness(d) for d in range(3, max(3, max_d) + 1))
        return rep
    if theorem == "2":
        return _compare_suite("2", trials, rng, binary, random_subsets, SUPPORT_CFG, inject_values,
                              ac3_binary_decomposition, "e", _equal)
    if theorem == "3":
        return _ksupport_suite(trials, rng, max_d)
    if theorem == "4":
        return _compare_suite("4", trials, rng, mixed, random_intervals, RANGE_CFG, inject_range, rc, "r", _equal)
    if theorem == "c2":
        return _compare_suite("c2", trials, rng, alldiff, random_intervals, RANGE_CFG, inject_range, rc, "r", _equal)
    if theorem == "5":
        return _compare_suite("5", trials, rng, mixed, random_intervals, BOUND_CFG, inject_bound, bc, "b",
                              _equal_bounds)
    if theorem == "c3":
        return _compare_suite("c3", trials, rng, alldiff, random_intervals, BOUND_CFG, inject_bound, bc, "b",
                              _equal_bounds)
    if theorem == "hall":
        return _hall_suite(trials, rng, max_n, max_d)
    raise ValueError(f"unknown theorem {theorem!r}; expected one of {', '.join(THEOREMS)} or all")


def verify_theorems(trials: int = 200, seed: int = 0, max_n: int = 5, max_d: int = 5,
                    theorem: str = "all") -> VerifyReport:
    names = THEOREMS if theorem == "all" else (theorem,)
    return VerifyReport([run_suite(t, trials, seed, max_n, max_d) for t in names])
