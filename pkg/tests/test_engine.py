import random

import pytest

from gcasp.csp import CspInstance, alldifferent, satisfies
from gcasp.encoders import encode_instance, lowered_tight_program, named_config
from gcasp.engine import (
    DECISION, Engine, assume_and_propagate, enumerate_models, extract_csp_solution, extract_domains,
    learn_from_conflict, luby, propagate, solve, violates,
)
from gcasp.generators import gen_latin, gen_php
from gcasp.nogoods import F, NogoodDb, T, compile_program
from gcasp.program import B
from gcasp.verify import random_mixed_instance


def _db(n: int, nogoods) -> NogoodDb:
    return NogoodDb(nogoods=[tuple(ng) for ng in nogoods], num_atoms=n)


def _compiled(instance, name: str):
    enc = encode_instance(instance, named_config(name))
    return enc, compile_program(lowered_tight_program(enc))


def _decide(engine: Engine, lit: int):
    engine.trail_lim.append(len(engine.trail))
    engine._assign(lit, DECISION)
    return engine.propagate()


def test_propagate_binary_nogood():
    out = assume_and_propagate(_db(2, [(T(0), T(1))]), [T(0)])
    assert not out.is_conflict and out.values == [1, -1]


def test_propagate_contradiction():
    out = assume_and_propagate(_db(1, [(T(0),), (F(0),)]), [])
    assert out.is_conflict and out.status == "CONFLICT"


def test_propagate_fixpoint_status():
    eng = Engine(_db(3, [(T(0), T(1), T(2))]))
    out = propagate(eng)
    assert out.status == "FIXPOINT" and out.values == [0, 0, 0]


def test_php4_refuted_without_search_under_range():
    _, db = _compiled(gen_php(4), "R")
    assert Engine(db).assume([]).is_conflict


def test_assume_clash_reports_decision():
    eng = Engine(_db(2, [(T(0), T(1))]))
    out = eng.assume([T(0), F(0)])
    assert out.is_conflict and out.conflict == DECISION
    out = Engine(_db(2, [(T(0), T(1))])).assume([T(0), T(1)])
    assert out.is_conflict and out.conflict == 0


def test_probe_restores_state():
    eng = Engine(_db(3, [(T(0), T(1)), (F(1), T(2))]))
    out = eng.probe([T(0)])
    assert out.values == [1, -1, -1]
    assert eng.values() == [0, 0, 0] and eng.decision_level == 0


def test_solve_php2_unsat_and_php10_bound():
    assert solve(_compiled(gen_php(2), "S")[1]).status == "UNSAT"
    res = solve(_compiled(gen_php(10), "B")[1])
    assert res.status == "UNSAT" and res.stats["decisions"] == 0


def test_solve_sat_model_is_valid():
    inst = gen_latin(4, 0.2, seed=3)
    enc, db = _compiled(inst, "S")
    res = Engine(db, check_asserting=True).solve()
    assert res.status == "SAT"
    assert not violates(res.model, db.nogoods)
    assert satisfies(inst, extract_csp_solution(res.model, enc))


def test_limit_status():
    _, db = _compiled(gen_php(7), "S")
    res = Engine(db).solve(max_conflicts=3)
    assert res.status == "LIMIT" and res.stats["conflicts"] == 3
    assert Engine(db).solve(max_decisions=1).status == "LIMIT"


def test_first_uip_on_hand_built_graph():
    # level 1: T0 decided, T1 follows; level 2: T2 decided, T3, T4, T5 follow, {T4, T5} violated
    db = _db(6, [(T(0), F(1)), (T(2), F(3)), (T(3), F(4)), (T(3), T(1), F(5)), (T(4), T(5))])
    eng = Engine(db)
    assert _decide(eng, T(0)) is None
    conflict = _decide(eng, T(2))
    assert conflict == 4
    learnt, back = learn_from_conflict(eng, conflict)
    assert learnt == [T(3), T(1)] and back == 1


def test_learning_without_minimisation_keeps_literals():
    # T1 is implied by T0 alone, so it is redundant next to T0
    db = _db(5, [(T(0), F(1)), (T(2), F(3)), (T(2), F(4)), (T(0), T(1), T(3), T(4))])
    for minimize, rest in ((True, [T(0)]), (False, [T(0), T(1)])):
        eng = Engine(db, minimize=minimize)
        _decide(eng, T(0))
        learnt, back = eng.analyze(_decide(eng, T(2)))
        assert learnt[0] == T(2) and sorted(learnt[1:]) == rest and back == 1


@pytest.mark.parametrize("seed", range(6))
def test_learned_nogoods_are_asserting(seed):
    _, db = _compiled(gen_php(6), "S")
    res = Engine(db, seed=seed, check_asserting=True).solve()
    assert res.status == "UNSAT" and res.stats["learned"] > 0


def test_reduction_deletes_and_stays_correct():
    _, db = _compiled(gen_php(7), "S")
    eng = Engine(db, reduce_base=50)
    assert eng.solve().status == "UNSAT"
    assert eng.stats()["deleted"] > 0
    assert Engine(db, reduce_base=None).solve().status == "UNSAT"


def test_extract_domains_bound_ladder():
    inst = CspInstance.build([(1, 4)] * 2, [alldifferent(0, 1)])
    enc = encode_instance(inst, named_config("B"))
    db = compile_program(lowered_tight_program(enc))
    prog = enc.program
    out = Engine(db).assume([F(prog.lookup(B(0, 1))), T(prog.lookup(B(0, 3)))])
    assert extract_domains(out.values, enc, 0).values() == [2, 3]


def test_extract_shifted_values():
    inst = CspInstance.build([(5, 7), (5, 7)], [alldifferent(0, 1)])
    for name in ("S", "B", "R"):
        enc, db = _compiled(inst, name)
        res = solve(db)
        sol = extract_csp_solution(res.model, enc)
        assert set(sol.values()) <= {5, 6, 7} and satisfies(inst, sol)


def test_luby_prefix():
    assert [luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def _random_assumptions(rng, db, k):
    props = rng.sample(range(db.num_atoms), min(k, db.num_atoms))
    return [2 * p + rng.randint(0, 1) for p in props]


@pytest.mark.parametrize("seed", range(10))
def test_propagation_confluent_monotone_sound(seed):
    rng = random.Random(seed)
    inst = random_mixed_instance(rng, 3, 3)
    name = rng.choice(["S", "B", "R", "direct"])
    if name == "S" and any(c.arity > 2 and c.kind.value == "table" for c in inst.constraints):
        name = "direct"
    enc, db = _compiled(inst, name)
    models = enumerate_models(db, range(db.num_atoms))
    for _ in range(5):
        assumed = _random_assumptions(rng, db, 3)
        out = Engine(db).assume(assumed)
        shuffled = assumed[:]
        rng.shuffle(shuffled)
        again = Engine(db).assume(shuffled)
        assert out.is_conflict == again.is_conflict
        if out.is_conflict:
            assert not any(all((m[l >> 1] == 1) != bool(l & 1) for l in assumed) for m in models)
            continue
        assert out.values == again.values
        for m in models:
            if all((m[l >> 1] == 1) != bool(l & 1) for l in assumed):
                assert all(v == 0 or v == mv for v, mv in zip(out.values, m))
        more = Engine(db).assume(assumed + _random_assumptions(rng, db, 2))
        if not more.is_conflict:
            assert all(v == 0 or v == w for v, w in zip(out.values, more.values))
