import random

import pytest

from gcasp.nogoods import (
    F, NogoodDb, NotTightError, T, atom_nogoods, body_nogoods, compile_program, solutions_equal_answer_sets,
)
from conftest import random_tight_program
from gcasp.program import AUX, Program


def test_body_nogoods_shape():
    # body {a, not b} with a=0, b=1 and body proposition 2
    body = (T(0), F(1))
    assert body_nogoods(body, 2) == [(T(0), F(1), F(2)), (F(0), T(2)), (T(1), T(2))]


def test_atom_nogoods_shape():
    assert atom_nogoods(0, [2, 3]) == [(F(2), F(3), T(0)), (T(2), F(0)), (T(3), F(0))]
    assert atom_nogoods(0, []) == [(T(0),)]


def test_body_nogoods_size():
    for k in range(5):
        body = tuple(T(i) for i in range(k))
        assert len(body_nogoods(body, 10)) == 1 + k


def test_even_loop_through_negation():
    p = Program()
    p.add_normal(AUX(0), [p.n(AUX(1))])
    p.add_normal(AUX(1), [p.n(AUX(0))])
    db = compile_program(p)
    assert db.num_props == 4
    assert solutions_equal_answer_sets(p)


def test_choice_with_integrity():
    p = Program()
    p.add_choice([AUX(0)])
    p.add_integrity([p.p(AUX(0))])
    db = compile_program(p)
    assert (T(0),) in db.nogoods
    assert solutions_equal_answer_sets(p)
    assert solutions_equal_answer_sets(p, inline_integrity=False)


def test_positive_loop_rejected():
    p = Program()
    p.add_normal(AUX(0), [p.p(AUX(1))])
    p.add_normal(AUX(1), [p.p(AUX(0))])
    with pytest.raises(NotTightError):
        compile_program(p)


def test_cardinality_must_be_lowered():
    p = Program()
    p.add_choice([AUX(0), AUX(1)])
    p.add_cardinality(2, [p.p(AUX(0)), p.p(AUX(1))])
    with pytest.raises(ValueError, match="lower"):
        compile_program(p)


def test_unsupported_atom_forced_false():
    p = Program()
    p.intern(AUX(0))
    db = compile_program(p)
    assert db.nogoods == [(T(0),)]


def test_no_complementary_pairs():
    db = NogoodDb(num_atoms=2)
    assert not db.add((T(0), F(0)))
    assert db.add((T(0), T(0), F(1)))
    assert db.nogoods == [(T(0), F(1))]


def test_dump_format():
    p = Program()
    p.add_normal(AUX(0), [])
    assert compile_program(p).dump() == "{F body(0)}\n{F body(0), T a(0)}\n{T body(0), F a(0)}\n"


@pytest.mark.parametrize("inline", [True, False])
def test_random_programs_solutions_are_answer_sets(inline):
    rng = random.Random(11)
    checked = 0
    while checked < 100:
        p = random_tight_program(rng)
        if compile_program(p, inline).num_props > 18:
            continue
        assert solutions_equal_answer_sets(p, inline), [r for r in p.rules]
        checked += 1


def test_shared_bodies_interned_once():
    p = Program()
    p.add_normal(AUX(0), [p.n(AUX(2))])
    p.add_normal(AUX(1), [p.n(AUX(2))])
    db = compile_program(p)
    assert len(db.bodies) == 1
