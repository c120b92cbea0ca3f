import itertools

import pytest
from hypothesis import given, settings, strategies as st

from gcasp.csp import (
    CspInstance, Domain, InstanceFormatError, alldifferent, binary_decomposition, parse_instance,
    permutation, satisfies, serialize_instance, table, validate,
)
from gcasp.generators import gen_latin, gen_php


def test_domain_member_and_bounds():
    d = Domain(1, 5, frozenset({2, 4}))
    assert d.member(d.min) and d.member(d.max)
    assert not d.member(2) and not d.member(4) and not d.member(0)
    assert d.values() == [1, 3, 5]
    assert len(d) == 3


def test_domain_rejects_bad_holes():
    with pytest.raises(ValueError):
        Domain(1, 3, frozenset({1}))
    with pytest.raises(ValueError):
        Domain(3, 1)


@given(st.sets(st.integers(-5, 5), min_size=1))
def test_domain_from_values_roundtrip(vals):
    d = Domain.from_values(vals)
    assert set(d.values()) == vals
    assert all(d.member(i) for i in vals)
    assert all(not d.member(i) for i in d.removed)


def test_validate_well_formed():
    inst = CspInstance.build([(1, 2), (1, 2)], [alldifferent(0, 1)])
    assert validate(inst) == []


def test_validate_permutation_value_count():
    inst = CspInstance.build([(1, 4)] * 3, [permutation(0, 1, 2)])
    diags = validate(inst)
    assert len(diags) == 1
    assert "permutation arity 3 ≠ value count 4" in diags[0]


def test_validate_table_arity_mismatch():
    inst = CspInstance.build([(1, 3)] * 2, [table((0, 1), [(1, 2, 3)])])
    assert any("arity mismatch" in d for d in validate(inst))


def test_validate_tuple_outside_domain_and_undeclared():
    inst = CspInstance.build([(1, 3)] * 2, [table((0, 1), [(1, 9)]), alldifferent(0, 5)])
    diags = validate(inst)
    assert any("outside" in d for d in diags)
    assert any("undeclared" in d for d in diags)


def test_satisfies_examples():
    inst = CspInstance.build([(1, 2), (1, 2)], [alldifferent(0, 1)])
    assert satisfies(inst, {0: 1, 1: 2})
    assert not satisfies(inst, {0: 1, 1: 1})
    perm = CspInstance.build([(1, 3)] * 3, [permutation(0, 1, 2)])
    assert not satisfies(perm, {0: 1, 1: 2, 2: 2})
    assert satisfies(perm, {0: 3, 1: 1, 2: 2})


def test_satisfies_partial_assignment():
    inst = CspInstance.build([(1, 2), (1, 2)], [alldifferent(0, 1)])
    with pytest.raises(ValueError, match="assignment not total"):
        satisfies(inst, {0: 1})


def test_table_polarity():
    allowed = CspInstance.build([(1, 2)] * 2, [table((0, 1), [(1, 2)])])
    forbidden = CspInstance.build([(1, 2)] * 2, [table((0, 1), [(1, 2)], "forbidden")])
    assert satisfies(allowed, {0: 1, 1: 2}) and not satisfies(allowed, {0: 2, 1: 1})
    assert not satisfies(forbidden, {0: 1, 1: 2}) and satisfies(forbidden, {0: 2, 1: 1})


@pytest.mark.parametrize("n,d", [(2, 2), (3, 3), (4, 4), (3, 2)])
def test_alldifferent_matches_binary_decomposition(n, d):
    inst = CspInstance.build([(1, d)] * n, [alldifferent(*range(n))])
    pairs = binary_decomposition(inst.constraints[0])
    for values in itertools.product(range(1, d + 1), repeat=n):
        a = dict(enumerate(values))
        assert satisfies(inst, a) == all(a[i] != a[j] for i, j in pairs)


def test_parse_php3():
    inst = parse_instance(serialize_instance(gen_php(3)))
    assert [(v.lo, v.hi) for v in inst.variables] == [(1, 2)] * 3
    assert len(inst.constraints) == 1 and inst.constraints[0].kind.value == "alldifferent"
    assert validate(inst) == []


def test_parse_missing_constraints_field():
    with pytest.raises(InstanceFormatError, match="constraints"):
        parse_instance('{"variables": []}')


def test_parse_syntax_error_position():
    with pytest.raises(InstanceFormatError, match=r"line 2, column \d+"):
        parse_instance('{"variables": [],\n "constraints": [}')


def test_parse_wrong_type_names_field():
    with pytest.raises(InstanceFormatError, match="'lo'"):
        parse_instance('{"variables": [{"id": 0, "name": "a", "lo": "1", "hi": 2}], "constraints": []}')


def test_latin_roundtrip_equal():
    inst = gen_latin(4, 0.3, seed=1)
    assert parse_instance(serialize_instance(inst)) == inst


def test_serialize_canonical():
    a = CspInstance.build([(1, 2)] * 2, [table((0, 1), [(2, 1), (1, 2)])])
    b = CspInstance.build([(1, 2)] * 2, [table((0, 1), [(1, 2), (2, 1)])])
    assert serialize_instance(a) == serialize_instance(b)
    assert serialize_instance(a).endswith(b"\n")


@settings(max_examples=50)
@given(st.integers(2, 4), st.integers(2, 4), st.data())
def test_parse_serialize_identity(n, d, data):
    tuples = data.draw(st.sets(st.tuples(st.integers(1, d), st.integers(1, d)), max_size=6))
    inst = CspInstance.build([(1, d)] * n, [alldifferent(*range(n)), table((0, 1), tuples, "forbidden")])
    assert parse_instance(serialize_instance(inst)) == inst
