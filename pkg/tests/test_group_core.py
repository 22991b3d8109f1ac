"""Finite-group arithmetic checked against an SU(2) matrix oracle."""

from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import su2_q8
from lgtq.group_core import (FiniteGroup, GroupError, PermutationOperator, conjugacy_classes, group_to_json,
                             inverse, left_regular, load_group, make_cyclic, make_q8, multiply, right_regular,
                             validate_group, validate_tables)


def find(mats, m):
    hits = [k for k, x in enumerate(mats) if np.allclose(x, m)]
    assert len(hits) == 1
    return hits[0]


def test_q8_matches_su2_oracle(q8):
    mats = su2_q8()
    for a, b in itertools.product(range(8), repeat=2):
        assert q8.cayley[a, b] == find(mats, mats[a] @ mats[b])
    for a in range(8):
        assert q8.inverse[a] == find(mats, np.linalg.inv(mats[a]))
        assert q8.char_fund[a] == pytest.approx(np.trace(mats[a]).real, abs=1e-15)
    assert q8.identity == 0


def test_quaternion_relations(q8):
    i, j, k, m1 = (q8.index(x) for x in ("I", "J", "K", "-1"))
    for u in (i, j, k):
        assert multiply(q8, u, u) == m1
    assert multiply(q8, multiply(q8, i, j), k) == m1
    assert multiply(q8, i, j) == k and multiply(q8, j, i) == q8.index("-K")


def test_q8_validates(q8):
    rep = validate_group(q8)
    assert rep.ok, rep.summary()
    assert sorted(map(len, conjugacy_classes(q8))) == [1, 1, 2, 2, 2]


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_cyclic_groups_validate(n):
    g = make_cyclic(n)
    assert validate_group(g).ok
    assert g.order == n


@given(a=st.integers(0, 7), b=st.integers(0, 7), c=st.integers(0, 7))
def test_associativity_and_inverse(a, b, c):
    q8 = make_q8()
    ab = multiply(q8, a, b)
    bc = multiply(q8, b, c)
    assert multiply(q8, ab, c) == multiply(q8, a, bc)
    assert multiply(q8, a, inverse(q8, a)) == q8.identity


@given(a=st.integers(0, 7), b=st.integers(0, 7))
@settings(max_examples=64)
def test_theta_composition_law(a, b):
    q8 = make_q8()
    ta, tb = right_regular(q8, a), right_regular(q8, b)
    # |g> -> |g a> -> |g a b>
    assert tb.compose(ta) == right_regular(q8, multiply(q8, a, b))
    assert np.array_equal(tb.matrix() @ ta.matrix(), right_regular(q8, multiply(q8, a, b)).matrix())


@given(h=st.integers(0, 7), g=st.integers(0, 7))
def test_regular_actions(h, g):
    q8 = make_q8()
    assert right_regular(q8, h)(g) == multiply(q8, g, h)
    assert left_regular(q8, h)(g) == multiply(q8, h, g)


def test_right_and_left_regular_differ(q8):
    i = q8.index("I")
    j = q8.index("J")
    assert right_regular(q8, i)(j) != left_regular(q8, i)(j)


def test_permutation_operator_inverse(q8):
    p = right_regular(q8, q8.index("J"))
    assert np.array_equal(p.inverse().matrix() @ p.matrix(), np.eye(8))


def test_permutation_operator_rejects_non_bijection():
    with pytest.raises(ValueError):
        PermutationOperator((0, 0, 1))
    with pytest.raises(ValueError):
        PermutationOperator((1, 0), phases=(1.0, 0.5))


def test_index_errors(q8):
    with pytest.raises(IndexError):
        multiply(q8, 8, 0)
    with pytest.raises(KeyError):
        q8.index("L")


def test_json_roundtrip(tmp_path, q8):
    path = tmp_path / "q8.json"
    path.write_text(group_to_json(q8))
    g = load_group(path)
    assert np.array_equal(g.cayley, q8.cayley) and g.labels == q8.labels


def test_corrupted_table_is_located(q8):
    table = q8.cayley.copy()
    # swap two products of I so the row stays a permutation but associativity breaks
    table[2, 4], table[2, 5] = table[2, 5], table[2, 4]
    rep = validate_tables(table, q8.char_fund)
    assert not rep.ok
    assert rep.associativity_failures
    assert "associativity" in rep.summary()


def test_non_class_function_detected(q8):
    chi = q8.char_fund.copy()
    chi[2] = 1.0
    rep = validate_tables(q8.cayley, chi)
    assert rep.class_function_failures and not rep.ok


@pytest.mark.parametrize("cayley, chi", [
    ([[0, 1], [1, 1]], [1.0, 1.0]),          # no inverse for element 1
    ([[0, 1, 2]], [1.0, 1.0, 1.0]),          # not square
    ([[0, 1], [1, 0]], [1.0]),               # character length
    ([[1, 1], [1, 1]], [1.0, 1.0]),          # no identity
])
def test_malformed_tables_never_raise(cayley, chi):
    rep = validate_tables(cayley, chi)
    assert not rep.ok


def test_missing_inverse_raises_on_construction():
    with pytest.raises(GroupError):
        FiniteGroup(labels=("a", "b"), cayley=np.array([[0, 1], [1, 1]]), char_fund=np.array([1.0, 1.0]))


def test_load_group_missing_keys(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"labels": ["1"]}))
    with pytest.raises(GroupError):
        load_group(path)
