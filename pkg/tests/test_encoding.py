"""Tests for the combinatorial skeleton: strings, sign rows, constraints, Gram."""

import json
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlocality.encoding import (
    MAX_M,
    build_encoding,
    constraint_membership,
    hamming,
    predicted_gram,
    table_to_json,
)
from nlocality.errors import DomainError, ResourceError


def _bits(s):
    return "".join(map(str, s))


def _grid(rows):
    return ["".join("+" if v > 0 else "-" for v in row) for row in rows]


# -- Frozen instances --------------------------------------------------------


def test_m2_table():
    t = build_encoding(2)
    assert [_bits(s) for s in t.strings] == ["00", "01"]
    assert _grid(t.signs) == ["++", "+-"]
    assert t.constraints == ()
    assert t.constraint_signs.shape == (0, 2)
    assert t.gram == ((2, 0), (0, 2))


def test_m3_table():
    t = build_encoding(3)
    assert [_bits(s) for s in t.strings] == ["000", "001", "010", "100"]
    assert _grid(t.signs) == ["+++-", "++-+", "+-++"]
    assert [_bits(s) for s in t.constraints] == ["111"]
    assert _grid(t.constraint_signs) == ["+---"]
    g = t.gram
    for j in (1, 2, 3):
        assert g[0][j] == Fraction(2, 3)
    for j, j2 in ((1, 2), (1, 3), (2, 3)):
        assert g[j][j2] == Fraction(-2, 3)


def test_m4_table():
    t = build_encoding(4)
    assert [_bits(s) for s in t.strings] == [
        "0000", "0001", "0010", "0100", "1000", "0011", "0101", "0110",
    ]
    assert _grid(t.signs) == ["++++-+++", "+++-++--", "++-++-+-", "+-+++--+"]
    assert [_bits(s) for s in t.constraints] == ["0111", "1011", "1101", "1110"]
    row = t.constraint_signs[[_bits(s) for s in t.constraints].index("1110")]
    assert _grid([row]) == ["++-----+"]


def test_m5_first_row_and_constraint_count():
    t = build_encoding(5)
    assert _grid(t.signs)[0] == "+++++-++++++----"
    assert t.num_constraints == 11


@pytest.mark.parametrize("m, l, expected", [(3, 0, {0}), (4, 3, {0, 1, 7})])
def test_constraint_membership(m, l, expected):
    assert constraint_membership(build_encoding(m), l) == frozenset(expected)


def test_constraint_membership_errors():
    with pytest.raises(DomainError):
        constraint_membership(build_encoding(2), 0)
    with pytest.raises(IndexError):
        constraint_membership(build_encoding(3), 1)


@pytest.mark.parametrize(
    "m, j, j2, expected",
    [(5, 0, 1, Fraction(6, 5)), (4, 1, 7, Fraction(-1)), (4, 3, 3, Fraction(2))],
)
def test_predicted_gram(m, j, j2, expected):
    assert predicted_gram(build_encoding(m), j, j2) == expected


@pytest.mark.parametrize("bad", [1, 0, -3, 2.5, "3"])
def test_build_encoding_domain_errors(bad):
    with pytest.raises(DomainError):
        build_encoding(bad)


def test_build_encoding_cap():
    with pytest.raises(ResourceError) as exc:
        build_encoding(MAX_M + 1)
    assert exc.value.cap == MAX_M


# -- Structural invariants ---------------------------------------------------


@pytest.mark.parametrize("m", range(2, 9))
def test_constraint_count_identity(m):
    t = build_encoding(m)
    assert t.num_constraints == 2 ** (m - 1) - m
    for s in t.constraints:
        assert sum(s) % 2 == 1 and sum(s) >= 3


@pytest.mark.parametrize("m", range(2, 9))
def test_one_representative_per_complement_pair(m):
    t = build_encoding(m)
    seen = set(t.strings)
    assert len(seen) == 2 ** (m - 1)
    for s in t.strings:
        assert tuple(1 - b for b in s) not in seen


@pytest.mark.parametrize("m", range(2, 9))
def test_sign_rows_orthogonal(m):
    t = build_encoding(m)
    s = t.signs
    assert np.array_equal(s @ s.T, 2 ** (m - 1) * np.eye(m, dtype=np.int64))


@pytest.mark.parametrize("m", range(3, 9))
def test_constraints_orthogonal_to_sign_rows(m):
    t = build_encoding(m)
    assert not np.any(t.constraint_signs @ t.signs.T)


@pytest.mark.parametrize("m", range(2, 7))
def test_gram_shape_and_law(m):
    t = build_encoding(m)
    g = t.gram
    for j, j2 in combinations(range(t.num_inputs), 2):
        p = hamming(t.strings[j], t.strings[j2])
        assert g[j][j2] == g[j2][j] == 2 - Fraction(4 * p, m)
        assert abs(g[j][j2]) <= 2
    assert all(g[j][j] == 2 for j in range(t.num_inputs))
    assert np.allclose(t.gram_array(), np.array(g, dtype=float))


def test_table_is_read_only():
    t = build_encoding(3)
    with pytest.raises(ValueError):
        t.signs[0, 0] = 5


def test_sign_grid_text():
    t = build_encoding(3)
    assert t.sign_grid() == ["+++-", "++-+", "+-++"]
    assert t.sign_grid("constraints") == ["+---"]


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_json_round_trip(m):
    t = build_encoding(m)
    payload = json.loads(table_to_json(t))
    assert payload["m"] == m
    assert payload["strings"] == [_bits(s) for s in t.strings]
    assert payload["signs"] == t.signs.tolist()
    assert payload["constraint_signs"] == t.constraint_signs.tolist()
    gram = [[Fraction(a, b) for a, b in row] for row in payload["gram"]]
    assert tuple(map(tuple, gram)) == t.gram
    assert table_to_json(t) == table_to_json(build_encoding(m))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=8), st.data())
def test_gram_symmetric_in_random_pairs(m, data):
    t = build_encoding(m)
    j = data.draw(st.integers(0, t.num_inputs - 1))
    j2 = data.draw(st.integers(0, t.num_inputs - 1))
    assert predicted_gram(t, j, j2) == predicted_gram(t, j2, j)
    # Gram entry is the normalized sign-column inner product
    inner = int(t.signs[:, j] @ t.signs[:, j2])
    assert predicted_gram(t, j, j2) == Fraction(2 * inner, m)
