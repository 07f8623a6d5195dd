from fractions import Fraction as F

import pytest

from weightsim.linalg import (Matrix, MatrixError, direct_sum, first_violation, format_matrix, kron,
                              kron_power, mat_add, mat_leq, mat_mul, parse_matrix, transpose)
from weightsim.semiring import NEG_INF, SemiringKind

PT, MP, BOOL = SemiringKind.PLUS_TIMES, SemiringKind.MAX_PLUS, SemiringKind.BOOLEAN

EX52 = Matrix.from_dense(PT, [[F(1, 8), F(2, 8)], [F(4, 8), F(3, 8)]])


def test_mul_examples():
    row = Matrix.row_vector(PT, [1, 0])
    assert mat_mul(row, EX52).to_dense() == [[F(1, 8), F(1, 4)]]
    assert mat_mul(EX52, Matrix.identity(PT, 2)) == EX52
    mp = Matrix.from_dense(MP, [[1, 2], [3, 4]])
    assert mat_mul(Matrix.row_vector(MP, [0, NEG_INF]), mp).to_dense() == [[1, 2]]


def test_zero_entries_not_stored():
    m = Matrix.from_dense(PT, [[0, 1], [0, 0]])
    assert m.nnz() == 1
    assert Matrix.from_dense(MP, [[NEG_INF, 0]]).nnz() == 1
    # cancellation in a product must not leave an explicit entry
    assert mat_mul(Matrix.row_vector(PT, [1, 0]), Matrix.col_vector(PT, [0, 5])).nnz() == 0


def test_leq():
    assert mat_leq(EX52, EX52)
    assert mat_leq(Matrix.zeros(PT, 2, 2), EX52)
    assert not mat_leq(Matrix.from_dense(PT, [[F(1, 2)]]), Matrix.from_dense(PT, [[F(1, 3)]]))
    assert first_violation(EX52, Matrix.identity(PT, 2)) == (0, 1)
    assert first_violation(EX52, EX52) is None


def test_kron_and_direct_sum():
    assert kron_power(EX52, 0) == Matrix.from_dense(PT, [[1]])
    assert kron(Matrix.from_dense(PT, [[2]]), Matrix.from_dense(PT, [[3]])).to_dense() == [[6]]
    assert direct_sum([Matrix.identity(PT, 1), Matrix.identity(PT, 2)]) == Matrix.identity(PT, 3)
    k = kron(EX52, Matrix.identity(PT, 2))
    assert k.shape == (4, 4)
    assert k.get(1, 3) == F(2, 8) and k.get(1, 2) == 0
    # mixed product property
    a = Matrix.from_dense(MP, [[1, NEG_INF], [0, 2]])
    b = Matrix.from_dense(MP, [[3], [-1]])
    assert mat_mul(kron(a, a), kron(b, b)) == kron(mat_mul(a, b), mat_mul(a, b))


def test_transpose():
    assert transpose(Matrix.row_vector(PT, [1, 1])) == Matrix.col_vector(PT, [1, 1])
    assert transpose(transpose(EX52)) == EX52
    assert transpose(EX52).to_dense() == [[F(1, 8), F(4, 8)], [F(2, 8), F(3, 8)]]


def test_shape_and_kind_errors():
    with pytest.raises(MatrixError):
        mat_mul(EX52, Matrix.identity(PT, 3))
    with pytest.raises(Exception):
        mat_add(EX52, Matrix.identity(MP, 2))


def test_text_roundtrip():
    m = Matrix.from_dense(MP, [[NEG_INF, F(-1, 2)], [3, 0]])
    text = format_matrix(m)
    assert text.splitlines()[0] == "2 2"
    assert parse_matrix(MP, text) == m
    with pytest.raises(MatrixError):
        parse_matrix(PT, "1 2\n1\n")
