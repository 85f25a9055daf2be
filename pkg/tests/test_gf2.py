import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstab.gf2 import (
    BitMatrix,
    BitVector,
    in_rowspace,
    is_self_orthogonal,
    mat_vec_syndrome,
    nullspace_basis,
    rank,
    rref,
    solve_rowspace,
)

EQ2 = BitMatrix.from_string(
    """
    11000|00101
    01100|10010
    00110|01001
    00011|10100
    """
)

HAMMING7 = BitMatrix.from_string("1110100\n0111010\n0011101")


def random_matrix(rng, rows, cols):
    return BitMatrix([rng.getrandbits(cols) for _ in range(rows)], cols)


def test_rank_identity():
    assert rank(BitMatrix.identity(4)) == 4


def test_rank_zero_matrix():
    assert rank(BitMatrix.zeros(3, 5)) == 0


def test_rank_stabilizer_matrix():
    assert EQ2.cols == 10
    assert rank(EQ2) == 4


def test_rref_identity():
    red, pivots = rref(BitMatrix.identity(3))
    assert red == BitMatrix.identity(3)
    assert pivots == [0, 1, 2]


def test_rref_dependent_rows_collapse():
    m = BitMatrix.from_ints([[1, 1], [1, 1]])
    red, pivots = rref(m)
    assert red == BitMatrix.from_ints([[1, 1], [0, 0]])
    assert pivots == [0]


def test_rref_preserves_rank_and_rowspace():
    rng = random.Random(7)
    for _ in range(25):
        m = random_matrix(rng, 6, 8)
        red, _ = rref(m)
        assert rank(red) == rank(m)
        for i in range(red.rows):
            assert in_rowspace(m, red.row(i))
        for i in range(m.rows):
            assert in_rowspace(red, m.row(i))


def test_nullspace_identity_empty():
    assert nullspace_basis(BitMatrix.identity(4)).rows == 0


def test_nullspace_zero_matrix_full():
    basis = nullspace_basis(BitMatrix.zeros(2, 3))
    assert basis.rows == 3
    assert rank(basis) == 3


def test_nullspace_hamming():
    basis = nullspace_basis(HAMMING7)
    assert basis.rows == 4
    # exhaustive check: the basis spans exactly the words annihilated by H
    spanned = set()
    for mask in range(16):
        v = 0
        for i in range(4):
            if (mask >> i) & 1:
                v ^= basis.row_bits(i)
        spanned.add(v)
    kernel = {
        w
        for w in range(1 << 7)
        if mat_vec_syndrome(HAMMING7, BitVector(w, 7)).bits == 0
    }
    assert spanned == kernel


def test_self_orthogonal_single_rows():
    assert is_self_orthogonal(BitMatrix.from_string("1111"))
    assert not is_self_orthogonal(BitMatrix.from_string("111"))


def test_self_orthogonal_hamming():
    assert is_self_orthogonal(HAMMING7)


def test_self_orthogonal_matches_exhaustive():
    rng = random.Random(3)
    for _ in range(40):
        cols = rng.randrange(1, 12)
        m = random_matrix(rng, rng.randrange(1, 5), cols)
        expected = all(
            (m.row(i).dot(m.row(j)) == 0)
            for i in range(m.rows)
            for j in range(i, m.rows)
        )
        assert is_self_orthogonal(m) == expected


def test_syndrome_zero_vector():
    m = BitMatrix.from_string("101\n011")
    assert mat_vec_syndrome(m, BitVector.zeros(3)).bits == 0


def test_syndrome_identity_matrix():
    v = BitVector.from_string("101")
    assert mat_vec_syndrome(BitMatrix.identity(3), v) == v


def test_syndrome_eq2_hz_column():
    hz = BitMatrix.from_string("00101\n10010\n01001\n10100")
    s = mat_vec_syndrome(hz, BitVector.from_string("10000"))
    assert str(s) == "0101"


def test_syndrome_length_mismatch_rejected():
    with pytest.raises(ValueError):
        mat_vec_syndrome(BitMatrix.identity(3), BitVector.zeros(4))


@given(st.integers(0, 5), st.integers(1, 10), st.randoms())
@settings(max_examples=60, deadline=None)
def test_nullspace_rows_annihilated(rows, cols, rnd):
    m = BitMatrix([rnd.getrandbits(cols) for _ in range(rows)], cols)
    basis = nullspace_basis(m)
    assert basis.rows == cols - rank(m)
    for i in range(basis.rows):
        assert mat_vec_syndrome(m, basis.row(i)).bits == 0
    assert rank(basis) == basis.rows


@given(st.integers(1, 10), st.randoms())
@settings(max_examples=60, deadline=None)
def test_syndrome_linearity(cols, rnd):
    m = BitMatrix([rnd.getrandbits(cols) for _ in range(4)], cols)
    u = BitVector(rnd.getrandbits(cols), cols)
    v = BitVector(rnd.getrandbits(cols), cols)
    assert mat_vec_syndrome(m, u ^ v) == mat_vec_syndrome(m, u) ^ mat_vec_syndrome(m, v)


def test_solve_rowspace_roundtrip():
    rng = random.Random(11)
    for _ in range(30):
        m = random_matrix(rng, 5, 9)
        u = rng.getrandbits(5)
        v = 0
        for i in range(5):
            if (u >> i) & 1:
                v ^= m.row_bits(i)
        sol = solve_rowspace(m, BitVector(v, 9))
        assert sol is not None
        rebuilt = 0
        for i in range(5):
            if sol[i]:
                rebuilt ^= m.row_bits(i)
        assert rebuilt == v


def test_solve_rowspace_outside():
    m = BitMatrix.from_string("1100\n0011")
    assert solve_rowspace(m, BitVector.from_string("1000")) is None


def test_bitvector_string_roundtrip():
    s = "10110"
    assert str(BitVector.from_string(s)) == s


def test_empty_matrix_degenerate():
    m = BitMatrix.zeros(0, 0)
    assert rank(m) == 0
    assert nullspace_basis(m).rows == 0
