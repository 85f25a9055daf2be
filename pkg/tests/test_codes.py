import random

import pytest

from qstab.codes import (
    ClassicalCode,
    PauliOperator,
    StabilizerCode,
    build_decoder_table,
    classical_min_distance,
    commutation_syndrome,
    css_from_classical,
    distance_bruteforce,
    emit_code_file,
    five_qubit_code,
    get_code,
    golay23_code,
    hamming7_code,
    logical_operators,
    parse_code_file,
    steane7_code,
)
from qstab.gf2 import BitMatrix, is_self_orthogonal, rank


def test_five_qubit_parameters():
    code = five_qubit_code()
    assert (code.n, code.k, code.d, code.t) == (5, 1, 3, 1)
    assert code.n - rank(code.hx.hstack(code.hz)) == 1


def test_five_qubit_generators_commute():
    code = five_qubit_code()
    for i in range(4):
        for j in range(4):
            assert code.generator(i).commutes_with(code.generator(j))


def test_five_qubit_distance():
    assert distance_bruteforce(five_qubit_code()) == 3


def test_css_from_hamming_is_steane():
    code = css_from_classical(hamming7_code())
    assert (code.n, code.k, code.d) == (7, 1, 3)
    assert code.is_css


def test_css_from_golay():
    code = css_from_classical(golay23_code(), d=7)
    assert (code.n, code.k, code.d, code.t) == (23, 1, 7, 3)


def test_golay_classical_structure():
    c = golay23_code()
    assert c.parity_check.rows == 11
    assert rank(c.parity_check) == 11
    assert is_self_orthogonal(c.parity_check)
    assert classical_min_distance(c) == 7


def test_css_rejects_non_self_orthogonal():
    h = BitMatrix.from_string("111")
    with pytest.raises(ValueError, match="self-dual"):
        css_from_classical(ClassicalCode(3, 2, h))


def test_syndrome_identity_error():
    code = five_qubit_code()
    assert int(commutation_syndrome(code, PauliOperator.identity(5))) == 0


def test_syndrome_x0_is_0101():
    code = five_qubit_code()
    s = commutation_syndrome(code, PauliOperator.single(5, 0, "X"))
    assert str(s) == "0101"


def test_syndrome_z0_is_1000():
    code = five_qubit_code()
    s = commutation_syndrome(code, PauliOperator.single(5, 0, "Z"))
    assert str(s) == "1000"


def test_syndrome_linearity():
    code = five_qubit_code()
    rng = random.Random(5)
    for _ in range(50):
        e1 = PauliOperator.from_masks(5, rng.getrandbits(5), rng.getrandbits(5))
        e2 = PauliOperator.from_masks(5, rng.getrandbits(5), rng.getrandbits(5))
        s12 = commutation_syndrome(code, e1.compose(e2))
        s1 = commutation_syndrome(code, e1)
        s2 = commutation_syndrome(code, e2)
        assert s12.bits == s1.bits ^ s2.bits


def test_five_qubit_decoder_is_perfect():
    code = five_qubit_code()
    table = build_decoder_table(code)
    assert len(table) == 16
    # bijection with {I} + 15 weight-1 Paulis
    syndromes = set()
    for e in [PauliOperator.identity(5)] + [
        PauliOperator.single(5, q, p) for q in range(5) for p in "XZY"
    ]:
        syndromes.add(int(commutation_syndrome(code, e)))
    assert syndromes == set(table)
    for s, e in table.items():
        assert int(commutation_syndrome(code, e)) == s
        assert e.weight() <= 1


def test_decoder_zero_syndrome_is_identity():
    table = build_decoder_table(five_qubit_code())
    assert table[0].weight() == 0


def test_steane_decoder_weight_one_roundtrip():
    code = steane7_code()
    table = build_decoder_table(code)
    for q in range(7):
        for p in "XZY":
            e = PauliOperator.single(7, q, p)
            s = int(commutation_syndrome(code, e))
            assert table[s].sort_key() == e.sort_key()


def test_decoder_correction_cancels_weight_t_errors():
    for code in (five_qubit_code(), steane7_code()):
        table = build_decoder_table(code)
        for q in range(code.n):
            for p in "XZY":
                e = PauliOperator.single(code.n, q, p)
                corr = table[int(commutation_syndrome(code, e))]
                assert code.contains_stabilizer(corr.compose(e))


def test_decoder_rejects_bad_code():
    # distance-1 'code': a single weight-1 generator makes X0 and X1 collide
    hx = BitMatrix.from_string("110")
    hz = BitMatrix.zeros(1, 3)
    bad = StabilizerCode("bad", 3, 2, 3, hx, hz)  # claimed t=1 is wrong
    with pytest.raises(ValueError, match="not 1-error-correcting"):
        build_decoder_table(bad)


def test_steane_distance():
    assert distance_bruteforce(steane7_code()) == 3


def test_redundant_generator_leaves_distance():
    base = five_qubit_code()
    hx = base.hx.stack(BitMatrix([base.hx.row_bits(0)], 5))
    hz = base.hz.stack(BitMatrix([base.hz.row_bits(0)], 5))
    dup = StabilizerCode("dup", 5, 1, 3, hx, hz)
    assert distance_bruteforce(dup) == 3


def test_parse_eq2_matches_builtin():
    text = "11000|00101\n01100|10010\n00110|01001\n00011|10100\n"
    code = parse_code_file(text)
    ref = five_qubit_code()
    assert code.hx == ref.hx and code.hz == ref.hz
    assert (code.n, code.k, code.d) == (5, 1, 3)


def test_emit_parse_roundtrip():
    for name in ("five_qubit", "steane7", "golay23"):
        code = get_code(name)
        back = parse_code_file(emit_code_file(code), name=name)
        assert back.hx == code.hx and back.hz == code.hz
        assert (back.n, back.k, back.d) == (code.n, code.k, code.d)


def test_parse_rejects_length_mismatch():
    with pytest.raises(ValueError, match="line 1"):
        parse_code_file("11|000\n")


def test_parse_rejects_noncommuting():
    with pytest.raises(ValueError, match="commute"):
        parse_code_file("10|00\n00|10\n")


def test_logical_operators_five_qubit():
    code = five_qubit_code()
    pairs = logical_operators(code)
    assert len(pairs) == 1
    xl, zl = pairs[0]
    assert not xl.commutes_with(zl)
    for p in (xl, zl):
        assert int(commutation_syndrome(code, p)) == 0
        assert not code.contains_stabilizer(p)


def test_logical_operators_css_codes():
    for name in ("steane7", "golay23"):
        code = get_code(name)
        pairs = logical_operators(code)
        assert len(pairs) == code.k
        xl, zl = pairs[0]
        assert not xl.commutes_with(zl)
        assert code.is_logical(xl) and code.is_logical(zl)


@pytest.mark.slow
def test_golay_decoder_weight_t_unique():
    code = get_code("golay23")
    table = build_decoder_table(code, max_weight=3)
    for q in (0, 7, 22):
        for p in "XZY":
            e = PauliOperator.single(23, q, p)
            s = int(commutation_syndrome(code, e))
            assert table[s].sort_key() == e.sort_key()
