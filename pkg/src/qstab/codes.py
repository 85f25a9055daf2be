"""Stabilizer codes: construction, validation, syndromes, decoder tables.

Pauli operators are phase-free (x, z) mask pairs; the recovery analysis
never needs the global phase of sigma_x sigma_z products.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .gf2 import (
    BitMatrix,
    BitVector,
    in_rowspace,
    is_self_orthogonal,
    mat_vec_bits,
    rank,
)


@dataclass(frozen=True)
class PauliOperator:
    """n-qubit Pauli as X/Z masks; phase deliberately untracked."""

    n: int
    x_mask: BitVector
    z_mask: BitVector

    def __post_init__(self):
        if self.x_mask.len != self.n or self.z_mask.len != self.n:
            raise ValueError("mask length must equal qubit count")

    @classmethod
    def from_masks(cls, n: int, x: int, z: int) -> "PauliOperator":
        return cls(n, BitVector(x, n), BitVector(z, n))

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls.from_masks(n, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliOperator":
        x = 1 << qubit if kind in ("X", "Y") else 0
        z = 1 << qubit if kind in ("Z", "Y") else 0
        return cls.from_masks(n, x, z)

    @classmethod
    def from_label(cls, label: str) -> "PauliOperator":
        x = z = 0
        for j, c in enumerate(label):
            if c in "XY":
                x |= 1 << j
            if c in "ZY":
                z |= 1 << j
            if c not in "IXYZ":
                raise ValueError(f"invalid Pauli letter {c!r}")
        return cls.from_masks(len(label), x, z)

    def weight(self) -> int:
        return (self.x_mask.bits | self.z_mask.bits).bit_count()

    def compose(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise ValueError("size mismatch")
        return PauliOperator.from_masks(
            self.n,
            self.x_mask.bits ^ other.x_mask.bits,
            self.z_mask.bits ^ other.z_mask.bits,
        )

    def commutes_with(self, other: "PauliOperator") -> bool:
        a = (self.x_mask.bits & other.z_mask.bits).bit_count()
        b = (self.z_mask.bits & other.x_mask.bits).bit_count()
        return (a + b) % 2 == 0

    def label(self) -> str:
        out = []
        for j in range(self.n):
            x = self.x_mask[j]
            z = self.z_mask[j]
            out.append("IXZY"[x + 2 * z] if x + 2 * z < 3 else "Y")
        return "".join(out)

    def sort_key(self) -> tuple[int, int, int]:
        return (self.weight(), self.x_mask.bits, self.z_mask.bits)


@dataclass(frozen=True)
class ClassicalCode:
    """[n, k_c] linear code given by its parity-check matrix."""

    n: int
    k_c: int
    parity_check: BitMatrix

    def __post_init__(self):
        if self.parity_check.cols != self.n:
            raise ValueError("parity check width must equal n")
        if rank(self.parity_check) != self.n - self.k_c:
            raise ValueError("parity check rank must be n - k_c")


@dataclass(frozen=True)
class Syndrome:
    bits: BitVector

    def __str__(self) -> str:
        return str(self.bits)

    def __int__(self) -> int:
        return self.bits.bits


class StabilizerCode:
    """[[n, k, d]] stabilizer code with generator matrix (hx | hz)."""

    def __init__(self, name, n, k, d, hx: BitMatrix, hz: BitMatrix, is_css=False,
                 classical=None):
        self.name = name
        self.n = n
        self.k = k
        self.d = d
        self.t = (d - 1) // 2 if d is not None else None
        self.hx = hx
        self.hz = hz
        self.is_css = is_css
        self.classical = classical
        self._validate()

    def _validate(self):
        if self.hx.cols != self.n or self.hz.cols != self.n:
            raise ValueError("generator width must equal n")
        if self.hx.rows != self.hz.rows:
            raise ValueError("hx and hz must have the same number of rows")
        for i in range(self.hx.rows):
            for j in range(i, self.hx.rows):
                a = (self.hx.row_bits(i) & self.hz.row_bits(j)).bit_count()
                b = (self.hz.row_bits(i) & self.hx.row_bits(j)).bit_count()
                if (a + b) % 2:
                    raise ValueError(
                        f"generators {i} and {j} do not commute"
                    )
        if rank(self.hx.hstack(self.hz)) != self.n - self.k:
            raise ValueError("rank of (hx|hz) must be n - k")

    @property
    def num_checks(self) -> int:
        return self.hx.rows

    def generator(self, i: int) -> PauliOperator:
        return PauliOperator(self.n, self.hx.row(i), self.hz.row(i))

    def stabilizer_matrix(self) -> BitMatrix:
        return self.hx.hstack(self.hz)

    def contains_stabilizer(self, p: PauliOperator) -> bool:
        v = BitVector(p.x_mask.bits | (p.z_mask.bits << self.n), 2 * self.n)
        return in_rowspace(self.stabilizer_matrix(), v)

    def is_logical(self, p: PauliOperator) -> bool:
        """Nontrivial logical operator: commutes with all generators but
        is not a stabilizer element."""
        s = commutation_syndrome(self, p)
        return s.bits.bits == 0 and not self.contains_stabilizer(p)

    def __repr__(self):
        return f"StabilizerCode([[{self.n},{self.k},{self.d}]] {self.name!r})"


def commutation_syndrome(code: StabilizerCode, e: PauliOperator) -> Syndrome:
    """Bit i = 1 iff e anticommutes with generator i."""
    if e.n != code.n:
        raise ValueError("operator size does not match code")
    bits = mat_vec_bits(code.hx.row_list(), e.z_mask.bits) ^ mat_vec_bits(
        code.hz.row_list(), e.x_mask.bits
    )
    return Syndrome(BitVector(bits, code.num_checks))


def five_qubit_code() -> StabilizerCode:
    """The [[5,1,3]] single-error-correcting code."""
    hx = BitMatrix.from_string("11000\n01100\n00110\n00011")
    hz = BitMatrix.from_string("00101\n10010\n01001\n10100")
    return StabilizerCode("five_qubit", 5, 1, 3, hx, hz)


def css_from_classical(c: ClassicalCode, d: int | None = None,
                       name: str | None = None) -> StabilizerCode:
    """[[n, 2 k_c - n, d]] CSS code from a weakly self-dual classical code."""
    if not is_self_orthogonal(c.parity_check):
        raise ValueError(
            "classical code is not weakly self-dual: parity check rows must "
            "have pairwise even overlap (H H^T = 0 mod 2)"
        )
    k = 2 * c.k_c - c.n
    if k < 0:
        raise ValueError(f"2 k_c - n = {k} < 0; code too small for CSS")
    m = c.parity_check.rows
    zeros = BitMatrix.zeros(m, c.n)
    hx = c.parity_check.stack(zeros)
    hz = zeros.stack(c.parity_check)
    if d is None:
        d = classical_min_distance(c) if c.n - c.k_c <= 14 else None
    return StabilizerCode(name or f"css_{c.n}", c.n, k, d, hx, hz,
                          is_css=True, classical=c)


def classical_min_distance(c: ClassicalCode) -> int:
    """Minimum weight over nonzero codewords, by spanning the 2^k_c words."""
    from .gf2 import nullspace_basis

    basis = nullspace_basis(c.parity_check)
    if basis.rows > 24:
        raise ValueError("classical code too large to enumerate")
    best = c.n
    for mask in range(1, 1 << basis.rows):
        w = 0
        mm = mask
        while mm:
            w ^= basis.row_bits((mm & -mm).bit_length() - 1)
            mm &= mm - 1
        if 0 < w.bit_count() < best:
            best = w.bit_count()
    return best


def hamming7_code() -> ClassicalCode:
    """[7,4,3] Hamming code in cyclic (self-orthogonal-check) form."""
    h = BitMatrix.from_string("1110100\n0111010\n0011101")
    return ClassicalCode(7, 4, h)


def _poly_divmod(num: int, den: int) -> tuple[int, int]:
    """GF(2)[x] division of bit-packed polynomials (bit i = x^i)."""
    q = 0
    deg_d = den.bit_length() - 1
    while num.bit_length() - 1 >= deg_d and num:
        shift = num.bit_length() - 1 - deg_d
        q |= 1 << shift
        num ^= den << shift
    return q, num


def golay23_code() -> ClassicalCode:
    """[23,12,7] binary Golay code, built from its cyclic generator."""
    g = 0b101011100011  # x^11 + x^9 + x^7 + x^6 + x^5 + x + 1
    xn1 = (1 << 23) | 1
    h_poly, rem = _poly_divmod(xn1, g)
    if rem:
        raise AssertionError("generator does not divide x^23 + 1")
    # parity check rows: cyclic shifts of the reciprocal of h(x)
    deg_h = h_poly.bit_length() - 1
    recip = 0
    for i in range(deg_h + 1):
        if (h_poly >> i) & 1:
            recip |= 1 << (deg_h - i)
    rows = [recip << s for s in range(23 - deg_h)]
    return ClassicalCode(23, 12, BitMatrix(rows, 23))


_CLASSICAL_REGISTRY = {
    "hamming7": hamming7_code,
    "golay23": golay23_code,
}


def get_classical_code(name: str) -> ClassicalCode:
    try:
        return _CLASSICAL_REGISTRY[name]()
    except KeyError:
        raise KeyError(
            f"unknown classical code {name!r}; known: {sorted(_CLASSICAL_REGISTRY)}"
        ) from None


def steane7_code() -> StabilizerCode:
    return css_from_classical(hamming7_code(), name="steane7")


def golay23_quantum_code() -> StabilizerCode:
    return css_from_classical(golay23_code(), d=7, name="golay23")


_REGISTRY = {
    "five_qubit": five_qubit_code,
    "steane7": steane7_code,
    "golay23": golay23_quantum_code,
}


def get_code(name: str) -> StabilizerCode:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(
            f"unknown code {name!r}; known: {sorted(_REGISTRY)}"
        ) from None


def registry_names() -> list[str]:
    return sorted(_REGISTRY)


def _pauli_enumerator(n: int, max_weight: int):
    """All Paulis of weight 1..max_weight in (weight, lex) order."""
    for w in range(1, max_weight + 1):
        for support in combinations(range(n), w):
            for letters in range(3**w):
                x = z = 0
                ll = letters
                for q in support:
                    kind = ll % 3  # 0=X 1=Z 2=Y
                    ll //= 3
                    if kind != 1:
                        x |= 1 << q
                    if kind != 0:
                        z |= 1 << q
                yield PauliOperator.from_masks(n, x, z)


def build_decoder_table(code: StabilizerCode, max_weight: int | None = None
                        ) -> dict[int, PauliOperator]:
    """Minimum-weight coset-leader table keyed by syndrome value.

    Enumerates Paulis of weight <= max_weight (default t + 1) in
    (weight, lex) order, keeping the first operator per syndrome; the
    order makes ties deterministic.  Rejects codes where two
    inequivalent weight <= t errors share a syndrome.
    """
    if code.t is None:
        raise ValueError("code distance unknown; cannot size the decoder")
    if max_weight is None:
        max_weight = code.t + 1
    if code.n > 23:
        raise ValueError("code too large to enumerate decoder table")
    table: dict[int, PauliOperator] = {0: PauliOperator.identity(code.n)}
    for e in _pauli_enumerator(code.n, max_weight):
        s = int(commutation_syndrome(code, e))
        prev = table.get(s)
        if prev is None:
            table[s] = e
            continue
        if e.weight() <= code.t and prev.weight() <= code.t:
            if not code.contains_stabilizer(prev.compose(e)):
                raise ValueError(
                    f"not {code.t}-error-correcting: inequivalent errors "
                    f"{prev.label()} and {e.label()} share syndrome {s:b}"
                )
    return table


def distance_bruteforce(code: StabilizerCode) -> int:
    """Minimal weight of a nontrivial logical operator (n <= 12)."""
    if code.n > 12:
        raise ValueError("distance_bruteforce limited to n <= 12")
    for w in range(1, code.n + 1):
        for e in _pauli_enumerator(code.n, w):
            if e.weight() != w:
                continue
            if code.is_logical(e):
                return w
    raise AssertionError("no logical operator found; k = 0 code?")


def logical_operators(code: StabilizerCode) -> list[tuple[PauliOperator, PauliOperator]]:
    """k anticommuting (X_L, Z_L) pairs, each commuting with all generators
    and with every other pair.

    Every returned operator has even x-z overlap (squares to +1 in the
    phase-free convention), which the encoder synthesis requires.  CSS
    codes get the standard pure-X / pure-Z logicals.
    """
    from .gf2 import nullspace_basis

    n = code.n
    if code.is_css and code.classical is not None and code.k == 1:
        cw = _odd_weight_nondual_codeword(code.classical)
        if cw is not None:
            return [(
                PauliOperator.from_masks(n, cw, 0),
                PauliOperator.from_masks(n, 0, cw),
            )]
    # normalizer: (x|z) with Hx.z + Hz.x = 0  <=>  rows (hz_i | hx_i) annihilate
    twisted = code.hz.hstack(code.hx)
    norm = nullspace_basis(twisted)
    stab = code.stabilizer_matrix()

    def to_pauli(vbits: int) -> PauliOperator:
        return PauliOperator.from_masks(
            n, vbits & ((1 << n) - 1), vbits >> n
        )

    # quotient representatives: normalizer elements outside the stabilizer
    reps: list[int] = []
    span = [stab.row_bits(i) for i in range(stab.rows)]

    def reduce(v, basis):
        basis_m = BitMatrix(basis, 2 * n)
        return in_rowspace(basis_m, BitVector(v, 2 * n))

    for i in range(norm.rows):
        v = norm.row_bits(i)
        if not reduce(v, span + reps):
            reps.append(v)
    assert len(reps) == 2 * code.k
    # symplectic pairing by greedy Gram-Schmidt
    def symp(a: int, b: int) -> int:
        ax, az = a & ((1 << n) - 1), a >> n
        bx, bz = b & ((1 << n) - 1), b >> n
        return ((ax & bz).bit_count() + (az & bx).bit_count()) & 1

    def overlap_parity(v: int) -> int:
        return ((v & ((1 << n) - 1)) & (v >> n)).bit_count() & 1

    pairs = []
    pool = list(reps)
    while pool:
        a = pool.pop(0)
        j = next(i for i, b in enumerate(pool) if symp(a, b))
        b = pool.pop(j)
        # clean the remaining pool so later pairs commute with (a, b)
        pool = [c ^ (b if symp(a, c) else 0) ^ (a if symp(b, c) else 0) for c in pool]
        # canonicalize to even-overlap (Hermitian, squares to +1) reps
        if overlap_parity(b):
            b ^= a
        if overlap_parity(a):
            a ^= b
        if overlap_parity(a) or overlap_parity(b):
            raise ValueError("no Hermitian logical representatives found")
        pairs.append((to_pauli(a), to_pauli(b)))
    return pairs


def _odd_weight_nondual_codeword(c: ClassicalCode):
    """Odd-weight codeword outside the dual, if one is easy to find."""
    from .gf2 import in_rowspace, mat_vec_syndrome, nullspace_basis

    basis = nullspace_basis(c.parity_check)
    rows = [basis.row_bits(i) for i in range(basis.rows)]
    candidates = list(rows)
    candidates.append((1 << c.n) - 1)  # the all-ones word, odd for odd n
    for i in range(len(rows)):
        for j in range(i + 1, min(len(rows), i + 6)):
            candidates.append(rows[i] ^ rows[j])
    for w in candidates:
        if w.bit_count() & 1 == 0:
            continue
        v = BitVector(w, c.n)
        if mat_vec_syndrome(c.parity_check, v).bits != 0:
            continue
        if not in_rowspace(c.parity_check, v):
            return w
    return None


def parse_code_file(text: str, name: str = "user") -> StabilizerCode:
    """Parse 'xxxx|zzzz' rows ('#' comments allowed) into a validated code.

    A header comment '# d=<int>' supplies the distance for codes too large
    to brute-force (n > 12).
    """
    hx_rows: list[int] = []
    hz_rows: list[int] = []
    n = None
    d_header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("d="):
                d_header = int(body[2:])
            continue
        if line.count("|") != 1:
            raise ValueError(f"line {lineno}: expected one '|' separator")
        left, right = line.split("|")
        if len(left) != len(right):
            raise ValueError(
                f"line {lineno}: halves have lengths {len(left)} != {len(right)}"
            )
        if n is None:
            n = len(left)
        elif len(left) != n:
            raise ValueError(f"line {lineno}: inconsistent row length")
        try:
            hx_rows.append(BitVector.from_string(left).bits)
            hz_rows.append(BitVector.from_string(right).bits)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if n is None:
        raise ValueError("no generator rows found")
    hx = BitMatrix(hx_rows, n)
    hz = BitMatrix(hz_rows, n)
    k = n - rank(hx.hstack(hz))
    try:
        code = StabilizerCode(name, n, k, None, hx, hz)
    except ValueError as exc:
        raise ValueError(f"invalid stabilizer matrix: {exc}") from None
    if d_header is not None:
        d = d_header
    elif k == 0:
        d = None
    elif n <= 12:
        d = distance_bruteforce(code)
    else:
        raise ValueError("n > 12: supply the distance with a '# d=<int>' header")
    # CSS detection: every row pure-X or pure-Z and X rows match Z rows
    xs = sorted(r for r, z in zip(hx_rows, hz_rows) if z == 0 and r)
    zs = sorted(z for r, z in zip(hx_rows, hz_rows) if r == 0 and z)
    mixed = any(r and z for r, z in zip(hx_rows, hz_rows))
    is_css = not mixed and xs == zs and len(xs) + len(zs) == len(hx_rows)
    classical = None
    if is_css:
        hc = BitMatrix(xs, n)
        classical = ClassicalCode(n, n - rank(hc), hc)
    return StabilizerCode(name, n, k, d, hx, hz, is_css=is_css, classical=classical)


def emit_code_file(code: StabilizerCode) -> str:
    """Canonical text form; parse(emit(c)) reproduces c."""
    lines = [f"# {code.name} [[{code.n},{code.k},{code.d}]]"]
    if code.d is not None:
        lines.append(f"# d={code.d}")
    for i in range(code.num_checks):
        lines.append(f"{code.hx.row(i)}|{code.hz.row(i)}")
    return "\n".join(lines) + "\n"
