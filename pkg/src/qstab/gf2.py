"""Bit-packed linear algebra over GF(2).

Rows are stored as python ints (bit j = column j), which makes row
operations single xors.  Column 0 is the leftmost character when a
matrix is printed or parsed, so ``BitVector.from_string("100")`` has
bit 0 set and bits 1, 2 clear.
"""

from __future__ import annotations

from dataclasses import dataclass


def _popcount(x: int) -> int:
    return x.bit_count()


@dataclass(frozen=True)
class BitVector:
    """Fixed-length vector over GF(2), packed into a single int."""

    bits: int
    len: int

    def __post_init__(self):
        if self.len < 0:
            raise ValueError("length must be nonnegative")
        if self.bits >> self.len:
            raise ValueError("bits set beyond vector length")

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        s = s.strip()
        if not all(c in "01" for c in s):
            raise ValueError(f"invalid bit string {s!r}")
        bits = 0
        for j, c in enumerate(s):
            if c == "1":
                bits |= 1 << j
        return cls(bits, len(s))

    @classmethod
    def from_ints(cls, values) -> "BitVector":
        values = list(values)
        bits = 0
        for j, v in enumerate(values):
            if v not in (0, 1):
                raise ValueError("entries must be 0 or 1")
            if v:
                bits |= 1 << j
        return cls(bits, len(values))

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(0, n)

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.len:
            raise IndexError(j)
        return (self.bits >> j) & 1

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.len != other.len:
            raise ValueError("length mismatch")
        return BitVector(self.bits ^ other.bits, self.len)

    def dot(self, other: "BitVector") -> int:
        if self.len != other.len:
            raise ValueError("length mismatch")
        return _popcount(self.bits & other.bits) & 1

    def weight(self) -> int:
        return _popcount(self.bits)

    def to_ints(self) -> list[int]:
        return [(self.bits >> j) & 1 for j in range(self.len)]

    def __str__(self) -> str:
        return "".join("1" if (self.bits >> j) & 1 else "0" for j in range(self.len))

    def __iter__(self):
        return iter(self.to_ints())


class BitMatrix:
    """Dense matrix over GF(2); each row is an int bitmask."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows_data, cols: int):
        self._data = [int(r) for r in rows_data]
        self.cols = cols
        self.rows = len(self._data)
        for r in self._data:
            if r < 0 or (cols >= 0 and r >> cols):
                raise ValueError("row has bits beyond column count")

    @classmethod
    def from_string(cls, text: str) -> "BitMatrix":
        """Parse one row per line of '0'/'1' characters.

        A '|' separator inside a row is ignored here (the codes module
        interprets it); blank lines and '#' comments are skipped.
        """
        rows = []
        cols = None
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            line = line.replace("|", "")
            v = BitVector.from_string(line)
            if cols is None:
                cols = v.len
            elif v.len != cols:
                raise ValueError("inconsistent row lengths")
            rows.append(v.bits)
        if cols is None:
            cols = 0
        return cls(rows, cols)

    @classmethod
    def from_ints(cls, array) -> "BitMatrix":
        array = [list(row) for row in array]
        cols = len(array[0]) if array else 0
        return cls([BitVector.from_ints(row).bits for row in array], cols)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls([0] * rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls([1 << j for j in range(n)], n)

    def row(self, i: int) -> BitVector:
        return BitVector(self._data[i], self.cols)

    def row_bits(self, i: int) -> int:
        return self._data[i]

    def row_list(self) -> list[int]:
        return list(self._data)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.cols == other.cols
            and self._data == other._data
        )

    def __str__(self) -> str:
        return "\n".join(str(self.row(i)) for i in range(self.rows))

    def transpose(self) -> "BitMatrix":
        out = []
        for j in range(self.cols):
            bits = 0
            for i in range(self.rows):
                if (self._data[i] >> j) & 1:
                    bits |= 1 << i
            out.append(bits)
        return BitMatrix(out, self.rows)

    def stack(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return BitMatrix(self._data + other._data, self.cols)

    def hstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        data = [
            self._data[i] | (other._data[i] << self.cols) for i in range(self.rows)
        ]
        return BitMatrix(data, self.cols + other.cols)


def rref(m: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row-echelon form over GF(2); returns (rref, pivot columns)."""
    data = m.row_list()
    pivots = []
    r = 0
    for c in range(m.cols):
        pivot = next((i for i in range(r, m.rows) if (data[i] >> c) & 1), None)
        if pivot is None:
            continue
        data[r], data[pivot] = data[pivot], data[r]
        for i in range(m.rows):
            if i != r and (data[i] >> c) & 1:
                data[i] ^= data[r]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    # move zero rows to the bottom, preserving echelon order
    nonzero = [d for d in data if d]
    zero = [0] * (m.rows - len(nonzero))
    return BitMatrix(nonzero + zero, m.cols), pivots


def rank(m: BitMatrix) -> int:
    return len(rref(m)[1])


def nullspace_basis(m: BitMatrix) -> BitMatrix:
    """Rows form a basis of {v : m v^T = 0}; row count = cols - rank."""
    red, pivots = rref(m)
    pivot_set = set(pivots)
    free_cols = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for free in free_cols:
        v = 1 << free
        for i, p in enumerate(pivots):
            if (red.row_bits(i) >> free) & 1:
                v |= 1 << p
        basis.append(v)
    return BitMatrix(basis, m.cols)


def is_self_orthogonal(h: BitMatrix) -> bool:
    """True iff h h^T = 0 (mod 2), i.e. the row space is self-orthogonal."""
    for i in range(h.rows):
        ri = h.row_bits(i)
        for j in range(i, h.rows):
            if _popcount(ri & h.row_bits(j)) & 1:
                return False
    return True


def mat_vec_syndrome(h: BitMatrix, v: BitVector) -> BitVector:
    """Evaluate each row of h as a parity check on v."""
    if v.len != h.cols:
        raise ValueError(f"vector length {v.len} != matrix columns {h.cols}")
    bits = 0
    for i in range(h.rows):
        if _popcount(h.row_bits(i) & v.bits) & 1:
            bits |= 1 << i
    return BitVector(bits, h.rows)


def mat_vec_bits(rows: list[int], v: int) -> int:
    """Parity-check a packed vector against packed rows (int fast path)."""
    bits = 0
    for i, r in enumerate(rows):
        if _popcount(r & v) & 1:
            bits |= 1 << i
    return bits


def in_rowspace(m: BitMatrix, v: BitVector) -> bool:
    """Membership of v in the row space of m."""
    if v.len != m.cols:
        raise ValueError("length mismatch")
    red, pivots = rref(m)
    residue = v.bits
    for i, p in enumerate(pivots):
        if (residue >> p) & 1:
            residue ^= red.row_bits(i)
    return residue == 0


def solve_system(m: BitMatrix, rhs: BitVector):
    """Any w with m w^T = rhs (free variables zero), or None."""
    if rhs.len != m.rows:
        raise ValueError("rhs length must equal row count")
    aug = m.hstack(BitMatrix([(rhs.bits >> i) & 1 for i in range(m.rows)], 1))
    red, pivots = rref(aug)
    w = 0
    for i, p in enumerate(pivots):
        if p == m.cols:
            return None  # pivot in the augmented column: inconsistent
        if (red.row_bits(i) >> m.cols) & 1:
            w |= 1 << p
    return BitVector(w, m.cols)


def solve_rowspace(m: BitMatrix, v: BitVector):
    """Coefficients u with u m = v, or None if v is outside the row space."""
    red, pivots = rref(m)
    residue = v.bits
    picked = []
    for i, p in enumerate(pivots):
        if (residue >> p) & 1:
            residue ^= red.row_bits(i)
            picked.append(i)
    if residue:
        return None
    # express chosen rref rows in terms of the original rows
    data = m.row_list()
    coeffs = [1 << i for i in range(m.rows)]
    r = 0
    for c in range(m.cols):
        pivot = next((i for i in range(r, m.rows) if (data[i] >> c) & 1), None)
        if pivot is None:
            continue
        data[r], data[pivot] = data[pivot], data[r]
        coeffs[r], coeffs[pivot] = coeffs[pivot], coeffs[r]
        for i in range(m.rows):
            if i != r and (data[i] >> c) & 1:
                data[i] ^= data[r]
                coeffs[i] ^= coeffs[r]
        r += 1
    u = 0
    for i in picked:
        u ^= coeffs[i]
    return BitVector(u, m.rows)
