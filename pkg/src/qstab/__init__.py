"""qstab: stabilizer-code recovery networks, simulators, and failure analysis."""

from .gf2 import (
    BitMatrix,
    BitVector,
    is_self_orthogonal,
    mat_vec_syndrome,
    nullspace_basis,
    rank,
    rref,
)

__all__ = [
    "BitMatrix",
    "BitVector",
    "rank",
    "rref",
    "nullspace_basis",
    "is_self_orthogonal",
    "mat_vec_syndrome",
]

__version__ = "0.1.0"
