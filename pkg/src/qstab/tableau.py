"""Stabilizer tableau simulator (Aaronson-Gottesman style).

Used as the reference engine for Pauli-frame sampling: it decides which
measurements are deterministic, fixes their reference outcomes, and
extracts a branch operator (a stabilizer anticommuting with the measured
observable) for the random ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import (
    CC_PAULI,
    CNOT,
    HADAMARD,
    MEASURE_X,
    MEASURE_Z,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    PREP_ZERO,
    Circuit,
)


class Tableau:
    """2n rows: destabilizers [0, n), stabilizers [n, 2n); bit j = qubit j."""

    def __init__(self, n: int):
        self.n = n
        self.x = [0] * (2 * n)
        self.z = [0] * (2 * n)
        self.r = [0] * (2 * n)
        for i in range(n):
            self.x[i] = 1 << i          # destabilizer X_i
            self.z[n + i] = 1 << i      # stabilizer Z_i

    # -- gate conjugations -------------------------------------------------

    def h(self, q: int):
        bit = 1 << q
        for i in range(2 * self.n):
            xq, zq = self.x[i] & bit, self.z[i] & bit
            if xq and zq:
                self.r[i] ^= 1
            if bool(xq) != bool(zq):
                self.x[i] ^= bit
                self.z[i] ^= bit

    def cnot(self, c: int, t: int):
        cb, tb = 1 << c, 1 << t
        for i in range(2 * self.n):
            xc = (self.x[i] >> c) & 1
            zt = (self.z[i] >> t) & 1
            xt = (self.x[i] >> t) & 1
            zc = (self.z[i] >> c) & 1
            if xc & zt & (xt ^ zc ^ 1):
                self.r[i] ^= 1
            if xc:
                self.x[i] ^= tb
            if zt:
                self.z[i] ^= cb

    def pauli(self, x_mask: int, z_mask: int):
        """Conjugate by X^x Z^z: flips signs of anticommuting rows."""
        for i in range(2 * self.n):
            a = (self.x[i] & z_mask).bit_count() + (self.z[i] & x_mask).bit_count()
            self.r[i] ^= a & 1

    # -- row arithmetic ----------------------------------------------------

    @staticmethod
    def _g(x1, z1, x2, z2) -> int:
        if not x1 and not z1:
            return 0
        if x1 and z1:
            return z2 - x2
        if x1:  # X
            return z2 * (2 * x2 - 1)
        return x2 * (1 - 2 * z2)  # Z

    def _rowsum_into(self, xh, zh, rh, i, checked=True):
        """Return (x, z, r) of row (xh,zh,rh) multiplied by row i."""
        phase = 2 * rh + 2 * self.r[i]
        xi, zi = self.x[i], self.z[i]
        both = xi | zi | xh | zh
        j = 0
        m = both
        while m:
            if m & 1:
                phase += self._g(
                    (xi >> j) & 1, (zi >> j) & 1, (xh >> j) & 1, (zh >> j) & 1
                )
            m >>= 1
            j += 1
        phase %= 4
        # destabilizer phases are bookkeeping-free; only stabilizer rows
        # must stay real
        if checked:
            assert phase in (0, 2), "rowsum produced an imaginary phase"
        return xh ^ xi, zh ^ zi, phase // 2

    def _rowsum(self, h: int, i: int):
        self.x[h], self.z[h], self.r[h] = self._rowsum_into(
            self.x[h], self.z[h], self.r[h], i, checked=h >= self.n
        )

    # -- measurement -------------------------------------------------------

    def measure_z(self, q: int, forced_outcome: int | None = None):
        """Measure Z_q.

        Returns (outcome, deterministic, branch) where branch is the
        (x_mask, z_mask) of a pre-measurement stabilizer anticommuting
        with Z_q (None when deterministic).  For random outcomes the
        caller picks the outcome (forced_outcome), defaulting to 0.
        """
        n = self.n
        bit = 1 << q
        p = next((i for i in range(n, 2 * n) if self.x[i] & bit), None)
        if p is not None:
            branch = (self.x[p], self.z[p])
            for i in range(2 * n):
                if i != p and (self.x[i] & bit):
                    self._rowsum(i, p)
            self.x[p - n], self.z[p - n], self.r[p - n] = (
                self.x[p],
                self.z[p],
                self.r[p],
            )
            outcome = 0 if forced_outcome is None else forced_outcome
            self.x[p] = 0
            self.z[p] = bit
            self.r[p] = outcome
            return outcome, False, branch
        # deterministic: accumulate stabilizer product indicated by destabilizers
        xh = zh = rh = 0
        for i in range(n):
            if self.x[i] & bit:
                xh, zh, rh = self._rowsum_into(xh, zh, rh, i + n)
        return rh, True, None

    def expectation_sign(self, x_mask: int, z_mask: int):
        """Eigenvalue (+1/-1) of the operator X^x Z^z on the stabilized
        state, or None when it is not in the stabilizer group.

        X^x Z^z with odd x-z overlap squares to -I and cannot stabilize;
        even overlaps contribute (-1)^(overlap/2) relative to the
        tableau's Y-based row convention.
        """
        overlap = (x_mask & z_mask).bit_count()
        if overlap & 1:
            return None
        n = self.n
        xh = zh = rh = 0
        # the product of stabilizer rows whose destabilizer partner
        # anticommutes with the target reproduces the target if possible
        for i in range(n):
            dx, dz = self.x[i], self.z[i]
            a = (dx & z_mask).bit_count() + (dz & x_mask).bit_count()
            if a & 1:
                xh, zh, rh = self._rowsum_into(xh, zh, rh, i + n)
        if xh != x_mask or zh != z_mask:
            return None
        sign = rh ^ ((overlap >> 1) & 1)
        return -1 if sign else 1

    def stabilizer_rows(self):
        n = self.n
        return [(self.x[i], self.z[i], self.r[i]) for i in range(n, 2 * n)]


@dataclass
class MeasurementEvent:
    """Reference data for one measurement or reset in a schedule."""

    gate_index: int
    qubit: int
    basis: str  # 'z' or 'x'
    is_reset: bool
    deterministic: bool
    ref_outcome: int
    branch_x: int
    branch_z: int
    label: str | None


@dataclass
class CircuitReference:
    """Ideal-run data: reference outcomes + branch structure per collapse."""

    num_qubits: int
    events: list[MeasurementEvent]
    record: dict[str, int]
    events_by_gate: dict[int, MeasurementEvent]

    @property
    def num_random(self) -> int:
        return sum(1 for e in self.events if not e.deterministic)


def analyze_circuit(circuit: Circuit, initial: Tableau | None = None,
                    branch_cleaner=None, watch_from=None) -> CircuitReference:
    """Run the ideal circuit on a tableau, recording reference data.

    Random reference outcomes are fixed to 0 (any fixed choice works; the
    frame sampler supplies per-shot randomness through branch bits).

    branch_cleaner(stab_rows, qubit, branch, watches) may replace the
    canonical branch operator by an equivalent representative (still a
    pre-measurement stabilizer anticommuting with Z_qubit).

    watch_from lists (gate_index, x_mask, z_mask) Pauli operators to
    conjugate alongside the run from the given schedule position; they
    are updated through random collapses by the branch operator, and a
    deterministic measurement anticommuting with a watched operator
    raises (it would reveal the watched observable).
    """
    tab = initial if initial is not None else Tableau(circuit.num_qubits)
    if tab.n != circuit.num_qubits:
        raise ValueError("tableau size mismatch")
    events: list[MeasurementEvent] = []
    record: dict[str, int] = {}
    pending = sorted(watch_from or [], key=lambda w: w[0])
    watches: list[list[int]] = []

    def activate(idx):
        while pending and pending[0][0] <= idx:
            _, wx, wz = pending.pop(0)
            watches.append([wx, wz])

    for idx, g in enumerate(circuit.schedule):
        activate(idx)
        if g.kind == HADAMARD:
            q = g.qubits[0]
            tab.h(q)
            for w in watches:
                w[0], w[1] = _h_conjugate_masks(w[0], w[1], q)
        elif g.kind == CNOT:
            c, t = g.qubits
            tab.cnot(c, t)
            for w in watches:
                if (w[0] >> c) & 1:
                    w[0] ^= 1 << t
                if (w[1] >> t) & 1:
                    w[1] ^= 1 << c
        elif g.kind == PAULI_X:
            tab.pauli(1 << g.qubits[0], 0)
        elif g.kind == PAULI_Z:
            tab.pauli(0, 1 << g.qubits[0])
        elif g.kind == PAULI_Y:
            b = 1 << g.qubits[0]
            tab.pauli(b, b)
        elif g.kind == CC_PAULI:
            if g.condition is None or g.condition.evaluate(record):
                x = _expand_mask(g.x_mask, g.qubits)
                z = _expand_mask(g.z_mask, g.qubits)
                tab.pauli(x, z)
        elif g.kind in (MEASURE_Z, MEASURE_X, PREP_ZERO):
            q = g.qubits[0]
            basis = "x" if g.kind == MEASURE_X else "z"
            if basis == "x":
                tab.h(q)
                for w in watches:
                    w[0], w[1] = _h_conjugate_masks(w[0], w[1], q)
            snapshot = None
            if branch_cleaner is not None and any(
                (tab.x[i] >> q) & 1 for i in range(tab.n, 2 * tab.n)
            ):
                snapshot = [(tab.x[i], tab.z[i]) for i in range(tab.n, 2 * tab.n)]
            outcome, det, branch = tab.measure_z(q, forced_outcome=0)
            if not det and snapshot is not None:
                branch = branch_cleaner(
                    snapshot, q, branch, [tuple(w) for w in watches]
                )
            # update watched operators through the collapse
            for w in watches:
                if (w[0] >> q) & 1:  # anticommutes with Z_q
                    if det or branch is None:
                        raise AssertionError(
                            "deterministic measurement reveals a watched operator"
                        )
                    w[0] ^= branch[0]
                    w[1] ^= branch[1]
            if basis == "x":
                tab.h(q)
                for w in watches:
                    w[0], w[1] = _h_conjugate_masks(w[0], w[1], q)
            bx, bz = (0, 0) if branch is None else branch
            if basis == "x" and branch is not None:
                # branch operator recorded in the rotated frame; undo the H
                bx, bz = _h_conjugate_masks(bx, bz, q)
            is_reset = g.kind == PREP_ZERO
            if is_reset and outcome:
                tab.pauli(1 << q, 0)
            events.append(
                MeasurementEvent(
                    gate_index=idx,
                    qubit=q,
                    basis=basis,
                    is_reset=is_reset,
                    deterministic=det,
                    ref_outcome=outcome,
                    branch_x=bx,
                    branch_z=bz,
                    label=g.label,
                )
            )
            if g.label is not None:
                record[g.label] = outcome
        else:
            raise ValueError(f"unhandled gate kind {g.kind}")
    by_gate = {e.gate_index: e for e in events}
    return CircuitReference(circuit.num_qubits, events, record, by_gate)


def _expand_mask(mask: int, qubits: tuple[int, ...]) -> int:
    out = 0
    for local, q in enumerate(qubits):
        if (mask >> local) & 1:
            out |= 1 << q
    return out


def _h_conjugate_masks(x: int, z: int, q: int) -> tuple[int, int]:
    bit = 1 << q
    xq, zq = x & bit, z & bit
    x = (x & ~bit) | (bit if zq else 0)
    z = (z & ~bit) | (bit if xq else 0)
    return x, z
