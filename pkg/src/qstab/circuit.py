"""Circuit intermediate representation.

One gate per time-step: the schedule index *is* the time step, which is
what the idle-noise accounting assumes.  A parallel-layers view exists
for reporting but plays no part in the failure analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PREP_ZERO = "prep_zero"
HADAMARD = "hadamard"
CNOT = "cnot"
PAULI_X = "pauli_x"
PAULI_Z = "pauli_z"
PAULI_Y = "pauli_y"
MEASURE_Z = "measure_z"
MEASURE_X = "measure_x"
CC_PAULI = "classically_controlled_pauli"

GATE_KINDS = {
    PREP_ZERO,
    HADAMARD,
    CNOT,
    PAULI_X,
    PAULI_Z,
    PAULI_Y,
    MEASURE_Z,
    MEASURE_X,
    CC_PAULI,
}

MEASUREMENT_KINDS = {MEASURE_Z, MEASURE_X}


@dataclass(frozen=True)
class Condition:
    """Classical XOR expression over measurement labels, plus a constant."""

    labels: tuple[str, ...]
    constant: int = 0

    def evaluate(self, record: dict[str, int]) -> int:
        v = self.constant
        for name in self.labels:
            v ^= record[name]
        return v & 1

    def __str__(self) -> str:
        parts = list(self.labels) + ([str(self.constant)] if self.constant else [])
        return "^".join(parts) if parts else "0"


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    label: str | None = None          # output label for measurements
    condition: Condition | None = None
    # for classically controlled Paulis: masks over the gate's qubits
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("gate qubits must be distinct")
        if self.kind == CNOT and len(self.qubits) != 2:
            raise ValueError("cnot takes exactly two qubits")
        if self.kind in MEASUREMENT_KINDS and self.label is None:
            raise ValueError("measurements need an output label")

    def text(self, step: int) -> str:
        head = f"t={step} {self.kind} {' '.join(map(str, self.qubits))}"
        if self.kind in MEASUREMENT_KINDS:
            return f"{head} {self.label}"
        if self.kind == CC_PAULI:
            return f"{head} x={self.x_mask:b} z={self.z_mask:b} cond={self.condition}"
        return head


class Circuit:
    """Ordered gate schedule over named qubit registers."""

    def __init__(self, num_qubits: int, registers: dict[str, range] | None = None):
        self.num_qubits = num_qubits
        self.registers = registers or {}
        self.schedule: list[Gate] = []
        self.sections: dict[str, tuple[int, int]] = {}
        self.meta: dict = {}

    def _check(self, gate: Gate):
        for q in gate.qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} out of range")
        if gate.condition is not None:
            known = {
                g.label for g in self.schedule if g.kind in MEASUREMENT_KINDS
            }
            for name in gate.condition.labels:
                if name not in known:
                    raise ValueError(f"condition references unknown label {name!r}")

    def append(self, gate: Gate) -> "Circuit":
        self._check(gate)
        self.schedule.append(gate)
        return self

    def add(self, kind: str, *qubits: int, label: str | None = None,
            condition: Condition | None = None, x_mask: int = 0,
            z_mask: int = 0) -> "Circuit":
        return self.append(
            Gate(kind, tuple(qubits), label=label, condition=condition,
                 x_mask=x_mask, z_mask=z_mask)
        )

    def extend(self, other: "Circuit") -> "Circuit":
        if other.num_qubits != self.num_qubits:
            raise ValueError("qubit count mismatch")
        for g in other.schedule:
            self.append(g)
        return self

    def mark_section(self, name: str, start: int, stop: int | None = None):
        self.sections[name] = (start, len(self.schedule) if stop is None else stop)

    def section(self, name: str) -> list[Gate]:
        a, b = self.sections[name]
        return self.schedule[a:b]

    def measurement_labels(self) -> list[str]:
        return [g.label for g in self.schedule if g.kind in MEASUREMENT_KINDS]

    def num_steps(self) -> int:
        return len(self.schedule)

    def count_kind(self, kind: str) -> int:
        return sum(1 for g in self.schedule if g.kind == kind)

    def couplings_between(self, reg_a: str, reg_b: str) -> list[Gate]:
        """Two-qubit gates with one leg in each named register."""
        ra, rb = self.registers[reg_a], self.registers[reg_b]
        out = []
        for g in self.schedule:
            if len(g.qubits) != 2:
                continue
            qa, qb = g.qubits
            if (qa in ra and qb in rb) or (qa in rb and qb in ra):
                out.append(g)
        return out

    def text_dump(self) -> str:
        lines = [g.text(t) for t, g in enumerate(self.schedule)]
        return "\n".join(lines) + "\n"

    def parallel_layers(self) -> list[list[Gate]]:
        """Greedy grouping of the serial schedule into disjoint-qubit layers.

        Reporting only: the noise model and Eq.-style opportunity counts
        always use the serial schedule.
        """
        layers: list[list[Gate]] = []
        busy: list[set[int]] = []
        for g in self.schedule:
            placed = False
            for layer, used in zip(layers, busy):
                if not used.intersection(g.qubits) and g.kind != CC_PAULI:
                    layer.append(g)
                    used.update(g.qubits)
                    placed = True
                    break
            if not placed:
                layers.append([g])
                busy.append(set(g.qubits))
        return layers

    def __repr__(self):
        return (
            f"Circuit({self.num_qubits} qubits, {len(self.schedule)} gates, "
            f"registers={ {k: (v.start, v.stop) for k, v in self.registers.items()} })"
        )


def remap_circuit(circuit: Circuit, qubit_map: dict[int, int], num_qubits: int,
                  registers: dict[str, range] | None = None) -> Circuit:
    """Copy a circuit onto a different qubit layout (labels unchanged)."""
    out = Circuit(num_qubits, registers=registers or {})
    for g in circuit.schedule:
        out.append(
            Gate(
                g.kind,
                tuple(qubit_map[q] for q in g.qubits),
                label=g.label,
                condition=g.condition,
                x_mask=g.x_mask,
                z_mask=g.z_mask,
            )
        )
    for name, (a, b) in circuit.sections.items():
        out.sections[name] = (a, b)
    out.meta = dict(circuit.meta)
    return out
