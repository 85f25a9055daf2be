"""Execution engines: exact statevector oracle and Pauli-frame sampler.

The statevector engine is the correctness oracle (<= 20 qubits).  The
Pauli-frame engine tracks X/Z deviation masks against an ideal reference
run (tableau-derived); branch operators make its raw outcome statistics
exact, not just its deterministic parities.

Noise model: each scheduled gate occupies one time step.  A gate or
preparation fails with probability gamma, hitting every involved qubit
with an independent uniform Pauli from {I, X, Z, Y}; a measurement fails
with probability gamma by reporting a uniform random bit (the
post-measurement state follows the true outcome).  Every live idle qubit
independently draws the same uniform Pauli with probability epsilon per
time step.  A classically controlled Pauli only draws its fault when it
actually fires.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

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
    MEASUREMENT_KINDS,
)
from .codes import PauliOperator
from .tableau import CircuitReference, Tableau, analyze_circuit

NORM_TOL = 1e-10

# Pauli letters: 0=I, 1=X, 2=Z, 3=Y
_LETTER_X = (0, 1, 0, 1)
_LETTER_Z = (0, 0, 1, 1)


@dataclass(frozen=True)
class NoiseParams:
    gamma: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0 and 0.0 <= self.epsilon <= 1.0):
            raise ValueError("gamma and epsilon must be probabilities")

    @property
    def silent(self) -> bool:
        return self.gamma == 0.0 and self.epsilon == 0.0


@dataclass(frozen=True)
class RngStream:
    """Deterministic stream: identical (seed, stream_index) -> identical draws."""

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(ss))


def _as_generator(rng) -> np.random.Generator:
    if rng is None:
        return RngStream(0).generator()
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, int):
        return RngStream(rng).generator()
    raise TypeError(f"cannot use {rng!r} as a random source")


# ---------------------------------------------------------------------------
# noise planning (shared by both engines)
# ---------------------------------------------------------------------------


@dataclass
class NoisePlan:
    """Pre-sampled fault locations for one execution of a schedule."""

    gate_faults: dict[int, tuple[tuple[int, int], ...]]  # gate idx -> ((qubit, letter),)
    measure_replacements: dict[int, int]  # gate idx -> replacement bit
    idle_faults: dict[int, tuple[tuple[int, int], ...]]  # step -> ((qubit, letter),)

    @classmethod
    def empty(cls) -> "NoisePlan":
        return cls({}, {}, {})


def live_evolution(circuit: Circuit, live_init: int) -> list[int]:
    """Live mask before each step; prep revives a qubit, measurement kills it."""
    live = live_init
    out = []
    for g in circuit.schedule:
        if g.kind == PREP_ZERO:
            live |= 1 << g.qubits[0]
        out.append(live)
        if g.kind in MEASUREMENT_KINDS:
            live &= ~(1 << g.qubits[0])
    return out


class NoiseLayout:
    """Precompiled fault-location table for one schedule + initial live set.

    Sampling draws a binomial count per location class and places the
    faults uniformly without replacement, which reproduces independent
    per-location Bernoulli draws exactly.
    """

    def __init__(self, circuit: Circuit, live_init: int | None = None):
        if live_init is None:
            live_init = (1 << circuit.num_qubits) - 1
        gate_slots: list[tuple[int, tuple[int, ...]]] = []
        measure_slots: list[int] = []
        idle_pairs: list[tuple[int, int]] = []
        lives = live_evolution(circuit, live_init)
        for idx, (g, live) in enumerate(zip(circuit.schedule, lives)):
            if g.kind in MEASUREMENT_KINDS:
                measure_slots.append(idx)
            else:
                gate_slots.append((idx, g.qubits))
            involved = 0
            for q in g.qubits:
                involved |= 1 << q
            idle = live & ~involved
            while idle:
                q = (idle & -idle).bit_length() - 1
                idle &= idle - 1
                idle_pairs.append((idx, q))
        self.gate_slots = gate_slots
        self.measure_slots = measure_slots
        self.idle_pairs = idle_pairs

    def sample(self, noise: NoiseParams, gen) -> NoisePlan:
        gate_faults: dict[int, tuple] = {}
        measure_replacements: dict[int, int] = {}
        idle_faults: dict[int, list] = {}
        if noise.gamma:
            k = gen.binomial(len(self.gate_slots), noise.gamma) if self.gate_slots else 0
            if k:
                picks = gen.choice(len(self.gate_slots), size=k, replace=False)
                for slot in picks:
                    idx, qubits = self.gate_slots[slot]
                    letters = gen.integers(0, 4, size=len(qubits))
                    hits = tuple(
                        (q, int(letter))
                        for q, letter in zip(qubits, letters)
                        if letter
                    )
                    if hits:
                        gate_faults[idx] = hits
            k = gen.binomial(len(self.measure_slots), noise.gamma) if self.measure_slots else 0
            if k:
                picks = gen.choice(len(self.measure_slots), size=k, replace=False)
                bits = gen.integers(0, 2, size=k)
                for slot, bit in zip(picks, bits):
                    measure_replacements[self.measure_slots[slot]] = int(bit)
        if noise.epsilon and self.idle_pairs:
            k = gen.binomial(len(self.idle_pairs), noise.epsilon)
            if k:
                picks = gen.choice(len(self.idle_pairs), size=k, replace=False)
                letters = gen.integers(0, 4, size=k)
                for slot, letter in zip(picks, letters):
                    if letter:
                        idx, q = self.idle_pairs[slot]
                        idle_faults.setdefault(idx, []).append((q, int(letter)))
        return NoisePlan(
            gate_faults,
            measure_replacements,
            {k: tuple(v) for k, v in idle_faults.items()},
        )


def sample_noise_plan(circuit: Circuit, noise: NoiseParams, rng,
                      live_init: int | None = None) -> NoisePlan:
    gen = _as_generator(rng)
    if noise.silent:
        return NoisePlan.empty()
    if live_init is None:
        live_init = (1 << circuit.num_qubits) - 1
    gate_faults: dict[int, tuple] = {}
    measure_replacements: dict[int, int] = {}
    idle_faults: dict[int, tuple] = {}
    lives = live_evolution(circuit, live_init)
    for idx, (g, live) in enumerate(zip(circuit.schedule, lives)):
        if g.kind in MEASUREMENT_KINDS:
            if noise.gamma and gen.random() < noise.gamma:
                measure_replacements[idx] = int(gen.integers(0, 2))
        else:
            if noise.gamma and gen.random() < noise.gamma:
                hits = []
                for q in g.qubits:
                    letter = int(gen.integers(0, 4))
                    if letter:
                        hits.append((q, letter))
                if hits:
                    gate_faults[idx] = tuple(hits)
        if noise.epsilon:
            hits = []
            involved = 0
            for q in g.qubits:
                involved |= 1 << q
            idle = live & ~involved
            while idle:
                q = (idle & -idle).bit_length() - 1
                idle &= idle - 1
                if gen.random() < noise.epsilon:
                    letter = int(gen.integers(0, 4))
                    if letter:
                        hits.append((q, letter))
            if hits:
                idle_faults[idx] = tuple(hits)
    return NoisePlan(gate_faults, measure_replacements, idle_faults)


# ---------------------------------------------------------------------------
# statevector engine
# ---------------------------------------------------------------------------


class StateVector:
    """2^n complex amplitudes; basis index bit j = qubit j."""

    def __init__(self, num_qubits: int, amplitudes: np.ndarray | None = None):
        self.num_qubits = num_qubits
        if amplitudes is None:
            amplitudes = np.zeros(1 << num_qubits, dtype=np.complex128)
            amplitudes[0] = 1.0
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << num_qubits,):
            raise ValueError("amplitude vector has wrong length")
        self.amplitudes = amplitudes

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_norm(self):
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise AssertionError("statevector norm drifted")

    def overlap(self, other: "StateVector") -> float:
        """|<self|other>|, basis-independent fidelity up to global phase."""
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)))


_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)


def _apply_single(amp: np.ndarray, n: int, q: int, mat: np.ndarray) -> np.ndarray:
    a = amp.reshape([2] * n)
    axis = n - 1 - q
    a = np.moveaxis(a, axis, -1)
    shape = a.shape
    a = a.reshape(-1, 2) @ mat.T
    a = a.reshape(shape)
    return np.moveaxis(a, -1, axis).reshape(-1)


def _apply_pauli_masks(amp: np.ndarray, x_mask: int, z_mask: int) -> np.ndarray:
    """X^x Z^z: |v> -> (-1)^(z.v) |v ^ x>."""
    size = amp.shape[0]
    idx = np.arange(size, dtype=np.uint64)
    out = amp
    if z_mask:
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(z_mask)) & np.uint64(1))
        out = out * signs
    if x_mask:
        res = np.empty_like(out)
        res[idx ^ np.uint64(x_mask)] = out
        out = res
    return out


def _apply_cnot(amp: np.ndarray, n: int, c: int, t: int) -> np.ndarray:
    idx = np.arange(amp.shape[0])
    ctrl = (idx >> c) & 1
    out = np.empty_like(amp)
    target_idx = idx ^ (ctrl << t)
    out[target_idx] = amp[idx]
    return out


def _measure_qubit(amp: np.ndarray, n: int, q: int, gen) -> tuple[np.ndarray, int]:
    idx = np.arange(amp.shape[0])
    one = ((idx >> q) & 1).astype(bool)
    p1 = float(np.sum(np.abs(amp[one]) ** 2))
    outcome = 1 if gen.random() < p1 else 0
    keep = one if outcome else ~one
    out = np.zeros_like(amp)
    out[keep] = amp[keep]
    norm = np.linalg.norm(out)
    if norm < 1e-12:
        raise AssertionError("measurement collapsed onto a zero branch")
    return out / norm, outcome


def run_statevector(circuit: Circuit, input_state: StateVector | None = None,
                    injected: PauliOperator | None = None, rng=None,
                    noise: NoiseParams | None = None,
                    plan: NoisePlan | None = None):
    """Exact evolution with projective measurements.

    Returns (final StateVector, measured-labels dict).  The injected
    Pauli is applied before the schedule.  Noise, when given, is applied
    from a pre-sampled or freshly sampled NoisePlan with the same
    semantics as the Pauli-frame engine.
    """
    n = circuit.num_qubits
    if n > 20:
        raise ValueError("statevector engine limited to 20 qubits")
    gen = _as_generator(rng)
    if plan is None:
        plan = (
            sample_noise_plan(circuit, noise, gen)
            if noise is not None and not noise.silent
            else NoisePlan.empty()
        )
    state = StateVector(n) if input_state is None else input_state.copy()
    amp = state.amplitudes
    if injected is not None:
        if injected.n != n:
            raise ValueError("injected operator size mismatch")
        amp = _apply_pauli_masks(amp, injected.x_mask.bits, injected.z_mask.bits)
    record: dict[str, int] = {}

    def fault(idx):
        nonlocal amp
        for q, letter in plan.gate_faults.get(idx, ()):
            amp = _apply_pauli_masks(
                amp, _LETTER_X[letter] << q, _LETTER_Z[letter] << q
            )

    for idx, g in enumerate(circuit.schedule):
        kind = g.kind
        if kind == HADAMARD:
            amp = _apply_single(amp, n, g.qubits[0], _H)
            fault(idx)
        elif kind == CNOT:
            amp = _apply_cnot(amp, n, *g.qubits)
            fault(idx)
        elif kind == PAULI_X:
            amp = _apply_pauli_masks(amp, 1 << g.qubits[0], 0)
            fault(idx)
        elif kind == PAULI_Z:
            amp = _apply_pauli_masks(amp, 0, 1 << g.qubits[0])
            fault(idx)
        elif kind == PAULI_Y:
            amp = _apply_pauli_masks(amp, 1 << g.qubits[0], 1 << g.qubits[0])
            fault(idx)
        elif kind == CC_PAULI:
            if g.condition is None or g.condition.evaluate(record):
                x = _expand(g.x_mask, g.qubits)
                z = _expand(g.z_mask, g.qubits)
                amp = _apply_pauli_masks(amp, x, z)
                fault(idx)
        elif kind == PREP_ZERO:
            q = g.qubits[0]
            amp, outcome = _measure_qubit(amp, n, q, gen)
            if outcome:
                amp = _apply_pauli_masks(amp, 1 << q, 0)
            fault(idx)
        elif kind in (MEASURE_Z, MEASURE_X):
            q = g.qubits[0]
            if kind == MEASURE_X:
                amp = _apply_single(amp, n, q, _H)
            amp, outcome = _measure_qubit(amp, n, q, gen)
            if kind == MEASURE_X:
                amp = _apply_single(amp, n, q, _H)
            reported = plan.measure_replacements.get(idx, outcome)
            record[g.label] = reported
        else:
            raise ValueError(f"unhandled gate kind {kind}")
        for q, letter in plan.idle_faults.get(idx, ()):
            amp = _apply_pauli_masks(
                amp, _LETTER_X[letter] << q, _LETTER_Z[letter] << q
            )
    out = StateVector(n, amp)
    out.check_norm()
    return out, record


def _expand(mask: int, qubits: tuple[int, ...]) -> int:
    out = 0
    for local, q in enumerate(qubits):
        if (mask >> local) & 1:
            out |= 1 << q
    return out


def pauli_expectation(state: StateVector, x_mask: int, z_mask: int) -> complex:
    """<psi| X^x Z^z |psi> (phase-free mask convention)."""
    moved = _apply_pauli_masks(state.amplitudes, x_mask, z_mask)
    return complex(np.vdot(state.amplitudes, moved))


def statevector_of(circuit: Circuit, rng=None) -> StateVector:
    state, _ = run_statevector(circuit, rng=rng)
    return state


# ---------------------------------------------------------------------------
# Pauli-frame engine
# ---------------------------------------------------------------------------


@dataclass
class FrameState:
    """X/Z deviation masks relative to the ideal reference run."""

    num_qubits: int
    x: int = 0
    z: int = 0
    live: int = 0
    time: int = 0
    record: dict[str, int] = field(default_factory=dict)

    @classmethod
    def fresh(cls, num_qubits: int, injected: PauliOperator | None = None,
              live: int | None = None) -> "FrameState":
        st = cls(num_qubits)
        st.live = (1 << num_qubits) - 1 if live is None else live
        if injected is not None:
            st.x = injected.x_mask.bits
            st.z = injected.z_mask.bits
        return st

    def pauli(self) -> PauliOperator:
        return PauliOperator.from_masks(self.num_qubits, self.x, self.z)

    def restricted(self, reg: range) -> PauliOperator:
        width = reg.stop - reg.start
        mask = ((1 << width) - 1) << reg.start
        return PauliOperator.from_masks(
            width, (self.x & mask) >> reg.start, (self.z & mask) >> reg.start
        )


def run_pauli_frame(circuit: Circuit, noise: NoiseParams | None = None, rng=None,
                    reference: CircuitReference | None = None,
                    state: FrameState | None = None,
                    injected: PauliOperator | None = None,
                    plan: NoisePlan | None = None,
                    layout: NoiseLayout | None = None):
    """Propagate a Pauli frame through the schedule under sampled noise.

    Returns (FrameState, labels dict for this run).  Reference data is
    computed on demand; pass it (and a NoiseLayout) explicitly when
    executing the same schedule many times.
    """
    gen = _as_generator(rng)
    if reference is None:
        reference = analyze_circuit(circuit)
    if state is None:
        state = FrameState.fresh(circuit.num_qubits, injected=injected)
    elif injected is not None:
        state.x ^= injected.x_mask.bits
        state.z ^= injected.z_mask.bits
    if plan is None:
        if noise is None or noise.silent:
            plan = NoisePlan.empty()
        elif layout is not None:
            plan = layout.sample(noise, gen)
        else:
            plan = sample_noise_plan(circuit, noise, gen, live_init=state.live)
    labels: dict[str, int] = {}
    ref_record = reference.record
    x, z, live = state.x, state.z, state.live

    def apply_fault(idx):
        nonlocal x, z
        for q, letter in plan.gate_faults.get(idx, ()):
            x ^= _LETTER_X[letter] << q
            z ^= _LETTER_Z[letter] << q

    for idx, g in enumerate(circuit.schedule):
        kind = g.kind
        if kind == HADAMARD:
            q = g.qubits[0]
            bit = 1 << q
            xq, zq = x & bit, z & bit
            x = (x & ~bit) | (bit if zq else 0)
            z = (z & ~bit) | (bit if xq else 0)
            apply_fault(idx)
        elif kind == CNOT:
            c, t = g.qubits
            if (x >> c) & 1:
                x ^= 1 << t
            if (z >> t) & 1:
                z ^= 1 << c
            apply_fault(idx)
        elif kind in (PAULI_X, PAULI_Z, PAULI_Y):
            apply_fault(idx)
        elif kind == CC_PAULI:
            actual = g.condition.evaluate({**state.record, **labels}) \
                if g.condition is not None else 1
            ref_val = g.condition.evaluate(ref_record) if g.condition is not None else 1
            if actual != ref_val:
                x ^= _expand(g.x_mask, g.qubits)
                z ^= _expand(g.z_mask, g.qubits)
            if actual:
                apply_fault(idx)
        elif kind == PREP_ZERO:
            q = g.qubits[0]
            ev = reference.events_by_gate[idx]
            if not ev.deterministic:
                b = int(gen.integers(0, 2))
                if b != ev.ref_outcome:
                    x ^= ev.branch_x
                    z ^= ev.branch_z
            bit = 1 << q
            x &= ~bit
            z &= ~bit
            live |= bit
            apply_fault(idx)
        elif kind in (MEASURE_Z, MEASURE_X):
            q = g.qubits[0]
            ev = reference.events_by_gate[idx]
            flip = (x >> q) & 1 if kind == MEASURE_Z else (z >> q) & 1
            if ev.deterministic:
                true_bit = ev.ref_outcome ^ flip
            else:
                b = int(gen.integers(0, 2))
                if b != ev.ref_outcome:
                    x ^= ev.branch_x
                    z ^= ev.branch_z
                true_bit = b ^ flip
            reported = plan.measure_replacements.get(idx, true_bit)
            labels[g.label] = reported
            live &= ~(1 << q)
        else:
            raise ValueError(f"unhandled gate kind {kind}")
        for q, letter in plan.idle_faults.get(idx, ()):
            x ^= _LETTER_X[letter] << q
            z ^= _LETTER_Z[letter] << q

    state.x, state.z, state.live = x, z, live
    state.time += circuit.num_steps()
    state.record.update(labels)
    return state, labels


# ---------------------------------------------------------------------------
# random Clifford circuits (cross-validation workloads)
# ---------------------------------------------------------------------------


def random_clifford_circuit(num_qubits: int, depth: int, rng,
                            measure_fraction: float = 0.15) -> Circuit:
    """Random schedule over the supported gate set, all qubits measured
    at the end.  Mid-circuit measurements re-prepare their qubit so the
    schedule stays measurable."""
    gen = _as_generator(rng)
    c = Circuit(num_qubits, registers={"data": range(num_qubits)})
    mid = 0
    for _ in range(depth):
        r = gen.random()
        if r < measure_fraction and num_qubits > 1:
            q = int(gen.integers(0, num_qubits))
            basis = MEASURE_Z if gen.random() < 0.5 else MEASURE_X
            c.add(basis, q, label=f"mid{mid}")
            c.add(PREP_ZERO, q)
            mid += 1
        elif r < 0.45:
            c.add(HADAMARD, int(gen.integers(0, num_qubits)))
        elif r < 0.85:
            a, b = gen.choice(num_qubits, size=2, replace=False)
            c.add(CNOT, int(a), int(b))
        else:
            q = int(gen.integers(0, num_qubits))
            kind = (PAULI_X, PAULI_Z, PAULI_Y)[int(gen.integers(0, 3))]
            c.add(kind, q)
    for q in range(num_qubits):
        c.add(MEASURE_Z, q, label=f"m{q}")
    return c
