"""Synthesis of recovery networks, encoders, and verification circuits.

All synthesized preparations are validated on the spot with a tableau
run; collapse byproducts of the measurement rounds are compiled into
classically controlled Pauli fix-ups so that the ideal network maps
codespace back to codespace exactly, shot after shot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

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
    Condition,
    Gate,
)
from .codes import (
    PauliOperator,
    StabilizerCode,
    commutation_syndrome,
    logical_operators,
)
from .gf2 import BitMatrix, BitVector, nullspace_basis, rref, solve_system
from .tableau import Tableau, analyze_circuit


# ---------------------------------------------------------------------------
# stabilizer-state preparation
# ---------------------------------------------------------------------------


def _xrref_rows(rows: list[tuple[int, int]], cols: int):
    """Row-reduce on the X half, tracking signs of the +1-convention rows.

    Returns (reduced rows [(x, z, sign)], pivot column per X-pivoted row).
    Multiplying X^a Z^b by X^c Z^d contributes a sign (-1)^(b.c).
    """
    work = [[x, z, 0] for x, z in rows]
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, len(work)) if (work[i][0] >> c) & 1), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        for i in range(len(work)):
            if i != r and (work[i][0] >> c) & 1:
                # row_i <- row_i * row_r
                sign = (work[i][1] & work[r][0]).bit_count() & 1
                work[i][0] ^= work[r][0]
                work[i][1] ^= work[r][1]
                work[i][2] ^= work[r][2] ^ sign
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return work, pivots


def synth_stabilizer_state(generators: list[tuple[int, int]], num_qubits: int,
                           circuit: Circuit | None = None,
                           qubits: list[int] | None = None,
                           prep: bool = True) -> Circuit:
    """Append a preparation of the joint +1 eigenstate of `generators`.

    Generators are (x_mask, z_mask) pairs in the phase-free X^x Z^z
    convention; they must be independent, commuting, and number exactly
    num_qubits.  `qubits` maps local indices into the circuit.
    """
    if len(generators) != num_qubits:
        raise ValueError("need exactly one generator per qubit")
    if circuit is None:
        circuit = Circuit(num_qubits)
    if qubits is None:
        qubits = list(range(num_qubits))

    reduced, pivots = _xrref_rows(generators, num_qubits)
    x_rows = reduced[: len(pivots)]
    z_rows = reduced[len(pivots):]
    for x, z, _ in z_rows:
        if x:
            raise AssertionError("generators are dependent in their X parts")

    if prep:
        for q in qubits:
            circuit.add(PREP_ZERO, q)
    for (x, z, _), p in zip(x_rows, pivots):
        circuit.add(HADAMARD, qubits[p])
    # pairwise CZ between pivots where the Z part of one row overlaps the
    # X part of the other (the (-1)^(b_i . a_j) cross terms)
    for i in range(len(x_rows)):
        for j in range(i + 1, len(x_rows)):
            if (x_rows[i][1] & x_rows[j][0]).bit_count() & 1:
                _append_cz(circuit, qubits[pivots[i]], qubits[pivots[j]])
    for (x, z, _), p in zip(x_rows, pivots):
        fan = x & ~(1 << p)
        while fan:
            c = (fan & -fan).bit_length() - 1
            fan &= fan - 1
            circuit.add(CNOT, qubits[p], qubits[c])

    # fix signs: find a Pauli anticommuting with exactly the negative rows
    tab = Tableau(circuit.num_qubits)
    _run_on_tableau(circuit, tab)
    flips = []
    for x, z in generators:
        gx = _embed(x, qubits)
        gz = _embed(z, qubits)
        sign = tab.expectation_sign(gx, gz)
        if sign is None:
            raise AssertionError("synthesized state missed a generator")
        flips.append(0 if sign == 1 else 1)
    if any(flips):
        rows = [
            _embed(z, qubits) | (_embed(x, qubits) << circuit.num_qubits)
            for x, z in generators
        ]
        m = BitMatrix(rows, 2 * circuit.num_qubits)
        sol = solve_system(m, BitVector.from_ints(flips))
        if sol is None:
            raise AssertionError("no Pauli fixes the preparation signs")
        qx = sol.bits & ((1 << circuit.num_qubits) - 1)
        qz = sol.bits >> circuit.num_qubits
        _append_pauli(circuit, qx, qz)
    return circuit


def _embed(mask: int, qubits: list[int]) -> int:
    out = 0
    for local, q in enumerate(qubits):
        if (mask >> local) & 1:
            out |= 1 << q
    return out


def _append_cz(circuit: Circuit, a: int, b: int):
    circuit.add(HADAMARD, b)
    circuit.add(CNOT, a, b)
    circuit.add(HADAMARD, b)


def _append_pauli(circuit: Circuit, x_mask: int, z_mask: int):
    both = x_mask | z_mask
    while both:
        q = (both & -both).bit_length() - 1
        both &= both - 1
        x = (x_mask >> q) & 1
        z = (z_mask >> q) & 1
        kind = PAULI_Y if x and z else (PAULI_X if x else PAULI_Z)
        circuit.add(kind, q)


def _run_on_tableau(circuit: Circuit, tab: Tableau):
    analyze = analyze_circuit(circuit, initial=tab)
    return analyze


# ---------------------------------------------------------------------------
# encoders
# ---------------------------------------------------------------------------


def synth_encoder(code: StabilizerCode, logical: tuple[int, ...] | None = None
                  ) -> Circuit:
    """Prepare the logical computational-basis state |b_L> from |0...0>.

    The output is a +1 eigenstate of every stabilizer generator and of
    (-1)^(b_i) Z_L,i for each logical qubit.
    """
    if logical is None:
        logical = (0,) * code.k
    if len(logical) != code.k:
        raise ValueError("need one logical basis bit per logical qubit")
    gens = [
        (code.hx.row_bits(i), code.hz.row_bits(i)) for i in range(code.num_checks)
    ]
    # drop redundant rows so the generator count matches the qubit budget
    if code.num_checks != code.n - code.k:
        gens = _independent_rows(gens, code.n)
    pairs = logical_operators(code)
    for xl, zl in pairs:
        gens.append((zl.x_mask.bits, zl.z_mask.bits))
    circuit = Circuit(code.n, registers={"data": range(code.n)})
    synth_stabilizer_state(gens, code.n, circuit=circuit, prep=False)
    for bit, (xl, _) in zip(logical, pairs):
        if bit:
            _append_pauli(circuit, xl.x_mask.bits, xl.z_mask.bits)
    circuit.meta["logical_pairs"] = pairs
    return circuit


# ---------------------------------------------------------------------------
# recovery networks
# ---------------------------------------------------------------------------


@dataclass
class RecoveryNetwork:
    """A synthesized syndrome-extraction network plus its classical rules."""

    style: str
    circuit: Circuit
    data: range
    ancilla: range
    word_labels: list[str]
    check_masks: list[int]          # syndrome bit i = parity(mask_i & word)
    correction_basis: str           # 'pauli' | 'x' | 'z'
    prep_generators: list[tuple[int, int]] = field(default_factory=list)
    verification_checks: list[tuple[int, int]] = field(default_factory=list)

    def syndrome_bits(self, labels: dict[str, int]) -> int:
        word = 0
        for j, name in enumerate(self.word_labels):
            if labels[name]:
                word |= 1 << j
        out = 0
        for i, mask in enumerate(self.check_masks):
            if (mask & word).bit_count() & 1:
                out |= 1 << i
        return out


def synth_direct_network(code: StabilizerCode) -> RecoveryNetwork:
    """Fig.-1-style network: one ancilla qubit per generator, couplings
    placed where the 1s sit in the two halves of the stabilizer."""
    n, m = code.n, code.num_checks
    c = Circuit(n + m, registers={"data": range(n), "ancilla": range(n, n + m)})
    start = len(c.schedule)
    for i in range(m):
        c.add(PREP_ZERO, n + i)
        c.add(HADAMARD, n + i)
    c.mark_section("prep", start)
    start = len(c.schedule)
    for i in range(m):
        anc = n + i
        hx, hz = code.hx.row_bits(i), code.hz.row_bits(i)
        if hx & hz:
            raise ValueError("direct network needs Y-free generators")
        for j in range(n):
            if (hx >> j) & 1:  # X component: plain XOR, detects sigma_z
                c.add(CNOT, anc, j)
            if (hz >> j) & 1:  # Z component: H-conjugated XOR, detects sigma_x
                _append_cz(c, anc, j)
    c.mark_section("couple", start)
    start = len(c.schedule)
    labels = []
    for i in range(m):
        label = f"s{i}"
        c.add(HADAMARD, n + i)
        c.add(MEASURE_Z, n + i, label=label)
        labels.append(label)
    c.mark_section("measure", start)
    net = RecoveryNetwork(
        style="direct",
        circuit=c,
        data=range(n),
        ancilla=range(n, n + m),
        word_labels=labels,
        check_masks=[1 << i for i in range(m)],
        correction_basis="pauli",
    )
    _compile_fixups(net, code)
    return net


def ancilla_prep_generators(code: StabilizerCode) -> list[tuple[int, int]]:
    """Stabilizer group of the 2n-qubit prepared ancilla (local masks).

    Half 1 (bits [0, n)) is coupled ancilla-control and measured in X;
    half 2 (bits [n, 2n)) is coupled data-control and measured in Z.
    Row checks of (hx|hz) applied to the measured word then equal the
    data error's commutation syndrome, deterministically.
    """
    n = code.n
    gens: list[tuple[int, int]] = []
    for i in range(code.num_checks):
        hx, hz = code.hx.row_bits(i), code.hz.row_bits(i)
        gens.append((hx, hz | (hz << n)))
    # flip-type generators: Z^k1 on half 1, X^k2 on half 2, (k1|k2) in ker H
    kernel = nullspace_basis(code.stabilizer_matrix())
    for i in range(kernel.rows):
        kappa = kernel.row_bits(i)
        k1 = kappa & ((1 << n) - 1)
        k2 = kappa >> n
        gens.append((k2 << n, k1))
    if len(gens) != 2 * n:
        gens = _independent_rows(gens, 2 * n)
    assert len(gens) == 2 * n, "prepared-ancilla group must be maximal"
    return gens


def _independent_rows(gens: list[tuple[int, int]], width: int) -> list[tuple[int, int]]:
    from .gf2 import rank as _rank

    rows: list[int] = []
    keep: list[tuple[int, int]] = []
    for x, z in gens:
        trial = BitMatrix(rows + [x | (z << width)], 2 * width)
        if _rank(trial) > len(rows):
            rows.append(x | (z << width))
            keep.append((x, z))
    return keep


def synth_ancilla_network(code: StabilizerCode) -> RecoveryNetwork:
    """Fig.-2-style network: 2n-qubit prepared ancilla, one XOR per
    ancilla qubit, syndrome stored in the parity checks of the word."""
    n = code.n
    total = 3 * n
    c = Circuit(
        total,
        registers={
            "data": range(n),
            "ancilla": range(n, 3 * n),
            "half1": range(n, 2 * n),
            "half2": range(2 * n, 3 * n),
        },
    )
    gens = ancilla_prep_generators(code)
    start = len(c.schedule)
    synth_stabilizer_state(
        gens, 2 * n, circuit=c, qubits=list(range(n, 3 * n)), prep=True
    )
    c.mark_section("prep", start)
    start = len(c.schedule)
    for j in range(n):
        c.add(CNOT, n + j, j)          # half 1 control, data target
    for j in range(n):
        c.add(CNOT, j, 2 * n + j)      # data control, half 2 target
    c.mark_section("couple", start)
    start = len(c.schedule)
    labels = []
    for j in range(n):
        label = f"w{j}"
        c.add(MEASURE_X, n + j, label=label)
        labels.append(label)
    for j in range(n):
        label = f"w{n + j}"
        c.add(MEASURE_Z, 2 * n + j, label=label)
        labels.append(label)
    c.mark_section("measure", start)
    check_masks = [
        code.hx.row_bits(i) | (code.hz.row_bits(i) << n)
        for i in range(code.num_checks)
    ]
    net = RecoveryNetwork(
        style="ancilla",
        circuit=c,
        data=range(n),
        ancilla=range(n, 3 * n),
        word_labels=labels,
        check_masks=check_masks,
        correction_basis="pauli",
        prep_generators=gens,
    )
    _compile_fixups(net, code)
    return net


def synth_css_networks(code: StabilizerCode) -> tuple[RecoveryNetwork, RecoveryNetwork]:
    """Fig.-3-style CSS rounds: an n-qubit ancilla used once per error type.

    X round: ancilla prepared as encoded zero followed by a transversal
    Hadamard, XORs data -> ancilla, Z-basis readout.  Z round: ancilla
    prepared as encoded zero, XORs ancilla -> data (so only stabilizer
    masks are ever XORed into the data), with the Hadamard carried out
    by the X-basis readout after the coupling.  Both words are checked
    by the classical parity-check matrix.
    """
    if not code.is_css or code.classical is None:
        raise ValueError("css networks require a code built from a classical code")
    n = code.n
    hc = code.classical.parity_check
    encoder = synth_encoder(code)

    def build(round_kind: str) -> RecoveryNetwork:
        c = Circuit(
            2 * n,
            registers={"data": range(n), "ancilla": range(n, 2 * n)},
        )
        start = len(c.schedule)
        for q in range(n, 2 * n):
            c.add(PREP_ZERO, q)
        for g in encoder.schedule:
            c.append(Gate(g.kind, tuple(q + n for q in g.qubits), label=g.label,
                          condition=g.condition, x_mask=g.x_mask, z_mask=g.z_mask))
        if round_kind == "x":
            for q in range(n, 2 * n):
                c.add(HADAMARD, q)
        c.mark_section("prep", start)
        start = len(c.schedule)
        for j in range(n):
            if round_kind == "x":
                c.add(CNOT, j, n + j)   # data control: copies X errors out
            else:
                c.add(CNOT, n + j, j)   # ancilla control: exposes Z errors
        c.mark_section("couple", start)
        start = len(c.schedule)
        labels = []
        for j in range(n):
            label = f"w{j}"
            kind = MEASURE_Z if round_kind == "x" else MEASURE_X
            c.add(kind, n + j, label=label)
            labels.append(label)
        c.mark_section("measure", start)
        net = RecoveryNetwork(
            style=f"css_{round_kind}",
            circuit=c,
            data=range(n),
            ancilla=range(n, 2 * n),
            word_labels=labels,
            check_masks=[hc.row_bits(i) for i in range(hc.rows)],
            correction_basis=round_kind,
            verification_checks=[(0, hc.row_bits(i)) for i in range(hc.rows)],
        )
        _compile_fixups(net, code)
        return net

    return build("x"), build("z")


def transversal_cnot(num_qubits_per_block: int, control_block: range,
                     target_block: range, circuit: Circuit | None = None) -> Circuit:
    """Pairwise physical CNOTs: the logical CNOT for CSS codes."""
    if len(control_block) != len(target_block):
        raise ValueError("blocks must have equal size")
    if len(control_block) != num_qubits_per_block:
        raise ValueError("block size mismatch")
    if circuit is None:
        width = max(control_block.stop, target_block.stop)
        circuit = Circuit(width)
    for a, b in zip(control_block, target_block):
        circuit.add(CNOT, a, b)
    return circuit


# ---------------------------------------------------------------------------
# ancilla verification
# ---------------------------------------------------------------------------


def verification_checks_for(net: RecoveryNetwork, code: StabilizerCode
                            ) -> list[tuple[int, int]]:
    """Parity checks the prepared ancilla must satisfy, as (x, z) masks
    local to the ancilla register."""
    if net.style.startswith("css"):
        return list(net.verification_checks)
    if net.style == "ancilla":
        return list(net.prep_generators[: code.num_checks])
    return []


def synth_verification(net: RecoveryNetwork, code: StabilizerCode,
                       verify_offset: int | None = None) -> Circuit:
    """One extra qubit per parity check, XOR-coupled and measured.

    The accept condition is that every check label reads 0.  Z-type
    components couple through CZ (an H-conjugated XOR on the checked
    qubit), X-type components couple through a plain XOR from the
    verification qubit prepared in |+>.
    """
    checks = verification_checks_for(net, code)
    anc0 = net.ancilla.start
    n_anc = len(net.ancilla)
    if verify_offset is None:
        verify_offset = net.circuit.num_qubits
    width = verify_offset + len(checks)
    c = Circuit(
        width,
        registers={
            "ancilla": net.ancilla,
            "verify": range(verify_offset, width),
        },
    )
    labels = []
    for idx, (x_mask, z_mask) in enumerate(checks):
        if x_mask & z_mask:
            raise ValueError("verification needs Y-free checks")
        v = verify_offset + idx
        label = f"v{idx}"
        c.add(PREP_ZERO, v)
        if x_mask == 0:
            # computational parity: accumulate XORs onto the fresh qubit
            z_bits = z_mask
            while z_bits:
                m = (z_bits & -z_bits).bit_length() - 1
                z_bits &= z_bits - 1
                c.add(CNOT, anc0 + m, v)
            c.add(MEASURE_Z, v, label=label)
        else:
            # mixed check: phase kickback of the controlled operator onto
            # a |+> probe.  CZ couplings first: a fresh probe then risks
            # spreading at most one Pauli into the ancilla per fault window
            c.add(HADAMARD, v)
            z_bits = z_mask
            while z_bits:
                m = (z_bits & -z_bits).bit_length() - 1
                z_bits &= z_bits - 1
                _append_cz(c, v, anc0 + m)
            x_bits = x_mask
            while x_bits:
                m = (x_bits & -x_bits).bit_length() - 1
                x_bits &= x_bits - 1
                c.add(CNOT, v, anc0 + m)
            c.add(MEASURE_X, v, label=label)
        labels.append(label)
    c.meta["accept_labels"] = labels
    return c


# ---------------------------------------------------------------------------
# branch cleaning
# ---------------------------------------------------------------------------


def branch_cleaner_for(code: StabilizerCode, data: range, num_qubits: int):
    """Cleaner choosing branch operators whose data restriction lies in
    the code's stabilizer group.

    A branch operator is defined up to multiplication by any current
    joint-state stabilizer that commutes with the measured observable.
    Restricting further to representatives that commute with the
    conjugated logical X operators (the `watches`) keeps the choice valid
    for every codespace input, not just the reference encoding.  The
    resulting byproducts act as the identity on every codeword: no
    fix-up gates, and the Pauli frame never acquires spurious logical
    components.
    """
    data_qubits = list(data)
    m = code.num_checks

    def cleaner(snapshot, qubit, branch, watches):
        rows = len(snapshot)
        cols = rows + m
        equations = []
        rhs_bits = []
        # anticommute with Z_qubit: X component at the measured qubit
        equations.append(
            sum(((x >> qubit) & 1) << i for i, (x, z) in enumerate(snapshot))
        )
        rhs_bits.append(1)
        # commute with every watched (conjugated logical) operator
        for wx, wz in watches:
            row = 0
            for i, (x, z) in enumerate(snapshot):
                if ((x & wz).bit_count() + (z & wx).bit_count()) & 1:
                    row |= 1 << i
            for j in range(m):
                sx = code.hx.row_bits(j) << data_qubits[0]
                sz = code.hz.row_bits(j) << data_qubits[0]
                if ((sx & wz).bit_count() + (sz & wx).bit_count()) & 1:
                    row |= 1 << (rows + j)
            equations.append(row)
            rhs_bits.append(0)
        # data restriction cancelled by some code-stabilizer combination
        for d_local, d in enumerate(data_qubits):
            row_x = sum(((x >> d) & 1) << i for i, (x, z) in enumerate(snapshot))
            row_z = sum(((z >> d) & 1) << i for i, (x, z) in enumerate(snapshot))
            for j in range(m):
                if (code.hx.row_bits(j) >> d_local) & 1:
                    row_x |= 1 << (rows + j)
                if (code.hz.row_bits(j) >> d_local) & 1:
                    row_z |= 1 << (rows + j)
            equations.append(row_x)
            rhs_bits.append(0)
            equations.append(row_z)
            rhs_bits.append(0)
        sol = solve_system(
            BitMatrix(equations, cols), BitVector.from_ints(rhs_bits)
        )
        if sol is None:
            raise AssertionError(
                "network leaks: no data-trivial branch representative"
            )
        bx = bz = 0
        for i in range(rows):
            if sol[i]:
                bx ^= snapshot[i][0]
                bz ^= snapshot[i][1]
        return bx, bz

    return cleaner


def logical_watches(code: StabilizerCode, data: range, start: int = 0
                    ) -> list[tuple[int, int, int]]:
    """watch_from entries for the code's logical X operators on `data`."""
    out = []
    for xl, _ in logical_operators(code):
        out.append(
            (start, xl.x_mask.bits << data.start, xl.z_mask.bits << data.start)
        )
    return out


def network_reference(net: RecoveryNetwork, code: StabilizerCode,
                      circuit: Circuit | None = None,
                      initial: Tableau | None = None,
                      watch_start: int = 0):
    """Reference analysis of a network-derived circuit with cleaned branches."""
    target = circuit if circuit is not None else net.circuit
    cleaner = branch_cleaner_for(code, net.data, target.num_qubits)
    return analyze_circuit(
        target,
        initial=initial,
        branch_cleaner=cleaner,
        watch_from=logical_watches(code, net.data, start=watch_start),
    )


def _run_forced(circuit: Circuit, tab: Tableau, rng) -> dict[str, int]:
    """Ideal tableau run with random measurement outcomes where the state
    allows them; returns the measured record."""
    record: dict[str, int] = {}
    for g in circuit.schedule:
        if g.kind == HADAMARD:
            tab.h(g.qubits[0])
        elif g.kind == CNOT:
            tab.cnot(*g.qubits)
        elif g.kind == PAULI_X:
            tab.pauli(1 << g.qubits[0], 0)
        elif g.kind == PAULI_Z:
            tab.pauli(0, 1 << g.qubits[0])
        elif g.kind == PAULI_Y:
            b = 1 << g.qubits[0]
            tab.pauli(b, b)
        elif g.kind == CC_PAULI:
            if g.condition is None or g.condition.evaluate(record):
                x = sum(1 << q for i, q in enumerate(g.qubits) if (g.x_mask >> i) & 1)
                z = sum(1 << q for i, q in enumerate(g.qubits) if (g.z_mask >> i) & 1)
                tab.pauli(x, z)
        elif g.kind in (MEASURE_Z, MEASURE_X, PREP_ZERO):
            q = g.qubits[0]
            if g.kind == MEASURE_X:
                tab.h(q)
            outcome, det, _ = tab.measure_z(q, forced_outcome=int(rng.integers(0, 2)))
            if g.kind == MEASURE_X:
                tab.h(q)
            if g.kind == PREP_ZERO and outcome:
                tab.pauli(1 << q, 0)
            if g.label is not None:
                record[g.label] = outcome
        else:
            raise ValueError(f"unhandled gate kind {g.kind}")
    return record


def _fit_word_fixups(net: RecoveryNetwork, code: StabilizerCode):
    """Fit the logical byproduct of the measured word and bake it into
    classically controlled fix-up gates.

    A measurement branch can differ from its reference by a *signed*
    stabilizer; on superposed logical inputs that sign acts as a logical
    Pauli.  Its dependence on the measured word is affine-linear over
    GF(2); it is identified by sign-tracked tableau runs with forced
    outcomes (injecting weight-1 errors to reach the other word cosets)
    and cancelled exactly by conditioned logical Paulis.
    """
    import numpy as np

    pairs = logical_operators(code)
    word_bits = len(net.word_labels)
    rng = np.random.default_rng(20240901)
    emitted = []
    errors = [PauliOperator.identity(code.n)] + [
        PauliOperator.single(code.n, q, p) for q in range(code.n) for p in "XZY"
    ]
    base_gens = [
        (code.hx.row_bits(i), code.hz.row_bits(i)) for i in range(code.num_checks)
    ]
    if code.num_checks != code.n - code.k:
        base_gens = _independent_rows(base_gens, code.n)
    for pair_idx, (xl, zl) in enumerate(pairs):
        # a Z_L-type byproduct flips <X_L> on an X_L-stabilized encoding;
        # an X_L-type byproduct flips <Z_L> on the usual |0_L> encoding
        for probe, fix_logical in ((xl, zl), (zl, xl)):
            gens = list(base_gens)
            for j, (_, other_zl) in enumerate(pairs):
                chosen = probe if j == pair_idx else other_zl
                gens.append((chosen.x_mask.bits, chosen.z_mask.bits))
            prep = Circuit(net.circuit.num_qubits)
            synth_stabilizer_state(
                gens, code.n, circuit=prep, qubits=list(net.data), prep=False
            )
            probe_x = probe.x_mask.bits << net.data.start
            probe_z = probe.z_mask.bits << net.data.start
            samples: list[tuple[int, int]] = []
            for e in errors:
                expected = 0 if e.commutes_with(probe) else 1
                for _ in range(3):
                    tab = Tableau(net.circuit.num_qubits)
                    analyze_circuit(prep, initial=tab)
                    tab.pauli(
                        e.x_mask.bits << net.data.start,
                        e.z_mask.bits << net.data.start,
                    )
                    record = _run_forced(net.circuit, tab, rng)
                    sign = tab.expectation_sign(probe_x, probe_z)
                    if sign is None:
                        raise AssertionError("probe logical left the stabilizer group")
                    word = 0
                    for j, name in enumerate(net.word_labels):
                        if record[name]:
                            word |= 1 << j
                    samples.append((word, (0 if sign == 1 else 1) ^ expected))
            coeffs = _affine_fit(samples, word_bits)
            if coeffs is None:
                raise AssertionError("logical byproduct is not affine in the word")
            mask, const = coeffs
            if mask == 0 and const == 0:
                continue
            labels = tuple(
                net.word_labels[j] for j in range(word_bits) if (mask >> j) & 1
            )
            support = fix_logical.x_mask.bits | fix_logical.z_mask.bits
            qubits = tuple(
                q for q in net.data if (support >> (q - net.data.start)) & 1
            )
            local_x = sum(
                1 << i for i, q in enumerate(qubits)
                if (fix_logical.x_mask.bits >> (q - net.data.start)) & 1
            )
            local_z = sum(
                1 << i for i, q in enumerate(qubits)
                if (fix_logical.z_mask.bits >> (q - net.data.start)) & 1
            )
            net.circuit.add(
                CC_PAULI,
                *qubits,
                condition=Condition(labels, constant=const),
                x_mask=local_x,
                z_mask=local_z,
            )
            emitted.append((fix_logical, mask, const))
    return emitted


def _affine_fit(samples: list[tuple[int, int]], width: int):
    """Solve b = w . mask ^ const over GF(2); None if inconsistent."""
    rows = [w | (1 << width) for w, _ in samples]
    rhs = [b for _, b in samples]
    m = BitMatrix(rows, width + 1)
    sol = solve_system(m, BitVector.from_ints(rhs))
    if sol is None:
        return None
    mask = sol.bits & ((1 << width) - 1)
    const = (sol.bits >> width) & 1
    for w, b in samples:
        if ((mask & w).bit_count() + const) & 1 != b:
            return None
    return mask, const


def _compile_fixups(net: RecoveryNetwork, code: StabilizerCode):
    """Identify and cancel measurement byproducts, then validate.

    Step 1 bakes word-conditioned logical fix-ups into the circuit.
    Step 2 checks, with cleaned branch operators, that every remaining
    byproduct is data-trivial (a code stabilizer element).
    """
    start = len(net.circuit.schedule)
    _fit_word_fixups(net, code)
    net.circuit.mark_section("fixup", start)

    encoder = synth_encoder(code)
    probe = Circuit(net.circuit.num_qubits, registers=dict(net.circuit.registers))
    for g in encoder.schedule:
        probe.append(g)
    base = len(probe.schedule)
    for g in net.circuit.schedule:
        probe.append(g)
    reference = network_reference(net, code, circuit=probe, watch_start=base)
    data_mask = 0
    for q in net.data:
        data_mask |= 1 << q
    for ev in reference.events:
        if ev.gate_index < base or ev.deterministic:
            continue
        rest = PauliOperator.from_masks(
            code.n,
            (ev.branch_x & data_mask) >> net.data.start,
            (ev.branch_z & data_mask) >> net.data.start,
        )
        if int(commutation_syndrome(code, rest)) != 0 or not code.contains_stabilizer(rest):
            raise AssertionError("branch byproduct leaks outside the stabilizer group")
