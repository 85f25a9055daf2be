import math
from collections import Counter

import numpy as np
import pytest

from qstab.circuit import (
    CNOT,
    HADAMARD,
    MEASURE_X,
    MEASURE_Z,
    PAULI_X,
    PREP_ZERO,
    Circuit,
    Condition,
)
from qstab.codes import PauliOperator
from qstab.sim import (
    FrameState,
    NoiseParams,
    RngStream,
    StateVector,
    pauli_expectation,
    random_clifford_circuit,
    run_pauli_frame,
    run_statevector,
    sample_noise_plan,
)
from qstab.tableau import analyze_circuit


def bell_circuit():
    c = Circuit(2)
    c.add(HADAMARD, 0)
    c.add(CNOT, 0, 1)
    c.add(MEASURE_Z, 0, label="m0")
    c.add(MEASURE_Z, 1, label="m1")
    return c


def test_hadamard_amplitudes():
    c = Circuit(1)
    c.add(HADAMARD, 0)
    state, _ = run_statevector(c)
    np.testing.assert_allclose(state.amplitudes, [1 / math.sqrt(2)] * 2, atol=1e-12)


def test_statevector_norm_preserved():
    rng = RngStream(3).generator()
    c = random_clifford_circuit(5, 40, rng)
    state, _ = run_statevector(c, rng=RngStream(4))
    assert abs(state.norm() - 1.0) < 1e-10


def test_statevector_bell_correlation():
    counts = Counter()
    for shot in range(200):
        _, rec = run_statevector(bell_circuit(), rng=RngStream(10, shot))
        counts[(rec["m0"], rec["m1"])] += 1
    assert set(counts) <= {(0, 0), (1, 1)}
    assert counts[(0, 0)] > 50 and counts[(1, 1)] > 50


def test_frame_bell_correlation():
    c = bell_circuit()
    ref = analyze_circuit(c)
    counts = Counter()
    for shot in range(400):
        _, rec = run_pauli_frame(c, rng=RngStream(11, shot), reference=ref)
        counts[(rec["m0"], rec["m1"])] += 1
    assert set(counts) <= {(0, 0), (1, 1)}
    assert counts[(0, 0)] > 120 and counts[(1, 1)] > 120


def test_frame_cnot_conjugation():
    c = Circuit(2)
    c.add(CNOT, 0, 1)
    state, _ = run_pauli_frame(
        c, injected=PauliOperator.from_label("XI"), rng=RngStream(0)
    )
    assert (state.x, state.z) == (0b11, 0)


def test_frame_hadamard_swaps_xz():
    c = Circuit(1)
    c.add(HADAMARD, 0)
    state, _ = run_pauli_frame(c, injected=PauliOperator.from_label("X"), rng=0)
    assert (state.x, state.z) == (0, 1)


def test_frame_prep_zero_resets():
    c = Circuit(1)
    c.add(PREP_ZERO, 0)
    state, _ = run_pauli_frame(c, injected=PauliOperator.from_label("Y"), rng=0)
    assert (state.x, state.z) == (0, 0)


def test_gamma_one_depolarizes_three_quarters():
    c = Circuit(1)
    c.add(PAULI_X, 0)
    noise = NoiseParams(gamma=1.0)
    hit = 0
    shots = 4000
    for shot in range(shots):
        state, _ = run_pauli_frame(c, noise=noise, rng=RngStream(21, shot))
        if state.x or state.z:
            hit += 1
    assert abs(hit / shots - 0.75) < 0.03


def test_measurement_gamma_replaces_report():
    c = Circuit(1)
    c.add(MEASURE_Z, 0, label="m")
    noise = NoiseParams(gamma=1.0)
    seen = Counter()
    for shot in range(2000):
        _, rec = run_pauli_frame(c, noise=noise, rng=RngStream(22, shot))
        seen[rec["m"]] += 1
    # |0> measured, but reports are uniform random under certain failure
    assert abs(seen[1] / 2000 - 0.5) < 0.05


def test_engines_deterministic_given_seed():
    c = random_clifford_circuit(4, 25, RngStream(5).generator())
    noise = NoiseParams(gamma=0.05, epsilon=0.01)
    runs = []
    for _ in range(2):
        state, rec = run_pauli_frame(c, noise=noise, rng=RngStream(33, 7))
        runs.append((state.x, state.z, tuple(sorted(rec.items()))))
    assert runs[0] == runs[1]
    svs = []
    for _ in range(2):
        state, rec = run_statevector(c, noise=noise, rng=RngStream(34, 7))
        svs.append((tuple(np.round(state.amplitudes, 12)), tuple(sorted(rec.items()))))
    assert svs[0] == svs[1]


def test_injected_error_flips_deterministic_measurement():
    c = Circuit(1)
    c.add(MEASURE_Z, 0, label="m")
    _, rec = run_pauli_frame(c, injected=PauliOperator.from_label("X"), rng=0)
    assert rec["m"] == 1
    _, rec = run_statevector(c, injected=PauliOperator.from_label("X"), rng=0)
    assert rec["m"] == 1


def test_measure_x_sees_z_errors():
    # X before H becomes Z after it, which flips an X-basis measurement
    c = Circuit(1)
    c.add(HADAMARD, 0)
    c.add(MEASURE_X, 0, label="m")
    _, rec = run_pauli_frame(c, injected=PauliOperator.from_label("X"), rng=0)
    assert rec["m"] == 1
    _, rec = run_statevector(c, injected=PauliOperator.from_label("X"), rng=0)
    assert rec["m"] == 1


def test_classically_controlled_pauli_tracks_condition():
    # measure |+> (random), then flip qubit 1 iff outcome is 1: qubit 1
    # always ends in the measured state's value
    c = Circuit(2)
    c.add(HADAMARD, 0)
    c.add(MEASURE_Z, 0, label="m")
    c.add(
        "classically_controlled_pauli",
        1,
        condition=Condition(("m",)),
        x_mask=1,
    )
    c.add(MEASURE_Z, 1, label="check")
    ref = analyze_circuit(c)
    for shot in range(50):
        _, rec = run_pauli_frame(c, rng=RngStream(44, shot), reference=ref)
        assert rec["check"] == rec["m"]
    for shot in range(20):
        _, rec = run_statevector(c, rng=RngStream(45, shot))
        assert rec["check"] == rec["m"]


def test_frame_statevector_distributions_match_small():
    """Raw outcome histograms agree on a random 4-qubit circuit."""
    from qstab.stats import two_sample_chisquare

    c = random_clifford_circuit(4, 20, RngStream(6).generator())
    noise = NoiseParams(gamma=0.05, epsilon=0.02)
    shots = 3000
    ref = analyze_circuit(c)
    fr = Counter()
    sv = Counter()
    for shot in range(shots):
        _, rec = run_pauli_frame(
            c, noise=noise, rng=RngStream(50, shot), reference=ref
        )
        fr[tuple(sorted(rec.items()))] += 1
        _, rec = run_statevector(c, noise=noise, rng=RngStream(51, shot))
        sv[tuple(sorted(rec.items()))] += 1
    _, _, p_value = two_sample_chisquare(fr, sv)
    assert p_value > 0.001, f"distributions differ, p={p_value}"


def test_pauli_expectation_plus_state():
    c = Circuit(1)
    c.add(HADAMARD, 0)
    state, _ = run_statevector(c)
    assert abs(pauli_expectation(state, 1, 0) - 1.0) < 1e-12  # <+|X|+> = 1
    assert abs(pauli_expectation(state, 0, 1)) < 1e-12  # <+|Z|+> = 0
