"""Fault-tolerant recovery protocol and Monte Carlo failure estimation.

A trial prepares encoded blocks (noiselessly: the step under test is the
logical gate plus its stabilization), applies the transversal logical
gate under noise, then recovers each block: r rounds of verified ancilla
preparation, coupling, measurement; bitwise-majority syndrome; table
decode.  Corrections are tracked in a classical Pauli frame rather than
applied as gates.  Failure is judged by an ideal final decode of the
residual deviation.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

from .circuit import Circuit, remap_circuit
from .codes import (
    PauliOperator,
    StabilizerCode,
    build_decoder_table,
    commutation_syndrome,
)
from .gf2 import BitVector, mat_vec_bits
from .sim import FrameState, NoiseLayout, NoiseParams, RngStream, run_pauli_frame
from .stats import wilson_interval
from .synth import (
    RecoveryNetwork,
    branch_cleaner_for,
    logical_watches,
    synth_ancilla_network,
    synth_css_networks,
    synth_direct_network,
    synth_encoder,
    synth_verification,
)
from .tableau import Tableau, analyze_circuit

STYLES = ("direct", "ancilla", "css")


@dataclass(frozen=True)
class RecoveryConfig:
    r: int = 3
    max_prep_retries: int = 25
    network_style: str = "ancilla"

    def __post_init__(self):
        if self.r < 1 or self.r % 2 == 0:
            raise ValueError("r must be odd and positive")
        if self.max_prep_retries < 1:
            raise ValueError("max_prep_retries must be at least 1")
        if self.network_style not in STYLES:
            raise ValueError(f"style must be one of {STYLES}")


@dataclass
class SyndromeRecord:
    round_index: int
    syndrome: int
    prep_retries_used: int
    accepted: bool = True


@dataclass
class TrialOutcome:
    logical_failure: bool
    residual_x: int
    residual_z: int
    records: list[SyndromeRecord] = field(default_factory=list)


class _Segment:
    """A schedule slice with its cached ideal-run reference and fault map."""

    def __init__(self, circuit: Circuit, reference, live_init: int = None):
        self.circuit = circuit
        self.reference = reference
        self.layout = NoiseLayout(circuit, live_init)


class ProtocolContext:
    """Synthesized circuits, references, and decoders for one (code, style).

    Register layout: one or two data blocks, then the ancilla register,
    then the verification qubits; the ancilla is reused serially.
    """

    def __init__(self, code: StabilizerCode, config: RecoveryConfig,
                 two_blocks: bool | None = None):
        self.code = code
        self.config = config
        style = config.network_style
        if style == "css" and not code.is_css:
            raise ValueError("css style requires a CSS code")
        if two_blocks is None:
            two_blocks = style == "css"
        self.two_blocks = two_blocks
        n = code.n

        if style == "direct":
            nets = [synth_direct_network(code)]
        elif style == "ancilla":
            nets = [synth_ancilla_network(code)]
        else:
            nets = list(synth_css_networks(code))
        n_anc = len(nets[0].ancilla)
        checks = [synth_verification(net, code) for net in nets]
        n_ver = max(len(v.registers["verify"]) for v in checks)

        blocks = 2 if two_blocks else 1
        self.blocks = [range(b * n, (b + 1) * n) for b in range(blocks)]
        anc0 = blocks * n
        self.ancilla = range(anc0, anc0 + n_anc)
        self.verify = range(anc0 + n_anc, anc0 + n_anc + n_ver)
        self.num_qubits = self.verify.stop
        self.data_masks = [
            ((1 << n) - 1) << blk.start for blk in self.blocks
        ]
        data_live = 0
        for m in self.data_masks:
            data_live |= m
        anc_mask = ((1 << n_anc) - 1) << anc0
        self._data_live = data_live
        self._couple_live = data_live | anc_mask

        # encoded-zero reference tableau builders per block
        self._encoder = synth_encoder(code)
        self.logical_pairs = self._encoder.meta["logical_pairs"]

        # prep+verify segment per network (block independent)
        self.nets = nets
        self.prep_segments = []
        self.couple_segments = []  # [net_index][block_index]
        for net, ver in zip(nets, checks):
            prep = Circuit(self.num_qubits)
            amap = {q: (q - net.ancilla.start) + anc0 for q in net.ancilla}
            for g in net.circuit.section("prep"):
                prep.append(
                    type(g)(g.kind, tuple(amap[q] for q in g.qubits),
                            label=g.label, condition=g.condition,
                            x_mask=g.x_mask, z_mask=g.z_mask)
                )
            vmap = dict(amap)
            for i, q in enumerate(ver.registers["verify"]):
                vmap[q] = self.verify.start + i
            for g in ver.schedule:
                prep.append(
                    type(g)(g.kind, tuple(vmap[q] for q in g.qubits),
                            label=g.label, condition=g.condition,
                            x_mask=g.x_mask, z_mask=g.z_mask)
                )
            prep.meta["accept_labels"] = ver.meta["accept_labels"]
            self.prep_segments.append(
                _Segment(prep, analyze_circuit(prep), live_init=data_live)
            )

            per_block = []
            for blk in self.blocks:
                qmap = {q: q - net.data.start + blk.start for q in net.data}
                qmap.update(amap)
                rest = Circuit(self.num_qubits)
                a, _ = net.circuit.sections["couple"]
                for g in net.circuit.schedule[a:]:
                    rest.append(
                        type(g)(g.kind, tuple(qmap[q] for q in g.qubits),
                                label=g.label, condition=g.condition,
                                x_mask=g.x_mask, z_mask=g.z_mask)
                    )
                # reference starts from encoded block + prepared ancilla
                tab = Tableau(self.num_qubits)
                init = Circuit(self.num_qubits)
                for g in self._encoder.schedule:
                    init.append(
                        type(g)(g.kind,
                                tuple(q + blk.start for q in g.qubits),
                                label=g.label, condition=g.condition,
                                x_mask=g.x_mask, z_mask=g.z_mask)
                    )
                for g in net.circuit.section("prep"):
                    init.append(
                        type(g)(g.kind, tuple(amap[q] for q in g.qubits),
                                label=g.label, condition=g.condition,
                                x_mask=g.x_mask, z_mask=g.z_mask)
                    )
                analyze_circuit(init, initial=tab)
                cleaner = branch_cleaner_for(code, blk, self.num_qubits)
                reference = analyze_circuit(
                    rest, initial=tab, branch_cleaner=cleaner,
                    watch_from=logical_watches(code, blk),
                )
                per_block.append(
                    _Segment(rest, reference, live_init=self._couple_live)
                )
            self.couple_segments.append(per_block)

        # decoders
        if style == "css":
            hc = code.classical.parity_check
            self.classical_rows = hc.row_list()
            self.classical_table = _classical_coset_table(hc, code.t)
            self.decoder_table = None
        else:
            self.decoder_table = {
                s: (e.x_mask.bits, e.z_mask.bits)
                for s, e in build_decoder_table(code).items()
            }
            self.classical_rows = None
            self.classical_table = None

        # transversal logical gate between the two blocks
        if two_blocks:
            gate = Circuit(self.num_qubits)
            for a, b in zip(self.blocks[0], self.blocks[1]):
                gate.add("cnot", a, b)
            self.logical_gate = _Segment(
                gate, analyze_circuit(gate), live_init=data_live
            )
        else:
            self.logical_gate = None

    def fresh_frame(self) -> FrameState:
        live = 0
        for blk in self.blocks:
            for q in blk:
                live |= 1 << q
        return FrameState(self.num_qubits, live=live)


def _classical_coset_table(hc, t: int) -> dict[int, int]:
    """syndrome -> minimum-weight error mask for the classical code."""
    from itertools import combinations

    rows = hc.row_list()
    n = hc.cols
    table = {0: 0}
    for w in range(1, t + 1):
        for support in combinations(range(n), w):
            e = 0
            for q in support:
                e |= 1 << q
            s = mat_vec_bits(rows, e)
            table.setdefault(s, e)
    return table


# ---------------------------------------------------------------------------
# protocol operations
# ---------------------------------------------------------------------------


def prepare_verified_ancilla(ctx: ProtocolContext, net_index: int,
                             frame: FrameState, noise: NoiseParams, rng
                             ) -> tuple[bool, int]:
    """Repeat-until-accept ancilla preparation; returns (accepted, tries)."""
    seg = ctx.prep_segments[net_index]
    accept_labels = seg.circuit.meta["accept_labels"]
    for attempt in range(1, ctx.config.max_prep_retries + 1):
        _, labels = run_pauli_frame(
            seg.circuit, noise=noise, rng=rng, reference=seg.reference,
            state=frame, layout=seg.layout,
        )
        if all(labels[name] == 0 for name in accept_labels):
            return True, attempt
    return False, ctx.config.max_prep_retries


def generate_syndrome_once(ctx: ProtocolContext, frame: FrameState,
                           noise: NoiseParams, rng, net_index: int = 0,
                           block: int = 0, round_index: int = 0
                           ) -> SyndromeRecord:
    """One full cycle: verified preparation, coupling, measurement,
    classical parity evaluation."""
    accepted, tries = prepare_verified_ancilla(ctx, net_index, frame, noise, rng)
    if not accepted:
        return SyndromeRecord(round_index, 0, tries, accepted=False)
    seg = ctx.couple_segments[net_index][block]
    _, labels = run_pauli_frame(
        seg.circuit, noise=noise, rng=rng, reference=seg.reference, state=frame,
        layout=seg.layout,
    )
    net = ctx.nets[net_index]
    syndrome = net.syndrome_bits(labels)
    return SyndromeRecord(round_index, syndrome, tries)


def _majority(values: list[int], bits: int) -> int:
    out = 0
    half = len(values) / 2
    for b in range(bits):
        if sum((v >> b) & 1 for v in values) > half:
            out |= 1 << b
    return out


def recover(ctx: ProtocolContext, frame: FrameState, noise: NoiseParams, rng,
            block: int = 0, cframe: list[int] | None = None
            ) -> tuple[list[SyndromeRecord], bool]:
    """r syndrome cycles, majority decode, classical correction update.

    cframe is the running classical correction [x_mask, z_mask] on the
    block (local indices); returns (records, prep_failed).
    """
    code = ctx.code
    records: list[SyndromeRecord] = []
    if cframe is None:
        cframe = [0, 0]
    r = ctx.config.r
    for net_index, net in enumerate(ctx.nets):
        per_round: list[int] = []
        for rnd in range(r):
            rec = generate_syndrome_once(
                ctx, frame, noise, rng, net_index=net_index, block=block,
                round_index=rnd,
            )
            records.append(rec)
            if not rec.accepted:
                return records, True
            syndrome = rec.syndrome ^ _cframe_syndrome(ctx, net, cframe)
            per_round.append(syndrome)
        s_maj = _majority(per_round, len(net.check_masks))
        corr_x, corr_z = _decode(ctx, net, s_maj)
        cframe[0] ^= corr_x
        cframe[1] ^= corr_z
    return records, False


def _cframe_syndrome(ctx: ProtocolContext, net: RecoveryNetwork,
                     cframe: list[int]) -> int:
    """Syndrome the network would report for the tracked classical frame."""
    if net.correction_basis == "pauli":
        return int(
            commutation_syndrome(
                ctx.code, PauliOperator.from_masks(ctx.code.n, cframe[0], cframe[1])
            )
        )
    if net.correction_basis == "x":
        return mat_vec_bits(ctx.classical_rows, cframe[0])
    return mat_vec_bits(ctx.classical_rows, cframe[1])


def _decode(ctx: ProtocolContext, net: RecoveryNetwork, syndrome: int
            ) -> tuple[int, int]:
    if net.correction_basis == "pauli":
        entry = ctx.decoder_table.get(syndrome)
        if entry is None:
            return 0, 0  # beyond the table; judged at the end of the trial
        return entry
    mask = ctx.classical_table.get(syndrome)
    if mask is None:
        return 0, 0
    return (mask, 0) if net.correction_basis == "x" else (0, mask)


def judge_block(ctx: ProtocolContext, frame: FrameState, block: int,
                cframe: list[int]) -> tuple[bool, int, int]:
    """Ideal final decode: does the residual act as a nontrivial logical?"""
    code = ctx.code
    blk = ctx.blocks[block]
    phys = frame.restricted(blk)
    rx = phys.x_mask.bits ^ cframe[0]
    rz = phys.z_mask.bits ^ cframe[1]
    residual = PauliOperator.from_masks(code.n, rx, rz)
    if ctx.decoder_table is not None:
        s = int(commutation_syndrome(code, residual))
        entry = ctx.decoder_table.get(s)
        if entry is None:
            return True, rx, rz
        residual = residual.compose(
            PauliOperator.from_masks(code.n, entry[0], entry[1])
        )
    else:
        sx = mat_vec_bits(ctx.classical_rows, residual.x_mask.bits)
        sz = mat_vec_bits(ctx.classical_rows, residual.z_mask.bits)
        ex = ctx.classical_table.get(sx)
        ez = ctx.classical_table.get(sz)
        if ex is None or ez is None:
            return True, rx, rz
        residual = residual.compose(PauliOperator.from_masks(code.n, ex, ez))
    failure = not code.contains_stabilizer(residual)
    return failure, rx, rz


def run_logical_step_trial(ctx: ProtocolContext, noise: NoiseParams, rng
                           ) -> TrialOutcome:
    """One complete stabilized computational step.

    Two encoded blocks (prepared noiselessly), the transversal logical
    gate under noise, recovery block by block, then an ideal decode of
    each block's residual.  Non-CSS codes run the single-block variant
    with an identity logical gate.
    """
    frame = ctx.fresh_frame()
    records: list[SyndromeRecord] = []
    if ctx.logical_gate is not None:
        run_pauli_frame(
            ctx.logical_gate.circuit, noise=noise, rng=rng,
            reference=ctx.logical_gate.reference, state=frame,
            layout=ctx.logical_gate.layout,
        )
    cframes = [[0, 0] for _ in ctx.blocks]
    prep_failed = False
    for b in range(len(ctx.blocks)):
        recs, failed = recover(ctx, frame, noise, rng, block=b, cframe=cframes[b])
        records.extend(recs)
        if failed:
            prep_failed = True
            break
    if prep_failed:
        return TrialOutcome(True, 0, 0, records)
    failure = False
    rx = rz = 0
    for b in range(len(ctx.blocks)):
        f, bx, bz = judge_block(ctx, frame, b, cframes[b])
        failure |= f
        rx |= bx << ctx.blocks[b].start
        rz |= bz << ctx.blocks[b].start
    return TrialOutcome(failure, rx, rz, records)


def cycle_error_rate(ctx: ProtocolContext, noise: NoiseParams, cycles: int,
                     seed: int) -> float:
    """Fraction of syndrome-generation cycles whose reported syndrome
    differs from the true syndrome of the data deviation at cycle end.

    Each cycle starts from clean data (the per-cycle figure the analytic
    alpha models); for CSS codes the X- and Z-type cycles alternate.
    """
    wrong = 0
    for cycle in range(cycles):
        rng = RngStream(seed, cycle).generator()
        frame = ctx.fresh_frame()
        net_index = cycle % len(ctx.nets)
        net = ctx.nets[net_index]
        rec = generate_syndrome_once(ctx, frame, noise, rng, net_index=net_index)
        if not rec.accepted:
            wrong += 1
            continue
        phys = frame.restricted(ctx.blocks[0])
        if net.correction_basis == "pauli":
            truth = int(commutation_syndrome(ctx.code, phys))
        elif net.correction_basis == "x":
            truth = mat_vec_bits(ctx.classical_rows, phys.x_mask.bits)
        else:
            truth = mat_vec_bits(ctx.classical_rows, phys.z_mask.bits)
        if rec.syndrome != truth:
            wrong += 1
    return wrong / cycles


@dataclass
class FailureEstimate:
    code: str
    style: str
    r: int
    gamma: float
    epsilon: float
    trials: int
    failures: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int

    def csv_row(self) -> str:
        return (
            f"{self.code},{self.style},{self.r},{self.gamma:.6g},"
            f"{self.epsilon:.6g},{self.trials},{self.failures},"
            f"{self.p_hat:.6g},{self.ci_low:.6g},{self.ci_high:.6g},{self.seed}"
        )


CSV_HEADER = "code,style,r,gamma,epsilon,trials,failures,p_hat,ci_low,ci_high,seed"


def _count_failures(args):
    code_name, config, noise, seed, lo, hi = args
    from .codes import get_code

    ctx = _context_cache(code_name, config)
    failures = 0
    for trial in range(lo, hi):
        outcome = run_logical_step_trial(
            ctx, noise, RngStream(seed, trial).generator()
        )
        if outcome.logical_failure:
            failures += 1
    return failures


_CTX_CACHE: dict = {}


def _context_cache(code_name: str, config: RecoveryConfig) -> ProtocolContext:
    from .codes import get_code

    key = (code_name, config)
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        ctx = ProtocolContext(get_code(code_name), config)
        _CTX_CACHE[key] = ctx
    return ctx


def estimate_failure_rate(code_name: str, config: RecoveryConfig,
                          noise: NoiseParams, trials: int, seed: int,
                          workers: int | None = None) -> FailureEstimate:
    """Monte Carlo p-hat with a Wilson 95% interval.

    Per-trial RNG streams derive from (seed, trial index), so results are
    identical whatever the worker count.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if workers and workers > 1:
        import multiprocessing as mp

        bounds = _chunks(trials, workers)
        args = [
            (code_name, config, noise, seed, lo, hi) for lo, hi in bounds
        ]
        with mp.Pool(workers) as pool:
            failures = sum(pool.map(_count_failures, args))
    else:
        failures = _count_failures((code_name, config, noise, seed, 0, trials))
    p_hat = failures / trials
    lo, hi = wilson_interval(failures, trials)
    return FailureEstimate(
        code=code_name,
        style=config.network_style,
        r=config.r,
        gamma=noise.gamma,
        epsilon=noise.epsilon,
        trials=trials,
        failures=failures,
        p_hat=p_hat,
        ci_low=lo,
        ci_high=hi,
        seed=seed,
    )


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    size = math.ceil(total / parts)
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def estimates_csv(rows: list[FailureEstimate]) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for row in rows:
        out.write(row.csv_row() + "\n")
    return out.getvalue()
