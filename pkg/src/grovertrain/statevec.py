"""Dense statevector simulation of the amplified weight search.

The simulator holds one complex128 amplitude per basis state (capped at 26
qubits) and runs the full quantum pipeline end to end: uniform weight
register, k parallel data registers carrying the dataset in superposition,
the compiled reversible model writing predictions per register, a phase
oracle marking all-correct states, and inversion-about-the-mean diffusion.
Its weight marginal is the ground truth the closed-form evolution in
`amplify` is checked against.

Qubit convention: qubit q is bit q of the basis index (LSB first). The global
layout puts the weight register at the lowest qubits, so the weight marginal
is a single reshape-and-sum away. Then come the k data copies, each holding
input bits, label bits, and (only when auxiliary padding is present) one
realness flag; then one prediction block per copy; then a shared ancilla pool
for the compiled model. Auxiliary padding occupies otherwise-unused basis
states of the data registers with the flag at 0, so padded states can never
satisfy the oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boolcirc import GateList, ModelCircuit, RGate, bits_to_index, compile_circuit
from .datasets import Dataset

MAX_QUBITS = 26


@dataclass(frozen=True)
class CopyRegisters:
    """Qubit indices of one parallel data copy."""
    x: tuple[int, ...]
    y: tuple[int, ...]
    flag: int | None
    out: tuple[int, ...]


@dataclass(frozen=True)
class SystemLayout:
    """Qubit indices of the full amplification system."""
    weight: tuple[int, ...]
    copies: tuple[CopyRegisters, ...]
    anc: tuple[int, ...]
    n_qubits: int


class QuantumState:
    """Dense statevector over n_qubits (complex128, 2**n amplitudes)."""

    def __init__(self, n_qubits: int, amps: np.ndarray | None = None):
        if n_qubits < 1 or n_qubits > MAX_QUBITS:
            raise ValueError(f"qubit count must lie in [1, {MAX_QUBITS}]")
        self.n_qubits = n_qubits
        if amps is None:
            self.amps = np.zeros(1 << n_qubits, dtype=np.complex128)
            self.amps[0] = 1.0
        else:
            amps = np.asarray(amps, dtype=np.complex128)
            if amps.shape != (1 << n_qubits,):
                raise ValueError("amplitude vector has wrong length")
            self.amps = amps
        self._idx = np.arange(1 << n_qubits, dtype=np.int64)

    def norm(self) -> float:
        return float(np.sqrt((np.abs(self.amps) ** 2).sum()))

    def copy(self) -> "QuantumState":
        return QuantumState(self.n_qubits, self.amps.copy())

    def _mask(self, qubits) -> np.ndarray:
        m = np.ones(len(self.amps), dtype=bool)
        for q in qubits:
            m &= (self._idx >> q) & 1 == 1
        return m

    def apply_rgate(self, gate: RGate) -> None:
        """Flip `target` on basis states where all controls are 1."""
        m = self._mask(gate.controls)
        src = self._idx[m & ((self._idx >> gate.target) & 1 == 0)]
        dst = src | (1 << gate.target)
        tmp = self.amps[src].copy()
        self.amps[src] = self.amps[dst]
        self.amps[dst] = tmp

    def apply_gates(self, gates) -> None:
        for g in gates:
            self.apply_rgate(g)

    def apply_phase_flip(self, qubits) -> None:
        """Multiply by -1 every basis state with all `qubits` at 1."""
        self.amps[self._mask(qubits)] *= -1.0

    def marginal(self, qubits) -> np.ndarray:
        """Probability distribution over a register (its bit 0 first)."""
        probs = np.abs(self.amps) ** 2
        out = np.zeros(1 << len(qubits))
        sub = np.zeros(len(self.amps), dtype=np.int64)
        for pos, q in enumerate(qubits):
            sub |= ((self._idx >> q) & 1) << pos
        np.add.at(out, sub, probs)
        return out

    def weight_marginal(self, d_w: int) -> np.ndarray:
        """Fast marginal for the weight register at qubits [0, d_w)."""
        probs = np.abs(self.amps) ** 2
        return probs.reshape(-1, 1 << d_w).sum(axis=0)

    def measure_register(self, qubits, rng: np.random.Generator) -> int:
        """One Born-rule measurement outcome for the given register."""
        p = self.marginal(qubits)
        p = p / p.sum()
        return int(rng.choice(len(p), p=p))


def build_layout(model: ModelCircuit, k: int, n_aux: int,
                 n_anc: int) -> SystemLayout:
    has_flag = n_aux > 0
    q = model.weight_width
    weight = tuple(range(q))
    copies = []
    for _ in range(k):
        x = tuple(range(q, q + model.input_width)); q += model.input_width
        y = tuple(range(q, q + model.output_width)); q += model.output_width
        flag = None
        if has_flag:
            flag = q; q += 1
        copies.append([x, y, flag])
    full = []
    for regs in copies:
        out = tuple(range(q, q + model.output_width)); q += model.output_width
        full.append(CopyRegisters(regs[0], regs[1], regs[2], out))
    anc = tuple(range(q, q + n_anc)); q += n_anc
    return SystemLayout(weight, tuple(full), anc, q)


def _copy_register_vector(d: Dataset, n_aux: int, width: int) -> np.ndarray:
    """Amplitudes of one data copy: real samples |x, y, flag=1> plus n_aux
    distinct padded basis states |p, flag=0>, all at equal weight."""
    vec = np.zeros(1 << width, dtype=np.complex128)
    amp = 1.0 / math.sqrt(len(d) + n_aux)
    data_width = d.d_x + d.d_y
    flag_bit = 1 << data_width if n_aux > 0 else 0
    for s in d.samples:
        idx = bits_to_index(s.x + s.y)
        vec[idx | flag_bit] += amp
    if n_aux > 0:
        if n_aux > 1 << data_width:
            raise ValueError("more padding states requested than the data "
                             "register has basis states")
        for p in range(n_aux):
            vec[p] += amp
    return vec


def prepare_initial(model: ModelCircuit, d: Dataset, k: int, n_aux: int = 0,
                    compiled: GateList | None = None, min_anc: int = 0
                    ) -> tuple[QuantumState, SystemLayout]:
    """|Psi_0>: uniform weights, k dataset superpositions, predictions written.

    Builds the product state by Kronecker products (low register last, so the
    weight register varies fastest), then runs the compiled model once per
    copy with weight, input, output, and ancilla qubits remapped into place.
    min_anc grows the shared ancilla pool beyond what the compiled model
    needs (the decode oracle borrows one ancilla per copy from it).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(d) + n_aux < 2:
        raise ValueError("need at least two states per data register")
    gl = compiled if compiled is not None else compile_circuit(model)
    layout = build_layout(model, k, n_aux, max(gl.n_anc, min_anc))
    if layout.n_qubits > MAX_QUBITS:
        raise ValueError(
            f"system needs {layout.n_qubits} qubits, cap is {MAX_QUBITS}")
    copy_width = (model.input_width + model.output_width
                  + (1 if n_aux > 0 else 0))
    copy_vec = _copy_register_vector(d, n_aux, copy_width)
    w_vec = np.full(1 << model.weight_width,
                    1.0 / math.sqrt(1 << model.weight_width),
                    dtype=np.complex128)
    rest = 1 << (layout.n_qubits - model.weight_width - k * copy_width)
    zeros = np.zeros(rest, dtype=np.complex128)
    zeros[0] = 1.0
    vec = w_vec
    for _ in range(k):
        vec = np.kron(copy_vec, vec)
    vec = np.kron(zeros, vec)
    state = QuantumState(layout.n_qubits, vec)
    for copy in layout.copies:
        mapping = {}
        for i, q in enumerate(layout.weight):
            mapping[i] = q
        base = model.weight_width
        for i, q in enumerate(copy.x):
            mapping[base + i] = q
        for i, q in enumerate(gl.out_qubits):
            mapping[q] = copy.out[i]
        anc_base = model.weight_width + model.input_width + len(gl.out_qubits)
        for i, q in enumerate(layout.anc):
            mapping[anc_base + i] = q
        state.apply_gates(gl.remap(mapping).gates)
    return state, layout


def _comparator_gates(copy: CopyRegisters) -> list[RGate]:
    """In-place equality bits: out_b <- 1 iff out_b == y_b (self-inverse
    sequence: CNOT then X per bit)."""
    gates = []
    for yq, oq in zip(copy.y, copy.out):
        gates.append(RGate((yq,), oq))
        gates.append(RGate((), oq))
    return gates


def apply_oracle(state: QuantumState, layout: SystemLayout,
                 predicate: str = "exact-match") -> None:
    """Phase-flip basis states where every copy is a correctly predicted real
    sample. Padded states (flag 0) are never flipped."""
    if predicate == "exact-match":
        controls = []
        forward = []
        for copy in layout.copies:
            forward.extend(_comparator_gates(copy))
            controls.extend(copy.out)
            if copy.flag is not None:
                controls.append(copy.flag)
        state.apply_gates(forward)
        state.apply_phase_flip(controls)
        state.apply_gates(reversed(forward))
    elif predicate == "tiny-mnist-decode":
        _apply_decode_oracle(state, layout)
    else:
        raise ValueError(f"unknown predicate: {predicate}")


def _apply_decode_oracle(state: QuantumState, layout: SystemLayout) -> None:
    """Phase oracle for the 2-bit digit decoding: prediction and label agree
    when bit0 is set on both, or bit0 is clear on both and bit1 matches.

    Per copy, one pool ancilla accumulates the correctness bit (the two
    agreement cases are disjoint, so two controlled flips add them), then one
    multi-controlled phase fires on all correctness bits and flags.
    """
    if len(layout.anc) < len(layout.copies):
        raise ValueError("decode oracle needs one ancilla per copy")
    controls = []
    forward: list[RGate] = []
    for j, copy in enumerate(layout.copies):
        o0, o1 = copy.out
        y0, y1 = copy.y
        c = layout.anc[j]
        forward.extend([
            RGate((y1,), o1), RGate((), o1),   # o1 <- (o1 == y1)
            RGate((o0, y0), c),                # c ^= o0 & y0
            RGate((), o0), RGate((), y0),      # negate bit0 pair
            RGate((o0, y0, o1), c),            # c ^= !o0 & !y0 & (o1 == y1)
            RGate((), o0), RGate((), y0),      # restore bit0 pair
        ])
        controls.append(c)
        if copy.flag is not None:
            controls.append(copy.flag)
    state.apply_gates(forward)
    state.apply_phase_flip(controls)
    state.apply_gates(reversed(forward))


def apply_diffusion(state: QuantumState, psi0: np.ndarray) -> None:
    """Reflect about the prepared state: psi <- 2 <psi0|psi> psi0 - psi."""
    overlap = np.vdot(psi0, state.amps)
    state.amps = 2.0 * overlap * psi0 - state.amps


def grover_run(model: ModelCircuit, d: Dataset, k: int, g: int,
               n_aux: int = 0, compiled: GateList | None = None,
               return_state: bool = False):
    """Run g amplification rounds and return the weight-register marginal.

    Each round is the phase oracle followed by reflection about the prepared
    state. With return_state=True the (marginal, state, layout) triple comes
    back for inspection or measurement.
    """
    if g < 0:
        raise ValueError("iteration count must be >= 0")
    min_anc = k if d.predicate == "tiny-mnist-decode" else 0
    state, layout = prepare_initial(model, d, k, n_aux, compiled, min_anc)
    psi0 = state.amps.copy()
    for _ in range(g):
        apply_oracle(state, layout, d.predicate)
        apply_diffusion(state, psi0)
    marginal = state.weight_marginal(model.weight_width)
    if return_state:
        return marginal, state, layout
    return marginal


def statevector_csv(state: QuantumState) -> str:
    """CSV dump of the amplitudes: basis_index,re,im (12 significant digits)."""
    lines = ["basis_index,re,im"]
    for i, a in enumerate(state.amps):
        lines.append(f"{i},{a.real:.12g},{a.imag:.12g}")
    return "\n".join(lines) + "\n"
