"""Single- and two-qubit gates and the three-qubit entangled-state preparation circuit.

√iSWAP maps |01> → (|01> + i|10>)/√2, i.e. exp(+i·(π/4)·(σˣσˣ + σʸσʸ)/2). It is the
effective hopping evolution at φʳ = π for g·t = π/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from loguru import logger

from fxy.device import DeviceSpec, load_device
from fxy.dynamics import (
    DecoherenceModel,
    TimeDependentHamiltonian,
    evolve_lindblad,
)
from fxy.effective import EffectiveCoupling, effective_pair_hamiltonian
from fxy.qop import (
    HilbertSpace,
    OperatorMatrix,
    QuantumState,
    embed_operator,
    fidelity,
    matrix_exponential_propagator,
    site_operator,
)
from fxy.units import MHZ

PrepMode = Literal["ideal", "noisy"]

ENTANGLED_TARGET = {"110": 1.0, "011": 1.0}
# state of Q1 Q2 (Q3 in |0>) after X and √iSWAP
BELL_STEP = {"100": 1.0, "010": 1j}


def x_gate() -> OperatorMatrix:
    return site_operator("x", 0, HilbertSpace.qubits(1))


def sqrt_iswap() -> OperatorMatrix:
    space = HilbertSpace.qubits(2)
    xx = site_operator("x", 0, space) @ site_operator("x", 1, space)
    yy = site_operator("y", 0, space) @ site_operator("y", 1, space)
    return matrix_exponential_propagator((xx + yy) * (-math.pi / 8), 1.0)


def iswap() -> OperatorMatrix:
    u = sqrt_iswap()
    return u @ u


def hopping_duration(g: float) -> float:
    """Time (ns) for g·t = π/4 at hopping strength `g` MHz, i.e. one √iSWAP."""
    return math.pi / 4 / (MHZ * g)


def sqrt_iswap_hamiltonian(g: float) -> OperatorMatrix:
    """Effective hopping Hamiltonian whose evolution for `hopping_duration(g)` is √iSWAP."""
    return effective_pair_hamiltonian(EffectiveCoupling(0, g_red=g, phi_red=math.pi))


def apply_gate(state: QuantumState, gate: OperatorMatrix, first_site: int) -> QuantumState:
    return state.evolve(embed_operator(gate.data, first_site, state.space))


@dataclass(frozen=True)
class GateSlot:
    """A gate realized as a constant Hamiltonian pulse on contiguous qubits."""

    name: str
    first_qubit: int
    hamiltonian: OperatorMatrix  # on the gate's own qubits, rad/ns
    duration: float  # ns
    ideal: OperatorMatrix


def x_slot(qubit: int, duration: float) -> GateSlot:
    h = x_gate() * (math.pi / (2 * duration))
    return GateSlot("X", qubit, h, duration, x_gate())


def sqrt_iswap_slots(first_qubit: int, g: float, repeat: int = 1) -> list[GateSlot]:
    h = sqrt_iswap_hamiltonian(g)
    return [
        GateSlot("sqrt_iswap", first_qubit, h, hopping_duration(g), sqrt_iswap())
        for _ in range(repeat)
    ]


def entangling_circuit(x_duration: float = 30.0, g: float = 0.75) -> list[GateSlot]:
    """X(Q1), √iSWAP(Q1,Q2), X(Q3), iSWAP(Q2,Q3); the last gate is two √iSWAP slots."""
    return [
        x_slot(0, x_duration),
        *sqrt_iswap_slots(0, g),
        x_slot(2, x_duration),
        *sqrt_iswap_slots(1, g, repeat=2),
    ]


@dataclass(frozen=True)
class PrepReport:
    state: QuantumState
    target: QuantumState
    fidelity: float
    bell_state: QuantumState
    bell_fidelity: float
    mode: PrepMode
    duration: float  # ns, total gate time

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "fidelity": self.fidelity,
            "bell_fidelity": self.bell_fidelity,
            "duration_ns": self.duration,
        }


def prepare_entangled_state(
    n: int = 3,
    mode: PrepMode = "ideal",
    device: Optional[DeviceSpec] = None,
    x_duration: float = 30.0,
    g: float = 0.75,
    first_qubit: int = 0,
) -> PrepReport:
    """Prepare (|110> + |011>)/√2 from |000>.

    Ideal gates give i·(|110> + |011>)/√2, which differs from the target only by a
    global phase. In noisy mode each gate is a timed pulse integrated with the
    Lindblad solver using the coherence times of qubits `first_qubit..first_qubit+2`.
    """
    if n != 3:
        raise ValueError(f"the preparation circuit is defined for 3 qubits, got {n}")
    space = HilbertSpace.qubits(n)
    target = QuantumState.superposition(space, ENTANGLED_TARGET)
    bell_target = QuantumState.superposition(space, BELL_STEP)
    circuit = entangling_circuit(x_duration, g)

    state = QuantumState.basis(space, "000")
    if mode == "ideal":
        states = []
        for slot in circuit:
            state = apply_gate(state, slot.ideal, slot.first_qubit)
            states.append(state)
    elif mode == "noisy":
        device = device or load_device()
        decoherence = DecoherenceModel.from_device(device, first_qubit=first_qubit, n_qubits=n)
        state = state.to_density()
        states = []
        for slot in circuit:
            h = embed_operator(slot.hamiltonian.data, slot.first_qubit, space)
            traj = evolve_lindblad(
                TimeDependentHamiltonian.constant(h),
                state,
                decoherence,
                (0.0, slot.duration),
                sample_every=slot.duration,
            )
            state = traj.final_state()
            states.append(state)
    else:
        raise ValueError(f"unknown mode `{mode}`")

    # after X(Q1) and √iSWAP(Q1,Q2)
    bell_state = states[1]
    report = PrepReport(
        state,
        target,
        fidelity(state, target),
        bell_state,
        fidelity(bell_state, bell_target),
        mode,
        float(np.sum([s.duration for s in circuit])),
    )
    logger.info(
        "entangled state ({}): fidelity {:.4f}, Bell step {:.4f}, gate time {:.1f} ns",
        mode,
        report.fidelity,
        report.bell_fidelity,
        report.duration,
    )
    return report
