"""Aharonov-Bohm interference on the four-state loop of a three-qubit chain."""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from fxy.dynamics import DecoherenceModel, TimeDependentHamiltonian, evolve, sample_grid
from fxy.effective import ChainConfig, effective_chain_hamiltonian, loop_flux
from fxy.errors import UnequalStrengthError
from fxy.experiments.sweep import SweepSpec
from fxy.misc.parallel import parallel_map
from fxy.qop import HilbertSpace, QuantumState, fidelity

LOOP_LABELS = ("000", "110", "101", "011")
ENTANGLED_LABELS = ("110", "011")

InitialState = Union[str, QuantumState]


def initial_loop_state(initial: InitialState) -> QuantumState:
    """`"entangled"` is (|110> + |011>)/√2; any other string is a product-state label."""
    if isinstance(initial, QuantumState):
        return initial
    if initial == "entangled":
        return QuantumState.superposition(
            HilbertSpace.qubits(3), {k: 1.0 for k in ENTANGLED_LABELS}
        )
    return QuantumState.product(initial)


def check_equal_strengths(chain: ChainConfig, tol: float = 1e-9):
    strengths = [g for c in chain.couplings for g in (c.g_blue, c.g_red)]
    if max(strengths) - min(strengths) > tol:
        raise UnequalStrengthError(
            f"AB interference expects equal blue and red strengths on every bond, got {strengths}"
        )


@dataclass(frozen=True, eq=False)
class InterferenceMap:
    """Loop-state populations over (sweep value, time)."""

    values: np.ndarray
    times: np.ndarray  # ns
    populations: dict[str, np.ndarray]  # label -> (n_values, n_times)
    fidelity: np.ndarray  # to the initial state, (n_values, n_times)
    loop_flux: np.ndarray  # rad, per value

    def to_dataframe(self) -> pd.DataFrame:
        """Long format, one row per (value, time)."""
        n_values, n_times = self.fidelity.shape
        frame = {
            "value": np.repeat(self.values, n_times),
            "loop_flux": np.repeat(self.loop_flux, n_times),
            "time_ns": np.tile(self.times, n_values),
        }
        for label, pops in self.populations.items():
            frame[f"p_{label}"] = pops.reshape(-1)
        frame["fidelity"] = self.fidelity.reshape(-1)
        return pd.DataFrame(frame)


def _evolve_point(
    record: dict,
    initial: QuantumState,
    span: tuple[float, float],
    every: float,
    labels: tuple[str, ...],
    decoherence: Optional[DecoherenceModel] = None,
):
    chain = ChainConfig.from_dict(record)
    h = TimeDependentHamiltonian.constant(effective_chain_hamiltonian(chain))
    traj = evolve(h, initial, span, decoherence, sample_every=every)
    pops = traj.populations(labels)
    fid = np.array([fidelity(traj.state(i), initial) for i in range(len(traj))])
    return (
        np.stack([pops[k] for k in labels]),
        fid,
        loop_flux(chain.couplings[0], chain.couplings[1]),
    )


def run_ab_interference(
    chain: ChainConfig,
    sweep: SweepSpec,
    duration: float,
    initial: InitialState = "000",
    n_points: int = 201,
    allow_unequal: bool = False,
    n_threads: int = 1,
    show_progress: bool = False,
    decoherence: Optional[DecoherenceModel] = None,
) -> InterferenceMap:
    """Populations of the four loop states for every sweep value under the effective model.

    Sweep targets address the serialized chain, e.g. `couplings.0.phi_blue`. With
    `decoherence` (sites 0..2) each point is a Lindblad run and `fidelity` is ⟨ψ₀|ρ(t)|ψ₀⟩.
    """
    if chain.n_qubits != 3:
        raise ValueError(f"AB interference needs a 3-qubit chain, got {chain.n_qubits}")
    if not allow_unequal:
        check_equal_strengths(chain)
    record = chain.to_dict()
    missing = sweep.unresolved_paths(record)
    if len(missing) > 0:
        raise KeyError(f"sweep paths not found in the chain config: {missing}")

    state = initial_loop_state(initial)
    span, every = sample_grid(duration, n_points)
    results = parallel_map(
        partial(
            _evolve_point,
            initial=state,
            span=span,
            every=every,
            labels=LOOP_LABELS,
            decoherence=decoherence,
        ),
        sweep.points(record),
        n_threads=n_threads,
        show_progress=show_progress,
        desc="ab interference",
    )
    pops = np.stack([r[0] for r in results])
    logger.debug("AB interference: {} values x {} times", len(results), n_points)
    return InterferenceMap(
        np.asarray(sweep.grid),
        span[0] + every * np.arange(n_points),
        {k: pops[:, i, :] for i, k in enumerate(LOOP_LABELS)},
        np.stack([r[1] for r in results]),
        np.array([r[2] for r in results]),
    )


def max_population(
    imap: InterferenceMap, label: str, value_index: Optional[int] = None
) -> float:
    pops = imap.populations[label]
    if value_index is not None:
        pops = pops[value_index]
    return float(np.max(pops))
