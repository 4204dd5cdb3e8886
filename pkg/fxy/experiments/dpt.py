"""Dynamical phase transition observables of the transverse-field Ising chain.

A chain quenched from |0…0> evolves under J·Σσˣσˣ + B_z·Σσᶻ. The time-averaged spin
correlation, the Loschmidt echo, its rate function and the echo's first minimum are
reported over a grid of B_z/J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Literal, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from scipy.integrate import trapezoid
from scipy.linalg import eigh

from fxy.device import DeviceSpec, load_device
from fxy.dynamics import (
    DecoherenceModel,
    TimeDependentHamiltonian,
    Trajectory,
    evolve_lindblad,
    evolve_schrodinger,
    sample_grid,
)
from fxy.effective import ChainConfig, effective_chain_hamiltonian, ising_hamiltonian
from fxy.errors import EmptyGridError, HorizonError, SeriesTooShortError
from fxy.experiments.readout import ReadoutModel
from fxy.misc.parallel import parallel_map
from fxy.qop import HilbertSpace, OperatorMatrix, QuantumState

DptMode = Literal["ideal", "noisy"]
ModelKind = Literal["ising", "effective"]

RATE_FLOOR = 1e-12
SMOOTHING_WINDOW = 3
MAX_CHAIN = 6


def _z_moments(n: int) -> np.ndarray:
    """(Σᵢzᵢ)² - N for every computational basis state, zᵢ = +1 for |0>."""
    bits = (np.arange(2**n)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    total = (1 - 2 * bits).sum(axis=1)
    return (total**2 - n).astype(float)


def czz_from_probabilities(
    times: np.ndarray, probs: np.ndarray, n: int, horizon: float
) -> float:
    """(1/T)∫₀ᵀ Σ_{i≠j}⟨σᵢᶻσⱼᶻ⟩/N² dt by the trapezoid rule on the sample grid."""
    times = np.asarray(times, dtype=float)
    start = times[0]
    if horizon <= 0 or horizon > times[-1] - start + 1e-9:
        raise HorizonError(
            f"horizon {horizon} ns is outside the sampled span of {times[-1] - start} ns"
        )
    end = int(np.argmin(np.abs(times - (start + horizon))))
    if abs(times[end] - start - horizon) > 1e-9 * max(1.0, horizon):
        raise HorizonError(f"horizon {horizon} ns is not on the sample grid")
    series = np.asarray(probs, dtype=float)[: end + 1] @ _z_moments(n) / n**2
    return float(trapezoid(series, times[: end + 1]) / horizon)


def czz_correlation(traj: Trajectory, horizon: float) -> float:
    n = len(traj.qubit_sites)
    pops = traj.populations()
    probs = np.stack([pops[k] for k in traj.qubit_labels()], axis=-1)
    return czz_from_probabilities(traj.times, probs, n, horizon)


def loschmidt_echo(
    h: OperatorMatrix, initial: QuantumState, times: Sequence[float]
) -> np.ndarray:
    """|<ψ(0)|e^{-iHt}|ψ(0)>|² from the eigendecomposition of H."""
    if initial.kind != "pure":
        raise ValueError("the Loschmidt echo is defined for a pure initial state")
    w, v = eigh(h.assert_hermitian().data)
    weights = np.abs(v.conj().T @ initial.data) ** 2
    amp = np.exp(-1j * np.outer(np.asarray(times, dtype=float), w)) @ weights
    return np.clip(np.abs(amp) ** 2, 0.0, 1.0)


@dataclass(frozen=True)
class RateSeries:
    values: np.ndarray
    clamped: np.ndarray  # True where the echo was at or below the floor


def rate_function(l_series: Sequence[float], n: int, floor: float = RATE_FLOOR) -> RateSeries:
    """-(1/N)·log ℒ(t), with ℒ clamped from below at `floor`."""
    series = np.asarray(l_series, dtype=float)
    clamped = series <= floor
    if np.any(clamped):
        logger.warning(
            "rate function clamped at {} of {} samples (echo <= {})",
            int(clamped.sum()),
            len(series),
            floor,
        )
    return RateSeries(-np.log(np.maximum(series, floor)) / n, clamped)


@dataclass(frozen=True)
class FirstMinimum:
    index: int
    time: float
    value: float
    # False when no interior local minimum exists and the global minimum is reported
    local: bool


def first_minimum(
    series: Sequence[float],
    times: Optional[Sequence[float]] = None,
    window: int = SMOOTHING_WINDOW,
) -> FirstMinimum:
    """First interior local minimum of the centered moving average of `series`.

    The reported value comes from the raw series at the located sample.
    """
    raw = np.asarray(series, dtype=float)
    if len(raw) < 3:
        raise SeriesTooShortError(f"need at least 3 samples, got {len(raw)}")
    times = np.arange(len(raw), dtype=float) if times is None else np.asarray(times, dtype=float)
    smooth = (
        pd.Series(raw).rolling(window=window, center=True, min_periods=1).mean().to_numpy()
    )
    for i in range(1, len(raw) - 1):
        # a plateau reports its first sample
        if smooth[i] < smooth[i - 1] and smooth[i] <= smooth[i + 1]:
            return FirstMinimum(i, float(times[i]), float(raw[i]), True)
    i = int(np.argmin(raw))
    return FirstMinimum(i, float(times[i]), float(raw[i]), False)


@dataclass(frozen=True, eq=False)
class DptResult:
    n: int
    j: float  # MHz
    horizon: float  # ns
    mode: DptMode
    bz_over_j: np.ndarray
    times: np.ndarray  # ns
    czz: np.ndarray
    loschmidt: np.ndarray  # (n_grid, n_times)
    rate: np.ndarray  # (n_grid, n_times)
    rate_clamped: np.ndarray  # (n_grid, n_times)
    first_min: np.ndarray
    first_min_time: np.ndarray  # ns
    first_min_local: np.ndarray

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "bz_over_j": self.bz_over_j,
                "czz": self.czz,
                "first_min": self.first_min,
                "first_min_time_ns": self.first_min_time,
            }
        )

    def loschmidt_frame(self) -> pd.DataFrame:
        return self._long_frame({"loschmidt": self.loschmidt})

    def rate_frame(self) -> pd.DataFrame:
        return self._long_frame({"rate": self.rate, "clamped": self.rate_clamped.astype(int)})

    def _long_frame(self, columns: dict[str, np.ndarray]) -> pd.DataFrame:
        n_grid, n_times = self.loschmidt.shape
        return pd.DataFrame(
            {
                "bz_over_j": np.repeat(self.bz_over_j, n_times),
                "time_ns": np.tile(self.times, n_grid),
                **{k: v.reshape(-1) for k, v in columns.items()},
            }
        )


def chain_hamiltonian(n: int, j: float, bz: float, model: ModelKind = "ising") -> OperatorMatrix:
    """The Ising chain directly, or as the sideband chain with Δᵇ = 4·B_z and g = J."""
    if model == "ising":
        return ising_hamiltonian(n, j, bz)
    if model == "effective":
        return effective_chain_hamiltonian(ChainConfig.uniform(n, j, detuning_blue=4 * bz))
    raise ValueError(f"unknown chain model `{model}`")


@dataclass(frozen=True)
class _DptPoint:
    czz: float
    loschmidt: np.ndarray
    rate: RateSeries
    first_min: FirstMinimum


def _run_point(
    ratio: float,
    n: int,
    j: float,
    horizon: float,
    sample_every: float,
    model: ModelKind,
    decoherence: Optional[DecoherenceModel],
    readout: Optional[ReadoutModel],
) -> _DptPoint:
    h = chain_hamiltonian(n, j, ratio * j, model)
    space = HilbertSpace.qubits(n)
    initial = QuantumState.basis(space, "0" * n)
    td = TimeDependentHamiltonian.constant(h)
    span = (0.0, horizon)

    if decoherence is None:
        traj = evolve_schrodinger(td, initial, span, sample_every=sample_every)
        probs = traj.probabilities()
        echo = loschmidt_echo(h, initial, traj.times)
    else:
        traj = evolve_lindblad(td, initial, decoherence, span, sample_every=sample_every)
        probs = traj.probabilities()
        # the echo of a quench from a basis state is the return probability; readout
        # error only enters the reported populations
        echo = np.clip(probs[:, 0], 0.0, 1.0)
        if readout is not None:
            probs = readout.apply(probs)

    return _DptPoint(
        czz_from_probabilities(traj.times, probs, n, horizon),
        echo,
        rate_function(echo, n),
        first_minimum(echo, traj.times),
    )


def run_dpt_sweep(
    n: int,
    bz_over_j: Sequence[float],
    j: float = 0.75,
    horizon: float = 500.0,
    sample_every: float = 2.0,
    mode: DptMode = "ideal",
    device: Optional[DeviceSpec] = None,
    readout: bool = True,
    model: ModelKind = "ising",
    n_threads: int = 1,
    show_progress: bool = False,
) -> DptResult:
    """Quench |0…0> for every B_z/J of the grid.

    `ideal` uses exact propagators. `noisy` integrates the Lindblad equation with the
    coherence times of the first `n` device qubits and, with `readout`, applies their
    assignment errors to the reported populations.
    """
    if not 2 <= n <= MAX_CHAIN:
        raise ValueError(f"chain length must be in [2, {MAX_CHAIN}], got {n}")
    grid = np.asarray(bz_over_j, dtype=float)
    if grid.size == 0:
        raise EmptyGridError("the B_z/J grid is empty")
    span, every = sample_grid(horizon, round(horizon / sample_every) + 1)

    decoherence = None
    readout_model = None
    if mode == "noisy":
        device = device or load_device()
        decoherence = DecoherenceModel.from_device(device, n_qubits=n)
        if readout:
            readout_model = ReadoutModel.from_device(device, n_qubits=n)
    elif mode != "ideal":
        raise ValueError(f"unknown mode `{mode}`")

    points = parallel_map(
        partial(
            _run_point,
            n=n,
            j=j,
            horizon=horizon,
            sample_every=every,
            model=model,
            decoherence=decoherence,
            readout=readout_model,
        ),
        [float(x) for x in grid],
        n_threads=n_threads,
        show_progress=show_progress,
        desc=f"dpt n={n}",
    )
    times = span[0] + every * np.arange(len(points[0].loschmidt))
    logger.info("DPT sweep n={} ({}): {} grid points", n, mode, len(points))
    return DptResult(
        n=n,
        j=j,
        horizon=horizon,
        mode=mode,
        bz_over_j=grid,
        times=times,
        czz=np.array([p.czz for p in points]),
        loschmidt=np.stack([p.loschmidt for p in points]),
        rate=np.stack([p.rate.values for p in points]),
        rate_clamped=np.stack([p.rate.clamped for p in points]),
        first_min=np.array([p.first_min.value for p in points]),
        first_min_time=np.array([p.first_min.time for p in points]),
        first_min_local=np.array([p.first_min.local for p in points]),
    )


def loschmidt_bz0(n: int, j: float, times: Sequence[float]) -> np.ndarray:
    """Closed form at B_z = 0: cos²⁽ᴺ⁻¹⁾(2π·J·t) with J in MHz and t in ns."""
    return np.cos(2 * math.pi * j * 1e-3 * np.asarray(times, dtype=float)) ** (2 * (n - 1))
