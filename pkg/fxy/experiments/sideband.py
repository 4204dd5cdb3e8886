"""Two-qubit sideband Rabi oscillations, on the effective model or the pulse-level model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from loguru import logger
from scipy.optimize import curve_fit

from fxy.device import (
    DeviceSpec,
    SidebandDrive,
    SidebandKind,
    amplitude_for_strength,
    coupler_frequency,
)
from fxy.dynamics import (
    DecoherenceModel,
    DriveTerm,
    TimeDependentHamiltonian,
    Trajectory,
    build_lab_hamiltonian,
    embed_qubit_state,
    evolve,
    sample_grid,
)
from fxy.effective import EffectiveCoupling, effective_pair_hamiltonian
from fxy.qop import QuantumState
from fxy.units import TWO_PI

RabiMode = Literal["full", "effective"]

INITIAL_LABEL = {"blue": "00", "red": "10"}
TARGET_LABEL = {"blue": "11", "red": "01"}


def averaged_coupler_frequency(
    omega_max: float, phi_dc: float, amplitude: float, n_samples: int = 256
) -> float:
    """Mean coupler frequency (GHz) over one period of a flux tone of `amplitude` Φ₀."""
    theta = TWO_PI * np.arange(n_samples) / n_samples
    return float(np.mean(coupler_frequency(phi_dc + amplitude * np.cos(theta), omega_max)))


def dressed_transition_frequency(
    device: DeviceSpec,
    bond: int,
    kind: SidebandKind,
    amplitude: float = 0.0,
    levels: int = 2,
) -> float:
    """Frequency (GHz) of the dressed |00>→|11> (blue) or |01>↔|10> (red) transition of `bond`.

    The static qubit-coupler Hamiltonian is diagonalized with the coupler at its
    period-averaged frequency under the drive; dressed states are matched to bare
    states by largest overlap.
    """
    coupler = device.couplers[bond]
    wc = averaged_coupler_frequency(coupler.omega_max, device.phi_dc(bond), amplitude)
    h = build_lab_hamiltonian(
        device, (), levels, first_qubit=bond, n_qubits=2, coupler_frequencies={bond: wc}
    )
    w, v = np.linalg.eigh(h.static_part.data)
    overlap = np.abs(v) ** 2

    def energy(q1: int, q2: int) -> float:
        bare = h.space.index_of((q1, 0, q2))
        return float(w[int(np.argmax(overlap[bare]))])

    if kind == "blue":
        freq = (energy(1, 1) - energy(0, 0)) / TWO_PI
    else:
        freq = abs(energy(1, 0) - energy(0, 1)) / TWO_PI
    logger.debug(
        "bond {} {} sideband: dressed frequency {:.6f} GHz (coupler averaged at {:.4f} GHz)",
        bond,
        kind,
        freq,
        wc,
    )
    return freq


def sideband_drive(
    device: DeviceSpec,
    bond: int,
    kind: SidebandKind,
    g_target: float,
    duration: float,
    phase: float = 0.0,
    ramp: float = 20.0,
    frequency: Optional[float] = None,
) -> SidebandDrive:
    """The flux tone producing `g_target` MHz, at the dressed transition frequency unless given."""
    amplitude = amplitude_for_strength(kind, g_target, device, bond)
    if frequency is None:
        frequency = dressed_transition_frequency(device, bond, kind, amplitude)
    return SidebandDrive(bond, kind, amplitude, frequency, phase, (0.0, duration), ramp)


def _effective_coupling(bond: int, kind: SidebandKind, g: float, phase: float = 0.0):
    if kind == "blue":
        return EffectiveCoupling(bond, g_blue=g, phi_blue=phase)
    return EffectiveCoupling(bond, g_red=g, phi_red=phase)


def bond_decoherence(device: DeviceSpec, bond: int) -> DecoherenceModel:
    """T1/Tφ of the two qubits of `bond`, on sites 0 and 1."""
    return DecoherenceModel.from_device(device, first_qubit=bond, n_qubits=2)


def run_sideband_rabi(
    device: DeviceSpec,
    bond: int,
    kind: SidebandKind,
    g_target: float,
    duration: float,
    mode: RabiMode = "effective",
    n_points: int = 201,
    ramp: float = 20.0,
    frequency: Optional[float] = None,
    levels: int = 2,
    dt: Optional[float] = None,
    decoherence: Optional[DecoherenceModel] = None,
) -> Trajectory:
    """Rabi oscillation of `bond` from |00> (blue) or |10> (red), populations of the bond's two qubits.

    `decoherence` is given on the bond's qubits as sites 0 and 1 (see `bond_decoherence`)
    and switches to density-matrix evolution; in `full` mode it is moved onto the
    qubit sites of the lab-frame space.
    """
    if kind not in INITIAL_LABEL:
        raise ValueError(f"unknown sideband kind `{kind}`")
    if g_target < 0:
        raise ValueError(f"target strength must be >= 0, got {g_target}")
    span, every = sample_grid(duration, n_points)
    initial = QuantumState.product(INITIAL_LABEL[kind])
    metadata = {
        "bond": bond,
        "kind": kind,
        "g_mhz": g_target,
        "mode": mode,
        "noisy": decoherence is not None,
    }

    if mode == "effective":
        h = TimeDependentHamiltonian.constant(
            effective_pair_hamiltonian(_effective_coupling(bond, kind, g_target))
        )
        return evolve(h, initial, span, decoherence, dt=dt, sample_every=every, metadata=metadata)
    if mode != "full":
        raise ValueError(f"unknown mode `{mode}`")

    drives = []
    if g_target > 0:
        drives.append(
            sideband_drive(device, bond, kind, g_target, duration, ramp=ramp, frequency=frequency)
        )
        metadata["amplitude_phi0"] = drives[0].amplitude
        metadata["drive_frequency_ghz"] = drives[0].frequency
    h = build_lab_hamiltonian(device, drives, levels, first_qubit=bond, n_qubits=2)
    if decoherence is not None:
        decoherence = decoherence.on_sites(h.qubit_sites[s] for s in decoherence.sites)
    return evolve(
        h,
        embed_qubit_state(h, initial),
        span,
        decoherence,
        dt=dt,
        sample_every=every,
        metadata=metadata,
    )


@dataclass(frozen=True)
class RabiComparison:
    full: Trajectory
    effective: Trajectory
    max_deviation: float
    frequency_full: float  # MHz
    frequency_effective: float  # MHz

    @property
    def frequency_ratio(self) -> float:
        return self.frequency_full / self.frequency_effective


def fit_oscillation_frequency(times: np.ndarray, series: np.ndarray) -> float:
    """Frequency (MHz) of a·(1 - cos(2π·f·t + φ)) + c fitted to `series`, seeded by the FFT peak."""
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    # zero padding refines the seed when the window holds only a few periods
    n_fft = 8 * len(series)
    spectrum = np.abs(np.fft.rfft(series - series.mean(), n=n_fft))
    freqs = np.fft.rfftfreq(n_fft, times[1] - times[0])
    f0 = freqs[1 + int(np.argmax(spectrum[1:]))]

    def model(t, a, f, phi, c):
        return a * (1 - np.cos(TWO_PI * f * t + phi)) + c

    params, _ = curve_fit(
        model, times, series, p0=[(series.max() - series.min()) / 2, f0, 0.0, series.min()]
    )
    return abs(float(params[1])) * 1e3


def compare_full_vs_effective(
    device: DeviceSpec,
    bond: int,
    kind: SidebandKind,
    g_target: float,
    duration: float = 1000.0,
    n_points: int = 501,
    ramp: float = 20.0,
    dt: Optional[float] = None,
    frequency: Optional[float] = None,
    levels: int = 2,
    decoherence: Optional[DecoherenceModel] = None,
) -> RabiComparison:
    """Pulse-level vs effective populations of the transition's target state.

    The effective reference is switched on with the drive's own envelope so both
    models see the same pulse area, and the same `decoherence` when given.
    """
    full = run_sideband_rabi(
        device,
        bond,
        kind,
        g_target,
        duration,
        "full",
        n_points,
        ramp,
        frequency,
        levels,
        dt,
        decoherence,
    )
    drive = SidebandDrive(bond, kind, 0.0, 0.0, 0.0, (0.0, duration), ramp)
    h_eff = effective_pair_hamiltonian(_effective_coupling(bond, kind, g_target))
    h = TimeDependentHamiltonian(
        h_eff.space,
        h_eff * 0.0,
        (DriveTerm(h_eff, drive.envelope, 0.0),),
    )
    span, every = sample_grid(duration, n_points)
    effective = evolve(
        h,
        QuantumState.product(INITIAL_LABEL[kind]),
        span,
        decoherence,
        dt=every / 10,
        sample_every=every,
    )

    label = TARGET_LABEL[kind]
    p_full = full.populations([label])[label]
    p_eff = effective.populations([label])[label]
    out = RabiComparison(
        full,
        effective,
        float(np.max(np.abs(p_full - p_eff))),
        fit_oscillation_frequency(full.times, p_full),
        fit_oscillation_frequency(effective.times, p_eff),
    )
    logger.info(
        "bond {} {}: max deviation {:.4f}, frequency full {:.4f} MHz vs effective {:.4f} MHz",
        bond,
        kind,
        out.max_deviation,
        out.frequency_full,
        out.frequency_effective,
    )
    return out
