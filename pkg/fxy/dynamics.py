"""Time evolution.

Lab-frame Hamiltonians of a qubit/coupler sub-chain, a fixed-step integrator whose
every step is an exact unitary, and a Lindblad variant for T1/Tφ decoherence.
Times are in ns, Hamiltonians in rad/ns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from scipy.linalg import expm

from fxy.device import DeviceSpec, SidebandDrive, coupler_frequency
from fxy.errors import (
    BasisLabelError,
    DimensionCapError,
    DimensionError,
    DriveReferenceError,
    InvalidStateError,
    NegativeRateError,
    TimeGridError,
    TimeStepError,
)
from fxy.qop import (
    HilbertSpace,
    OperatorMatrix,
    QuantumState,
    local_matrix,
    site_operator,
)
from fxy.units import GHZ, MHZ, TWO_PI, US

IntegratorMethod = Literal["cfm4", "midpoint"]
INTEGRATOR_ORDER = {"cfm4": 4, "midpoint": 2}

MAX_QUBITS = 3
# dt must resolve the fastest frequency with this many steps per period
STEPS_PER_PERIOD = 20
GRID_TOL = 1e-9

# fourth-order commutator-free Magnus: Gauss nodes and weights of the two exponentials
_SQRT3 = math.sqrt(3.0)
_NODES = (0.5 - _SQRT3 / 6, 0.5 + _SQRT3 / 6)
_W1 = (3 - 2 * _SQRT3) / 12
_W2 = (3 + 2 * _SQRT3) / 12

# max number of step unitaries held in memory at once, in matrix elements
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class DriveTerm:
    """`fn(t)·operator`. `fn` maps an array of times (ns) to real coefficients."""

    operator: OperatorMatrix
    fn: Callable[[np.ndarray], np.ndarray]
    # highest frequency (GHz) in fn, used by the time-step guard
    frequency: float = 0.0


@dataclass(frozen=True, eq=False)
class TimeDependentHamiltonian:
    space: HilbertSpace
    static_part: OperatorMatrix
    drive_terms: tuple[DriveTerm, ...] = ()
    # sites holding qubits; the remaining sites are couplers
    qubit_sites: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "drive_terms", tuple(self.drive_terms))
        if self.qubit_sites is None:
            object.__setattr__(self, "qubit_sites", tuple(range(self.space.n_sites)))
        if self.static_part.space.site_dims != self.space.site_dims:
            raise DimensionError("static part does not act on the Hamiltonian's space")
        self.static_part.assert_hermitian()
        for term in self.drive_terms:
            if term.operator.space.site_dims != self.space.site_dims:
                raise DimensionError("drive operator does not act on the Hamiltonian's space")
            term.operator.assert_hermitian()

    @staticmethod
    def constant(
        op: OperatorMatrix, qubit_sites: Optional[Sequence[int]] = None
    ) -> TimeDependentHamiltonian:
        return TimeDependentHamiltonian(
            op.space, op, (), None if qubit_sites is None else tuple(qubit_sites)
        )

    @property
    def is_constant(self) -> bool:
        return len(self.drive_terms) == 0

    def matrices(self, times: np.ndarray) -> np.ndarray:
        """H(t) for every t in `times`, stacked as (len(times), dim, dim)."""
        times = np.asarray(times, dtype=float)
        out = np.broadcast_to(
            self.static_part.data, (times.shape[0],) + self.static_part.data.shape
        ).copy()
        for term in self.drive_terms:
            coef = np.asarray(term.fn(times), dtype=float)
            out += coef[:, None, None] * term.operator.data[None, :, :]
        return out

    def sample(self, t: float) -> OperatorMatrix:
        return OperatorMatrix(self.space, self.matrices(np.array([t]))[0]).assert_hermitian()

    @cached_property
    def max_frequency(self) -> float:
        """Fastest frequency (GHz): spread of the static spectrum plus the fastest drive tone."""
        w = self.static_part.spectrum()
        f_static = float(w[-1] - w[0]) / TWO_PI
        f_drive = max((abs(t.frequency) for t in self.drive_terms), default=0.0)
        return f_static + f_drive

    def max_time_step(self) -> float:
        f_max = self.max_frequency
        if f_max <= 0:
            return math.inf
        return 1.0 / (STEPS_PER_PERIOD * f_max)


@dataclass(frozen=True)
class CouplerModulation:
    """2π·(ω_c(Φ_dc + Σ drive fluxes) - ω_c(Φ_dc)) in rad/ns, evaluated without linearization."""

    omega_max: float  # GHz
    phi_dc: float  # Φ₀
    drives: tuple[SidebandDrive, ...]

    def __call__(self, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        phi = np.full(times.shape, self.phi_dc)
        for drive in self.drives:
            phi = phi + drive.flux(times)
        return GHZ * (
            coupler_frequency(phi, self.omega_max)
            - coupler_frequency(self.phi_dc, self.omega_max)
        )


def build_lab_hamiltonian(
    device: DeviceSpec,
    drives: Sequence[SidebandDrive] = (),
    levels: int = 2,
    first_qubit: int = 0,
    n_qubits: int = 2,
    include_direct: bool = True,
    coupler_frequencies: Optional[Mapping[int, float]] = None,
) -> TimeDependentHamiltonian:
    """Pulse-level Hamiltonian of qubits `first_qubit .. first_qubit+n_qubits-1` and the couplers between them.

    Sites alternate qubit, coupler, qubit, ...; coupler frequencies follow their flux
    exactly, drives are given by global bond index. `coupler_frequencies` (GHz, by bond)
    replaces the static coupler frequency, e.g. with its period-averaged value.
    """
    if levels not in (2, 3):
        raise ValueError(f"levels must be 2 or 3, got {levels}")
    if n_qubits < 1 or n_qubits > MAX_QUBITS:
        raise DimensionCapError(
            f"pulse-level simulation supports 1 to {MAX_QUBITS} qubits, got {n_qubits}"
        )
    if first_qubit < 0 or first_qubit + n_qubits > device.n_qubits:
        raise DimensionError(
            f"qubits {first_qubit}..{first_qubit + n_qubits - 1} not on a {device.n_qubits}-qubit device"
        )

    bonds = list(range(first_qubit, first_qubit + n_qubits - 1))
    for drive in drives:
        if drive.coupler not in bonds:
            raise DriveReferenceError(
                f"drive on coupler {drive.coupler} but only couplers {bonds} are simulated"
            )

    n_sites = 2 * n_qubits - 1
    space = HilbertSpace((levels,) * n_sites)
    qubit_sites = tuple(range(0, n_sites, 2))
    dim = space.dim

    def op(label: str, site: int) -> np.ndarray:
        return site_operator(label, site, space).data

    def duffing(site: int, ec_mhz: float) -> np.ndarray:
        if levels == 2:
            return np.zeros((dim, dim), dtype=complex)
        n = op("n", site)
        return (MHZ * ec_mhz / 2) * n @ (n - np.eye(dim))

    h = np.zeros((dim, dim), dtype=complex)
    for k, site in enumerate(qubit_sites):
        q = device.qubits[first_qubit + k]
        h += GHZ * q.omega_idle * op("n", site) + duffing(site, q.ec)

    drive_terms = []
    for k, bond in enumerate(bonds):
        c = device.couplers[bond]
        left, right = qubit_sites[k], qubit_sites[k + 1]
        site = left + 1
        q1, q2 = device.bond_qubits(bond)
        phi_dc = device.phi_dc(bond)
        wc = float(coupler_frequency(phi_dc, c.omega_max))
        if coupler_frequencies is not None and bond in coupler_frequencies:
            wc = float(coupler_frequencies[bond])
        # couplers get the mean anharmonicity of their neighbours
        h += GHZ * wc * op("n", site) + duffing(site, (q1.ec + q2.ec) / 2)

        xl, xc, xr = (op("a", s) + op("adag", s) for s in (left, site, right))
        h += MHZ * (c.g_left * xl @ xc + c.g_right * xc @ xr)
        if include_direct:
            h += MHZ * c.j_direct * xl @ xr

        bond_drives = tuple(d for d in drives if d.coupler == bond)
        if len(bond_drives) > 0:
            drive_terms.append(
                DriveTerm(
                    OperatorMatrix(space, op("n", site)),
                    CouplerModulation(c.omega_max, phi_dc, bond_drives),
                    max(d.frequency for d in bond_drives),
                )
            )
        logger.debug(
            "bond {}: coupler at {:.4f} GHz (Φ_dc = {:.4f} Φ₀), {} drive(s)",
            bond,
            wc,
            phi_dc,
            len(bond_drives),
        )

    return TimeDependentHamiltonian(
        space, OperatorMatrix(space, h), tuple(drive_terms), qubit_sites
    )


def embed_qubit_state(h: TimeDependentHamiltonian, state: QuantumState) -> QuantumState:
    """Lift a state of the simulated qubits (2 levels each) into `h`'s space, couplers in |0>."""
    n = len(h.qubit_sites)
    if state.space.site_dims != (2,) * n:
        raise DimensionError(
            f"expected a state of {n} qubits, got site dims {state.space.site_dims}"
        )
    dims = h.space.site_dims
    idx = tuple(
        slice(0, 2) if s in h.qubit_sites else 0 for s in range(h.space.n_sites)
    )
    if state.kind == "pure":
        full = np.zeros(dims, dtype=complex)
        full[idx] = state.data.reshape((2,) * n)
        return QuantumState(h.space, full.reshape(-1), state.tol)
    full = np.zeros(dims + dims, dtype=complex)
    full[idx + idx] = state.data.reshape((2,) * (2 * n))
    return QuantumState(h.space, full.reshape(h.space.dim, h.space.dim), state.tol)


@dataclass(frozen=True)
class DecoherenceModel:
    """Per-site amplitude damping (√γ₁·a) and pure dephasing (√(2γφ)·n), rates in 1/ns."""

    sites: tuple[int, ...]
    gamma1: tuple[float, ...]
    gamma_phi: tuple[float, ...]

    def __post_init__(self):
        for name in ("sites", "gamma1", "gamma_phi"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not len(self.sites) == len(self.gamma1) == len(self.gamma_phi):
            raise ValueError("sites and rates must have the same length")
        for site, g1, gphi in zip(self.sites, self.gamma1, self.gamma_phi):
            if g1 < 0 or gphi < 0:
                raise NegativeRateError(
                    f"site {site}: decoherence rates must be >= 0, got γ1={g1}, γφ={gphi}"
                )

    @staticmethod
    def none() -> DecoherenceModel:
        return DecoherenceModel((), (), ())

    @staticmethod
    def from_device(
        device: DeviceSpec,
        sites: Optional[Sequence[int]] = None,
        first_qubit: int = 0,
        n_qubits: Optional[int] = None,
        dephasing: Literal["echo", "ramsey"] = "echo",
    ) -> DecoherenceModel:
        """Rates of qubits `first_qubit..`, placed on `sites` (default 0..n-1).

        1/Tφ = 1/T2 - 1/(2·T1), with T2 the echo time by default.
        """
        if n_qubits is None:
            n_qubits = device.n_qubits - first_qubit if sites is None else len(sites)
        sites = tuple(range(n_qubits)) if sites is None else tuple(sites)
        if len(sites) != n_qubits:
            raise ValueError(f"expected {n_qubits} sites, got {len(sites)}")
        gamma1, gamma_phi = [], []
        for k in range(n_qubits):
            q = device.qubits[first_qubit + k]
            t1 = q.t1 * US
            t2 = (q.t2e if dephasing == "echo" else q.t2r) * US
            gphi = 1 / t2 - 1 / (2 * t1)
            if gphi < 0:
                logger.warning(
                    "Q{}: T2 = {} ns exceeds 2·T1 = {} ns, pure dephasing set to 0",
                    first_qubit + k + 1,
                    t2,
                    2 * t1,
                )
                gphi = 0.0
            gamma1.append(1 / t1)
            gamma_phi.append(gphi)
        return DecoherenceModel(sites, tuple(gamma1), tuple(gamma_phi))

    def is_zero(self) -> bool:
        return all(g == 0 for g in self.gamma1 + self.gamma_phi)

    def on_sites(self, sites: Sequence[int]) -> DecoherenceModel:
        """Same rates, moved to `sites` (one per current site, in order)."""
        sites = tuple(sites)
        if len(sites) != len(self.sites):
            raise ValueError(f"expected {len(self.sites)} sites, got {len(sites)}")
        return DecoherenceModel(sites, self.gamma1, self.gamma_phi)

    def site_channels(self, space: HilbertSpace, tau: float) -> list[tuple[int, np.ndarray]]:
        """Exact single-site channels exp(τ·L) as (site, (d, d, d, d) tensor) pairs."""
        out = []
        for site, g1, gphi in zip(self.sites, self.gamma1, self.gamma_phi):
            if not 0 <= site < space.n_sites:
                raise DimensionError(f"decoherence on site {site} outside the space")
            if g1 == 0 and gphi == 0:
                continue
            d = space.site_dims[site]
            ops = [
                math.sqrt(g1) * local_matrix("a", d),
                math.sqrt(2 * gphi) * local_matrix("n", d),
            ]
            eye = np.eye(d)
            # row-major vectorization: vec(AρB) = (A ⊗ Bᵀ)·vec(ρ)
            lv = np.zeros((d * d, d * d), dtype=complex)
            for c in ops:
                cdc = c.conj().T @ c
                lv += np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)
            out.append((site, expm(tau * lv).reshape(d, d, d, d)))
        return out


def _apply_site_channels(
    rho: np.ndarray, dims: tuple[int, ...], channels: list[tuple[int, np.ndarray]]
) -> np.ndarray:
    if len(channels) == 0:
        return rho
    n = len(dims)
    t = rho.reshape(dims + dims)
    for site, ch in channels:
        t = np.tensordot(ch, t, axes=([2, 3], [site, n + site]))
        t = np.moveaxis(t, [0, 1], [site, n + site])
    return t.reshape(rho.shape)


def _exp_stack(stack: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(stack)
    return (v * np.exp(-1j * dt * w)[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))


def _step_unitaries(
    h: TimeDependentHamiltonian,
    t0: float,
    n_steps: int,
    dt: float,
    method: IntegratorMethod,
) -> np.ndarray:
    starts = t0 + dt * np.arange(n_steps)
    if method == "midpoint":
        return _exp_stack(h.matrices(starts + 0.5 * dt), dt)
    h1 = h.matrices(starts + _NODES[0] * dt)
    h2 = h.matrices(starts + _NODES[1] * dt)
    first = _exp_stack(_W2 * h1 + _W1 * h2, dt)
    second = _exp_stack(_W1 * h1 + _W2 * h2, dt)
    return second @ first


def resolve_time_step(
    h: TimeDependentHamiltonian, sample_every: float, max_dt: Optional[float] = None
) -> float:
    """Largest dt dividing `sample_every` evenly that satisfies the resolution guard."""
    if sample_every <= 0:
        raise TimeGridError(f"sampling interval must be positive, got {sample_every}")
    limit = h.max_time_step()
    if max_dt is not None:
        limit = min(limit, max_dt)
    if math.isinf(limit):
        return sample_every
    return sample_every / math.ceil(sample_every / limit - GRID_TOL)


@dataclass(frozen=True)
class _TimeGrid:
    times: np.ndarray
    dt: float
    steps_per_sample: int


def _time_grid(
    h: TimeDependentHamiltonian,
    t_span: tuple[float, float],
    dt: Optional[float],
    sample_every: Optional[float],
) -> _TimeGrid:
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 <= t0:
        raise TimeGridError(f"time span end {t1} must be after its start {t0}")
    if sample_every is None:
        sample_every = t1 - t0
    n_samples = round((t1 - t0) / sample_every)
    if n_samples < 1 or abs(n_samples * sample_every - (t1 - t0)) > GRID_TOL * max(1.0, t1 - t0):
        raise TimeGridError(
            f"sampling interval {sample_every} ns does not divide the span [{t0}, {t1}] ns"
        )
    if dt is None:
        dt = resolve_time_step(h, sample_every)
    limit = h.max_time_step()
    if dt <= 0 or dt > limit * (1 + GRID_TOL):
        raise TimeStepError(
            f"dt = {dt} ns does not resolve the fastest frequency {h.max_frequency:.4f} GHz (need dt <= {limit:.4g} ns)"
        )
    steps = round(sample_every / dt)
    if steps < 1 or abs(steps * dt - sample_every) > GRID_TOL * max(1.0, sample_every):
        raise TimeGridError(f"dt = {dt} ns does not divide the sampling interval {sample_every} ns")
    times = t0 + sample_every * np.arange(n_samples + 1)
    return _TimeGrid(times, sample_every / steps, steps)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray  # ns
    # (n_samples, dim) state vectors or (n_samples, dim, dim) density matrices
    states: np.ndarray
    space: HilbertSpace
    qubit_sites: tuple[int, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(times) == 0:
            raise TimeGridError("a trajectory needs at least one sample time")
        if np.any(np.diff(times) <= 0):
            raise TimeGridError("trajectory times must be strictly increasing")
        if self.states.shape[0] != len(times) or self.states.shape[1] != self.space.dim:
            raise DimensionError(
                f"states of shape {self.states.shape} do not match {len(times)} samples of dimension {self.space.dim}"
            )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "qubit_sites", tuple(self.qubit_sites))

    @property
    def kind(self) -> Literal["pure", "mixed"]:
        return "pure" if self.states.ndim == 2 else "mixed"

    def __len__(self) -> int:
        return len(self.times)

    def state(self, index: int) -> QuantumState:
        return QuantumState(self.space, self.states[index])

    def final_state(self) -> QuantumState:
        return self.state(len(self.times) - 1)

    def probabilities(self) -> np.ndarray:
        """Full-space basis probabilities, shape (n_samples, dim)."""
        if self.kind == "pure":
            return np.abs(self.states) ** 2
        return np.clip(np.einsum("tii->ti", self.states).real, 0.0, None)

    def qubit_labels(self) -> list[str]:
        """Labels of the {0, 1} states of the qubit sites."""
        return HilbertSpace.qubits(len(self.qubit_sites)).labels()

    def populations(self, labels: Optional[Sequence[str]] = None) -> dict[str, np.ndarray]:
        return measure_populations(self, labels)

    def coupler_excitation(self) -> np.ndarray:
        """Probability of finding any coupler outside its ground level."""
        return 1.0 - _project_couplers(self)[1]

    def to_dataframe(self, labels: Optional[Sequence[str]] = None) -> pd.DataFrame:
        pops = self.populations(labels)
        return pd.DataFrame(
            {"time_ns": self.times, **{f"p_{k}": v for k, v in pops.items()}}
        )


def _project_couplers(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    probs = traj.probabilities().reshape((len(traj.times),) + traj.space.site_dims)
    idx = (slice(None),) + tuple(
        slice(None) if s in traj.qubit_sites else 0 for s in range(traj.space.n_sites)
    )
    qubit_probs = probs[idx]
    weight = qubit_probs.reshape(len(traj.times), -1).sum(axis=1)
    return qubit_probs, weight


def measure_populations(
    traj: Trajectory, labels: Optional[Sequence[str]] = None
) -> dict[str, np.ndarray]:
    """Population time series of qubit basis states, couplers projected onto |0> and renormalized.

    With 3-level sites the {0, 1} labels no longer sum to 1; the deficit is leakage.
    """
    qubit_dims = tuple(traj.space.site_dims[s] for s in traj.qubit_sites)
    if labels is None:
        labels = traj.qubit_labels()
    indices = []
    for label in labels:
        if len(label) != len(qubit_dims) or not all(
            c.isdigit() and int(c) < d for c, d in zip(label, qubit_dims)
        ):
            raise BasisLabelError(
                f"`{label}` is not a basis label of {len(qubit_dims)} qubit(s) with dims {qubit_dims}"
            )
        indices.append(tuple(int(c) for c in label))

    qubit_probs, weight = _project_couplers(traj)
    weight = np.where(weight > 0, weight, 1.0)
    out = {}
    for label, idx in zip(labels, indices):
        out[label] = qubit_probs[(slice(None),) + idx] / weight
    return out


def _check_initial(h: TimeDependentHamiltonian, initial: QuantumState):
    if initial.space.site_dims != h.space.site_dims:
        raise DimensionError(
            f"initial state on {initial.space.site_dims} does not match the Hamiltonian's {h.space.site_dims}"
        )


def evolve_schrodinger(
    h: TimeDependentHamiltonian,
    initial: QuantumState,
    t_span: tuple[float, float],
    dt: Optional[float] = None,
    sample_every: Optional[float] = None,
    method: IntegratorMethod = "cfm4",
    metadata: Optional[dict] = None,
) -> Trajectory:
    """Integrate i·dψ/dt = H(t)ψ with exactly unitary fixed steps."""
    if method not in INTEGRATOR_ORDER:
        raise ValueError(f"unknown integrator `{method}`")
    _check_initial(h, initial)
    if initial.kind != "pure":
        raise InvalidStateError("evolve_schrodinger needs a pure initial state")
    grid = _time_grid(h, t_span, dt, sample_every)
    logger.debug(
        "schrodinger: {} samples, dt = {:.4g} ns, {} steps per sample, method {}",
        len(grid.times),
        grid.dt,
        grid.steps_per_sample,
        method,
    )

    dim = h.space.dim
    states = np.empty((len(grid.times), dim), dtype=complex)
    psi = np.array(initial.data)
    states[0] = psi
    if h.is_constant:
        u = _exp_stack(h.static_part.data[None], grid.dt * grid.steps_per_sample)[0]
        for i in range(1, len(grid.times)):
            psi = u @ psi
            states[i] = psi
    else:
        chunk = max(1, _CHUNK_ELEMENTS // (dim * dim))
        for i in range(1, len(grid.times)):
            t = grid.times[i - 1]
            remaining = grid.steps_per_sample
            while remaining > 0:
                n = min(chunk, remaining)
                for u in _step_unitaries(h, t, n, grid.dt, method):
                    psi = u @ psi
                t += n * grid.dt
                remaining -= n
            states[i] = psi

    return Trajectory(
        grid.times,
        states,
        h.space,
        h.qubit_sites,
        {
            **(metadata or {}),
            "method": method,
            "order": INTEGRATOR_ORDER[method],
            "dt_ns": grid.dt,
        },
    )


def evolve_lindblad(
    h: TimeDependentHamiltonian,
    initial: QuantumState,
    decoherence: DecoherenceModel,
    t_span: tuple[float, float],
    dt: Optional[float] = None,
    sample_every: Optional[float] = None,
    method: IntegratorMethod = "cfm4",
    metadata: Optional[dict] = None,
) -> Trajectory:
    """Density-matrix evolution: each step is D(dt/2)·U(dt)·D(dt/2) with exact site channels D."""
    if method not in INTEGRATOR_ORDER:
        raise ValueError(f"unknown integrator `{method}`")
    _check_initial(h, initial)
    grid = _time_grid(h, t_span, dt, sample_every)
    half = decoherence.site_channels(h.space, grid.dt / 2)
    dims = h.space.site_dims
    logger.debug(
        "lindblad: {} samples, dt = {:.4g} ns, {} dissipative site(s)",
        len(grid.times),
        grid.dt,
        len(half),
    )

    dim = h.space.dim
    states = np.empty((len(grid.times), dim, dim), dtype=complex)
    rho = np.array(initial.to_density().data)
    states[0] = rho

    def step(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
        rho = _apply_site_channels(rho, dims, half)
        rho = u @ rho @ u.conj().T
        return _apply_site_channels(rho, dims, half)

    if h.is_constant:
        u = _exp_stack(h.static_part.data[None], grid.dt)[0]
        for i in range(1, len(grid.times)):
            for _ in range(grid.steps_per_sample):
                rho = step(rho, u)
            states[i] = rho
    else:
        chunk = max(1, _CHUNK_ELEMENTS // (dim * dim))
        for i in range(1, len(grid.times)):
            t = grid.times[i - 1]
            remaining = grid.steps_per_sample
            while remaining > 0:
                n = min(chunk, remaining)
                for u in _step_unitaries(h, t, n, grid.dt, method):
                    rho = step(rho, u)
                t += n * grid.dt
                remaining -= n
            states[i] = rho

    return Trajectory(
        grid.times,
        states,
        h.space,
        h.qubit_sites,
        {
            **(metadata or {}),
            "method": method,
            "order": INTEGRATOR_ORDER[method],
            "dt_ns": grid.dt,
            "lindblad": True,
        },
    )


def evolve(
    h: TimeDependentHamiltonian,
    initial: QuantumState,
    t_span: tuple[float, float],
    decoherence: Optional[DecoherenceModel] = None,
    **kwargs,
) -> Trajectory:
    """Closed evolution without a decoherence model, Lindblad otherwise."""
    if decoherence is None:
        return evolve_schrodinger(h, initial, t_span, **kwargs)
    return evolve_lindblad(h, initial, decoherence, t_span, **kwargs)


def sample_grid(t_end: float, n_points: int, t_start: float = 0.0) -> tuple[tuple[float, float], float]:
    """Span and sampling interval of `n_points` equally spaced samples over [t_start, t_end]."""
    if n_points < 2:
        raise TimeGridError(f"need at least 2 sample points, got {n_points}")
    return (t_start, t_end), (t_end - t_start) / (n_points - 1)
