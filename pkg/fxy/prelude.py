import fxy.experiments.prelude as E
from fxy.device import DeviceSpec, SidebandDrive, load_device, sideband_strength
from fxy.dynamics import (
    DecoherenceModel,
    TimeDependentHamiltonian,
    Trajectory,
    build_lab_hamiltonian,
    evolve_lindblad,
    evolve_schrodinger,
    measure_populations,
)
from fxy.effective import (
    ChainConfig,
    EffectiveCoupling,
    anisotropy_decompose,
    effective_chain_hamiltonian,
    effective_pair_hamiltonian,
    gauge_fix,
    ising_hamiltonian,
    loop_flux,
)
from fxy.qop import HilbertSpace, OperatorMatrix, QuantumState, fidelity, site_operator

__all__ = [
    "E",
    "DeviceSpec",
    "SidebandDrive",
    "load_device",
    "sideband_strength",
    "DecoherenceModel",
    "TimeDependentHamiltonian",
    "Trajectory",
    "build_lab_hamiltonian",
    "evolve_lindblad",
    "evolve_schrodinger",
    "measure_populations",
    "ChainConfig",
    "EffectiveCoupling",
    "anisotropy_decompose",
    "effective_chain_hamiltonian",
    "effective_pair_hamiltonian",
    "gauge_fix",
    "ising_hamiltonian",
    "loop_flux",
    "HilbertSpace",
    "OperatorMatrix",
    "QuantumState",
    "fidelity",
    "site_operator",
]
