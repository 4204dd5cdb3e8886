"""Effective (rotating-frame) Hamiltonians of sideband-driven chains.

Each bond (i, i+1) carries

    g_b·e^{-iφ_b}·σᵢ⁺σᵢ₊₁⁺ + g_r·e^{-iφ_r}·σᵢ⁺σᵢ₊₁⁻ + h.c.

with the ordering fixed as written on every bond, and the chain adds (Δ_b/4)·Σσᶻ for a
common blue-drive detuning Δ_b. Strengths are in MHz, phases in rad; matrices are
converted to rad/ns here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from typing_extensions import Self

from fxy.qop import HilbertSpace, OperatorMatrix, site_operator
from fxy.units import MHZ


def canonical_phase(phi: float) -> float:
    """Map a phase to (-π, π]."""
    return phi - 2 * math.pi * math.ceil((phi - math.pi) / (2 * math.pi))


@dataclass(frozen=True)
class EffectiveCoupling:
    bond: int
    g_blue: float = 0.0  # MHz
    phi_blue: float = 0.0  # rad
    g_red: float = 0.0  # MHz
    phi_red: float = 0.0  # rad

    def __post_init__(self):
        if self.g_blue < 0 or self.g_red < 0:
            raise ValueError(
                f"bond {self.bond}: strengths must be >= 0, got {self.g_blue}, {self.g_red}"
            )
        object.__setattr__(self, "phi_blue", canonical_phase(self.phi_blue))
        object.__setattr__(self, "phi_red", canonical_phase(self.phi_red))

    def to_dict(self) -> dict:
        return {
            "bond": self.bond,
            "g_blue_mhz": self.g_blue,
            "phi_blue": self.phi_blue,
            "g_red_mhz": self.g_red,
            "phi_red": self.phi_red,
        }

    @staticmethod
    def from_dict(record: dict) -> EffectiveCoupling:
        return EffectiveCoupling(
            bond=int(record["bond"]),
            g_blue=float(record.get("g_blue_mhz", 0.0)),
            phi_blue=float(record.get("phi_blue", 0.0)),
            g_red=float(record.get("g_red_mhz", 0.0)),
            phi_red=float(record.get("phi_red", 0.0)),
        )


@dataclass(frozen=True)
class ChainConfig:
    n_qubits: int
    couplings: tuple[EffectiveCoupling, ...]
    detuning_blue: float = 0.0  # MHz

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(self.couplings))
        if self.n_qubits < 2:
            raise ValueError(f"a chain needs at least 2 qubits, got {self.n_qubits}")
        if len(self.couplings) != self.n_qubits - 1:
            raise ValueError(
                f"expected {self.n_qubits - 1} couplings for {self.n_qubits} qubits, got {len(self.couplings)}"
            )
        for i, c in enumerate(self.couplings):
            if c.bond != i:
                raise ValueError(f"coupling at position {i} is for bond {c.bond}")

    @staticmethod
    def uniform(
        n_qubits: int,
        g: float,
        detuning_blue: float = 0.0,
        phi_blue: Sequence[float] = (),
        phi_red: Sequence[float] = (),
    ) -> ChainConfig:
        """Equal blue and red strengths `g` on every bond, phases zero unless given."""
        return ChainConfig(
            n_qubits,
            tuple(
                EffectiveCoupling(
                    i,
                    g,
                    phi_blue[i] if i < len(phi_blue) else 0.0,
                    g,
                    phi_red[i] if i < len(phi_red) else 0.0,
                )
                for i in range(n_qubits - 1)
            ),
            detuning_blue,
        )

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace.qubits(self.n_qubits)

    def replace_coupling(self, bond: int, **changes) -> Self:
        couplings = list(self.couplings)
        couplings[bond] = replace(couplings[bond], **changes)
        return replace(self, couplings=tuple(couplings))

    def sub_chain(self, first_qubit: int, n_qubits: int) -> ChainConfig:
        """Chain of `n_qubits` consecutive qubits, bonds renumbered from 0."""
        return ChainConfig(
            n_qubits,
            tuple(
                replace(c, bond=c.bond - first_qubit)
                for c in self.couplings[first_qubit : first_qubit + n_qubits - 1]
            ),
            self.detuning_blue,
        )

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "n_qubits": self.n_qubits,
            "detuning_blue_mhz": self.detuning_blue,
            "couplings": [c.to_dict() for c in self.couplings],
        }

    @staticmethod
    def from_dict(record: dict) -> ChainConfig:
        version = record.get("version", 1)
        if version != 1 and version != "1":
            raise ValueError(f"Unknown version: {version}")
        return ChainConfig(
            int(record["n_qubits"]),
            tuple(EffectiveCoupling.from_dict(c) for c in record["couplings"]),
            float(record.get("detuning_blue_mhz", 0.0)),
        )


def _bond_terms(
    c: EffectiveCoupling, space: HilbertSpace, i: int, j: int
) -> np.ndarray:
    spi = site_operator("sp", i, space).data
    spj = site_operator("sp", j, space).data
    smj = site_operator("sm", j, space).data
    h = c.g_blue * np.exp(-1j * c.phi_blue) * (spi @ spj) + c.g_red * np.exp(
        -1j * c.phi_red
    ) * (spi @ smj)
    return MHZ * (h + h.conj().T)


def effective_pair_hamiltonian(c: EffectiveCoupling) -> OperatorMatrix:
    space = HilbertSpace.qubits(2)
    return OperatorMatrix(space, _bond_terms(c, space, 0, 1))


def effective_chain_hamiltonian(cfg: ChainConfig) -> OperatorMatrix:
    space = cfg.space
    h = np.zeros((space.dim, space.dim), dtype=complex)
    for i in range(cfg.n_qubits):
        h += (MHZ * cfg.detuning_blue / 4) * site_operator("z", i, space).data
    for c in cfg.couplings:
        h += _bond_terms(c, space, c.bond, c.bond + 1)
    return OperatorMatrix(space, h)


def ising_hamiltonian(n: int, j: float, bz: float) -> OperatorMatrix:
    """Open transverse-field Ising chain J·Σσˣσˣ + B_z·Σσᶻ (J, B_z in MHz)."""
    if n < 2:
        raise ValueError(f"an Ising chain needs at least 2 sites, got {n}")
    space = HilbertSpace.qubits(n)
    xs = [site_operator("x", i, space).data for i in range(n)]
    h = sum(j * xs[i] @ xs[i + 1] for i in range(n - 1))
    h = h + sum(bz * site_operator("z", i, space).data for i in range(n))
    return OperatorMatrix(space, MHZ * h)


@dataclass(frozen=True)
class Anisotropy:
    """Coefficients (MHz) of σˣσˣ, σʸσʸ, σˣσʸ, σʸσˣ."""

    jxx: float
    jyy: float
    jxy: float
    jyx: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.jxx, self.jyy, self.jxy, self.jyx)

    def reconstruct(self) -> OperatorMatrix:
        space = HilbertSpace.qubits(2)
        x = [site_operator("x", i, space).data for i in range(2)]
        y = [site_operator("y", i, space).data for i in range(2)]
        h = (
            self.jxx * x[0] @ x[1]
            + self.jyy * y[0] @ y[1]
            + self.jxy * x[0] @ y[1]
            + self.jyx * y[0] @ x[1]
        )
        return OperatorMatrix(space, MHZ * h)


def anisotropy_decompose(c: EffectiveCoupling) -> Anisotropy:
    # σ⁺ = (σˣ - iσʸ)/2
    gb, pb, gr, pr = c.g_blue, c.phi_blue, c.g_red, c.phi_red
    return Anisotropy(
        jxx=(gb * math.cos(pb) + gr * math.cos(pr)) / 2,
        jyy=(gr * math.cos(pr) - gb * math.cos(pb)) / 2,
        jxy=(gr * math.sin(pr) - gb * math.sin(pb)) / 2,
        jyx=(-gb * math.sin(pb) - gr * math.sin(pr)) / 2,
    )


def project_anisotropy(h: OperatorMatrix) -> Anisotropy:
    """Read the four transverse coefficients off a two-qubit matrix by ⟨σᵃσᵇ, H⟩/4."""
    x = [site_operator("x", i, h.space).data for i in range(2)]
    y = [site_operator("y", i, h.space).data for i in range(2)]

    def coef(p):
        return float(np.trace(p @ h.data).real / 4 / MHZ)

    return Anisotropy(
        coef(x[0] @ x[1]), coef(y[0] @ y[1]), coef(x[0] @ y[1]), coef(y[0] @ x[1])
    )


def loop_flux(c12: EffectiveCoupling, c23: EffectiveCoupling) -> float:
    """Gauge-invariant flux (rad, in (-π, π]) of the four-state loop spanned by two adjacent bonds."""
    if c23.bond != c12.bond + 1:
        raise ValueError(f"bonds {c12.bond} and {c23.bond} are not adjacent")
    return canonical_phase(c12.phi_red + c23.phi_blue + c23.phi_red - c12.phi_blue)


def chain_loop_fluxes(cfg: ChainConfig) -> list[float]:
    return [
        loop_flux(cfg.couplings[i], cfg.couplings[i + 1])
        for i in range(len(cfg.couplings) - 1)
    ]


def gauge_transform(cfg: ChainConfig, thetas: Sequence[float]) -> ChainConfig:
    """Rewrite the chain in terms of σⱼ⁺' = e^{iθⱼ}σⱼ⁺ (a diagonal unitary frame change)."""
    if len(thetas) != cfg.n_qubits:
        raise ValueError(f"expected {cfg.n_qubits} angles, got {len(thetas)}")
    couplings = tuple(
        replace(
            c,
            phi_blue=c.phi_blue + thetas[c.bond] + thetas[c.bond + 1],
            phi_red=c.phi_red + thetas[c.bond] - thetas[c.bond + 1],
        )
        for c in cfg.couplings
    )
    return replace(cfg, couplings=couplings)


def gauge_fix(cfg: ChainConfig) -> tuple[ChainConfig, list[float]]:
    """Local frame in which every blue phase and the first red phase vanish.

    The red phases left over are fixed by the loop fluxes (bond 1 carries the flux of
    the first loop), so a chain with zero fluxes becomes phase free, i.e. pure XX for
    equal strengths.
    """
    c0 = cfg.couplings[0]
    thetas = [-(c0.phi_blue + c0.phi_red) / 2, -(c0.phi_blue - c0.phi_red) / 2]
    for c in cfg.couplings[1:]:
        thetas.append(-c.phi_blue - thetas[c.bond])
    return gauge_transform(cfg, thetas), thetas


def gauge_diagonal(thetas: Sequence[float], space: Optional[HilbertSpace] = None) -> OperatorMatrix:
    """Diagonal unitary Πⱼ exp(iθⱼ nⱼ) implementing `gauge_transform`."""
    space = space or HilbertSpace.qubits(len(thetas))
    phases = np.zeros(space.dim)
    for j, theta in enumerate(thetas):
        phases += theta * np.diag(site_operator("n", j, space).data).real
    return OperatorMatrix(space, np.diag(np.exp(1j * phases)))
