"""Loop-flux calibration of a sideband-driven chain.

Bond phases set on the control electronics reach the qubits with unknown offsets.
Each consecutive triple is probed on its own (only its two bonds driven, from |000>),
one blue phase is swept, and the AB interference pattern of the |101> analog is fit to
A + B·cos(φ - φ₀). The pattern peaks where the triple's loop flux vanishes, so φ₀ is
the corrected setting. Triples are calibrated in chain order, adjusting the blue phase
of the first bond for the first triple and of the second bond for every later one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from scipy.optimize import curve_fit

from fxy.effective import (
    ChainConfig,
    anisotropy_decompose,
    canonical_phase,
    chain_loop_fluxes,
    effective_chain_hamiltonian,
    gauge_fix,
)
from fxy.errors import CalibrationFitError
from fxy.qop import QuantumState, matrix_exponential_propagator

N_PHASES = 24
MIN_AMPLITUDE = 0.1
MIN_R2 = 0.8


class LoopPhaseProbe:
    """Simulated chain with hidden per-bond phase offsets.

    The calibrator only calls `measure`; `true_chain` exists for checking results.
    """

    def __init__(self, offsets_blue: Sequence[float], offsets_red: Sequence[float]):
        if len(offsets_blue) != len(offsets_red):
            raise ValueError("expected one blue and one red offset per bond")
        self._offsets_blue = tuple(float(x) for x in offsets_blue)
        self._offsets_red = tuple(float(x) for x in offsets_red)
        self.n_measurements = 0

    @staticmethod
    def random(n_bonds: int, seed: Optional[int] = None) -> LoopPhaseProbe:
        """Offsets drawn uniformly from (-π, π]."""
        rng = np.random.default_rng(seed)
        offsets = rng.uniform(-math.pi, math.pi, size=(2, n_bonds))
        return LoopPhaseProbe(offsets[0], offsets[1])

    @property
    def n_bonds(self) -> int:
        return len(self._offsets_blue)

    def true_chain(self, settings: ChainConfig) -> ChainConfig:
        if len(settings.couplings) != self.n_bonds:
            raise ValueError(
                f"settings have {len(settings.couplings)} bonds, the probe has {self.n_bonds}"
            )
        cfg = settings
        for c in settings.couplings:
            cfg = cfg.replace_coupling(
                c.bond,
                phi_blue=c.phi_blue + self._offsets_blue[c.bond],
                phi_red=c.phi_red + self._offsets_red[c.bond],
            )
        return cfg

    def measure(
        self, settings: ChainConfig, triple: int, t: float, label: str = "101"
    ) -> float:
        """Population of `label` on qubits triple..triple+2 after `t` ns, starting from |000>."""
        self.n_measurements += 1
        sub = self.true_chain(settings).sub_chain(triple, 3)
        sub = ChainConfig(3, sub.couplings, 0.0)
        u = matrix_exponential_propagator(effective_chain_hamiltonian(sub), t)
        state = QuantumState.basis(sub.space, "000").evolve(u)
        return float(state.probabilities()[sub.space.index_of(label)])


@dataclass(frozen=True)
class CosineFit:
    offset: float
    amplitude: float
    phase: float  # rad, location of the maximum
    r2: float


def fit_cosine(phases: np.ndarray, values: np.ndarray) -> CosineFit:
    """Least-squares fit of A + B·cos(φ - φ₀) with B >= 0."""
    phases = np.asarray(phases, dtype=float)
    values = np.asarray(values, dtype=float)
    design = np.stack([np.ones_like(phases), np.cos(phases), np.sin(phases)], axis=1)
    (a, bc, bs), *_ = np.linalg.lstsq(design, values, rcond=None)

    def model(x, a, b, phi0):
        return a + b * np.cos(x - phi0)

    p0 = [a, math.hypot(bc, bs), math.atan2(bs, bc)]
    (a, b, phi0), _ = curve_fit(model, phases, values, p0=p0)
    if b < 0:
        b, phi0 = -b, phi0 + math.pi
    residual = values - model(phases, a, b, phi0)
    total = np.sum((values - values.mean()) ** 2)
    r2 = 1.0 - float(np.sum(residual**2) / total) if total > 0 else 0.0
    return CosineFit(float(a), float(b), canonical_phase(float(phi0)), r2)


@dataclass(frozen=True)
class TripleCalibration:
    triple: int
    bond: int
    before: float  # rad, setting before the sweep
    after: float  # rad, fitted setting
    fit: CosineFit

    @property
    def correction(self) -> float:
        return canonical_phase(self.after - self.before)


@dataclass(frozen=True)
class CalibrationResult:
    settings: ChainConfig
    triples: tuple[TripleCalibration, ...]
    probe_time: float  # ns
    # filled in when a probe is available to check against
    residual_flux: tuple[float, ...] = field(default=())
    xx_fraction: tuple[float, ...] = field(default=())

    def corrections(self) -> list[float]:
        return [t.correction for t in self.triples]

    def to_dataframe(self) -> pd.DataFrame:
        """One row per calibrated triple, columns as in `calibrate.csv`."""
        rows = []
        for i, t in enumerate(self.triples):
            rows.append(
                {
                    "triple": t.triple,
                    "bond": t.bond,
                    "phase": "blue",
                    "correction_rad": t.correction,
                    "residual_flux_rad": self.residual_flux[i] if i < len(self.residual_flux) else float("nan"),
                    "xx_fraction": self.xx_fraction[t.bond] if t.bond < len(self.xx_fraction) else float("nan"),
                }
            )
        return pd.DataFrame(
            rows,
            columns=["triple", "bond", "phase", "correction_rad", "residual_flux_rad", "xx_fraction"],
        )


def adjusted_bond(triple: int) -> int:
    return 0 if triple == 0 else triple + 1


def probe_time(g: float) -> float:
    """First constructive peak of the four-state loop, 1/(4g) (ns, g in MHz)."""
    return 1e3 / (4 * g)


def calibrate_loop_phases(
    probe: LoopPhaseProbe,
    settings: ChainConfig,
    n_phases: int = N_PHASES,
    t: Optional[float] = None,
) -> CalibrationResult:
    """Return settings whose true loop fluxes are zero, using only `probe.measure`."""
    if settings.n_qubits < 3:
        raise ValueError("loop calibration needs at least 3 qubits")
    if t is None:
        t = probe_time(settings.couplings[0].g_blue)
    phases = 2 * math.pi * np.arange(n_phases) / n_phases

    triples = []
    for triple in range(settings.n_qubits - 2):
        bond = adjusted_bond(triple)
        before = settings.couplings[bond].phi_blue
        values = np.array(
            [
                probe.measure(settings.replace_coupling(bond, phi_blue=p), triple, t)
                for p in phases
            ]
        )
        try:
            fit = fit_cosine(phases, values)
        except RuntimeError as e:
            raise CalibrationFitError(triple, f"least-squares fit did not converge: {e}") from e
        if fit.amplitude < MIN_AMPLITUDE or fit.r2 < MIN_R2:
            raise CalibrationFitError(
                triple,
                f"interference pattern is not sinusoidal (B = {fit.amplitude:.3f}, R² = {fit.r2:.3f})",
            )
        settings = settings.replace_coupling(bond, phi_blue=fit.phase)
        triples.append(TripleCalibration(triple, bond, before, fit.phase, fit))
        logger.debug(
            "triple {}: bond {} blue phase {:.4f} -> {:.4f} (B = {:.3f}, R² = {:.4f})",
            triple,
            bond,
            before,
            fit.phase,
            fit.amplitude,
            fit.r2,
        )
    return CalibrationResult(settings, tuple(triples), t)


def verify_calibration(probe: LoopPhaseProbe, result: CalibrationResult) -> CalibrationResult:
    """Attach the true residual loop fluxes and the per-bond XX fraction after gauge fixing."""
    true = probe.true_chain(result.settings)
    fixed, _ = gauge_fix(true)
    xx = []
    for c in fixed.couplings:
        g = max(c.g_blue, c.g_red)
        xx.append(anisotropy_decompose(c).jxx / g if g > 0 else 0.0)
    return CalibrationResult(
        result.settings,
        result.triples,
        result.probe_time,
        tuple(chain_loop_fluxes(true)),
        tuple(xx),
    )
