"""Static device model and the analytic maps between coupler flux drive and sideband strength."""

from __future__ import annotations

import math
from dataclasses import MISSING, dataclass, fields
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

import numpy as np
import orjson
import serde.yaml
from loguru import logger

from fxy.errors import (
    AmplitudeGuardError,
    DeviceValidationError,
    ResonanceError,
    SingularFluxError,
)

SidebandKind = Literal["blue", "red"]

default_device_file = Path(__file__).absolute().parent / "data/table_s1.json"

# flux drives above this amplitude (Φ₀) leave the linear regime of the strength formulas
AMPLITUDE_GUARD = 0.25
SINGULAR_COS = 1e-6


@dataclass(frozen=True)
class QubitSpec:
    omega_min: float  # GHz
    omega_max: float  # GHz
    omega_idle: float  # GHz
    ec: float  # MHz, negative
    t1: float  # µs
    t2r: float  # µs
    t2e: float  # µs
    f0: float
    f1: float

    keys = (
        ("omega_min", "omega_min_ghz"),
        ("omega_max", "omega_max_ghz"),
        ("omega_idle", "omega_idle_ghz"),
        ("ec", "ec_mhz"),
        ("t1", "t1_us"),
        ("t2r", "t2r_us"),
        ("t2e", "t2e_us"),
        ("f0", "f0"),
        ("f1", "f1"),
    )

    def violations(self, path: str) -> list[tuple[str, str]]:
        out = []
        if not self.omega_min <= self.omega_idle <= self.omega_max:
            out.append(
                (
                    f"{path}.omega_idle_ghz",
                    f"expected omega_min <= omega_idle <= omega_max, got {self.omega_min}, {self.omega_idle}, {self.omega_max}",
                )
            )
        if self.omega_min <= 0:
            out.append((f"{path}.omega_min_ghz", "frequency must be positive"))
        for attr, key in (("t1", "t1_us"), ("t2r", "t2r_us"), ("t2e", "t2e_us")):
            if getattr(self, attr) <= 0:
                out.append((f"{path}.{key}", "coherence time must be positive"))
        for attr in ("f0", "f1"):
            if not 0 <= getattr(self, attr) <= 1:
                out.append((f"{path}.{attr}", "readout fidelity must be in [0, 1]"))
        return out

    def to_dict(self) -> dict:
        return {key: getattr(self, attr) for attr, key in self.keys}


@dataclass(frozen=True)
class CouplerSpec:
    omega_max: float  # GHz
    omega_idle: float  # GHz
    g_left: float = 100.0  # MHz
    g_right: float = 100.0  # MHz
    j_direct: float = 6.0  # MHz

    keys = (
        ("omega_max", "omega_max_ghz"),
        ("omega_idle", "omega_idle_ghz"),
        ("g_left", "g_left_mhz"),
        ("g_right", "g_right_mhz"),
        ("j_direct", "j_direct_mhz"),
    )

    def violations(self, path: str, max_qubit_idle: float) -> list[tuple[str, str]]:
        out = []
        if not self.omega_max > self.omega_idle > max_qubit_idle:
            out.append(
                (
                    f"{path}.omega_idle_ghz",
                    f"expected omega_max > omega_idle > adjacent qubit idle ({max_qubit_idle}), got {self.omega_max}, {self.omega_idle}",
                )
            )
        for attr, key in (("g_left", "g_left_mhz"), ("g_right", "g_right_mhz")):
            if getattr(self, attr) <= 0:
                out.append((f"{path}.{key}", "coupling must be positive"))
        return out

    def to_dict(self) -> dict:
        return {key: getattr(self, attr) for attr, key in self.keys}


@dataclass(frozen=True)
class DeviceSpec:
    qubits: tuple[QubitSpec, ...]
    couplers: tuple[CouplerSpec, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "couplers", tuple(self.couplers))
        errors = self.violations()
        if len(errors) > 0:
            raise DeviceValidationError(errors)

    def violations(self) -> list[tuple[str, str]]:
        out: list[tuple[str, str]] = []
        if len(self.qubits) == 0:
            out.append(("qubits", "at least one qubit is required"))
        if len(self.couplers) != max(len(self.qubits) - 1, 0):
            out.append(
                (
                    "couplers",
                    f"expected {len(self.qubits) - 1} couplers for {len(self.qubits)} qubits, got {len(self.couplers)}",
                )
            )
        for i, q in enumerate(self.qubits):
            out.extend(q.violations(f"qubits.{i}"))
        for i, c in enumerate(self.couplers):
            if i + 1 < len(self.qubits):
                max_idle = max(self.qubits[i].omega_idle, self.qubits[i + 1].omega_idle)
                out.extend(c.violations(f"couplers.{i}", max_idle))
        return out

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def bond_qubits(self, bond: int) -> tuple[QubitSpec, QubitSpec]:
        if not 0 <= bond < len(self.couplers):
            raise IndexError(f"bond {bond} out of range for {len(self.couplers)} couplers")
        return self.qubits[bond], self.qubits[bond + 1]

    def phi_dc(self, bond: int) -> float:
        """Static coupler flux (Φ₀) putting the coupler of `bond` at its idle frequency."""
        c = self.couplers[bond]
        return idle_flux(c.omega_idle, c.omega_max)

    def subset(self, first_qubit: int, n_qubits: int) -> DeviceSpec:
        """The sub-chain of `n_qubits` consecutive qubits starting at `first_qubit`."""
        return DeviceSpec(
            self.qubits[first_qubit : first_qubit + n_qubits],
            self.couplers[first_qubit : first_qubit + n_qubits - 1],
            self.name,
        )

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "name": self.name,
            "qubits": [q.to_dict() for q in self.qubits],
            "couplers": [c.to_dict() for c in self.couplers],
        }

    @staticmethod
    def from_dict(record: dict) -> DeviceSpec:
        version = record.get("version", 1)
        if version != 1 and version != "1":
            raise DeviceValidationError([("version", f"unknown version {version}")])

        errors: list[tuple[str, str]] = []

        def parse(cls, items, prefix: str):
            objs = []
            if not isinstance(items, list):
                errors.append((prefix, "expected a list"))
                return objs
            defaults = {f.name: f.default for f in fields(cls) if f.default is not MISSING}
            for i, item in enumerate(items):
                kwargs = {}
                for attr, key in cls.keys:
                    if key in item:
                        value = item[key]
                        if not isinstance(value, (int, float)) or isinstance(value, bool):
                            errors.append((f"{prefix}.{i}.{key}", f"expected a number, got {value!r}"))
                            continue
                        kwargs[attr] = float(value)
                    elif attr in defaults:
                        kwargs[attr] = defaults[attr]
                    else:
                        errors.append((f"{prefix}.{i}.{key}", "missing"))
                for key in item:
                    if key not in {k for _, k in cls.keys}:
                        logger.warning("Unknown key `{}.{}.{}` in device file", prefix, i, key)
                if len(kwargs) == len(cls.keys):
                    objs.append(cls(**kwargs))
            return objs

        qubits = parse(QubitSpec, record.get("qubits"), "qubits")
        couplers = parse(CouplerSpec, record.get("couplers"), "couplers")
        if len(errors) > 0:
            raise DeviceValidationError(errors)
        return DeviceSpec(tuple(qubits), tuple(couplers), record.get("name", ""))


def load_device(path: Union[str, Path, None] = None) -> DeviceSpec:
    """Load a device file (JSON or YAML). Without a path, load the bundled six-qubit device."""
    path = Path(path) if path is not None else default_device_file
    try:
        if path.suffix in (".yml", ".yaml"):
            record = serde.yaml.deser(path)
        else:
            record = orjson.loads(path.read_bytes())
    except (orjson.JSONDecodeError, ValueError) as e:
        raise DeviceValidationError([(str(path), f"cannot parse device file: {e}")]) from e
    if not isinstance(record, dict):
        raise DeviceValidationError([(str(path), "device file must contain an object")])
    device = DeviceSpec.from_dict(record)
    logger.debug("Loaded device `{}` with {} qubits from {}", device.name, device.n_qubits, path)
    return device


def coupler_frequency(phi_c, omega_max: float):
    """Coupler frequency (GHz) at flux `phi_c` (Φ₀): ω_max·√|cos(π·Φ)|."""
    return omega_max * np.sqrt(np.abs(np.cos(np.pi * np.asarray(phi_c, dtype=float))))


def coupler_flux_slope(phi_dc: float, omega_max: float) -> float:
    """∂ω_c/∂Φ (GHz per Φ₀) at `phi_dc`."""
    c = math.cos(math.pi * phi_dc)
    if abs(c) < SINGULAR_COS:
        raise SingularFluxError(
            f"flux {phi_dc} Φ₀ is at the zero-frequency point of the coupler"
        )
    return -0.5 * math.pi * omega_max * math.sin(math.pi * phi_dc) * math.copysign(
        1.0, c
    ) / math.sqrt(abs(c))


def idle_flux(omega_idle: float, omega_max: float) -> float:
    """Flux in [0, 0.5) Φ₀ at which the coupler sits at `omega_idle`."""
    if not 0 < omega_idle <= omega_max:
        raise ValueError(f"idle frequency {omega_idle} must be in (0, {omega_max}]")
    return math.acos((omega_idle / omega_max) ** 2) / math.pi


@dataclass(frozen=True)
class SidebandDrive:
    """One blue or red flux tone on the coupler of `coupler` (bond index)."""

    coupler: int
    kind: SidebandKind
    amplitude: float  # Φ₀
    frequency: float  # GHz
    phase: float = 0.0  # rad
    window: tuple[float, float] = (0.0, 1000.0)  # ns
    ramp: float = 20.0  # ns

    def __post_init__(self):
        if self.kind not in ("blue", "red"):
            raise ValueError(f"unknown sideband kind `{self.kind}`")
        if not 0 <= self.amplitude < AMPLITUDE_GUARD:
            raise AmplitudeGuardError(
                f"drive amplitude {self.amplitude} Φ₀ outside [0, {AMPLITUDE_GUARD})"
            )
        t0, t1 = self.window
        if t1 <= t0:
            raise ValueError(f"drive window end {t1} must be after its start {t0}")
        if self.ramp < 0 or 2 * self.ramp > t1 - t0:
            raise ValueError(f"ramp {self.ramp} ns must be in [0, half the window]")

    def envelope(self, t):
        """Raised-cosine edges of length `ramp`, flat in between, zero outside the window.

        Accepts a scalar or an array of times (ns).
        """
        t = np.asarray(t, dtype=float)
        t0, t1 = self.window
        inside = (t >= t0) & (t <= t1)
        if self.ramp == 0:
            out = np.where(inside, 1.0, 0.0)
        else:
            edge = np.clip(np.minimum(t - t0, t1 - t) / self.ramp, 0.0, 1.0)
            out = np.where(inside, 0.5 * (1 - np.cos(np.pi * edge)), 0.0)
        return out if out.ndim > 0 else float(out)

    def flux(self, t):
        t = np.asarray(t, dtype=float)
        out = (
            self.envelope(t)
            * self.amplitude
            * np.cos(2 * np.pi * self.frequency * t + self.phase)
        )
        return out if np.ndim(out) > 0 else float(out)


def sideband_coefficient(
    kind: SidebandKind, device: DeviceSpec, bond: int, phi_dc: Optional[float] = None
) -> float:
    """Signed sideband strength per unit drive amplitude (MHz per Φ₀) of `bond`.

    Second-order qubit–coupler perturbation theory around the static flux, with both
    qubits at their idle frequencies. The sign follows ∂ω_c/∂Φ and amounts to a π
    offset of the drive phase.
    """
    q1, q2 = device.bond_qubits(bond)
    coupler = device.couplers[bond]
    if phi_dc is None:
        phi_dc = device.phi_dc(bond)

    # everything in MHz from here on
    w1, w2 = q1.omega_idle * 1e3, q2.omega_idle * 1e3
    wc = float(coupler_frequency(phi_dc, coupler.omega_max)) * 1e3
    slope = coupler_flux_slope(phi_dc, coupler.omega_max) * 1e3
    for wq in (w1, w2):
        if abs(wc - wq) < 1e-6:
            raise ResonanceError(
                f"coupler of bond {bond} at {wc} MHz is resonant with a qubit"
            )

    if kind == "blue":
        bracket = 1 / ((wc - w1) * (wc + w2)) + 1 / ((wc + w1) * (wc - w2))
    elif kind == "red":
        bracket = 1 / ((wc - w1) * (wc - w2)) + 1 / ((wc + w1) * (wc + w2))
    else:
        raise ValueError(f"unknown sideband kind `{kind}`")
    return coupler.g_left * coupler.g_right / 4 * slope * bracket


def sideband_strength(
    kind: SidebandKind,
    amplitude: float,
    device: DeviceSpec,
    bond: int,
    phi_dc: Optional[float] = None,
) -> float:
    """Magnitude of the pairing (blue) or hopping (red) strength in MHz, linear in `amplitude`."""
    if amplitude < 0:
        raise ValueError(f"drive amplitude must be >= 0, got {amplitude}")
    return abs(sideband_coefficient(kind, device, bond, phi_dc)) * amplitude


def amplitude_for_strength(
    kind: SidebandKind,
    target_g: float,
    device: DeviceSpec,
    bond: int,
    phi_dc: Optional[float] = None,
    guard: float = AMPLITUDE_GUARD,
) -> float:
    """Drive amplitude (Φ₀) that produces `target_g` MHz; inverse of `sideband_strength`."""
    if target_g < 0:
        raise ValueError(f"target strength must be >= 0, got {target_g}")
    amplitude = target_g / abs(sideband_coefficient(kind, device, bond, phi_dc))
    if amplitude >= guard:
        raise AmplitudeGuardError(
            f"{kind} strength {target_g} MHz on bond {bond} needs amplitude {amplitude:.4f} Φ₀ >= guard {guard}"
        )
    return amplitude


def strength_curve(
    kind: SidebandKind,
    amplitudes: Sequence[float],
    device: DeviceSpec,
    bond: int,
    phi_dc: Optional[float] = None,
) -> np.ndarray:
    coef = abs(sideband_coefficient(kind, device, bond, phi_dc))
    return coef * np.asarray(amplitudes, dtype=float)
