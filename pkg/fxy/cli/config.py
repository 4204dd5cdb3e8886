"""Experiment configuration files.

A config is a JSON (or YAML) object:

    {
      "version": 1,
      "protocol": "sideband_rabi",
      "device": null,
      "seed": 0,
      "output": null,
      "mode": {"model": "effective", "noise": "ideal", "readout": false},
      "params": {"bond": 0, "kind": "blue", "g_mhz": 0.75, "duration_ns": 1000},
      "sweep": {"targets": [{"path": "couplings.0.phi_blue", "scale": 1.0}], "grid": [0, 1]}
    }

`device` is a path relative to the config file (null for the bundled device). Unknown
keys are reported as warnings; every other problem is collected with its key path and
raised together as a ConfigError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Literal, Optional, Union

import orjson
import serde.json
import serde.yaml
from loguru import logger
from typing_extensions import Self

from fxy.device import default_device_file
from fxy.effective import ChainConfig
from fxy.errors import ConfigError, EmptyGridError
from fxy.experiments.sweep import SweepSpec
from fxy.misc.funcs import stable_hash

Protocol = Literal[
    "sideband_rabi",
    "ab_interference",
    "entangled_prep",
    "calibrate",
    "dpt_sweep",
    "custom_evolution",
]
TOP_LEVEL_KEYS = {
    "version",
    "protocol",
    "description",
    "device",
    "seed",
    "output",
    "mode",
    "params",
    "sweep",
}

Check = Callable[[Any], Optional[str]]


def positive(x) -> Optional[str]:
    return None if x > 0 else f"must be > 0, got {x}"


def non_negative(x) -> Optional[str]:
    return None if x >= 0 else f"must be >= 0, got {x}"


def one_of(*choices) -> Check:
    def check(x):
        return None if x in choices else f"must be one of {list(choices)}, got {x!r}"

    return check


def at_least(lo: int) -> Check:
    def check(x):
        return None if x >= lo else f"must be >= {lo}, got {x}"

    return check


def chain_check(x) -> Optional[str]:
    try:
        ChainConfig.from_dict(x)
    except (KeyError, TypeError, ValueError) as e:
        return f"invalid chain: {e}"
    return None


def grid_check(x) -> Optional[str]:
    if isinstance(x, dict):
        if not {"start", "stop", "num"} <= set(x):
            return "a grid object needs `start`, `stop` and `num`"
        return None if x["num"] >= 1 else "grid must not be empty"
    if len(x) == 0:
        return "grid must not be empty"
    return None


def chain_lengths_check(x) -> Optional[str]:
    values = x if isinstance(x, list) else [x]
    if len(values) == 0:
        return "at least one chain length is required"
    for v in values:
        if not isinstance(v, int) or not 2 <= v <= 6:
            return f"chain lengths must be integers in [2, 6], got {v!r}"
    return None


_TYPES = {
    "int": (int,),
    "float": (int, float),
    "str": (str,),
    "bool": (bool,),
    "list": (list,),
    "dict": (dict,),
    "grid": (list, dict),
    "any": (object,),
}


@dataclass(frozen=True)
class Param:
    kind: str
    default: Any = None
    required: bool = False
    check: Optional[Check] = None
    nullable: bool = False


DEFAULT_CHAIN = ChainConfig.uniform(3, 0.75).to_dict()

PROTOCOL_PARAMS: dict[str, dict[str, Param]] = {
    "sideband_rabi": {
        "bond": Param("int", 0, check=non_negative),
        "kind": Param("str", "blue", check=one_of("blue", "red")),
        "g_mhz": Param("float", required=True, check=non_negative),
        "duration_ns": Param("float", required=True, check=positive),
        "n_points": Param("int", 201, check=at_least(2)),
        "ramp_ns": Param("float", 20.0, check=non_negative),
        "frequency_ghz": Param("float", None, nullable=True, check=positive),
        "levels": Param("int", 2, check=one_of(2, 3)),
        "strength_curve_amplitudes": Param("list", None, nullable=True),
    },
    "custom_evolution": {
        "chain": Param("dict", required=True, check=chain_check),
        "initial": Param("str", required=True),
        "duration_ns": Param("float", required=True, check=positive),
        "n_points": Param("int", 201, check=at_least(2)),
    },
    "ab_interference": {
        "chain": Param("dict", DEFAULT_CHAIN, check=chain_check),
        "initial": Param("str", "000"),
        "duration_ns": Param("float", required=True, check=positive),
        "n_points": Param("int", 201, check=at_least(2)),
        "allow_unequal": Param("bool", False),
    },
    "entangled_prep": {
        "x_duration_ns": Param("float", 30.0, check=positive),
        "g_mhz": Param("float", 0.75, check=positive),
        "first_qubit": Param("int", 0, check=non_negative),
    },
    "calibrate": {
        "n_qubits": Param("int", 6, check=at_least(3)),
        "g_mhz": Param("float", 0.75, check=positive),
        "n_phases": Param("int", 24, check=at_least(4)),
        "offsets_blue": Param("list", None, nullable=True),
        "offsets_red": Param("list", None, nullable=True),
    },
    "dpt_sweep": {
        "n": Param("any", 6, check=chain_lengths_check),
        "j_mhz": Param("float", 0.75, check=positive),
        "bz_over_j": Param("grid", required=True, check=grid_check),
        "horizon_ns": Param("float", 500.0, check=positive),
        "sample_every_ns": Param("float", 2.0, check=positive),
        "model": Param("str", "ising", check=one_of("ising", "effective")),
    },
}


@dataclass(frozen=True)
class ModeFlags:
    model: Literal["full", "effective"] = "effective"
    noise: Literal["ideal", "noisy"] = "ideal"
    readout: bool = False

    def to_dict(self) -> dict:
        return {"model": self.model, "noise": self.noise, "readout": self.readout}


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: Protocol
    params: dict
    mode: ModeFlags = field(default_factory=ModeFlags)
    device: Optional[Path] = None
    seed: int = 0
    output: Optional[Path] = None
    sweep: Optional[SweepSpec] = None
    description: str = ""

    @property
    def device_file(self) -> Path:
        return self.device if self.device is not None else default_device_file

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "protocol": self.protocol,
            "description": self.description,
            "device": None if self.device is None else str(self.device),
            "seed": self.seed,
            "output": None if self.output is None else str(self.output),
            "mode": self.mode.to_dict(),
            "params": self.params,
            "sweep": None if self.sweep is None else self.sweep.to_dict(),
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical (sorted-key) JSON of the config."""
        return stable_hash(self.to_dict())

    def with_overrides(
        self, seed: Optional[int] = None, output: Union[str, Path, None] = None
    ) -> Self:
        return replace(
            self,
            seed=self.seed if seed is None else seed,
            output=self.output if output is None else Path(output),
        )

    @staticmethod
    def from_dict(record: Any, base_dir: Optional[Path] = None) -> ExperimentConfig:
        errors: list[tuple[str, str]] = []
        if not isinstance(record, dict):
            raise ConfigError([("", "a config must be an object")])

        for key in record:
            if key not in TOP_LEVEL_KEYS:
                logger.warning("Unknown config key `{}` is ignored", key)

        version = record.get("version", 1)
        if version not in (1, "1"):
            errors.append(("version", f"unknown version {version!r}"))

        protocol = record.get("protocol")
        if protocol is None:
            errors.append(("protocol", "missing"))
        elif protocol not in PROTOCOL_PARAMS:
            errors.append(
                ("protocol", f"unknown protocol {protocol!r}, expected one of {sorted(PROTOCOL_PARAMS)}")
            )

        device = record.get("device")
        if device is not None:
            if not isinstance(device, str):
                errors.append(("device", "must be a path"))
                device = None
            else:
                device = Path(device)
                if not device.is_absolute() and base_dir is not None:
                    device = base_dir / device
                device = device.absolute()
                if not device.exists():
                    errors.append(("device", f"file {device} does not exist"))

        seed = record.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            errors.append(("seed", f"must be a non-negative integer, got {seed!r}"))

        output = record.get("output")
        if output is not None and not isinstance(output, str):
            errors.append(("output", "must be a path"))
            output = None

        mode = _parse_mode(record.get("mode", {}), errors)

        params = {}
        if protocol in PROTOCOL_PARAMS:
            params = _parse_params(PROTOCOL_PARAMS[protocol], record.get("params", {}), errors)

        sweep = None
        if record.get("sweep") is not None:
            sweep = _parse_sweep(record["sweep"], errors)
        if protocol == "ab_interference" and record.get("sweep") is None:
            errors.append(("sweep", "ab_interference needs a sweep"))
        if protocol == "ab_interference" and sweep is not None and "chain" in params:
            for path in sweep.unresolved_paths(params["chain"]):
                errors.append(("sweep.targets", f"path `{path}` not found in params.chain"))
        if protocol == "calibrate" and mode.noise == "noisy":
            errors.append(("mode.noise", "calibrate runs on the ideal effective model only"))

        description = record.get("description", "")
        if len(errors) > 0:
            raise ConfigError(errors)
        return ExperimentConfig(
            protocol,
            params,
            mode,
            device,
            seed,
            None if output is None else Path(output),
            sweep,
            str(description),
        )


def _parse_mode(record: Any, errors: list[tuple[str, str]]) -> ModeFlags:
    if not isinstance(record, dict):
        errors.append(("mode", "must be an object"))
        return ModeFlags()
    for key in record:
        if key not in ("model", "noise", "readout"):
            logger.warning("Unknown config key `mode.{}` is ignored", key)
    model = record.get("model", "effective")
    noise = record.get("noise", "ideal")
    readout = record.get("readout", False)
    if model not in ("full", "effective"):
        errors.append(("mode.model", f"must be `full` or `effective`, got {model!r}"))
    if noise not in ("ideal", "noisy"):
        errors.append(("mode.noise", f"must be `ideal` or `noisy`, got {noise!r}"))
    if not isinstance(readout, bool):
        errors.append(("mode.readout", f"must be a boolean, got {readout!r}"))
    return ModeFlags(model, noise, bool(readout))


def _parse_params(
    schema: dict[str, Param], record: Any, errors: list[tuple[str, str]]
) -> dict:
    if not isinstance(record, dict):
        errors.append(("params", "must be an object"))
        return {}
    for key in record:
        if key not in schema:
            logger.warning("Unknown config key `params.{}` is ignored", key)

    out = {}
    for name, param in schema.items():
        path = f"params.{name}"
        if name not in record:
            if param.required:
                errors.append((path, "missing"))
            else:
                out[name] = param.default
            continue
        value = record[name]
        if value is None:
            if not param.nullable:
                errors.append((path, "must not be null"))
            out[name] = None
            continue
        if not isinstance(value, _TYPES[param.kind]) or (
            param.kind in ("int", "float") and isinstance(value, bool)
        ):
            errors.append((path, f"expected {param.kind}, got {value!r}"))
            continue
        if param.kind == "float" and not math.isfinite(value):
            errors.append((path, f"must be finite, got {value}"))
            continue
        if param.check is not None:
            msg = param.check(value)
            if msg is not None:
                errors.append((path, msg))
                continue
        out[name] = float(value) if param.kind == "float" else value
    return out


def _parse_sweep(record: Any, errors: list[tuple[str, str]]) -> Optional[SweepSpec]:
    if not isinstance(record, dict) or "targets" not in record or "grid" not in record:
        errors.append(("sweep", "needs `targets` and `grid`"))
        return None
    try:
        return SweepSpec.from_dict(record)
    except EmptyGridError:
        errors.append(("sweep.grid", "must not be empty"))
    except (KeyError, TypeError, ValueError) as e:
        errors.append(("sweep", f"invalid sweep: {e}"))
    return None


def read_config_record(path: Union[str, Path]) -> Any:
    path = Path(path)
    try:
        if path.suffix in (".yml", ".yaml"):
            return serde.yaml.deser(path)
        return orjson.loads(path.read_bytes())
    except FileNotFoundError as e:
        raise ConfigError([(str(path), "file not found")]) from e
    except (orjson.JSONDecodeError, ValueError) as e:
        raise ConfigError([(str(path), f"cannot parse: {e}")]) from e


def parse_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    cfg = ExperimentConfig.from_dict(read_config_record(path), base_dir=path.parent)
    logger.debug("Parsed {} config from {} (hash {})", cfg.protocol, path, cfg.config_hash())
    return cfg


def write_config(cfg: ExperimentConfig, path: Union[str, Path]) -> None:
    serde.json.ser(cfg.to_dict(), Path(path), indent=2)
