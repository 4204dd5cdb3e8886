from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from fxy.errors import EmptyGridError
from fxy.misc.funcs import get_path, set_path


@dataclass(frozen=True)
class SweepTarget:
    """A config value set to `scale * x + offset` for each grid value x."""

    path: str
    scale: float = 1.0
    offset: float = 0.0

    def to_dict(self) -> dict:
        return {"path": self.path, "scale": self.scale, "offset": self.offset}

    @staticmethod
    def from_dict(record: dict) -> SweepTarget:
        return SweepTarget(
            str(record["path"]),
            float(record.get("scale", 1.0)),
            float(record.get("offset", 0.0)),
        )


@dataclass(frozen=True)
class SweepSpec:
    """One grid driving one or more linked parameters, addressed by dotted paths into a
    record (e.g. `couplings.0.phi_blue` of a serialized ChainConfig)."""

    targets: tuple[SweepTarget, ...]
    grid: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "grid", tuple(float(x) for x in self.grid))
        if len(self.grid) == 0:
            raise EmptyGridError("a sweep needs at least one grid value")
        if len(self.targets) == 0:
            raise ValueError("a sweep needs at least one target")

    @staticmethod
    def single(path: str, grid: Sequence[float]) -> SweepSpec:
        return SweepSpec((SweepTarget(path),), tuple(grid))

    @staticmethod
    def linspace(path: str, start: float, stop: float, num: int) -> SweepSpec:
        return SweepSpec.single(path, tuple(np.linspace(start, stop, num)))

    def __len__(self) -> int:
        return len(self.grid)

    def unresolved_paths(self, record: dict) -> list[str]:
        out = []
        for target in self.targets:
            try:
                get_path(record, target.path)
            except (KeyError, IndexError, AttributeError, TypeError):
                out.append(target.path)
        return out

    def apply(self, record: dict, value: float) -> dict:
        """A copy of `record` with every target set for grid value `value`."""
        record = copy.deepcopy(record)
        for target in self.targets:
            set_path(record, target.path, target.scale * value + target.offset)
        return record

    def points(self, record: dict) -> list[dict]:
        return [self.apply(record, x) for x in self.grid]

    def to_dict(self) -> dict:
        return {
            "targets": [t.to_dict() for t in self.targets],
            "grid": list(self.grid),
        }

    @staticmethod
    def from_dict(record: dict[str, Any]) -> SweepSpec:
        """`grid` is a list of values or `{"start", "stop", "num"}` for an evenly spaced one."""
        grid = record["grid"]
        if isinstance(grid, dict):
            grid = np.linspace(float(grid["start"]), float(grid["stop"]), int(grid["num"]))
        return SweepSpec(
            tuple(SweepTarget.from_dict(t) for t in record["targets"]),
            tuple(grid),
        )
