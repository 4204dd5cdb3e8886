"""Result bundles: the CSV tables of one run plus a `manifest.json`."""

from __future__ import annotations

import math
import platform
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version
from numbers import Integral, Real
from pathlib import Path
from typing import Any, Union

import numpy as np
import pandas as pd
import scipy
import serde.csv
import serde.json
from loguru import logger

from fxy.cli.config import ExperimentConfig, write_config

FLOAT_FORMAT = "%.15g"
MANIFEST_FILE = "manifest.json"


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, Integral):
        return str(int(value))
    if isinstance(value, Real):
        value = float(value)
        if math.isnan(value):
            return "nan"
        # avoid a negative zero leaking into the text
        return FLOAT_FORMAT % (value + 0.0)
    return str(value)


def write_csv(table: pd.DataFrame, path: Union[str, Path]) -> None:
    """Header row then one line per table row, floats with 15 significant digits."""
    rows = [[str(c) for c in table.columns]]
    for record in table.itertuples(index=False, name=None):
        rows.append([format_cell(v) for v in record])
    serde.csv.ser(rows, Path(path), mode="w", delimiter=",")


def package_versions() -> dict[str, str]:
    try:
        fxy_version = version("floquet-xy")
    except PackageNotFoundError:
        fxy_version = "unknown"
    return {
        "floquet-xy": fxy_version,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "python": platform.python_version(),
    }


@dataclass(frozen=True)
class ResultBundle:
    outdir: Path
    files: tuple[str, ...]
    manifest: dict = field(default_factory=dict)

    def path(self, name: str) -> Path:
        return self.outdir / name

    def read_table(self, name: str) -> pd.DataFrame:
        return pd.read_csv(self.path(name))


class BundleWriter:
    """Collects the files of a run; every file is written once, from the calling thread."""

    def __init__(self, outdir: Union[str, Path], config: ExperimentConfig):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.files: list[str] = []

    def _register(self, name: str) -> Path:
        if name in self.files:
            raise ValueError(f"`{name}` is already part of the bundle")
        self.files.append(name)
        return self.outdir / name

    def write_table(self, name: str, table: pd.DataFrame) -> Path:
        path = self._register(name)
        write_csv(table, path)
        logger.debug("wrote {} ({} rows)", path, len(table))
        return path

    def write_json(self, name: str, obj: Any) -> Path:
        path = self._register(name)
        serde.json.ser(obj, path, indent=2)
        return path

    def finish(self, wall_time: float) -> ResultBundle:
        write_config(self.config, self.outdir / "config.json")
        manifest = {
            "version": 1,
            "protocol": self.config.protocol,
            "config_hash": self.config.config_hash(),
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "versions": package_versions(),
            "wall_time_s": wall_time,
            "files": list(self.files),
        }
        serde.json.ser(manifest, self.outdir / MANIFEST_FILE, indent=2)
        logger.info("wrote {} files to {}", len(self.files), self.outdir)
        return ResultBundle(self.outdir, tuple(self.files), manifest)
