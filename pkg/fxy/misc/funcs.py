from __future__ import annotations

import glob
import hashlib
import re
from pathlib import Path
from typing import Any, Union

import orjson


def canonical_json(obj: Any) -> bytes:
    """Serialize `obj` to JSON with sorted keys so equal objects give equal bytes."""
    return orjson.dumps(obj, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)


def stable_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj)).hexdigest()


def get_path(obj: Any, path: str) -> Any:
    """Follow a dotted accessor path, e.g. `bonds.0.phi_blue`. Each accessor is either a
    number (list index) or a key/attribute name."""
    ptr = obj
    for accessor in path.split("."):
        if accessor.isdigit():
            ptr = ptr[int(accessor)]
        elif isinstance(ptr, dict):
            ptr = ptr[accessor]
        else:
            ptr = getattr(ptr, accessor)
    return ptr


def set_path(obj: Union[dict, list], path: str, value: Any) -> None:
    """Set the value at a dotted accessor path of a nested dict/list, in place."""
    *parents, last = path.split(".")
    ptr = get_path(obj, ".".join(parents)) if len(parents) > 0 else obj
    if last.isdigit():
        ptr[int(last)] = value
    elif isinstance(ptr, dict):
        if last not in ptr:
            raise KeyError(path)
        ptr[last] = value
    else:
        raise KeyError(path)


def get_latest_version(file_pattern: Union[str, Path]) -> int:
    """Return the largest trailing integer among the names matching the pattern, 0 if none."""
    versions = []
    for file in glob.glob(str(file_pattern)):
        match = re.match(r".*?(\d+)$", Path(file).name)
        if match is not None:
            versions.append(int(match.group(1)))
    return max(versions, default=0)


def get_incremental_path(path: Union[str, Path], create_if_missing: bool = True) -> Path:
    """Get the next free run directory: `runs/fig2b` -> `runs/fig2b_01`, `runs/fig2b_02`, ..."""
    path = Path(str(path))
    version = get_latest_version(path.parent / f"{path.name}_*") + 1
    newpath = path.parent / f"{path.name}_{version:02d}"
    if create_if_missing:
        newpath.mkdir(parents=True)
    return newpath
