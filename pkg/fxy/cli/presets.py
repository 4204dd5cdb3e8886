from __future__ import annotations

from pathlib import Path

import orjson

PRESET_DIR = Path(__file__).absolute().parent.parent / "data" / "presets"


def list_presets() -> list[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.json"))


def preset_path(name: str) -> Path:
    """Bundled preset by name, with or without the `.json` suffix."""
    path = PRESET_DIR / (name if name.endswith(".json") else f"{name}.json")
    if not path.exists():
        raise FileNotFoundError(
            f"no bundled preset `{name}`, available: {', '.join(list_presets())}"
        )
    return path


def preset_description(name: str) -> str:
    return orjson.loads(preset_path(name).read_bytes()).get("description", "")
