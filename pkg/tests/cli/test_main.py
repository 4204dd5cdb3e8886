import sys
from pathlib import Path

import orjson
import pytest
from loguru import logger

from fxy.cli.main import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from fxy.cli.presets import list_presets, preset_path


@pytest.fixture(autouse=True)
def restore_logger():
    yield
    logger.remove()
    logger.add(sys.stderr)


def write_json(path: Path, record: dict) -> Path:
    path.write_bytes(orjson.dumps(record))
    return path


def test_list_presets(capsys):
    assert main(["list-presets"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[0] for line in out] == list_presets()
    assert "fig2b" in list_presets() and "fig4d" in list_presets()


def test_validate():
    assert main(["validate", "fig3h"]) == EXIT_OK
    assert main(["validate", "no-such-preset"]) == EXIT_CONFIG


def test_run_preset(tmp_path: Path):
    assert main(["run", "fig2e", "--output", str(tmp_path / "out"), "--seed", "4"]) == EXIT_OK
    manifest = orjson.loads((tmp_path / "out" / "manifest.json").read_bytes())
    assert manifest["seed"] == 4
    assert manifest["files"] == ["trajectory.csv", "expectations.csv"]


def test_invalid_config_exit_code(tmp_path: Path, capsys):
    cfg = write_json(
        tmp_path / "bad.json",
        {"protocol": "sideband_rabi", "params": {"g_mhz": 0.75, "duration_ns": -1}},
    )
    assert main(["run", str(cfg), "--output", str(tmp_path / "out")]) == EXIT_CONFIG
    record = orjson.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "ConfigError"
    assert record["violations"][0]["path"] == "params.duration_ns"
    assert not (tmp_path / "out").exists()


def test_runtime_failure_writes_error_record(tmp_path: Path):
    # a three-qubit start state on a two-qubit chain only fails once the run starts
    record = orjson.loads(preset_path("fig2d").read_bytes())
    record["params"]["initial"] = "000"
    cfg = write_json(tmp_path / "mismatch.json", record)
    outdir = tmp_path / "out"
    assert main(["run", str(cfg), "--output", str(outdir)]) == EXIT_RUNTIME
    error = orjson.loads((outdir / "error.json").read_bytes())
    assert error["error"] == "ValueError"
    assert "2-qubit chain" in error["message"]
    assert error["violations"] == []
