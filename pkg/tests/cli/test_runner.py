import math
from pathlib import Path

import pytest
from numpy.testing import assert_allclose

from fxy.cli.config import ExperimentConfig, parse_config
from fxy.cli.presets import list_presets, preset_path
from fxy.cli.runner import output_dir, run


def preset(name: str) -> ExperimentConfig:
    return parse_config(preset_path(name))


def test_custom_evolution(tmp_path: Path):
    bundle = run(preset("fig2d"), tmp_path)
    assert bundle.files == ("trajectory.csv", "expectations.csv")
    header = bundle.path("trajectory.csv").read_text().splitlines()[0]
    assert header == "time_ns,p_00,p_01,p_10,p_11"

    traj = bundle.read_table("trajectory.csv")
    assert len(traj) == 201
    assert_allclose(traj[["p_00", "p_01", "p_10", "p_11"]].sum(axis=1), 1.0, atol=1e-9)

    # |++> does not move under σˣσˣ
    expectations = bundle.read_table("expectations.csv")
    assert list(expectations.columns) == ["time_ns", "sx_0", "sx_1", "sz_0", "sz_1"]
    assert_allclose(expectations["sx_0"], 1.0, atol=1e-9)
    assert_allclose(expectations["sx_1"], 1.0, atol=1e-9)
    assert (tmp_path / "manifest.json").exists()
    assert (tmp_path / "config.json").exists()


def test_sideband_rabi_effective(tmp_path: Path):
    bundle = run(preset("fig2b"), tmp_path)
    assert bundle.files == ("trajectory.csv", "strength_curve.csv")
    traj = bundle.read_table("trajectory.csv")
    assert traj["p_11"].max() == pytest.approx(1.0, abs=1e-3)

    curve = bundle.read_table("strength_curve.csv")
    assert list(curve.columns) == ["amplitude_phi0", "g_blue_mhz", "g_red_mhz"]
    assert curve["g_blue_mhz"].iloc[0] == 0.0
    assert (curve["g_red_mhz"] > curve["g_blue_mhz"]).iloc[1:].all()


def test_dpt_sweep_first_minimum_table(tmp_path: Path):
    cfg = ExperimentConfig.from_dict(
        {
            "protocol": "dpt_sweep",
            "params": {"n": [3, 4], "bz_over_j": [0.0, 1.0], "horizon_ns": 400, "sample_every_ns": 4},
        }
    )
    bundle = run(cfg, tmp_path)
    assert "dpt_n3.csv" in bundle.files and "rate_n4.csv" in bundle.files
    table = bundle.read_table("first_min.csv")
    assert list(table.columns) == ["bz_over_j", "n", "first_min"]
    assert table["n"].tolist() == [3, 3, 4, 4]
    assert ((table["first_min"] >= 0) & (table["first_min"] <= 1)).all()


def test_calibrate_preset(tmp_path: Path):
    bundle = run(preset("calibrate"), tmp_path)
    table = bundle.read_table("calibrate.csv")
    assert len(table) == 4
    assert table["residual_flux_rad"].abs().max() <= 0.01
    assert bundle.manifest["seed"] == 7


def test_entangled_prep_with_readout(tmp_path: Path):
    cfg = ExperimentConfig.from_dict({"protocol": "entangled_prep", "mode": {"readout": True}})
    bundle = run(cfg, tmp_path)
    report = bundle.read_table("prep.csv")
    assert report["fidelity"].iloc[0] >= 1 - 1e-9
    pops = bundle.read_table("populations.csv")
    assert list(pops.columns) == ["state", "population", "population_readout"]
    assert pops["population_readout"].sum() == pytest.approx(1.0)
    assert pops["population_readout"].max() < 0.5


def test_thread_count_gives_identical_bytes(tmp_path: Path):
    cfg = ExperimentConfig.from_dict(
        {
            "protocol": "ab_interference",
            "params": {"duration_ns": 500, "n_points": 51},
            "sweep": {
                "targets": [{"path": "couplings.0.phi_blue", "scale": -1.0}],
                "grid": {"start": -math.pi, "stop": math.pi, "num": 7},
            },
        }
    )
    serial = run(cfg, tmp_path / "serial", n_threads=1)
    threaded = run(cfg, tmp_path / "threaded", n_threads=2)
    assert (
        serial.path("interference.csv").read_bytes()
        == threaded.path("interference.csv").read_bytes()
    )


def test_noisy_mode_reaches_the_dynamics(tmp_path: Path):
    record = {
        "protocol": "ab_interference",
        "params": {"duration_ns": 1000, "n_points": 51},
        "sweep": {"targets": [{"path": "couplings.0.phi_blue"}], "grid": [0.0]},
    }
    ideal = run(ExperimentConfig.from_dict(record), tmp_path / "ideal")
    noisy = run(ExperimentConfig.from_dict({**record, "mode": {"noise": "noisy"}}), tmp_path / "noisy")
    a, b = ideal.read_table("interference.csv"), noisy.read_table("interference.csv")
    assert b["p_101"].max() < a["p_101"].max()
    assert b["fidelity"].iloc[-1] != a["fidelity"].iloc[-1]

    rabi = {"protocol": "sideband_rabi", "params": {"g_mhz": 0.75, "duration_ns": 2000}}
    ideal = run(ExperimentConfig.from_dict(rabi), tmp_path / "rabi_ideal")
    noisy = run(ExperimentConfig.from_dict({**rabi, "mode": {"noise": "noisy"}}), tmp_path / "rabi_noisy")
    p_ideal = ideal.read_table("trajectory.csv")["p_11"]
    p_noisy = noisy.read_table("trajectory.csv")["p_11"]
    assert p_noisy.max() < p_ideal.max()
    assert noisy.read_table("trajectory.csv")[["p_01", "p_10"]].sum(axis=1).iloc[-1] > 1e-3


def test_output_directory(tmp_path: Path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = preset("fig2d")
    assert output_dir(cfg, "explicit") == Path("explicit")
    assert output_dir(cfg.with_overrides(output="configured")) == Path("configured")
    assert output_dir(cfg) == Path("runs/custom_evolution_01")
    assert output_dir(cfg) == Path("runs/custom_evolution_02")

    bundle = run(cfg, seed=9)
    assert bundle.outdir == Path("runs/custom_evolution_03")
    assert bundle.manifest["seed"] == 9


@pytest.mark.slow
def test_fig4d_preset(tmp_path: Path):
    bundle = run(preset("fig4d"), tmp_path, n_threads=4)
    table = bundle.read_table("first_min.csv")
    assert len(table) == 21
    weak = table[table["bz_over_j"] <= 0.5 + 1e-12]
    strong = table[table["bz_over_j"] >= 1.5 - 1e-12]
    assert (weak["first_min"] <= 0.05).all()
    assert (strong["first_min"].diff().dropna() >= -0.02).all()
    assert table["first_min"].iloc[-1] > 0.3

    dpt = bundle.read_table("dpt_n6.csv")
    assert dpt["czz"].between(-1, 5 / 6 + 1e-12).all()
    assert (dpt.loc[dpt["bz_over_j"] >= 2.0 - 1e-12, "czz"].diff().dropna() > 0).all()


@pytest.mark.slow
@pytest.mark.parametrize("name", list_presets())
def test_presets_are_reproducible(tmp_path: Path, name: str):
    first = run(preset(name), tmp_path / "first", n_threads=1)
    second = run(preset(name), tmp_path / "second", n_threads=8)
    assert first.files == second.files
    for file in first.files:
        if file.endswith(".csv"):
            assert first.path(file).read_bytes() == second.path(file).read_bytes(), file
