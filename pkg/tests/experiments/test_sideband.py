import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fxy.device import load_device
from fxy.errors import AmplitudeGuardError
from fxy.experiments.sideband import (
    bond_decoherence,
    compare_full_vs_effective,
    dressed_transition_frequency,
    fit_oscillation_frequency,
    run_sideband_rabi,
)


@pytest.fixture(scope="module")
def device():
    return load_device()


def test_effective_blue_rabi_is_sinusoidal(device):
    traj = run_sideband_rabi(device, 0, "blue", 0.75, 1000.0, n_points=201)
    pops = traj.populations()
    expected = np.sin(2 * math.pi * 0.75e-3 * traj.times) ** 2
    assert_allclose(pops["11"], expected, atol=1e-9)
    assert_allclose(pops["00"], 1 - expected, atol=1e-9)
    assert_allclose(pops["01"] + pops["10"], 0.0, atol=1e-12)
    assert traj.metadata["kind"] == "blue"

    # one full period is 1 / (2·0.75 MHz)
    period = 1e3 / (2 * 0.75)
    assert period == pytest.approx(666.7, abs=0.1)
    assert fit_oscillation_frequency(traj.times, pops["11"]) == pytest.approx(1.5, rel=1e-3)


def test_effective_red_rabi(device):
    traj = run_sideband_rabi(device, 1, "red", 0.75, 500.0, n_points=101)
    pops = traj.populations()
    assert pops["10"][0] == pytest.approx(1.0)
    assert_allclose(pops["01"], np.sin(2 * math.pi * 0.75e-3 * traj.times) ** 2, atol=1e-9)
    assert_allclose(pops["00"] + pops["11"], 0.0, atol=1e-12)


def test_zero_strength_is_flat(device):
    for mode in ("effective", "full"):
        traj = run_sideband_rabi(device, 0, "red", 0.0, 50.0, mode=mode, n_points=11)
        assert_allclose(traj.populations()["10"], 1.0, atol=1e-2)
    traj = run_sideband_rabi(device, 0, "red", 0.0, 1000.0, n_points=11)
    assert_allclose(traj.populations()["10"], 1.0, atol=1e-15)


def test_noisy_effective_rabi(device):
    ideal = run_sideband_rabi(device, 0, "blue", 0.75, 4000.0, n_points=401)
    noisy = run_sideband_rabi(
        device, 0, "blue", 0.75, 4000.0, n_points=401, decoherence=bond_decoherence(device, 0)
    )
    assert noisy.kind == "mixed"
    assert noisy.metadata["noisy"] and not ideal.metadata["noisy"]
    assert_allclose(np.einsum("tii->t", noisy.states).real, 1.0, atol=1e-10)

    p11 = noisy.populations()["11"]
    assert p11.max() < ideal.populations()["11"].max()
    # T1 decay out of |11> leaves the odd-parity states populated
    assert (noisy.populations()["01"] + noisy.populations()["10"])[-1] > 0.01


def test_noisy_full_rabi_places_rates_on_qubit_sites(device):
    traj = run_sideband_rabi(
        device,
        0,
        "red",
        0.0,
        50.0,
        mode="full",
        n_points=11,
        decoherence=bond_decoherence(device, 0),
    )
    assert traj.kind == "mixed"
    assert traj.space.site_dims == (2, 2, 2)
    assert_allclose(np.einsum("tii->t", traj.states).real, 1.0, atol=1e-10)
    assert_allclose(traj.populations()["10"], 1.0, atol=1e-2)


def test_invalid_requests(device):
    with pytest.raises(AmplitudeGuardError):
        run_sideband_rabi(device, 0, "blue", 5.0, 100.0, mode="full")
    with pytest.raises(ValueError):
        run_sideband_rabi(device, 0, "blue", -0.1, 100.0)
    with pytest.raises(ValueError):
        run_sideband_rabi(device, 0, "green", 0.75, 100.0)
    with pytest.raises(ValueError):
        run_sideband_rabi(device, 0, "blue", 0.75, 100.0, mode="hybrid")


def test_dressed_transition_frequencies(device):
    q1, q2 = device.qubits[:2]
    blue = dressed_transition_frequency(device, 0, "blue")
    red = dressed_transition_frequency(device, 0, "red")
    assert blue == pytest.approx(q1.omega_idle + q2.omega_idle, abs=0.1)
    assert red == pytest.approx(abs(q2.omega_idle - q1.omega_idle), abs=0.1)


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["blue", "red"])
def test_full_model_tracks_effective_model(device, kind):
    cmp = compare_full_vs_effective(device, 0, kind, 0.75, duration=1000.0, n_points=501)
    assert cmp.max_deviation <= 0.1
    assert cmp.frequency_ratio == pytest.approx(1.0, rel=0.1)
    assert cmp.full.metadata["amplitude_phi0"] > 0
