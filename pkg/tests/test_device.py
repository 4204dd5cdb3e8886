import math

import numpy as np
import orjson
import pytest

from fxy.device import (
    AMPLITUDE_GUARD,
    DeviceSpec,
    SidebandDrive,
    amplitude_for_strength,
    coupler_flux_slope,
    coupler_frequency,
    idle_flux,
    load_device,
    sideband_coefficient,
    sideband_strength,
    strength_curve,
)
from fxy.errors import (
    AmplitudeGuardError,
    DeviceValidationError,
    SingularFluxError,
)


@pytest.fixture(scope="module")
def device() -> DeviceSpec:
    return load_device()


def test_bundled_device(device: DeviceSpec):
    assert device.n_qubits == 6
    assert len(device.couplers) == 5
    assert device.qubits[0].omega_idle == 4.121
    assert device.qubits[1].omega_idle == 4.477
    assert device.couplers[0].omega_max == 6.42
    assert device.qubits[0].f0 == 0.956
    assert device.couplers[0].g_left == 100.0
    assert DeviceSpec.from_dict(device.to_dict()) == device

    sub = device.subset(2, 3)
    assert sub.n_qubits == 3
    assert sub.qubits[0] == device.qubits[2]
    assert sub.couplers == device.couplers[2:4]


def test_device_validation_reports_paths(device: DeviceSpec, tmp_path):
    record = device.to_dict()
    record["qubits"][0]["omega_min_ghz"] = 5.0
    record["qubits"][2]["f1"] = 1.5
    del record["qubits"][3]["t1_us"]
    record["couplers"][1]["g_left_mhz"] = "big"
    path = tmp_path / "device.json"
    path.write_bytes(orjson.dumps(record))

    with pytest.raises(DeviceValidationError) as exc:
        load_device(path)
    assert set(exc.value.paths()) == {
        "qubits.3.t1_us",
        "couplers.1.g_left_mhz",
    }

    del record["qubits"][3]
    record["couplers"][1]["g_left_mhz"] = 100
    with pytest.raises(DeviceValidationError) as exc:
        DeviceSpec.from_dict(record)
    assert "couplers" in exc.value.paths()

    record = device.to_dict()
    record["qubits"][0]["omega_min_ghz"] = 5.0
    record["qubits"][2]["f1"] = 1.5
    with pytest.raises(DeviceValidationError) as exc:
        DeviceSpec.from_dict(record)
    assert exc.value.paths() == ["qubits.0.omega_idle_ghz", "qubits.2.f1"]

    with pytest.raises(DeviceValidationError):
        DeviceSpec.from_dict({**device.to_dict(), "version": 2})


def test_load_device_yaml_and_bad_files(device: DeviceSpec, tmp_path):
    lines = ["name: two qubits", "qubits:"]
    for q in device.qubits[:2]:
        items = list(q.to_dict().items())
        lines.append(f"  - {items[0][0]}: {items[0][1]}")
        lines.extend(f"    {k}: {v}" for k, v in items[1:])
    c = device.couplers[0].to_dict()
    items = list(c.items())
    lines.append("couplers:")
    lines.append(f"  - {items[0][0]}: {items[0][1]}")
    lines.extend(f"    {k}: {v}" for k, v in items[1:])
    path = tmp_path / "device.yml"
    path.write_text("\n".join(lines) + "\n")

    small = load_device(path)
    assert small == DeviceSpec(device.qubits[:2], device.couplers[:1], "two qubits")

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DeviceValidationError):
        load_device(bad)

    bad.write_text("[1, 2]")
    with pytest.raises(DeviceValidationError):
        load_device(bad)


def test_coupler_frequency():
    assert coupler_frequency(0.0, 6.4) == pytest.approx(6.4)
    assert coupler_frequency(0.5, 6.4) == pytest.approx(0.0, abs=1e-7)
    assert coupler_frequency(1 / 3, 6.4) == pytest.approx(6.4 * math.sqrt(0.5))

    grid = np.linspace(-1.0, 1.0, 41)
    np.testing.assert_allclose(coupler_frequency(grid, 6.4), coupler_frequency(-grid, 6.4))
    np.testing.assert_allclose(
        coupler_frequency(grid, 6.4), coupler_frequency(grid + 1.0, 6.4), atol=1e-7
    )


def test_coupler_flux_slope():
    assert coupler_flux_slope(0.0, 6.4) == 0.0
    assert coupler_flux_slope(0.25, 6.4) == pytest.approx(-8.455, abs=1e-3)
    assert coupler_flux_slope(-0.25, 6.4) == pytest.approx(8.455, abs=1e-3)
    with pytest.raises(SingularFluxError):
        coupler_flux_slope(0.5, 6.4)

    h = 1e-6
    for phi in np.linspace(-0.45, 0.45, 19):
        if abs(phi) < 1e-9:
            continue
        fd = (coupler_frequency(phi + h, 6.4) - coupler_frequency(phi - h, 6.4)) / (2 * h)
        assert coupler_flux_slope(phi, 6.4) == pytest.approx(fd, rel=1e-6)


def test_idle_flux(device: DeviceSpec):
    for bond, c in enumerate(device.couplers):
        phi = device.phi_dc(bond)
        assert 0 <= phi < 0.5
        assert coupler_frequency(phi, c.omega_max) == pytest.approx(c.omega_idle)
    assert idle_flux(6.4, 6.4) == 0.0
    with pytest.raises(ValueError):
        idle_flux(7.0, 6.4)


def test_sideband_strength_is_linear(device: DeviceSpec):
    for kind in ("blue", "red"):
        assert sideband_strength(kind, 0.0, device, 0) == 0.0
        g = sideband_strength(kind, 0.01, device, 0)
        assert g > 0
        assert sideband_strength(kind, 0.02, device, 0) == pytest.approx(2 * g, rel=1e-12)
    with pytest.raises(ValueError):
        sideband_strength("blue", -0.1, device, 0)

    amplitudes = [0.0, 0.02, 0.04]
    curve = strength_curve("red", amplitudes, device, 1)
    np.testing.assert_allclose(
        curve, [sideband_strength("red", a, device, 1) for a in amplitudes], rtol=1e-12
    )


def test_sideband_strength_symmetric_under_qubit_swap(device: DeviceSpec):
    q1, q2 = device.qubits[:2]
    swapped = DeviceSpec((q2, q1), device.couplers[:1])
    for kind in ("blue", "red"):
        assert sideband_coefficient(kind, swapped, 0) == pytest.approx(
            sideband_coefficient(kind, device, 0), rel=1e-12
        )


def test_amplitude_for_strength(device: DeviceSpec):
    assert amplitude_for_strength("blue", 0.0, device, 0) == 0.0
    for kind in ("blue", "red"):
        a = amplitude_for_strength(kind, 0.75, device, 0)
        assert 0 < a < AMPLITUDE_GUARD
        assert sideband_strength(kind, a, device, 0) == pytest.approx(0.75, rel=1e-9)
        assert amplitude_for_strength(
            kind, sideband_strength(kind, 0.03, device, 0), device, 0
        ) == pytest.approx(0.03, rel=1e-12)

    # the blue tone needs a much larger flux swing for the same strength
    ratio = amplitude_for_strength("blue", 0.75, device, 0) / amplitude_for_strength(
        "red", 0.75, device, 0
    )
    assert ratio > 3
    for bond in range(len(device.couplers)):
        assert abs(sideband_coefficient("red", device, bond)) > 3 * abs(
            sideband_coefficient("blue", device, bond)
        )

    with pytest.raises(AmplitudeGuardError):
        amplitude_for_strength("blue", 5.0, device, 0)
    with pytest.raises(ValueError):
        amplitude_for_strength("red", -1.0, device, 0)


def test_sideband_drive():
    drive = SidebandDrive(0, "blue", 0.1, 8.24, window=(0.0, 100.0), ramp=20.0)
    assert drive.envelope(-1.0) == 0.0
    assert drive.envelope(0.0) == pytest.approx(0.0)
    assert drive.envelope(10.0) == pytest.approx(0.5)
    assert drive.envelope(50.0) == 1.0
    assert drive.envelope(101.0) == 0.0
    env = drive.envelope(np.array([10.0, 50.0, 90.0]))
    np.testing.assert_allclose(env, [0.5, 1.0, 0.5])
    assert drive.flux(50.0) == pytest.approx(0.1 * math.cos(2 * math.pi * 8.24 * 50.0))

    flat = SidebandDrive(0, "red", 0.01, 0.43, window=(0.0, 10.0), ramp=0.0)
    assert flat.envelope(0.0) == 1.0

    with pytest.raises(AmplitudeGuardError):
        SidebandDrive(0, "blue", 0.3, 8.24)
    with pytest.raises(ValueError):
        SidebandDrive(0, "green", 0.1, 8.24)
    with pytest.raises(ValueError):
        SidebandDrive(0, "red", 0.1, 0.43, window=(10.0, 5.0))
    with pytest.raises(ValueError):
        SidebandDrive(0, "red", 0.1, 0.43, window=(0.0, 10.0), ramp=6.0)
