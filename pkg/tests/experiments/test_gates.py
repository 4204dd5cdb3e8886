import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fxy.experiments.gates import (
    entangling_circuit,
    hopping_duration,
    iswap,
    prepare_entangled_state,
    sqrt_iswap,
    sqrt_iswap_hamiltonian,
    x_gate,
)
from fxy.qop import HilbertSpace, QuantumState, matrix_exponential_propagator


def assert_unitary(u):
    assert_allclose(u.data @ u.data.conj().T, np.eye(u.data.shape[0]), atol=1e-14)


def test_gate_conventions():
    space = HilbertSpace.qubits(2)
    u = sqrt_iswap()
    assert_unitary(u)
    assert_unitary(x_gate())
    assert_allclose(x_gate().data, [[0, 1], [1, 0]])

    s01 = QuantumState.basis(space, "01").evolve(u)
    expected = QuantumState.superposition(space, {"01": 1.0, "10": 1j})
    assert_allclose(s01.data, expected.data, atol=1e-14)

    twice = QuantumState.basis(space, "01").evolve(iswap())
    assert_allclose(twice.data, 1j * QuantumState.basis(space, "10").data, atol=1e-14)

    ground = QuantumState.basis(space, "00").evolve(u)
    assert_allclose(ground.data, QuantumState.basis(space, "00").data, atol=1e-14)


def test_sqrt_iswap_is_hopping_evolution():
    g = 0.75
    u = matrix_exponential_propagator(sqrt_iswap_hamiltonian(g), hopping_duration(g))
    target = sqrt_iswap().data
    # equal up to a global phase
    phase = np.vdot(target.reshape(-1), u.data.reshape(-1))
    phase /= abs(phase)
    assert_allclose(u.data, phase * target, atol=1e-12)
    assert hopping_duration(g) == pytest.approx(1e3 / (8 * g))


def test_entangling_circuit_timing():
    circuit = entangling_circuit()
    assert [s.name for s in circuit] == ["X", "sqrt_iswap", "X", "sqrt_iswap", "sqrt_iswap"]
    assert [s.first_qubit for s in circuit] == [0, 0, 2, 1, 1]
    assert sum(s.duration for s in circuit) == pytest.approx(60 + 3 * 1e3 / 6)


def test_ideal_preparation():
    report = prepare_entangled_state()
    assert report.fidelity >= 1 - 1e-12
    assert report.bell_fidelity >= 1 - 1e-12
    probs = report.state.probabilities()
    assert probs[report.state.space.index_of("110")] == pytest.approx(0.5)
    assert probs[report.state.space.index_of("011")] == pytest.approx(0.5)
    assert report.to_dict()["mode"] == "ideal"


def test_noisy_preparation():
    report = prepare_entangled_state(mode="noisy")
    assert 0.93 <= report.fidelity < 1.0
    assert report.bell_fidelity < 1.0
    assert report.state.kind == "mixed"
    assert np.trace(report.state.data).real == pytest.approx(1.0, abs=1e-9)


def test_invalid_preparation():
    with pytest.raises(ValueError):
        prepare_entangled_state(n=4)
    with pytest.raises(ValueError):
        prepare_entangled_state(mode="perfect")
    assert math.isfinite(prepare_entangled_state(x_duration=10.0).fidelity)
