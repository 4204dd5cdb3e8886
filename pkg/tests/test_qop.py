import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fxy.errors import (
    DimensionError,
    InvalidStateError,
    NonHermitianError,
    SiteLabelError,
)
from fxy.qop import (
    HilbertSpace,
    OperatorMatrix,
    QuantumState,
    embed_operator,
    expectation,
    fidelity,
    local_matrix,
    matrix_exponential_propagator,
    site_operator,
)


def pair_ops():
    space = HilbertSpace.qubits(2)
    return space, {
        (label, site): site_operator(label, site, space)
        for label in ("sp", "sm", "x", "y", "z")
        for site in (0, 1)
    }


def test_basis_order_and_labels():
    space = HilbertSpace((2, 3, 2))
    assert space.dim == 12
    assert space.index_of("000") == 0
    assert space.index_of((0, 0, 1)) == 1
    assert space.index_of("010") == 2
    assert space.levels_of(space.index_of("121")) == (1, 2, 1)
    assert HilbertSpace.qubits(2).labels() == ["00", "01", "10", "11"]

    with pytest.raises(DimensionError):
        space.index_of("00")
    with pytest.raises(DimensionError):
        space.index_of("030")
    with pytest.raises(DimensionError):
        HilbertSpace((2, 1))


def test_raising_operator_convention():
    space, ops = pair_ops()
    sp1 = ops["sp", 1].data
    assert np.count_nonzero(sp1) == 2
    assert sp1[space.index_of("01"), space.index_of("00")] == 1
    assert sp1[space.index_of("11"), space.index_of("10")] == 1

    z0 = ops["z", 0]
    state = QuantumState.basis(space, "00")
    assert expectation(state, z0) == pytest.approx(1.0)


def test_pairing_plus_hopping_is_xx():
    _, ops = pair_ops()
    sp0, sm0, sp1, sm1 = ops["sp", 0], ops["sm", 0], ops["sp", 1], ops["sm", 1]
    total = sp0 @ sp1 + sm0 @ sm1 + sp0 @ sm1 + sm0 @ sp1
    xx = ops["x", 0] @ ops["x", 1]
    yy = ops["y", 0] @ ops["y", 1]
    assert total.allclose(xx, atol=1e-14)
    assert (sp0 @ sp1 + sm0 @ sm1).allclose((xx - yy) * 0.5, atol=1e-14)
    assert (sp0 @ sm1 + sm0 @ sp1).allclose((xx + yy) * 0.5, atol=1e-14)


def test_pauli_identities():
    space = HilbertSpace.qubits(1)
    sp, sm = site_operator("sp", 0, space), site_operator("sm", 0, space)
    x, y, z = (site_operator(k, 0, space) for k in ("x", "y", "z"))
    assert (sp + sm).allclose(x)
    assert ((sp - sm) * 1j).allclose(y)
    assert (sp @ sm - sm @ sp).allclose(-z)


def test_three_level_sites():
    a = local_matrix("a", 3)
    assert_allclose(a @ local_matrix("adag", 3) - local_matrix("adag", 3) @ a, np.diag([1, 1, -2]))
    z3 = local_matrix("z", 3)
    assert_allclose(np.diag(z3), [1, -1, 0])
    with pytest.raises(SiteLabelError):
        local_matrix("x", 4)
    with pytest.raises(SiteLabelError):
        local_matrix("w", 2)


def test_embed_operator():
    space = HilbertSpace.qubits(3)
    x = local_matrix("x", 2)
    xx = np.kron(x, x)
    embedded = embed_operator(xx, 1, space)
    expected = site_operator("x", 1, space) @ site_operator("x", 2, space)
    assert embedded.allclose(expected)
    with pytest.raises(DimensionError):
        embed_operator(xx, 2, space)


def test_operator_checks():
    space = HilbertSpace.qubits(1)
    with pytest.raises(DimensionError):
        OperatorMatrix(space, np.eye(3))
    with pytest.raises(DimensionError):
        OperatorMatrix(space, np.eye(2)) + OperatorMatrix.identity(HilbertSpace.qubits(2))

    op = OperatorMatrix(space, np.array([[0, 1], [0, 0]]))
    assert not op.is_hermitian()
    with pytest.raises(NonHermitianError):
        op.assert_hermitian()
    assert OperatorMatrix.zeros(space).hermiticity_error() == 0.0


def test_states():
    plus = QuantumState.product("+0")
    assert_allclose(plus.probabilities(), [0.5, 0, 0.5, 0], atol=1e-15)
    rho = plus.to_density()
    assert rho.kind == "mixed"
    assert_allclose(rho.probabilities(), plus.probabilities(), atol=1e-15)

    bell = QuantumState.superposition(HilbertSpace.qubits(2), {"01": 1, "10": 1j})
    assert_allclose(bell.probabilities(), [0, 0.5, 0.5, 0], atol=1e-15)

    with pytest.raises(InvalidStateError):
        QuantumState(HilbertSpace.qubits(1), np.array([1.0, 1.0]))
    with pytest.raises(InvalidStateError):
        QuantumState.product("0x")
    with pytest.raises(InvalidStateError):
        QuantumState(HilbertSpace.qubits(1), np.diag([1.5, -0.5]))


def test_fidelity():
    space = HilbertSpace.qubits(2)
    a = QuantumState.superposition(space, {"01": 1, "10": 1})
    b = QuantumState.superposition(space, {"01": 1, "10": -1})
    assert fidelity(a, a) == pytest.approx(1.0)
    assert fidelity(a, b) == pytest.approx(0.0, abs=1e-15)
    assert fidelity(a.to_density(), a) == pytest.approx(1.0)
    assert fidelity(a.to_density(), a.to_density()) == pytest.approx(1.0, abs=1e-9)

    mixed = QuantumState(space, np.eye(4) / 4)
    assert fidelity(mixed, a) == pytest.approx(0.25)


def test_propagator():
    space = HilbertSpace.qubits(1)
    h = site_operator("x", 0, space) * 0.3
    u = matrix_exponential_propagator(h, 2.0)
    assert_allclose(u.data @ u.data.conj().T, np.eye(2), atol=1e-14)
    expected = math.cos(0.6) * np.eye(2) - 1j * math.sin(0.6) * local_matrix("x", 2)
    assert_allclose(u.data, expected, atol=1e-14)

    state = QuantumState.basis(space, "0").evolve(u)
    assert state.probabilities()[1] == pytest.approx(math.sin(0.6) ** 2)
