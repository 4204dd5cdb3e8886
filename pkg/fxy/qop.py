"""Tensor-product operator algebra and quantum states.

Conventions used everywhere in the package:

- basis ordering: site 0 is the most significant tensor factor, so the label `110`
  reads left to right as Q1 Q2 Q3.
- |0> is the ground level, σ⁺ = |1><0| raises the excitation number and
  σᶻ = diag(+1, -1), i.e. σᶻ|0> = +|0>. With the standard σˣ, σʸ this gives
  σˣ = σ⁺ + σ⁻, σʸ = i(σ⁺ - σ⁻) and [σ⁺, σ⁻] = -σᶻ.
- operators are dense complex matrices. Hamiltonians are in rad/ns.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Literal, Sequence, Union

import numpy as np
from scipy.linalg import eigh

from fxy.errors import (
    DimensionError,
    InvalidStateError,
    NonHermitianError,
    SiteLabelError,
)

SiteLabel = Literal["sp", "sm", "x", "y", "z", "id", "n", "a", "adag"]
PAULI_LABELS = ("sp", "sm", "x", "y", "z")

HERMITIAN_TOL = 1e-12
STATE_TOL = 1e-9

_PAULI = {
    "sp": np.array([[0, 0], [1, 0]], dtype=complex),
    "sm": np.array([[0, 1], [0, 0]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class HilbertSpace:
    site_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        object.__setattr__(self, "site_dims", dims)
        if len(dims) == 0:
            raise DimensionError("a Hilbert space needs at least one site")
        for i, d in enumerate(dims):
            if d < 2:
                raise DimensionError(f"site {i} has dimension {d}, expected >= 2")

    @staticmethod
    def qubits(n: int) -> HilbertSpace:
        return HilbertSpace((2,) * n)

    @property
    def dim(self) -> int:
        return int(np.prod(self.site_dims))

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    def index_of(self, levels: Union[str, Sequence[int]]) -> int:
        """Index of the basis state with the given level per site, e.g. `"101"` or `(1, 0, 1)`."""
        if isinstance(levels, str):
            levels = [int(c) for c in levels]
        if len(levels) != self.n_sites:
            raise DimensionError(
                f"expected {self.n_sites} levels, got {len(levels)}: {levels}"
            )
        for i, (lvl, d) in enumerate(zip(levels, self.site_dims)):
            if not 0 <= lvl < d:
                raise DimensionError(f"level {lvl} out of range for site {i} (dim {d})")
        return int(np.ravel_multi_index(tuple(levels), self.site_dims))

    def levels_of(self, index: int) -> tuple[int, ...]:
        return tuple(int(x) for x in np.unravel_index(index, self.site_dims))

    def labels(self) -> list[str]:
        """Labels of all basis states in index order, e.g. `00, 01, 10, 11`."""
        return ["".join(str(x) for x in self.levels_of(i)) for i in range(self.dim)]


def local_matrix(label: SiteLabel, dim: int) -> np.ndarray:
    """Single-site matrix of `label` for a site of dimension `dim`.

    Pauli labels are defined for qubits and, on 3-level sites, act on the {|0>, |1>}
    subspace with zero rows/columns for level 2. `n`, `a`, `adag` are the truncated
    bosonic number/ladder operators of any dimension.
    """
    if label == "id":
        return np.eye(dim, dtype=complex)
    if label == "n":
        return np.diag(np.arange(dim)).astype(complex)
    if label in ("a", "adag"):
        a = np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)
        return a if label == "a" else a.T.copy()
    if label in PAULI_LABELS:
        if dim not in (2, 3):
            raise SiteLabelError(f"label `{label}` is undefined for a site of dimension {dim}")
        out = np.zeros((dim, dim), dtype=complex)
        out[:2, :2] = _PAULI[label]
        return out
    raise SiteLabelError(f"unknown site label `{label}`")


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    space: HilbertSpace
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionError(f"operator must be a square matrix, got shape {data.shape}")
        if data.shape[0] != self.space.dim:
            raise DimensionError(
                f"operator of size {data.shape[0]} does not match space of dimension {self.space.dim}"
            )
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @staticmethod
    def zeros(space: HilbertSpace) -> OperatorMatrix:
        return OperatorMatrix(space, np.zeros((space.dim, space.dim)))

    @staticmethod
    def identity(space: HilbertSpace) -> OperatorMatrix:
        return OperatorMatrix(space, np.eye(space.dim))

    def _same_space(self, other: OperatorMatrix):
        if self.space.site_dims != other.space.site_dims:
            raise DimensionError(
                f"incompatible spaces {self.space.site_dims} and {other.space.site_dims}"
            )

    def __add__(self, other: OperatorMatrix) -> OperatorMatrix:
        self._same_space(other)
        return OperatorMatrix(self.space, self.data + other.data)

    def __sub__(self, other: OperatorMatrix) -> OperatorMatrix:
        self._same_space(other)
        return OperatorMatrix(self.space, self.data - other.data)

    def __neg__(self) -> OperatorMatrix:
        return OperatorMatrix(self.space, -self.data)

    def __mul__(self, scalar: complex) -> OperatorMatrix:
        return OperatorMatrix(self.space, self.data * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: OperatorMatrix) -> OperatorMatrix:
        self._same_space(other)
        return OperatorMatrix(self.space, self.data @ other.data)

    def dag(self) -> OperatorMatrix:
        return OperatorMatrix(self.space, self.data.conj().T)

    def hermiticity_error(self) -> float:
        """‖H - H†‖ / ‖H‖ in Frobenius norm (0 for the zero operator)."""
        norm = np.linalg.norm(self.data)
        if norm == 0:
            return 0.0
        return float(np.linalg.norm(self.data - self.data.conj().T) / norm)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_error() <= tol

    def assert_hermitian(self, tol: float = HERMITIAN_TOL) -> OperatorMatrix:
        err = self.hermiticity_error()
        if err > tol:
            raise NonHermitianError(f"relative Hermiticity error {err:.3e} exceeds {tol:.1e}")
        return self

    def spectrum(self) -> np.ndarray:
        return eigh(self.assert_hermitian().data, eigvals_only=True)

    def allclose(self, other: OperatorMatrix, atol: float = 1e-12) -> bool:
        self._same_space(other)
        return bool(np.allclose(self.data, other.data, rtol=0, atol=atol))


def site_operator(label: SiteLabel, site: int, space: HilbertSpace) -> OperatorMatrix:
    """Embed a single-site operator: 𝟙 ⊗ … ⊗ op ⊗ … ⊗ 𝟙 with `op` at position `site`."""
    if not 0 <= site < space.n_sites:
        raise DimensionError(f"site {site} out of range for {space.n_sites} sites")
    mats = [
        local_matrix(label, d) if i == site else np.eye(d, dtype=complex)
        for i, d in enumerate(space.site_dims)
    ]
    return OperatorMatrix(space, kron_all(mats))


def embed_operator(
    local: np.ndarray, first_site: int, space: HilbertSpace
) -> OperatorMatrix:
    """Embed an operator acting on the contiguous sites starting at `first_site`."""
    local = np.asarray(local, dtype=complex)
    if not 0 <= first_site < space.n_sites:
        raise DimensionError(f"site {first_site} out of range for {space.n_sites} sites")
    n_local = 0
    size = 1
    while size < local.shape[0] and first_site + n_local < space.n_sites:
        size *= space.site_dims[first_site + n_local]
        n_local += 1
    if size != local.shape[0]:
        raise DimensionError(
            f"operator of size {local.shape[0]} does not fit at site {first_site} of {space.site_dims}"
        )
    before = int(np.prod(space.site_dims[:first_site]))
    after = int(np.prod(space.site_dims[first_site + n_local :]))
    return OperatorMatrix(
        space, kron_all([np.eye(before), local, np.eye(after)])
    )


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure state (1-D vector) or a mixed state (density matrix) of `space`."""

    space: HilbertSpace
    data: np.ndarray
    tol: float = STATE_TOL

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        dim = self.space.dim
        if data.ndim == 1:
            if data.shape[0] != dim:
                raise DimensionError(f"state of size {data.shape[0]} does not match dimension {dim}")
            norm = np.linalg.norm(data)
            if abs(norm - 1) > self.tol:
                raise InvalidStateError(f"pure state has norm {norm}, expected 1")
        elif data.ndim == 2:
            if data.shape != (dim, dim):
                raise DimensionError(f"density matrix of shape {data.shape} does not match dimension {dim}")
            trace = np.trace(data).real
            if abs(trace - 1) > self.tol:
                raise InvalidStateError(f"density matrix has trace {trace}, expected 1")
            if np.linalg.norm(data - data.conj().T) > self.tol:
                raise InvalidStateError("density matrix is not Hermitian")
            min_eig = eigh(data, eigvals_only=True)[0]
            if min_eig < -self.tol:
                raise InvalidStateError(f"density matrix has negative eigenvalue {min_eig}")
        else:
            raise DimensionError(f"state data must be 1-D or 2-D, got {data.ndim}-D")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def kind(self) -> Literal["pure", "mixed"]:
        return "pure" if self.data.ndim == 1 else "mixed"

    @staticmethod
    def basis(space: HilbertSpace, levels: Union[str, Sequence[int]]) -> QuantumState:
        vec = np.zeros(space.dim, dtype=complex)
        vec[space.index_of(levels)] = 1.0
        return QuantumState(space, vec)

    @staticmethod
    def product(labels: str) -> QuantumState:
        """Qubit product state from a string over `0`, `1`, `+`, `-`, e.g. `"+0"`."""
        local = {
            "0": np.array([1, 0], dtype=complex),
            "1": np.array([0, 1], dtype=complex),
            "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
            "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
        }
        for c in labels:
            if c not in local:
                raise InvalidStateError(f"unknown single-qubit label `{c}` in `{labels}`")
        return QuantumState(
            HilbertSpace.qubits(len(labels)), kron_all([local[c] for c in labels])
        )

    @staticmethod
    def superposition(
        space: HilbertSpace, amplitudes: dict[str, complex]
    ) -> QuantumState:
        """Normalized superposition of labelled basis states, e.g. `{"110": 1, "011": 1}`."""
        vec = np.zeros(space.dim, dtype=complex)
        for label, amp in amplitudes.items():
            vec[space.index_of(label)] += amp
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise InvalidStateError("superposition has zero norm")
        return QuantumState(space, vec / norm)

    def to_density(self) -> QuantumState:
        if self.kind == "mixed":
            return self
        return QuantumState(self.space, np.outer(self.data, self.data.conj()), self.tol)

    def probabilities(self) -> np.ndarray:
        if self.kind == "pure":
            return np.abs(self.data) ** 2
        return np.clip(np.diag(self.data).real, 0.0, None)

    def evolve(self, u: OperatorMatrix) -> QuantumState:
        _check_spaces(self.space, u.space)
        if self.kind == "pure":
            return QuantumState(self.space, u.data @ self.data, self.tol)
        return QuantumState(self.space, u.data @ self.data @ u.data.conj().T, self.tol)


def _check_spaces(a: HilbertSpace, b: HilbertSpace):
    if a.site_dims != b.site_dims:
        raise DimensionError(f"incompatible spaces {a.site_dims} and {b.site_dims}")


def expectation(state: QuantumState, op: OperatorMatrix) -> complex:
    """⟨ψ|O|ψ⟩ for a pure state, Tr(ρO) for a mixed one."""
    _check_spaces(state.space, op.space)
    if state.kind == "pure":
        return complex(np.vdot(state.data, op.data @ state.data))
    return complex(np.trace(state.data @ op.data))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = eigh(rho)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(state: QuantumState, target: QuantumState) -> float:
    """|⟨ψ|φ⟩|² for pure states, ⟨ψ|ρ|ψ⟩ for pure/mixed, Uhlmann fidelity for mixed/mixed."""
    _check_spaces(state.space, target.space)
    a, b = state, target
    if a.kind == "mixed" and b.kind == "pure":
        a, b = b, a
    if a.kind == "pure" and b.kind == "pure":
        f = abs(np.vdot(a.data, b.data)) ** 2
    elif a.kind == "pure":
        f = np.vdot(a.data, b.data @ a.data).real
    else:
        sa = _psd_sqrt(a.data)
        m = sa @ b.data @ sa
        w = eigh((m + m.conj().T) / 2, eigvals_only=True)
        f = np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2
    return float(min(max(f, 0.0), 1.0))


def matrix_exponential_propagator(
    h: OperatorMatrix, t: float, tol: float = 1e-10
) -> OperatorMatrix:
    """U = exp(-i h t) for a Hermitian `h` (rad/ns) and a duration `t` (ns)."""
    h.assert_hermitian(tol)
    w, v = eigh((h.data + h.data.conj().T) / 2)
    return OperatorMatrix(h.space, (v * np.exp(-1j * w * t)) @ v.conj().T)
