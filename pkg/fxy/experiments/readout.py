from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from fxy.device import DeviceSpec
from fxy.errors import DimensionError


@dataclass(frozen=True)
class ReadoutModel:
    """Per-qubit assignment fidelities. Qubit k reports a true distribution (p0, p1) as
    [[F0, 1-F1], [1-F0, F1]] @ (p0, p1)."""

    f0: tuple[float, ...]
    f1: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "f0", tuple(float(x) for x in self.f0))
        object.__setattr__(self, "f1", tuple(float(x) for x in self.f1))
        if len(self.f0) != len(self.f1):
            raise ValueError("f0 and f1 must have one entry per qubit")
        for x in self.f0 + self.f1:
            if not 0 <= x <= 1:
                raise ValueError(f"assignment fidelity {x} is not in [0, 1]")

    @staticmethod
    def ideal(n_qubits: int) -> ReadoutModel:
        return ReadoutModel((1.0,) * n_qubits, (1.0,) * n_qubits)

    @staticmethod
    def from_device(
        device: DeviceSpec, first_qubit: int = 0, n_qubits: Optional[int] = None
    ) -> ReadoutModel:
        if n_qubits is None:
            n_qubits = device.n_qubits - first_qubit
        qubits = device.qubits[first_qubit : first_qubit + n_qubits]
        return ReadoutModel(tuple(q.f0 for q in qubits), tuple(q.f1 for q in qubits))

    @property
    def n_qubits(self) -> int:
        return len(self.f0)

    def confusion_matrix(self, qubit: int) -> np.ndarray:
        f0, f1 = self.f0[qubit], self.f1[qubit]
        return np.array([[f0, 1 - f1], [1 - f0, f1]])

    def apply(self, probs: np.ndarray) -> np.ndarray:
        return self._transform(probs, [self.confusion_matrix(k) for k in range(self.n_qubits)])

    def inverse_apply(self, probs: np.ndarray) -> np.ndarray:
        """Undo `apply` exactly. The result can leave the simplex when the input is noisy."""
        mats = []
        for k in range(self.n_qubits):
            m = self.confusion_matrix(k)
            if abs(np.linalg.det(m)) < 1e-12:
                raise ValueError(f"confusion matrix of qubit {k} is singular (F0 + F1 = 1)")
            mats.append(np.linalg.inv(m))
        return self._transform(probs, mats)

    def _transform(self, probs: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
        probs = np.asarray(probs, dtype=float)
        n = self.n_qubits
        if probs.shape[-1] != 2**n:
            raise DimensionError(
                f"populations over {probs.shape[-1]} states do not match {n} qubit(s)"
            )
        lead = probs.shape[:-1]
        t = probs.reshape(lead + (2,) * n)
        offset = len(lead)
        for k, m in enumerate(mats):
            t = np.moveaxis(np.tensordot(m, t, axes=([1], [offset + k])), 0, offset + k)
        return t.reshape(probs.shape)


def apply_readout_error(
    populations: Union[np.ndarray, dict[str, np.ndarray]], model: ReadoutModel
) -> Union[np.ndarray, dict[str, np.ndarray]]:
    """Reported populations for true ones, given as an array whose last axis is the full
    computational basis, or as a complete `{bitstring: series}` mapping."""
    if not isinstance(populations, dict):
        return model.apply(populations)

    labels = [format(i, f"0{model.n_qubits}b") for i in range(2**model.n_qubits)]
    if sorted(populations.keys()) != labels:
        raise DimensionError(
            f"readout correction needs all {len(labels)} basis labels of {model.n_qubits} qubit(s)"
        )
    stacked = np.stack([np.asarray(populations[k], dtype=float) for k in labels], axis=-1)
    out = model.apply(stacked)
    return {k: out[..., i] for i, k in enumerate(labels)}
