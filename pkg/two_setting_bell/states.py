"""
Named N-qubit states used in the violation claims.

Basis ordering: |q_1 ... q_N> with q_1 the most significant bit, matching the
tensor-slot order of the Bell operators.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from two_setting_bell.config import MAX_QUBITS
from two_setting_bell.errors import CapacityError, ValidationError
from two_setting_bell.linalg_core import as_hermitian

logger = logging.getLogger(__name__)

NORM_ATOL = 1e-12
TRACE_ATOL = 1e-12
MIN_EIGENVALUE = -1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state: 2^N amplitudes."""

    num_qubits: int
    amplitudes: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.shape[0] != 2**self.num_qubits:
            raise ValidationError(
                f"{self.num_qubits}-qubit state needs {2 ** self.num_qubits} amplitudes, "
                f"got {amplitudes.shape[0]}"
            )
        norm = np.linalg.norm(amplitudes)
        if not abs(norm - 1) <= NORM_ATOL:
            raise ValidationError(f"State is not normalised: |psi| = {norm!r}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    def density(self):
        """|psi><psi| as a DensityMatrix."""
        projector = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityMatrix(self.num_qubits, projector, name=self.name)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state: unit-trace positive semidefinite 2^N x 2^N matrix."""

    num_qubits: int
    matrix: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        matrix = as_hermitian(self.matrix)
        if matrix.shape[0] != 2**self.num_qubits:
            raise ValidationError(
                f"{self.num_qubits}-qubit density matrix needs dimension {2 ** self.num_qubits}, "
                f"got {matrix.shape[0]}"
            )
        trace = np.trace(matrix).real
        if not abs(trace - 1) <= TRACE_ATOL:
            raise ValidationError(f"Density matrix trace is {trace!r}, expected 1")
        smallest = float(np.linalg.eigvalsh(matrix)[0])
        if smallest < MIN_EIGENVALUE:
            raise ValidationError(
                f"Density matrix is not positive semidefinite: min eigenvalue {smallest:.3e}"
            )
        matrix = matrix.copy()
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)


def _check_qubits(n):
    if n < 2:
        raise ValidationError(f"State needs at least 2 qubits, got {n}")
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")


def generalized_ghz(n, alpha):
    """cos(alpha)|0...0> + sin(alpha)|1...1>"""
    _check_qubits(n)
    amplitudes = np.zeros(2**n, dtype=np.complex128)
    amplitudes[0] = math.cos(alpha)
    amplitudes[-1] = math.sin(alpha)
    return StateVector(n, amplitudes, name="gghz")


def ghz(n):
    state = generalized_ghz(n, math.pi / 4)
    return StateVector(n, state.amplitudes, name="ghz")


def w_state(n):
    """Equal superposition of the n weight-one basis states."""
    _check_qubits(n)
    amplitudes = np.zeros(2**n, dtype=np.complex128)
    for qubit in range(n):
        amplitudes[1 << (n - 1 - qubit)] = 1 / math.sqrt(n)
    return StateVector(n, amplitudes, name="w")


def cluster4():
    """(|0000> + |0011> + |1100> - |1111>) / 2"""
    amplitudes = np.zeros(16, dtype=np.complex128)
    amplitudes[0b0000] = 0.5
    amplitudes[0b0011] = 0.5
    amplitudes[0b1100] = 0.5
    amplitudes[0b1111] = -0.5
    return StateVector(4, amplitudes, name="cluster4")


def noisy_ghz(n, v):
    """
    White-noise admixture (1 - v) I / 2^n + v |GHZ><GHZ|.
    """
    if not 0 <= v <= 1:
        raise ValidationError(f"Visibility must lie in [0, 1], got {v}")
    _check_qubits(n)
    dim = 2**n
    matrix = (1 - v) * np.eye(dim, dtype=np.complex128) / dim + v * ghz(n).density().matrix
    return DensityMatrix(n, matrix, name="noisy-ghz")


STATE_NAMES = ("ghz", "gghz", "w", "cluster4", "noisy-ghz")


def named_state(name, n, alpha=None, visibility=None):
    """
    Build a state from its CLI name: ghz, gghz (alpha), w, cluster4,
    noisy-ghz (visibility).
    """
    if name == "ghz":
        return ghz(n)
    if name == "gghz":
        if alpha is None:
            raise ValidationError("State gghz needs an alpha")
        return generalized_ghz(n, alpha)
    if name == "w":
        return w_state(n)
    if name == "cluster4":
        if n != 4:
            raise ValidationError(f"cluster4 is a 4-qubit state, got n={n}")
        return cluster4()
    if name == "noisy-ghz":
        if visibility is None:
            raise ValidationError("State noisy-ghz needs a visibility")
        return noisy_ghz(n, visibility)
    raise ValidationError(f"Unknown state {name!r}; expected one of {', '.join(STATE_NAMES)}")
