"""
Dense complex linear algebra for operators of dimension up to 4096 (12 qubits).

Matrices are plain ``numpy`` arrays of dtype complex128.
"""

import logging

import numpy as np
import numpy.typing as npt

from two_setting_bell.config import HERMITIAN_ATOL, MAX_DIMENSION
from two_setting_bell.errors import CapacityError, ValidationError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
HermitianMatrix = npt.NDArray[np.complex128]

IMAG_ATOL = 1e-9


def as_matrix(a) -> ComplexMatrix:
    """
    Coerce input to a 2-D complex128 array.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValidationError(f"Expected a non-empty 2-D matrix, got shape {m.shape}")
    return m


def check_dimension(dim: int):
    if dim > MAX_DIMENSION:
        raise CapacityError(
            f"Matrix dimension {dim} exceeds the cap of {MAX_DIMENSION} (12 qubits)"
        )


def hermiticity_error(h) -> float:
    """Largest entry-wise deviation |H - H^dagger|."""
    m = as_matrix(h)
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return float(np.max(np.abs(m - m.conj().T)))


def as_hermitian(h) -> HermitianMatrix:
    """
    Validate that ``h`` is square and self-adjoint within 1e-9 per entry.
    """
    m = as_matrix(h)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"Hermitian matrix must be square, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValidationError("Matrix has non-finite entries")
    deviation = hermiticity_error(m)
    if deviation > HERMITIAN_ATOL:
        raise ValidationError(
            f"Matrix is not Hermitian: max |H - H^dagger| = {deviation:.3e}"
        )
    return m


def kron(a, b) -> ComplexMatrix:
    """
    Kronecker product with the dimension cap enforced before allocation.

    result[i*p + k, j*q + l] = a[i, j] * b[k, l] for b of shape (p, q).
    """
    ma, mb = as_matrix(a), as_matrix(b)
    rows = ma.shape[0] * mb.shape[0]
    cols = ma.shape[1] * mb.shape[1]
    check_dimension(max(rows, cols))
    return np.kron(ma, mb)


def kron_all(factors) -> ComplexMatrix:
    """Left-to-right Kronecker product of a non-empty sequence."""
    factors = list(factors)
    if not factors:
        raise ValidationError("kron_all needs at least one factor")
    result = as_matrix(factors[0])
    for factor in factors[1:]:
        result = kron(result, factor)
    return result


def hermitian_eigenvalues(h) -> npt.NDArray[np.float64]:
    """Ascending real spectrum of a validated Hermitian matrix."""
    m = as_hermitian(h)
    return np.linalg.eigvalsh(m)


def hermitian_max_abs_eigenvalue(h) -> float:
    """
    Largest |eigenvalue| of a Hermitian matrix.

    Only the two ends of the ascending spectrum matter.
    """
    eigenvalues = hermitian_eigenvalues(h)
    return float(max(abs(eigenvalues[0]), abs(eigenvalues[-1])))


def trace_product(rho, b) -> float:
    """
    Re Tr(rho b) for two Hermitian matrices of equal dimension.

    Computed as the elementwise pairing sum(rho^T * b), avoiding the full
    matrix product.
    """
    mr, mb = as_hermitian(rho), as_hermitian(b)
    if mr.shape != mb.shape:
        raise ValidationError(
            f"Dimension mismatch in trace product: {mr.shape} vs {mb.shape}"
        )
    value = np.sum(mr.T * mb)
    assert abs(value.imag) <= IMAG_ATOL, f"Tr(rho B) has imaginary part {value.imag:.3e}"
    return float(value.real)


def expectation(psi, b) -> float:
    """Re <psi|B|psi> for a state vector and a Hermitian matrix."""
    vector = np.asarray(psi, dtype=np.complex128).reshape(-1)
    mb = as_hermitian(b)
    if mb.shape[0] != vector.shape[0]:
        raise ValidationError(
            f"Dimension mismatch: state of length {vector.shape[0]} vs operator {mb.shape}"
        )
    value = np.vdot(vector, mb @ vector)
    assert abs(value.imag) <= IMAG_ATOL, f"<psi|B|psi> has imaginary part {value.imag:.3e}"
    return float(value.real)
