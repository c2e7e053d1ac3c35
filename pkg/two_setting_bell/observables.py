"""
Single-qubit dichotomic observables a.sigma parametrised by Bloch angles.

Convention: sigma_z = diag(1, -1), |0> = (1, 0).
"""

import math
from dataclasses import dataclass

import numpy as np

from two_setting_bell.errors import ValidationError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)
PAULI_VECTOR = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


def bloch_vector(theta, phi):
    """(sin t cos p, sin t sin p, cos t)"""
    return np.array(
        [
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        ]
    )


def bloch_observable(theta, phi):
    """
    2x2 matrix of the +/-1 observable along the Bloch direction (theta, phi).

    No angle normalisation is applied.
    """
    x, y, z = bloch_vector(theta, phi)
    return x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z


@dataclass(frozen=True)
class Observable:
    """A dichotomic measurement, angles in radians."""

    theta: float
    phi: float

    @property
    def bloch_vector(self):
        return bloch_vector(self.theta, self.phi)

    @property
    def matrix(self):
        return bloch_observable(self.theta, self.phi)

    def to_dict(self):
        return {"theta": float(self.theta), "phi": float(self.phi)}


@dataclass(frozen=True)
class ObserverSettings:
    """The two settings of one party: A_j (setting_1) and A'_j (setting_2)."""

    setting_1: Observable
    setting_2: Observable

    def matrix(self, choice):
        """
        Local factor for a term-key symbol: 0 identity, 1 A_j, 2 A'_j.
        """
        if choice == 0:
            return IDENTITY_2
        if choice == 1:
            return self.setting_1.matrix
        if choice == 2:
            return self.setting_2.matrix
        raise ValidationError(f"Measurement choice must be 0, 1 or 2, got {choice}")

    def to_dict(self):
        return {
            "theta1": float(self.setting_1.theta),
            "phi1": float(self.setting_1.phi),
            "theta2": float(self.setting_2.theta),
            "phi2": float(self.setting_2.phi),
        }


def bloch_dot(a, b):
    """Euclidean dot product of two Bloch vectors, clipped to [-1, 1]."""
    return float(np.clip(np.dot(a.bloch_vector, b.bloch_vector), -1.0, 1.0))


def settings_from_angles(angles):
    """
    Unpack a flat array [theta1, phi1, theta2, phi2] * N into ObserverSettings.
    """
    flat = np.asarray(angles, dtype=float).reshape(-1)
    if flat.size % 4 != 0:
        raise ValidationError(
            f"Angle vector length must be a multiple of 4, got {flat.size}"
        )
    return [
        ObserverSettings(Observable(t1, p1), Observable(t2, p2))
        for t1, p1, t2, p2 in flat.reshape(-1, 4)
    ]


def local_factor_stack(angles):
    """
    Per-party [identity, A_j, A'_j] matrices, shape (N, 3, 2, 2), from a flat
    angle vector [theta1, phi1, theta2, phi2] * N in one vectorised pass.
    """
    flat = np.asarray(angles, dtype=float).reshape(-1)
    if flat.size % 4 != 0:
        raise ValidationError(
            f"Angle vector length must be a multiple of 4, got {flat.size}"
        )
    pairs = flat.reshape(-1, 2, 2)
    theta, phi = pairs[..., 0], pairs[..., 1]
    sin_theta = np.sin(theta)
    vectors = np.stack(
        [sin_theta * np.cos(phi), sin_theta * np.sin(phi), np.cos(theta)], axis=-1
    )
    observables = np.einsum("psk,kab->psab", vectors, PAULI_VECTOR)
    identity = np.broadcast_to(IDENTITY_2, (pairs.shape[0], 1, 2, 2))
    return np.concatenate([identity, observables], axis=1)
