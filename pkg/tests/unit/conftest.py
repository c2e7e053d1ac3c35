"""Shared fixtures for the unit tests."""

import math

import numpy as np
import pytest

from two_setting_bell.bell_operators import SignTable
from two_setting_bell.observables import Observable, ObserverSettings


@pytest.fixture
def rng():
    """Seeded generator so property checks are reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture
def random_settings(rng):
    """Factory for random per-party settings."""

    def make(n):
        angles = rng.uniform(0, 2 * math.pi, size=(n, 4))
        return [
            ObserverSettings(Observable(t1, p1), Observable(t2, p2))
            for t1, p1, t2, p2 in angles
        ]

    return make


@pytest.fixture
def random_sign_table(rng):
    """Factory for random +/-1 sign tables."""

    def make(m):
        return SignTable(m, tuple(int(v) for v in rng.choice([-1, 1], size=2**m)))

    return make
