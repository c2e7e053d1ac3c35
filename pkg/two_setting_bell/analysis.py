"""
Quantum values, maximal violations, closed forms for generalized GHZ states,
visibility thresholds, and multi-start optimisation of measurement settings.

All values are raw <B> against the LHV bound 1, so the violation factor
equals the quantum value.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import bisect, minimize

from two_setting_bell.bell_operators import (
    build_operator_matrix,
    coefficient_tensor,
    extended_mabk_terms,
)
from two_setting_bell.config import OptimizerConfig
from two_setting_bell.errors import ValidationError
from two_setting_bell.linalg_core import (
    expectation,
    hermitian_max_abs_eigenvalue,
    trace_product,
)
from two_setting_bell.observables import (
    IDENTITY_2,
    Observable,
    ObserverSettings,
    local_factor_stack,
    settings_from_angles,
)
from two_setting_bell.states import StateVector, named_state, noisy_ghz

logger = logging.getLogger(__name__)

LHV_BOUND = 1.0
VIOLATION_ATOL = 1e-9
# Extra Nelder-Mead run from each start's best point.
MAX_RESTARTS = 1
METHODS = ("closed-form", "eigen", "optimized")


@dataclass
class ViolationReport:
    state_name: str
    n: int
    quantum_value: float
    settings: List[ObserverSettings]
    method: str
    lhv_bound: float = LHV_BOUND
    seed: Optional[int] = None
    alpha: Optional[float] = None
    violation_factor: float = field(default=None)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"Unknown report method {self.method!r}")
        quotient = self.quantum_value / self.lhv_bound
        if self.violation_factor is None:
            self.violation_factor = quotient
        elif abs(self.violation_factor - quotient) > 1e-12:
            raise ValidationError(
                f"violation_factor {self.violation_factor!r} does not match "
                f"quantum_value / lhv_bound = {quotient!r}"
            )

    def to_dict(self):
        return {
            "state": self.state_name,
            "n": self.n,
            "alpha": self.alpha,
            "quantum_value": self.quantum_value,
            "lhv_bound": self.lhv_bound,
            "violation_factor": self.violation_factor,
            "settings": [s.to_dict() for s in self.settings],
            "method": self.method,
            "seed": self.seed,
        }


def _check_counts(state, terms, settings):
    if state.num_qubits != terms.num_parties:
        raise ValidationError(
            f"State has {state.num_qubits} qubits, operator has {terms.num_parties} parties"
        )
    if len(settings) != terms.num_parties:
        raise ValidationError(
            f"Got settings for {len(settings)} parties, operator has {terms.num_parties}"
        )


def quantum_value(state, terms, settings):
    """
    Tr(rho B) for a StateVector or DensityMatrix, B built at ``settings``.
    """
    settings = list(settings)
    _check_counts(state, terms, settings)
    operator = build_operator_matrix(terms, settings)
    if isinstance(state, StateVector):
        return expectation(state.amplitudes, operator)
    return trace_product(state.matrix, operator)


def correlation_tensor(state, settings):
    """
    <psi| (x)_j M_j(k_j) |psi> for every key k in {0, 1, 2}^N at once.

    Pure states only; the optimiser's objective uses the same contraction.
    """
    local = np.stack(
        [np.stack([IDENTITY_2, s.setting_1.matrix, s.setting_2.matrix]) for s in settings]
    )
    return _correlations(state.amplitudes, local)


def _correlations(amplitudes, local):
    """Correlation tensor from an (N, 3, 2, 2) stack of local factors."""
    n = local.shape[0]
    ket = amplitudes.reshape((2,) * n)
    for factors in local:
        # Contract the current leading qubit axis, append (choice, output).
        ket = np.tensordot(ket, factors, axes=([0], [2]))
    bra = amplitudes.conj().reshape((2,) * n)
    return np.tensordot(ket, bra, axes=(list(range(1, 2 * n, 2)), list(range(n))))


def max_violation(terms, settings):
    """Largest |eigenvalue| of the operator at ``settings``."""
    return hermitian_max_abs_eigenvalue(build_operator_matrix(terms, list(settings)))


def ghz_correlation_closed(n, alpha, angles):
    """
    Full correlation of the generalized GHZ state for per-party (theta, phi):

    [cos^2 a + (-1)^n sin^2 a] prod cos(theta_i)
        + sin 2a prod sin(theta_i) cos(sum phi_j)
    """
    if n < 2:
        raise ValidationError(f"Correlation needs n >= 2, got {n}")
    angles = list(angles)
    if len(angles) != n:
        raise ValidationError(f"Expected {n} angle pairs, got {len(angles)}")
    thetas = np.array([a[0] for a in angles], dtype=float)
    phis = np.array([a[1] for a in angles], dtype=float)
    parity = math.cos(alpha) ** 2 + (-1) ** n * math.sin(alpha) ** 2
    return float(
        parity * np.prod(np.cos(thetas))
        + math.sin(2 * alpha) * np.prod(np.sin(thetas)) * math.cos(phis.sum())
    )


def optimal_theta_n(n, alpha):
    """
    theta_N = atan(2^((n-2)/2) tan 2a), plus pi when pi/4 <= a <= pi/2.

    At a = pi/4 both branches meet at pi/2.
    """
    if n < 3:
        raise ValidationError(f"optimal_theta_n needs n >= 3, got {n}")
    if not 0 <= alpha <= math.pi / 2:
        raise ValidationError(f"alpha must lie in [0, pi/2], got {alpha}")
    tangent = math.tan(2 * alpha)
    if alpha == math.pi / 4 or (alpha > math.pi / 4 and tangent > 0):
        return math.pi / 2
    theta = math.atan(2 ** ((n - 2) / 2) * tangent)
    if alpha > math.pi / 4:
        theta += math.pi
    return theta


def canonical_gghz_settings(n, alpha):
    """
    Parties 1..n-1 measure sigma_x (A) and sigma_y (A'); party n uses
    phi = (2 - n) pi / 4 for both settings, theta and pi - theta.
    """
    if n < 3:
        raise ValidationError(f"Canonical settings need n >= 3, got {n}")
    theta = optimal_theta_n(n, alpha)
    phi = (2 - n) * math.pi / 4
    leading = ObserverSettings(Observable(math.pi / 2, 0.0), Observable(math.pi / 2, math.pi / 2))
    last = ObserverSettings(Observable(theta, phi), Observable(math.pi - theta, phi))
    return [leading] * (n - 1) + [last]


def free_theta_value(n, alpha, theta_n):
    """2^((n-2)/2) sin 2a sin t + cos 2a cos t at canonical settings with free t."""
    return 2 ** ((n - 2) / 2) * math.sin(2 * alpha) * math.sin(theta_n) + math.cos(
        2 * alpha
    ) * math.cos(theta_n)


def gghz_violation_closed(n, alpha):
    """(2^(n-2) sin^2 2a + cos^2 2a)^(1/2)"""
    if n < 3:
        raise ValidationError(f"Closed-form violation needs n >= 3, got {n}")
    return math.sqrt(2 ** (n - 2) * math.sin(2 * alpha) ** 2 + math.cos(2 * alpha) ** 2)


def threshold_visibility(n):
    """Noise threshold of the extended operator for GHZ: 2^((2-n)/2)."""
    if n < 3:
        raise ValidationError(f"Threshold visibility needs n >= 3, got {n}")
    return 2 ** ((2 - n) / 2)


def mabk_threshold_visibility(n):
    """Noise threshold of the standard MABK inequality: 2^((1-n)/2)."""
    if n < 2:
        raise ValidationError(f"MABK threshold needs n >= 2, got {n}")
    return 2 ** ((1 - n) / 2)


# Two-party CHSH after projecting the other n-2 parties.
TWO_PARTY_THRESHOLD = 1 / math.sqrt(2)


def standard_threshold_comparison(n):
    return {
        "n": n,
        "v_thr": threshold_visibility(n),
        "v_thr_mabk": mabk_threshold_visibility(n),
        "v_thr_two_party": TWO_PARTY_THRESHOLD,
    }


def standard_escape_bound(n):
    """
    sin 2a at or below which generalized GHZ states (n odd) satisfy every
    standard two-setting full-correlation inequality.
    """
    return 1 / math.sqrt(2 ** (n - 1))


def visibility_crossing(n, terms=None, tol=1e-12):
    """
    Visibility at which the noisy-GHZ value of the extended operator at
    canonical settings crosses the LHV bound, found by bisection.
    """
    if terms is None:
        terms = extended_mabk_terms(n)
    settings = canonical_gghz_settings(n, math.pi / 4)

    def excess(v):
        return quantum_value(noisy_ghz(n, v), terms, settings) - LHV_BOUND

    if excess(1.0) <= 0:
        raise ValidationError(f"No violation at full visibility for n={n}")
    crossing = bisect(excess, 0.0, 1.0, xtol=tol)
    logger.info(f"Noisy GHZ violation threshold for n={n}: V = {crossing:.12f}")
    return crossing


def _pure_objective(angles, amplitudes, tensor):
    return -float(np.sum(tensor * _correlations(amplitudes, local_factor_stack(angles))).real)


def _mixed_objective(angles, state, terms):
    return -quantum_value(state, terms, settings_from_angles(angles))


def _run_start(index, seed_sequence, state, terms, config):
    """
    One Nelder-Mead descent on -<B> from a random point, restarted from its
    own best point while that still improves by more than the tolerance.
    """
    rng = np.random.default_rng(seed_sequence)
    x = rng.uniform(0.0, 2 * math.pi, size=4 * terms.num_parties)
    if isinstance(state, StateVector):
        objective, args = _pure_objective, (state.amplitudes, coefficient_tensor(terms))
    else:
        objective, args = _mixed_objective, (state, terms)
    options = {
        "maxiter": config.max_iterations,
        "xatol": config.tolerance,
        "fatol": config.tolerance,
        "adaptive": True,
    }
    best = None
    for attempt in range(MAX_RESTARTS + 1):
        result = minimize(objective, x, args=args, method="Nelder-Mead", options=options)
        improved = best is None or result.fun < best.fun - config.tolerance
        if best is None or result.fun < best.fun:
            best = result
        x = best.x
        if not improved:
            break
    if not best.success:
        logger.debug(f"Start {index} stopped without converging: {best.message}")
    return -best.fun, best.x


def optimize_settings(state, terms, config=None):
    """
    Best settings over ``config.starts`` seeded Nelder-Mead searches.

    Each start draws its initial angles from its own stream spawned from
    ``config.seed``; the best value wins, the lowest start index on ties.

    Returns:
        (settings, quantum_value at those settings)
    """
    config = config or OptimizerConfig()
    if state.num_qubits != terms.num_parties:
        raise ValidationError(
            f"State has {state.num_qubits} qubits, operator has {terms.num_parties} parties"
        )
    streams = np.random.SeedSequence(config.seed).spawn(config.starts)
    logger.info(
        f"Optimising {4 * terms.num_parties} angles over {config.starts} starts "
        f"(seed={config.seed}, n_jobs={config.n_jobs})"
    )
    results = Parallel(n_jobs=config.n_jobs, verbose=0)(
        delayed(_run_start)(i, stream, state, terms, config)
        for i, stream in enumerate(streams)
    )
    best_index, best_value = 0, -math.inf
    for i, (value, _) in enumerate(results):
        if value > best_value:
            best_index, best_value = i, value
    settings = settings_from_angles(results[best_index][1])
    value = quantum_value(state, terms, settings)
    logger.info(f"Best value {value:.6f} from start {best_index}")
    if value <= LHV_BOUND + VIOLATION_ATOL:
        logger.warning(f"No violation found for state {state.name}: best value {value:.6f}")
    return settings, value


def canonical_violation_report(state_name, n, alpha=None, visibility=None, terms=None):
    """
    Violation at the canonical generalized-GHZ settings.

    Only GHZ-family states (ghz, gghz, noisy-ghz) have canonical settings.
    """
    if state_name not in ("ghz", "gghz", "noisy-ghz"):
        raise ValidationError(
            f"State {state_name!r} has no canonical settings; use the optimiser"
        )
    if state_name != "gghz":
        alpha = math.pi / 4
    state = named_state(state_name, n, alpha=alpha, visibility=visibility)
    if terms is None:
        terms = extended_mabk_terms(n)
    settings = canonical_gghz_settings(n, alpha)
    value = quantum_value(state, terms, settings)
    return ViolationReport(
        state_name=state_name,
        n=n,
        quantum_value=value,
        settings=settings,
        method="closed-form",
        alpha=alpha,
    )


def optimized_violation_report(state, terms, config=None, alpha=None):
    """Best-found violation; a heuristic optimum, not a certified maximum."""
    config = config or OptimizerConfig()
    settings, value = optimize_settings(state, terms, config)
    return ViolationReport(
        state_name=state.name,
        n=state.num_qubits,
        quantum_value=value,
        settings=settings,
        method="optimized",
        seed=config.seed,
        alpha=alpha,
    )


def max_violation_report(n, terms=None):
    """Largest |eigenvalue| at canonical GHZ settings against 2^((n-2)/2)."""
    if terms is None:
        terms = extended_mabk_terms(n)
    settings = canonical_gghz_settings(n, math.pi / 4)
    return {
        "n": n,
        "max_violation": max_violation(terms, settings),
        "bound": 2 ** ((n - 2) / 2),
        "method": "eigen",
    }
