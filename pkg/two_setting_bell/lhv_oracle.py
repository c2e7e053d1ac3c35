"""
Exhaustive local-hidden-variable bound for a Bell operator.

The LHV value is affine in the hidden-variable distribution, so its extrema
sit on deterministic strategies: each party carries fixed values
(v_A, v_A') in {-1, +1}^2. There are 4^N such strategies.

Every strategy value is obtained by contracting the (3,)*N coefficient
tensor with the per-party table rows (1, v_A, v_A'). Above 8 parties the
strategy space is split into 4^(N-8) shards by fixing the assignments of the
leading parties; shards run under joblib and are max-reduced. See
docs/LHV_SHARDING.md.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from joblib import Parallel, delayed

from two_setting_bell.bell_operators import coefficient_tensor
from two_setting_bell.config import (
    BOUND_ATOL,
    EXHAUSTIVE_LHV_PARTIES,
    MAX_QUBITS,
    get_thread_count,
)
from two_setting_bell.errors import CapacityError, ValidationError

logger = logging.getLogger(__name__)

# Row c holds (1, v_A, v_A') for assignment code c = bit(v_A) + 2 * bit(v_A').
LOCAL_VALUES = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0],
    ]
)


@dataclass(frozen=True)
class DeterministicStrategy:
    """Predetermined (v_A, v_A') for every party."""

    assignments: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        for pair in self.assignments:
            if len(pair) != 2 or any(v not in (-1, 1) for v in pair):
                raise ValidationError(f"Strategy values must be +1 or -1, got {tuple(pair)}")
        assignments = tuple((int(a), int(b)) for a, b in self.assignments)
        object.__setattr__(self, "assignments", assignments)

    @classmethod
    def from_codes(cls, codes):
        return cls(tuple((int(LOCAL_VALUES[c, 1]), int(LOCAL_VALUES[c, 2])) for c in codes))

    def to_list(self):
        return [list(pair) for pair in self.assignments]


@dataclass(frozen=True)
class BoundReport:
    max_value: float
    witness: DeterministicStrategy
    holds: bool
    tight: bool

    def to_dict(self, n):
        return {
            "n": n,
            "max_value": self.max_value,
            "holds": self.holds,
            "tight": self.tight,
            "witness": self.witness.to_list(),
        }


def lhv_value(terms, strategy):
    """
    sum_k c_k prod_j v_j(k_j), with v_j(0) = 1, v_j(1) = v_A, v_j(2) = v_A'.
    """
    if len(strategy.assignments) != terms.num_parties:
        raise ValidationError(
            f"Strategy covers {len(strategy.assignments)} parties, "
            f"operator has {terms.num_parties}"
        )
    local = [(1, a, b) for a, b in strategy.assignments]
    total = 0.0
    for key, coeff in terms.terms.items():
        product = 1
        for j, choice in enumerate(key):
            product *= local[j][choice]
        total += coeff * product
    return total


def _evaluate_shard(tensor, prefix_codes):
    """
    Best |value| over all strategies whose leading parties use prefix_codes.

    Returns:
        (max |value|, codes of the remaining parties attaining it)
    """
    values = tensor
    for code in prefix_codes:
        values = np.tensordot(LOCAL_VALUES[code], values, axes=([0], [0]))
    remaining = values.ndim
    for _ in range(remaining):
        # Contracting axis 0 and appending the strategy axis keeps party order.
        values = np.tensordot(values, LOCAL_VALUES.T, axes=([0], [0]))
    magnitudes = np.abs(np.asarray(values)).reshape(-1)
    index = int(np.argmax(magnitudes))
    codes = np.unravel_index(index, (4,) * remaining) if remaining else ()
    return float(magnitudes[index]), tuple(int(c) for c in codes)


def _shard_prefixes(num_prefix):
    return [
        tuple(int(c) for c in np.unravel_index(i, (4,) * num_prefix)) if num_prefix else ()
        for i in range(4**num_prefix)
    ]


def lhv_search(terms, sharded=False, n_jobs=None):
    """
    Maximum |LHV value| and an attaining strategy.

    Args:
        terms: TermMap to bound
        sharded: allow 9..12 parties by splitting into 4^(N-8) shards
        n_jobs: joblib workers for the shards (default: BELL_THREADS)

    Returns:
        (max_value, DeterministicStrategy)
    """
    n = terms.num_parties
    if n > MAX_QUBITS:
        raise CapacityError(
            f"LHV enumeration over {n} parties exceeds the cap of {MAX_QUBITS}"
        )
    if n > EXHAUSTIVE_LHV_PARTIES and not sharded:
        raise CapacityError(
            f"Exhaustive LHV enumeration is capped at {EXHAUSTIVE_LHV_PARTIES} parties "
            f"(got {n}); use the sharded mode (sharded=True, or `lhv-bound --sharded`) "
            f"for up to {MAX_QUBITS}"
        )
    tensor = coefficient_tensor(terms)
    prefixes = _shard_prefixes(max(n - EXHAUSTIVE_LHV_PARTIES, 0))
    if n_jobs is None:
        n_jobs = get_thread_count()

    logger.info(f"Enumerating {4 ** n} strategies for {n} parties in {len(prefixes)} shard(s)")
    if len(prefixes) == 1:
        results = [_evaluate_shard(tensor, prefixes[0])]
    else:
        results = Parallel(n_jobs=n_jobs, prefer="threads", verbose=0)(
            delayed(_evaluate_shard)(tensor, prefix) for prefix in prefixes
        )

    best_value, best_codes = -1.0, None
    for prefix, (value, codes) in zip(prefixes, results):
        # Strictly greater keeps the lowest shard index on ties.
        if value > best_value:
            best_value, best_codes = value, prefix + codes
    return best_value, DeterministicStrategy.from_codes(best_codes)


def lhv_max(terms, sharded=False, n_jobs=None):
    """Maximum over all deterministic strategies of |LHV value|."""
    value, _ = lhv_search(terms, sharded=sharded, n_jobs=n_jobs)
    return value


def verify_bound(terms, sharded=False, n_jobs=None):
    """
    Check |<B>_LHV| <= 1 and report the attaining strategy.
    """
    max_value, witness = lhv_search(terms, sharded=sharded, n_jobs=n_jobs)
    holds = max_value <= 1 + BOUND_ATOL
    tight = abs(max_value - 1) <= BOUND_ATOL
    if not holds:
        logger.warning(f"LHV bound violated: max |<B>_LHV| = {max_value!r}")
    elif not tight:
        logger.info(f"LHV bound holds but is not attained: max = {max_value!r}")
    return BoundReport(max_value=max_value, witness=witness, holds=holds, tight=tight)
