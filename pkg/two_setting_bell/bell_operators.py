"""
Sign tables, correlation-term expansions and dense matrices for the WWZB
operator, its MABK specialisation, and the extended N-party operator

    B = B_{N-1} (x) (A_N + A'_N)/2 + 1_{N-1} (x) (A_N - A'_N)/2.

Index conventions (shared by every module):
    - SignTable index: bit j (0 = least significant) encodes s_{j+1} = 1 - 2*bit.
    - TermKey: tuple over {0, 1, 2} per party; 0 = not measured (identity),
      1 = A_j, 2 = A'_j. Party 1 is the first entry and the most significant
      tensor slot.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Tuple

import numpy as np

from two_setting_bell.config import MAX_DIMENSION, MAX_QUBITS, PRUNE_ATOL
from two_setting_bell.errors import CapacityError, ValidationError
from two_setting_bell.linalg_core import as_hermitian, kron

logger = logging.getLogger(__name__)

SIGN_ROUNDING_ATOL = 1e-9

TermKey = Tuple[int, ...]


@dataclass(frozen=True)
class SignTable:
    """S(s_1, ..., s_M) stored over all 2^M sign vectors."""

    num_parties: int
    values: Tuple[int, ...]

    def __post_init__(self):
        if self.num_parties < 1:
            raise ValidationError(
                f"Sign table needs at least one party, got {self.num_parties}"
            )
        if self.num_parties > MAX_QUBITS:
            raise CapacityError(
                f"Sign table party count {self.num_parties} exceeds the cap of {MAX_QUBITS}"
            )
        values = tuple(self.values)
        if len(values) != 2**self.num_parties:
            raise ValidationError(
                f"Sign table for {self.num_parties} parties needs {2 ** self.num_parties} "
                f"entries, got {len(values)}"
            )
        if any(v not in (-1, 1) for v in values):
            raise ValidationError("Sign table entries must be exactly +1 or -1")
        object.__setattr__(self, "values", tuple(int(v) for v in values))

    def sign_vector(self, index):
        """(s_1, ..., s_M) for a table index."""
        return tuple(1 - 2 * ((index >> j) & 1) for j in range(self.num_parties))


@dataclass(frozen=True)
class TermMap:
    """Sparse real expansion of a Bell operator over measurement-choice keys."""

    num_parties: int
    terms: Mapping[TermKey, float]

    def __post_init__(self):
        if self.num_parties < 1:
            raise ValidationError(
                f"TermMap needs at least one party, got {self.num_parties}"
            )
        cleaned = {}
        for key, coeff in self.terms.items():
            key = tuple(key)
            if len(key) != self.num_parties:
                raise ValidationError(
                    f"Term key {key} has length {len(key)}, expected {self.num_parties}"
                )
            if any(k not in (0, 1, 2) for k in key):
                raise ValidationError(f"Term key {key} has symbols outside {{0, 1, 2}}")
            key = tuple(int(k) for k in key)
            if not math.isfinite(coeff):
                raise ValidationError(f"Term {key} has non-finite coefficient {coeff!r}")
            if abs(coeff) > PRUNE_ATOL:
                cleaned[key] = float(coeff)
        object.__setattr__(self, "terms", MappingProxyType(dict(sorted(cleaned.items()))))

    def __reduce__(self):
        # mappingproxy does not pickle; joblib workers need TermMap copies.
        return (TermMap, (self.num_parties, dict(self.terms)))

    def scaled(self, factor):
        return TermMap(self.num_parties, {k: c * factor for k, c in self.terms.items()})


@dataclass(frozen=True)
class MabkCoefficients:
    """c_0 ... c_M indexed by the number of primed settings."""

    num_parties: int
    c: Tuple[float, ...]


def _check_party_range(m):
    if not 1 <= m <= MAX_QUBITS:
        raise CapacityError(f"Party count must be in [1, {MAX_QUBITS}], got {m}")


def _sign_matrix(m):
    """Rows are the sign vectors of every table index, shape (2^m, m)."""
    indices = np.arange(2**m)[:, None]
    bits = (indices >> np.arange(m)[None, :]) & 1
    return 1 - 2 * bits


def mabk_sign_table(m):
    """
    S(s) = sqrt(2) cos[(s_1 + ... + s_m - m + 1) pi / 4], rounded to +/-1.

    The argument is always an odd multiple of pi/4, so the rounding residual
    is pure floating-point noise.
    """
    _check_party_range(m)
    total = _sign_matrix(m).sum(axis=1)
    raw = math.sqrt(2) * np.cos((total - m + 1) * math.pi / 4)
    rounded = np.where(raw > 0, 1, -1)
    residual = float(np.max(np.abs(raw - rounded)))
    assert residual <= SIGN_ROUNDING_ATOL, f"MABK sign residual {residual:.3e}"
    return SignTable(m, tuple(int(v) for v in rounded))


def mabk_coefficients(m):
    """c_k = 2^((1-m)/2) cos[(2k - m + 1) pi / 4] for k = 0..m."""
    _check_party_range(m)
    scale = 2.0 ** ((1 - m) / 2)
    return MabkCoefficients(
        m,
        tuple(scale * math.cos((2 * k - m + 1) * math.pi / 4) for k in range(m + 1)),
    )


def _walsh_hadamard(values, m):
    """
    Sum_s v(s) (-1)^{popcount(mask & index(s))} for every mask.

    One butterfly per party axis.
    """
    v = np.asarray(values, dtype=float).reshape((2,) * m)
    for axis in range(m):
        low = np.take(v, 0, axis=axis)
        high = np.take(v, 1, axis=axis)
        v = np.stack([low + high, low - high], axis=axis)
    return v.reshape(-1)


def _key_from_mask(mask, m):
    return tuple(2 if (mask >> j) & 1 else 1 for j in range(m))


def wwzb_terms(sign_table):
    """
    Full-correlation expansion of the WWZB operator for a sign table.

    coefficient(k) = 2^-M sum_s S(s) prod_j s_j^(k_j - 1), k in {1, 2}^M.
    """
    m = sign_table.num_parties
    transformed = _walsh_hadamard(sign_table.values, m) / 2**m
    terms = {
        _key_from_mask(mask, m): float(coeff)
        for mask, coeff in enumerate(transformed)
        if abs(coeff) > PRUNE_ATOL
    }
    logger.debug(f"WWZB expansion over {m} parties has {len(terms)} terms")
    return TermMap(m, terms)


def extended_terms(inner):
    """
    Append party N to an (N-1)-party operator:
    B_{N-1} (x) (A_N + A'_N)/2 + 1_{N-1} (x) (A_N - A'_N)/2.
    """
    if inner.num_parties < 2:
        raise ValidationError(
            f"Extended operator needs an inner operator on >= 2 parties, "
            f"got {inner.num_parties}"
        )
    n = inner.num_parties + 1
    if n > MAX_QUBITS:
        raise CapacityError(f"Extended operator on {n} parties exceeds the cap of {MAX_QUBITS}")
    terms = {}
    for key, coeff in inner.terms.items():
        for last in (1, 2):
            extended_key = key + (last,)
            terms[extended_key] = terms.get(extended_key, 0.0) + coeff / 2
    blank = (0,) * inner.num_parties
    terms[blank + (1,)] = terms.get(blank + (1,), 0.0) + 0.5
    terms[blank + (2,)] = terms.get(blank + (2,), 0.0) - 0.5
    return TermMap(n, terms)


def standard_mabk_terms(n):
    """The standard n-party MABK operator in WWZB form."""
    return wwzb_terms(mabk_sign_table(n))


def extended_mabk_terms(n):
    """Extended operator with the MABK polynomial on the first n-1 parties."""
    if n < 3:
        raise ValidationError(f"Extended MABK operator needs n >= 3, got {n}")
    return extended_terms(standard_mabk_terms(n - 1))


def term_count(terms):
    return len(terms.terms)


def _contract(items, settings, depth):
    """
    Sum_k c_k (x)_{j >= depth} M_j(k_j) for terms sharing a key prefix.

    Terms are grouped by the choice of party ``depth`` so each local factor
    is applied once per distinct prefix.
    """
    if depth == len(settings):
        return np.array([[sum(coeff for _, coeff in items)]], dtype=np.complex128)
    groups = {}
    for key, coeff in items:
        groups.setdefault(key[depth], []).append((key, coeff))
    result = None
    for choice in sorted(groups):
        block = kron(settings[depth].matrix(choice), _contract(groups[choice], settings, depth + 1))
        result = block if result is None else result + block
    return result


def build_operator_matrix(terms, settings):
    """
    Dense Hermitian matrix of a TermMap at the given local settings.

    Args:
        terms: TermMap over N parties
        settings: sequence of N ObserverSettings, party 1 first

    Returns:
        2^N x 2^N complex128 array
    """
    settings = list(settings)
    n = terms.num_parties
    if len(settings) != n:
        raise ValidationError(
            f"Got settings for {len(settings)} parties, operator has {n}"
        )
    if 2**n > MAX_DIMENSION:
        raise CapacityError(
            f"Operator on {n} parties has dimension {2 ** n}, cap is {MAX_DIMENSION}"
        )
    if not terms.terms:
        return np.zeros((2**n, 2**n), dtype=np.complex128)
    matrix = _contract(list(terms.terms.items()), settings, 0)
    return as_hermitian(matrix)


def coefficient_tensor(terms):
    """Dense coefficient array of shape (3,) * N indexed by term keys."""
    tensor = np.zeros((3,) * terms.num_parties)
    for key, coeff in terms.terms.items():
        tensor[key] = coeff
    return tensor


def term_map_to_dict(terms):
    """JSON-ready form, keys in lexicographic order."""
    return {
        "n": terms.num_parties,
        "terms": [
            {"key": list(key), "coeff": coeff} for key, coeff in terms.terms.items()
        ],
    }


def load_sign_table(path):
    """
    Read 2^M whitespace-separated +/-1 entries in table index order.
    """
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ValidationError(f"Cannot read sign table {path}: {e}")
    tokens = text.split()
    values = []
    for token in tokens:
        if token not in ("1", "+1", "-1"):
            raise ValidationError(f"Sign table entry {token!r} is not +1 or -1")
        values.append(int(token))
    size = len(values)
    if size < 2 or size & (size - 1):
        raise ValidationError(
            f"Sign table must have 2^M entries with M >= 1, got {size}"
        )
    m = size.bit_length() - 1
    logger.info(f"Loaded {m}-party sign table from {path}")
    return SignTable(m, tuple(values))
