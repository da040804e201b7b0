"""Weighted samples, index schemes, and pairwise value/weight sets.

Everything downstream (estimators, breakdown calculators, the simulation
engine) consumes the types defined here. Weights are accepted unnormalized
and normalized once; pair enumeration is row-major by (i, j) so dumps and
tests are deterministic.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import EmptyPairSet, EmptySample, LengthMismatch, NonPositiveWeight

WEIGHT_SUM_TOL = 1e-12


class PairScheme(Enum):
    """Which (i, j) index pairs enter the pairwise set."""

    STRICT = "strict"  # i < j
    WITH_DIAGONAL = "diag"  # i <= j
    ALL = "all"  # every ordered pair (i, j)

    @property
    def code(self) -> int:
        return _SCHEME_CODES[self]

    def pair_count(self, n: int) -> int:
        """Closed-form pair count m for a sample of size n."""
        if self is PairScheme.STRICT:
            return (n * n - n) // 2
        if self is PairScheme.WITH_DIAGONAL:
            return (n * n + n) // 2
        return n * n

    @classmethod
    def from_token(cls, token: str) -> "PairScheme":
        try:
            return _SCHEME_TOKENS[token.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown pair scheme {token!r}") from None


_SCHEME_CODES = {
    PairScheme.STRICT: _kernels.STRICT,
    PairScheme.WITH_DIAGONAL: _kernels.WITH_DIAGONAL,
    PairScheme.ALL: _kernels.ALL,
}

_SCHEME_TOKENS = {
    "strict": PairScheme.STRICT,
    "diag": PairScheme.WITH_DIAGONAL,
    "all": PairScheme.ALL,
}


def _as_readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class WeightedSample:
    """Observations ``values`` with strictly positive ``weights``."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values))
        object.__setattr__(self, "weights", _as_readonly(self.weights))
        if self.values.shape[0] != self.weights.shape[0]:
            raise LengthMismatch(
                f"{self.values.shape[0]} values vs {self.weights.shape[0]} weights"
            )
        if self.values.shape[0] == 0:
            raise EmptySample("sample must contain at least one observation")
        if not np.all(np.isfinite(self.values)) or not np.all(np.isfinite(self.weights)):
            raise ValueError("values and weights must be finite")
        if np.any(self.weights <= 0.0):
            bad = int(np.argmax(self.weights <= 0.0))
            raise NonPositiveWeight(f"weight[{bad}] = {self.weights[bad]} must be > 0")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def normalized(self) -> "WeightedSample":
        return normalize(self)


@dataclass(frozen=True)
class PairSet:
    """Pairwise weighted averages and renormalized pair weights for one scheme.

    ``pair_values[k]`` is ``(w_i*x_i + w_j*x_j)/(w_i + w_j)`` and
    ``pair_weights[k]`` is ``(w_i + w_j)`` divided by its total over the
    scheme's index set, both enumerated row-major by (i, j).
    """

    scheme: PairScheme
    pair_values: np.ndarray
    pair_weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pair_values", _as_readonly(self.pair_values))
        object.__setattr__(self, "pair_weights", _as_readonly(self.pair_weights))
        if self.pair_values.shape[0] != self.pair_weights.shape[0]:
            raise LengthMismatch("pair_values and pair_weights differ in length")

    @property
    def m(self) -> int:
        return self.pair_values.shape[0]


@dataclass(frozen=True)
class OrderedWeightedSet:
    """Values sorted ascending with their weights and running weight totals."""

    ordered_values: np.ndarray
    ordered_weights: np.ndarray
    cumulative: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ordered_values", _as_readonly(self.ordered_values))
        object.__setattr__(self, "ordered_weights", _as_readonly(self.ordered_weights))
        object.__setattr__(self, "cumulative", _as_readonly(self.cumulative))

    @property
    def m(self) -> int:
        return self.ordered_values.shape[0]


def pair_indices(n: int, scheme: PairScheme) -> tuple[np.ndarray, np.ndarray]:
    """Row-major (i, j) index arrays for the scheme's pair set."""
    from ._kernels import pyback

    return pyback.pair_indices(n, scheme.code)


def exact_sum(values: np.ndarray) -> float:
    """Correctly rounded sum; order-independent, so jointly permuting a
    sample cannot perturb normalization by a rounding ulp."""
    return math.fsum(values.tolist())


def normalize(sample: WeightedSample) -> WeightedSample:
    """Rescale weights to sum to one; values are untouched."""
    return WeightedSample(sample.values, sample.weights / exact_sum(sample.weights))


def build_pairs(sample: WeightedSample, scheme: PairScheme) -> PairSet:
    """Materialize the pairwise value/weight set for ``scheme``.

    The sample is normalized internally, so raw weights are accepted. Raises
    EmptyPairSet for the one degenerate case (n=1 under the strict scheme).
    """
    if scheme.pair_count(sample.n) == 0:
        raise EmptyPairSet("n=1 yields no pairs under the strict scheme")
    norm = normalize(sample)
    values, raw = _kernels.pair_arrays(norm.values, norm.weights, scheme.code)
    return PairSet(scheme, values, raw / exact_sum(raw))


def order_by_value(pair_values, pair_weights) -> OrderedWeightedSet:
    """Stable ascending sort by value, weights carried along, cumsums attached."""
    values = np.asarray(pair_values, dtype=np.float64).reshape(-1)
    weights = np.asarray(pair_weights, dtype=np.float64).reshape(-1)
    if values.shape[0] != weights.shape[0]:
        raise LengthMismatch(
            f"{values.shape[0]} values vs {weights.shape[0]} weights"
        )
    order = np.argsort(values, kind="stable")
    sv = values[order]
    sw = weights[order]
    return OrderedWeightedSet(sv, sw, np.cumsum(sw))
