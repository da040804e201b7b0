"""Location estimators: classical baselines and the weighted pairwise families.

The roster is closed and has thirteen variants:

* ``mean``, ``median`` - weights ignored;
* ``weighted_mean`` - sum of w_i * x_i over normalized weights;
* ``weighted_median`` - the 50% weighted percentile of the observations;
* ``hl`` (3 schemes) - median of plain pairwise averages (x_i + x_j)/2;
* ``whl1`` (3 schemes) - median of pairwise weighted averages
  (w_i*x_i + w_j*x_j)/(w_i + w_j);
* ``whl2`` (3 schemes) - weighted median of the same pairwise weighted
  averages, each pair weighted by its renormalized w_i + w_j.

Conventions, fixed once for the whole package:

* an even-count (unweighted) median averages the two middle order
  statistics;
* the weighted median returns the value just above the 1/2 cumulative
  boundary - when a prefix sums to exactly 1/2 the *next* value is returned.
  Consequence: with equal weights and an even count the weighted median is
  the upper-middle element and intentionally differs from ``median``. For
  negative affine rescalings this boundary case (a prefix of exactly 1/2)
  is also the one spot where equivariance does not hold exactly.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EmptyPairSet, EmptySet
from .samples import OrderedWeightedSet, PairScheme, WeightedSample, exact_sum, normalize

_PAIRWISE_FAMILIES = ("hl", "whl1", "whl2")
_FAMILIES = ("mean", "median", "weighted_mean", "weighted_median") + _PAIRWISE_FAMILIES


@dataclass(frozen=True)
class EstimatorKind:
    """One estimator variant; pairwise families carry their index scheme."""

    family: str
    scheme: PairScheme | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown estimator family {self.family!r}")
        if self.family in _PAIRWISE_FAMILIES:
            if self.scheme is None:
                raise ValueError(f"{self.family} requires a pair scheme")
        elif self.scheme is not None:
            raise ValueError(f"{self.family} does not take a pair scheme")

    @property
    def label(self) -> tuple[str, str]:
        """(estimator, scheme) pair as used in CSV output."""
        return self.family, self.scheme.value if self.scheme else ""


def all_kinds() -> tuple[EstimatorKind, ...]:
    """The full thirteen-variant roster in canonical order."""
    kinds = [EstimatorKind(f) for f in ("mean", "median", "weighted_mean", "weighted_median")]
    for family in _PAIRWISE_FAMILIES:
        for scheme in PairScheme:
            kinds.append(EstimatorKind(family, scheme))
    return tuple(kinds)


def mean(sample: WeightedSample) -> float:
    """Arithmetic mean of the values; weights are ignored."""
    return _mean_arrays(sample.values)


def _mean_arrays(x: np.ndarray) -> float:
    v = exact_sum(x) / x.shape[0]
    # the divided rounded sum can leave the value range by an ulp
    return min(max(v, float(np.min(x))), float(np.max(x)))


def median(sample: WeightedSample) -> float:
    """Sample median (average of the two middles for even n)."""
    return float(_kernels.median(sample.values))


def weighted_mean(sample: WeightedSample) -> float:
    """Weighted mean over normalized weights."""
    norm = normalize(sample)
    return _weighted_mean_arrays(norm.values, norm.weights)


def _weighted_mean_arrays(x: np.ndarray, w_norm: np.ndarray) -> float:
    v = exact_sum(w_norm * x)
    # normalized weights can round to a sum one ulp above 1; a convex
    # combination stays inside the value range
    return min(max(v, float(np.min(x))), float(np.max(x)))


def weighted_median(oset: OrderedWeightedSet) -> float:
    """Weighted median of an ordered set whose weights sum to one.

    Returns the value at which the cumulative weight first exceeds 1/2; a
    prefix of exactly 1/2 selects the following value.
    """
    if oset.m == 0:
        raise EmptySet("weighted median of an empty set")
    hit = np.nonzero(oset.cumulative > _kernels.SELECT_BAND)[0]
    if hit.size == 0:
        return float(oset.ordered_values[-1])
    return float(oset.ordered_values[hit[0]])


def hl(sample: WeightedSample, scheme: PairScheme) -> float:
    """Median of plain pairwise averages over the scheme's index set."""
    _require_pairs(sample.n, scheme)
    return float(_kernels.median(_kernels.walsh_values(sample.values, scheme.code)))


def whl1(sample: WeightedSample, scheme: PairScheme) -> float:
    """Median of pairwise weighted averages; pair weights are unused."""
    _require_pairs(sample.n, scheme)
    norm = normalize(sample)
    values, _ = _kernels.pair_arrays(norm.values, norm.weights, scheme.code)
    return float(_kernels.median(values))


def whl2(sample: WeightedSample, scheme: PairScheme) -> float:
    """Weighted median of pairwise weighted averages under renormalized pair weights."""
    _require_pairs(sample.n, scheme)
    norm = normalize(sample)
    values, raw = _kernels.pair_arrays(norm.values, norm.weights, scheme.code)
    return float(_kernels.weighted_median(values, raw / exact_sum(raw)))


def estimate(sample: WeightedSample, kind: EstimatorKind) -> float:
    """Evaluate one estimator variant on a sample."""
    return _eval_arrays(sample.values, normalize(sample).weights, (kind,))[0]


def evaluate_kinds(sample: WeightedSample, kinds) -> np.ndarray:
    """Evaluate several estimator variants, sharing pair sets across them."""
    return _eval_arrays(sample.values, normalize(sample).weights, tuple(kinds))


def _require_pairs(n: int, scheme: PairScheme):
    if scheme.pair_count(n) == 0:
        raise EmptyPairSet("n=1 yields no pairs under the strict scheme")


def _eval_arrays(x: np.ndarray, w_norm: np.ndarray, kinds) -> np.ndarray:
    """Shared evaluation core. ``w_norm`` must already be normalized."""
    out = np.empty(len(kinds))
    pair_cache: dict[int, tuple] = {}
    walsh_cache: dict[int, np.ndarray] = {}
    for pos, kind in enumerate(kinds):
        family = kind.family
        if family == "mean":
            out[pos] = _mean_arrays(x)
        elif family == "median":
            out[pos] = _kernels.median(x)
        elif family == "weighted_mean":
            out[pos] = _weighted_mean_arrays(x, w_norm)
        elif family == "weighted_median":
            out[pos] = _kernels.weighted_median(x, w_norm)
        elif family == "hl":
            _require_pairs(x.shape[0], kind.scheme)
            code = kind.scheme.code
            if code not in walsh_cache:
                walsh_cache[code] = _kernels.walsh_values(x, code)
            out[pos] = _kernels.median(walsh_cache[code])
        else:  # whl1 / whl2
            _require_pairs(x.shape[0], kind.scheme)
            code = kind.scheme.code
            if code not in pair_cache:
                values, raw = _kernels.pair_arrays(x, w_norm, code)
                pair_cache[code] = (values, raw / exact_sum(raw))
            values, pw = pair_cache[code]
            if family == "whl1":
                out[pos] = _kernels.median(values)
            else:
                out[pos] = _kernels.weighted_median(values, pw)
    return out
