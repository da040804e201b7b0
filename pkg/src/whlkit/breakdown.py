"""Finite-sample breakdown points.

Closed-form values for the median and the median-of-pairwise-averages
families (whose breakdown is weight-independent), prefix-sum bounds for the
weighted-median families (whose breakdown depends on the weights), and an
exhaustive contamination oracle for small samples.

The prefix-sum kernel answers: consuming weights in a given adversary order,
how many can contamination absorb while their total stays strictly below
1/2? Ascending consumption (lightest first) gives the best case / upper
bound, descending the worst case / lower bound. A prefix within one part in
1e9 of 1/2 counts as exactly 1/2, so weight vectors meant to be exact
rationals behave as they would under exact arithmetic.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import EmptyPairSet, EmptySet, SampleTooLarge
from .estimators import EstimatorKind, _eval_arrays
from .samples import (
    OrderedWeightedSet,
    PairScheme,
    WeightedSample,
    exact_sum,
    normalize,
    pair_indices,
)

BP_BAND = 0.5 * (1.0 - 1e-9)

SWEEP_GRID = 128  # spread grid size for parametric weight families

EMPIRICAL_MAX_N = 12


@dataclass(frozen=True)
class Exact:
    """A single exact breakdown fraction."""

    value: float

    def __post_init__(self):
        if not 0.0 <= self.value < 1.0:
            raise ValueError(f"exact breakdown point {self.value} outside [0, 1)")


@dataclass(frozen=True)
class Bounds:
    """A [lower, upper] breakdown interval."""

    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValueError(f"invalid breakdown bounds ({self.lower}, {self.upper})")


@dataclass(frozen=True)
class BreakdownReport:
    """Breakdown point (exact or bounded) for one estimator configuration."""

    estimator: EstimatorKind
    n: int
    m: int | None
    bp: Exact | Bounds | None  # None: undefined (empty pair set)


def bp_median(n: int) -> float:
    """floor((n-1)/2) / n."""
    return ((n - 1) // 2) / n


def bp_whl1(n: int, scheme: PairScheme) -> float:
    """Closed-form breakdown of the median-of-pairwise-weighted-averages.

    Weight-independent; both bracket levels evaluate as floor, and the
    result is clamped at zero (n=1 under the strict scheme goes negative).
    """
    if scheme is PairScheme.STRICT:
        inner = math.floor((n * n - n - 2) / 4)
        k = math.floor(n - 0.5 - math.sqrt((n - 0.5) ** 2 - 2 * inner))
    elif scheme is PairScheme.WITH_DIAGONAL:
        inner = math.floor((n * n + n - 2) / 4)
        k = math.floor(n + 0.5 - math.sqrt((n + 0.5) ** 2 - 2 * inner))
    else:
        inner = math.floor((n * n - 1) / 2)
        k = math.floor(n - math.sqrt(n * n - inner))
    return max(k, 0) / n


def contamination_capacity(weights_in_order: np.ndarray) -> int:
    """max k <= m-1 such that the first k weights sum strictly below 1/2."""
    w = np.asarray(weights_in_order, dtype=np.float64)
    if w.shape[0] <= 1:
        return 0
    below = np.cumsum(w[:-1]) < BP_BAND
    if below.all():
        return w.shape[0] - 1
    return int(np.argmin(below))


def bp_weighted_median(oset: OrderedWeightedSet, order: str = "ascending") -> float:
    """Breakdown fraction of a weighted median under an adversary order.

    ``order`` fixes which weights contamination occupies first: "ascending"
    (lightest first, best case), "descending" (heaviest first, worst case),
    or "given" (the set's own order).
    """
    if oset.m == 0:
        raise EmptySet("breakdown of an empty weighted set")
    if order == "given":
        consumed = oset.ordered_weights
    elif order == "ascending":
        consumed = np.sort(oset.ordered_weights)
    elif order == "descending":
        consumed = np.sort(oset.ordered_weights)[::-1]
    else:
        raise ValueError(f"unknown adversary order {order!r}")
    return contamination_capacity(consumed) / oset.m


def bp_whl2(sample: WeightedSample, scheme: PairScheme) -> BreakdownReport:
    """Best/worst-case breakdown bounds for the weighted-median-of-pairs."""
    m = scheme.pair_count(sample.n)
    if m == 0:
        raise EmptyPairSet("n=1 yields no pairs under the strict scheme")
    pw = _pair_weights(normalize(sample).weights, scheme)
    lower, upper = _capacity_bounds(pw)
    return BreakdownReport(
        EstimatorKind("whl2", scheme), sample.n, m, Bounds(lower / m, upper / m)
    )


def empirical_breakdown(sample: WeightedSample, kind: EstimatorKind, magnitude: float = 1e12) -> float:
    """Largest k/n surviving every k-subset contamination, by enumeration.

    Each candidate subset has its values replaced by +magnitude and by
    +10*magnitude; the estimator is deemed broken if either estimate moves
    by half the contamination scale, or if the estimate itself scales with
    the magnitude (which catches a selection landing on a partially
    contaminated pair whose value grows proportionally to the
    contamination).
    """
    n = sample.n
    if n > EMPIRICAL_MAX_N:
        raise SampleTooLarge(f"exhaustive search supports n <= {EMPIRICAL_MAX_N}, got {n}")
    norm = normalize(sample)
    x0, w = norm.values, norm.weights
    kinds = (kind,)
    base = _eval_arrays(x0, w, kinds)[0]
    for k in range(1, n + 1):
        for subset in combinations(range(n), k):
            x1 = x0.copy()
            x1[list(subset)] = magnitude
            e1 = _eval_arrays(x1, w, kinds)[0]
            x1[list(subset)] = 10.0 * magnitude
            e2 = _eval_arrays(x1, w, kinds)[0]
            if (
                abs(e1 - base) >= 0.5 * magnitude
                or abs(e2 - base) >= 5.0 * magnitude
                or abs(e2 - e1) > 1e-9 * magnitude
            ):
                return (k - 1) / n
    return 1.0


@dataclass(frozen=True)
class WeightFamily:
    """Weight generator for breakdown tables.

    * ``equal``: w_i = 1 for all i;
    * ``arithmetic``: w_i proportional to an arithmetic progression; with
      ``spread=None`` the whole admissible spread range is swept on a
      SWEEP_GRID-point grid and bound extremes over the sweep are reported;
    * ``explicit``: a fixed weight vector (only its own n is defined).
    """

    kind: str
    spread: float | None = None
    weights: tuple[float, ...] | None = None

    @classmethod
    def equal(cls) -> "WeightFamily":
        return cls("equal")

    @classmethod
    def arithmetic(cls, spread: float | None = None) -> "WeightFamily":
        return cls("arith", spread=spread)

    @classmethod
    def explicit(cls, weights) -> "WeightFamily":
        return cls("explicit", weights=tuple(float(w) for w in weights))

    def sizes(self, n_max: int) -> list[int]:
        if self.kind == "explicit":
            return [len(self.weights)]
        return list(range(1, n_max + 1))

    def vectors(self, n: int) -> list[np.ndarray]:
        """Normalized weight vectors of length n covered by this family."""
        if self.kind == "equal":
            return [np.full(n, 1.0 / n)]
        if self.kind == "explicit":
            if len(self.weights) != n:
                raise ValueError(f"explicit weights have length {len(self.weights)}, not {n}")
            w = np.asarray(self.weights)
            return [w / np.sum(w)]
        # arithmetic progression around 1/n; spread < 2/(n(n-1)) keeps all
        # weights positive
        if n == 1:
            return [np.ones(1)]
        d_max = 2.0 / (n * (n - 1))
        if self.spread is not None:
            if not 0.0 <= self.spread < d_max:
                raise ValueError(f"spread {self.spread} outside [0, {d_max}) for n={n}")
            deltas = [self.spread]
        else:
            deltas = [d_max * j / (SWEEP_GRID + 1) for j in range(1, SWEEP_GRID + 1)]
        offsets = np.arange(1, n + 1) - (n + 1) / 2.0
        return [1.0 / n + offsets * d for d in deltas]


def bp_table(n_max: int, family: WeightFamily) -> list[BreakdownReport]:
    """Breakdown reports for every estimator at n = 1..n_max.

    For parametric families the weighted-median and pairwise bounds are the
    extremes (largest lower, largest upper) attained over the spread sweep.
    """
    reports: list[BreakdownReport] = []
    for n in family.sizes(n_max):
        vectors = family.vectors(n)
        reports.append(BreakdownReport(EstimatorKind("median"), n, None, Exact(bp_median(n))))
        lo, hi = _family_bounds(vectors, n, None)
        reports.append(
            BreakdownReport(EstimatorKind("weighted_median"), n, n, Bounds(lo / n, hi / n))
        )
        for scheme in PairScheme:
            m = scheme.pair_count(n)
            reports.append(
                BreakdownReport(
                    EstimatorKind("whl1", scheme), n, m, Exact(bp_whl1(n, scheme))
                )
            )
        for scheme in PairScheme:
            m = scheme.pair_count(n)
            kind = EstimatorKind("whl2", scheme)
            if m == 0:
                reports.append(BreakdownReport(kind, n, 0, None))
                continue
            lo, hi = _family_bounds(vectors, n, scheme)
            reports.append(BreakdownReport(kind, n, m, Bounds(lo / m, hi / m)))
    return reports


def _pair_weights(w_norm: np.ndarray, scheme: PairScheme) -> np.ndarray:
    i, j = pair_indices(w_norm.shape[0], scheme)
    raw = w_norm[i] + w_norm[j]
    return raw / exact_sum(raw)


def _capacity_bounds(weights: np.ndarray) -> tuple[int, int]:
    """(worst-case, best-case) contamination capacities of a weight multiset."""
    asc = np.sort(weights)
    return contamination_capacity(asc[::-1]), contamination_capacity(asc)


def _family_bounds(vectors, n: int, scheme: PairScheme | None) -> tuple[int, int]:
    lo = hi = 0
    for w in vectors:
        pw = w if scheme is None else _pair_weights(w, scheme)
        worst, best = _capacity_bounds(pw)
        lo = max(lo, worst)
        hi = max(hi, best)
    return lo, hi
