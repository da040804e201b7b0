"""Deterministic, seedable Monte Carlo engine.

Sample generators for the six benchmark configurations, the twelve
large-sample sensitivity cases, a contamination injector, and the bias /
relative-efficiency metrics.

Reproducibility contract: every random stream is a Philox generator keyed
by ``SeedSequence(seed, spawn_key=(purpose, replication, ...))``, so results
are bit-identical for a given seed regardless of worker count or execution
order. Replication r of a sweep reuses one base sample across the whole
proportion grid (common random numbers); outlier index selection gets an
independent stream per (replication, grid position).

Metric conventions:

* bias is ``|average(estimates) - theta|`` - the deviation of the
  replication average from the true weighted mean;
* ``var_hat`` is the unbiased sample variance of the estimate stream;
* relative efficiency is ``100 * var_theta / var_hat`` with ``var_theta``
  the closed-form weighted variance ``sum((w_i * sigma_i)^2)`` under
  normalized weights;
* sensitivity "average bias" is the mean absolute deviation of the
  contaminated estimate from the same replication's uncontaminated
  weighted mean.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BadCase, BadParameters, InsufficientReplications
from .estimators import EstimatorKind, _eval_arrays, _weighted_mean_arrays
from .samples import PairScheme, WeightedSample, exact_sum

DEFAULT_SEED = 20240101
GENERATOR_ID = f"philox-seedseq numpy={np.__version__}"

SENSITIVITY_N = 100
WEIGHT_FLOOR = 1e-6  # weights derived from observations stay strictly positive

# stream purposes (first spawn_key component)
_OBS, _SENS_VALUES, _SENS_W1, _OUTLIERS = 0, 1, 2, 3


def _gen(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class DistributionSpec:
    """One of the four supported sampling families."""

    family: str  # uniform | normal | chisquare | poisson
    a: float
    b: float = 0.0

    def __post_init__(self):
        if self.family == "uniform":
            if not self.b > self.a:
                raise BadParameters(f"uniform needs hi > lo, got ({self.a}, {self.b})")
        elif self.family == "normal":
            if not self.b > 0:
                raise BadParameters(f"normal needs sigma > 0, got {self.b}")
        elif self.family in ("chisquare", "poisson"):
            if not self.a > 0:
                raise BadParameters(f"{self.family} parameter must be > 0, got {self.a}")
        else:
            raise BadParameters(f"unknown distribution family {self.family!r}")

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "DistributionSpec":
        return cls("uniform", lo, hi)

    @classmethod
    def normal(cls, mu: float, sigma: float) -> "DistributionSpec":
        return cls("normal", mu, sigma)

    @classmethod
    def chisquare(cls, df: float) -> "DistributionSpec":
        return cls("chisquare", df)

    @classmethod
    def poisson(cls, lam: float) -> "DistributionSpec":
        return cls("poisson", lam)

    def mean(self) -> float:
        if self.family == "uniform":
            return 0.5 * (self.a + self.b)
        return self.a  # normal mu, chisquare df, poisson lambda

    def variance(self) -> float:
        if self.family == "uniform":
            return (self.b - self.a) ** 2 / 12.0
        if self.family == "normal":
            return self.b**2
        if self.family == "chisquare":
            return 2.0 * self.a
        return self.a

    def draw(self, gen: np.random.Generator, size: int) -> np.ndarray:
        if self.family == "uniform":
            return gen.uniform(self.a, self.b, size)
        if self.family == "normal":
            return gen.normal(self.a, self.b, size)
        if self.family == "chisquare":
            return gen.chisquare(self.a, size)
        return gen.poisson(self.a, size).astype(np.float64)

    @property
    def label(self) -> str:
        if self.family == "uniform":
            return f"uniform({self.a:g},{self.b:g})"
        if self.family == "normal":
            return f"normal({self.a:g},{self.b:g})"
        if self.family == "chisquare":
            return f"chisquare({self.a:g})"
        return f"poisson({self.a:g})"


def sampler(spec: DistributionSpec, seed: int, count: int) -> np.ndarray:
    """Deterministic variate stream: same (spec, seed, count) -> same output."""
    return spec.draw(_gen(seed), count)


@dataclass(frozen=True)
class SampleSpec:
    """Generative description of a benchmark sample.

    Observation i is drawn from normal(mus[i], sigmas[i]) and carries raw
    weight weights[i] (normalized downstream).
    """

    mus: tuple[float, ...]
    sigmas: tuple[float, ...]
    weights: tuple[float, ...]
    id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "mus", tuple(float(v) for v in self.mus))
        object.__setattr__(self, "sigmas", tuple(float(v) for v in self.sigmas))
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        if not (len(self.mus) == len(self.sigmas) == len(self.weights)):
            raise BadParameters("mus, sigmas and weights must have equal length")
        if len(self.mus) == 0:
            raise BadParameters("sample spec must have at least one observation")
        if any(s <= 0 for s in self.sigmas):
            raise BadParameters("all sigmas must be > 0")
        if any(w <= 0 for w in self.weights):
            raise BadParameters("all weights must be > 0")

    @property
    def n(self) -> int:
        return len(self.mus)


def table_sample(sample_id: int, n: int | None = None) -> SampleSpec:
    """The six benchmark sample configurations.

    Sample 1 is the fixed n=4 configuration with means (4,3,2,1), standard
    deviations (10,5,10,5) and weights (0.1,0.2,0.3,0.4) - the pairing that
    yields weighted mean 2 and weighted variance 15 exactly. Samples 2-6
    take any n; their mean/sigma/weight sequences follow the published
    constructions (harmonic and inverse-square weight ladders).
    """
    if sample_id == 1:
        if n not in (None, 4):
            raise BadParameters("sample 1 is fixed at n=4")
        return SampleSpec((4, 3, 2, 1), (10, 5, 10, 5), (0.1, 0.2, 0.3, 0.4), id="sample1")
    if sample_id not in (2, 3, 4, 5, 6):
        raise BadCase(f"unknown sample id {sample_id}; valid ids are 1..6")
    if n is None or n < 1:
        raise BadParameters("samples 2..6 need an explicit n >= 1")
    idx = np.arange(1, n + 1, dtype=np.float64)
    sigmas = tuple(idx)
    if sample_id == 2:
        return SampleSpec(tuple(idx), sigmas, (1.0,) * n, id="sample2")
    if sample_id == 3:
        return SampleSpec(tuple(idx[::-1]), sigmas, (1.0,) * n, id="sample3")
    if sample_id == 4:
        return SampleSpec(tuple(idx), sigmas, tuple(1.0 / idx), id="sample4")
    if sample_id == 5:
        return SampleSpec(tuple(idx[::-1]), sigmas, tuple(1.0 / idx), id="sample5")
    return SampleSpec((5.0,) * n, sigmas, tuple(1.0 / idx**2), id="sample6")


def _norm_weights(spec: SampleSpec) -> np.ndarray:
    w = np.asarray(spec.weights)
    return w / exact_sum(w)


def true_theta(spec: SampleSpec) -> float:
    """Closed-form weighted mean of the generative means."""
    return exact_sum(_norm_weights(spec) * np.asarray(spec.mus))


def true_var(spec: SampleSpec) -> float:
    """Closed-form weighted variance sum((w_i*sigma_i)^2), normalized weights."""
    return float(np.sum((_norm_weights(spec) * np.asarray(spec.sigmas)) ** 2))


def generate_sample(spec: SampleSpec, seed: int, replication_index: int) -> WeightedSample:
    """Draw one replication of the spec; weights are copied from the spec."""
    gen = _gen(seed, _OBS, replication_index)
    x = gen.normal(np.asarray(spec.mus), np.asarray(spec.sigmas))
    return WeightedSample(x, np.asarray(spec.weights))


@dataclass(frozen=True)
class ContaminationSpec:
    """Outlier injection: a random subset of ceil(proportion*n) observations
    is shifted upward by shift_multiplier population standard deviations."""

    proportion: float
    shift_multiplier: float = 5.0

    def __post_init__(self):
        if not 0.0 <= self.proportion <= 0.25:
            raise BadParameters(f"proportion {self.proportion} outside [0, 0.25]")
        if not self.shift_multiplier > 0:
            raise BadParameters("shift_multiplier must be > 0")


def inject_outliers(
    sample: WeightedSample,
    contamination: ContaminationSpec,
    population_sigma: float,
    seed: int,
    replication_index: int,
) -> WeightedSample:
    """Shift a uniformly chosen index subset; weights are untouched."""
    k = math.ceil(contamination.proportion * sample.n)
    if k == 0:
        return sample
    gen = _gen(seed, _OUTLIERS, replication_index)
    x = _contaminate(sample.values, k, contamination.shift_multiplier * population_sigma, gen)
    return WeightedSample(x, sample.weights)


def _contaminate(x: np.ndarray, k: int, shift: float, gen: np.random.Generator) -> np.ndarray:
    out = x.copy()
    idx = gen.choice(x.shape[0], size=k, replace=False)
    out[idx] += shift
    return out


@dataclass(frozen=True)
class MetricsRow:
    """Aggregated bias / efficiency metrics for one estimator variant."""

    estimator: EstimatorKind
    n: int
    replications: int
    theta: float
    bias: float
    var_hat: float
    var_theta: float
    relative_efficiency: float
    seed: int


def _chunks(total: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, -(-total // max(1, workers * 4)))
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def _sim_chunk(payload):
    mus, sigmas, w_norm, kinds, seed, start, stop = payload
    out = np.empty((stop - start, len(kinds)))
    for r in range(start, stop):
        gen = _gen(seed, _OBS, r)
        x = gen.normal(mus, sigmas)
        out[r - start] = _eval_arrays(x, w_norm, kinds)
    return start, out


def run_replications(
    spec: SampleSpec,
    kinds,
    reps: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> list[MetricsRow]:
    """Replicate the spec and aggregate per-estimator metrics.

    Output is identical for identical (spec, kinds, reps, seed) whatever the
    worker count: the estimate matrix is assembled by replication index and
    reduced in fixed order.
    """
    if reps < 2:
        raise InsufficientReplications(f"need at least 2 replications, got {reps}")
    kinds = tuple(kinds)
    mus = np.asarray(spec.mus)
    sigmas = np.asarray(spec.sigmas)
    w_norm = _norm_weights(spec)
    estimates = np.empty((reps, len(kinds)))
    payloads = [
        (mus, sigmas, w_norm, kinds, int(seed), start, stop)
        for start, stop in _chunks(reps, workers)
    ]
    for start, block in _run_payloads(_sim_chunk, payloads, workers):
        estimates[start : start + block.shape[0]] = block
    theta = true_theta(spec)
    var_theta = true_var(spec)
    rows = []
    for pos, kind in enumerate(kinds):
        col = estimates[:, pos]
        var_hat = float(np.var(col, ddof=1))
        rows.append(
            MetricsRow(
                estimator=kind,
                n=spec.n,
                replications=reps,
                theta=theta,
                bias=abs(float(np.mean(col)) - theta),
                var_hat=var_hat,
                var_theta=var_theta,
                relative_efficiency=100.0 * var_theta / var_hat,
                seed=int(seed),
            )
        )
    return rows


def _run_payloads(fn, payloads, workers: int):
    if workers <= 1 or len(payloads) == 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads))


SENSITIVITY_KINDS: tuple[EstimatorKind, ...] = (EstimatorKind("weighted_mean"),) + tuple(
    EstimatorKind(family, scheme)
    for family in ("hl", "whl1", "whl2")
    for scheme in PairScheme
)

_CASE_DISTS = (
    DistributionSpec.uniform(50, 150),
    DistributionSpec.normal(100, 20),
    DistributionSpec.chisquare(100),
    DistributionSpec.poisson(100),
)

WEIGHT_MODES = ("w1", "w2", "w3")


def sensitivity_case(case_id: int) -> tuple[DistributionSpec, str]:
    """Map a case id 1..12 to (distribution, weight construction)."""
    if not 1 <= case_id <= 12:
        raise BadCase(f"case id must be in 1..12, got {case_id}")
    return _CASE_DISTS[(case_id - 1) // 3], WEIGHT_MODES[(case_id - 1) % 3]


def _case_weights(mode: str, x: np.ndarray, gen_w1) -> np.ndarray:
    if mode == "w1":
        return gen_w1.uniform(10.0, 100.0, x.shape[0])
    if mode == "w2":
        return np.maximum(x / 100.0, WEIGHT_FLOOR)
    return np.maximum(3.0 - x / 100.0, WEIGHT_FLOOR)


@dataclass(frozen=True)
class SensitivityRow:
    """Average absolute deviation from the uncontaminated weighted mean."""

    case: int
    proportion: float
    estimator: EstimatorKind
    avg_bias: float
    stderr: float
    replications: int
    seed: int


def _sens_chunk(payload):
    case_id, grid, seed, shift_multiplier, start, stop = payload
    dist, mode = sensitivity_case(case_id)
    sigma_pop = math.sqrt(dist.variance())
    kinds = SENSITIVITY_KINDS
    out = np.empty((stop - start, len(grid), len(kinds)))
    for r in range(start, stop):
        x = dist.draw(_gen(seed, _SENS_VALUES, r), SENSITIVITY_N)
        w = _case_weights(mode, x, _gen(seed, _SENS_W1, r))
        w_norm = w / exact_sum(w)
        wm_base = _weighted_mean_arrays(x, w_norm)
        for pi, p in enumerate(grid):
            k = math.ceil(p * SENSITIVITY_N)
            if k == 0:
                xc = x
            else:
                xc = _contaminate(
                    x, k, shift_multiplier * sigma_pop, _gen(seed, _OUTLIERS, r, pi)
                )
            out[r - start, pi] = np.abs(_eval_arrays(xc, w_norm, kinds) - wm_base)
    return start, out


def sensitivity_sweep(
    case_id: int,
    proportions,
    reps: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    shift_multiplier: float = 5.0,
) -> list[SensitivityRow]:
    """Average bias of the estimator roster across an outlier-proportion grid.

    Each replication draws one base sample (shared across the grid) whose
    uncontaminated weighted mean is the bias baseline; each grid point then
    contaminates an independently chosen index subset.
    """
    grid = tuple(float(p) for p in proportions)
    for p in grid:
        ContaminationSpec(p, shift_multiplier)  # validates range
    if reps < 2:
        raise InsufficientReplications(f"need at least 2 replications, got {reps}")
    sensitivity_case(case_id)  # validates the id before spawning workers
    dev = np.empty((reps, len(grid), len(SENSITIVITY_KINDS)))
    payloads = [
        (case_id, grid, int(seed), shift_multiplier, start, stop)
        for start, stop in _chunks(reps, workers)
    ]
    for start, block in _run_payloads(_sens_chunk, payloads, workers):
        dev[start : start + block.shape[0]] = block
    rows = []
    for pi, p in enumerate(grid):
        for ki, kind in enumerate(SENSITIVITY_KINDS):
            col = dev[:, pi, ki]
            rows.append(
                SensitivityRow(
                    case=case_id,
                    proportion=p,
                    estimator=kind,
                    avg_bias=float(np.mean(col)),
                    stderr=float(np.std(col, ddof=1)) / math.sqrt(reps),
                    replications=reps,
                    seed=int(seed),
                )
            )
    return rows
