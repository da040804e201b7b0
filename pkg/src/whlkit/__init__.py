"""whlkit: weighted Hodges-Lehmann location estimation toolkit.

Library surface:

* :mod:`whlkit.samples` - weighted samples, pair schemes, pairwise sets;
* :mod:`whlkit.estimators` - the thirteen location-estimator variants;
* :mod:`whlkit.breakdown` - finite-sample breakdown points (closed-form,
  bounded, and an exhaustive empirical oracle);
* :mod:`whlkit.simkit` - deterministic Monte Carlo engine for bias,
  relative-efficiency, and outlier-sensitivity studies;
* :mod:`whlkit.cli` - the ``whlkit`` command-line front end.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .estimators import EstimatorKind, all_kinds, estimate
from .samples import OrderedWeightedSet, PairScheme, PairSet, WeightedSample

__version__ = "0.1.0"

__all__ = [
    "EstimatorKind",
    "KERNEL_BACKEND",
    "OrderedWeightedSet",
    "PairScheme",
    "PairSet",
    "WeightedSample",
    "all_kinds",
    "estimate",
    "__version__",
]
