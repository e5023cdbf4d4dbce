"""Rank statistics and finite-sample concentration bounds.

Two independent concerns share this module:

* Spearman correlation on average ranks, used to compare score-based
  model orderings with external accuracy orderings.  Ties are handled by
  average ranks and the coefficient is Pearson on the rank vectors — the
  popular ``1 - 6 sum d^2 / ...`` shortcut silently mis-handles ties, so
  it is not used.
* Hoeffding-style simultaneous confidence widths for per-class mean
  scores.  Scores are bounded in ``[0, sqrt(pi/2)]``, which gives, after
  a union bound over K classes and both tails,

      eps(n, K, delta) = sqrt( pi * ln(2K/delta) / (4 n) ).

  The spread of two class means moves at most twice as far as either
  mean, so the disparity-index width is exactly ``2 * eps`` at the
  smallest class size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DataValidationError, MetricUndefinedError
from .scoring import SCORE_SCALE


# ---------------------------------------------------------------------------
# Ranks and Spearman correlation
# ---------------------------------------------------------------------------

def ranks(values) -> np.ndarray:
    """Average (fractional) ranks, 1-based; ties share their mean rank."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DataValidationError(f"ranks expects a 1-D vector, got ndim={v.ndim}")
    if v.size == 0:
        raise DataValidationError("ranks of an empty vector are undefined")
    if not np.all(np.isfinite(v)):
        raise DataValidationError("ranks: input contains non-finite values")
    return rankdata(v, method="average")


def spearman(x, y) -> float:
    """Spearman rank correlation of two equally long vectors.

    Raises :class:`MetricUndefinedError` when either vector is constant
    (its ranks have zero variance; the correlation is 0/0, not 0).
    Identical and exactly reversed rank vectors short-circuit to +-1.0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DataValidationError(
            f"spearman expects two 1-D vectors of equal length, "
            f"got shapes {x.shape} and {y.shape}"
        )
    if x.size < 2:
        raise DataValidationError("spearman needs at least 2 observations")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise MetricUndefinedError("spearman is undefined for a constant vector")
    rx, ry = ranks(x), ranks(y)
    n = x.size
    if np.array_equal(rx, ry):
        return 1.0
    if np.array_equal(rx + ry, np.full(n, n + 1.0)):
        return -1.0
    return float(np.corrcoef(rx, ry)[0, 1])


# ---------------------------------------------------------------------------
# Concentration bounds
# ---------------------------------------------------------------------------

def _check_bound_args(k: int, delta: float) -> None:
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise DataValidationError(f"num_classes must be a positive integer, got {k!r}")
    if not (0.0 < delta < 1.0):
        raise DataValidationError(f"delta must lie in (0, 1), got {delta!r}")


def per_class_epsilon(n: int, k: int, delta: float) -> float:
    """Half-width of the simultaneous confidence band for one class mean."""
    _check_bound_args(k, delta)
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise DataValidationError(f"n must be a positive integer, got {n!r}")
    return math.sqrt(math.pi * math.log(2.0 * k / delta) / (4.0 * n))


def rdi_epsilon(n_min: int, k: int, delta: float) -> float:
    """Confidence width for the disparity index: exactly twice the mean width."""
    return 2.0 * per_class_epsilon(n_min, k, delta)


def required_samples(epsilon: float, k: int, delta: float) -> int:
    """Smallest per-class n with ``per_class_epsilon(n, k, delta) <= epsilon``."""
    _check_bound_args(k, delta)
    if not (np.isfinite(epsilon) and epsilon > 0.0):
        raise DataValidationError(f"epsilon must be positive, got {epsilon!r}")
    n = max(1, math.ceil(math.pi * math.log(2.0 * k / delta) / (4.0 * epsilon**2)))
    # the ceiling above can land one off after float rounding; make the
    # defining inequality exact
    while per_class_epsilon(n, k, delta) > epsilon:
        n += 1
    while n > 1 and per_class_epsilon(n - 1, k, delta) <= epsilon:
        n -= 1
    return n


@dataclass
class ConcentrationBound:
    """Bundle of simultaneous confidence widths for a class-size vector."""

    delta: float
    num_classes: int
    n_per_class: np.ndarray
    per_class_epsilons: np.ndarray
    n_min: int
    simultaneous_epsilon: float
    rdi_epsilon: float

    def to_json_dict(self) -> dict:
        return {
            "delta": self.delta,
            "num_classes": self.num_classes,
            "n_per_class": self.n_per_class.tolist(),
            "per_class_epsilons": self.per_class_epsilons.tolist(),
            "n_min": self.n_min,
            "simultaneous_epsilon": self.simultaneous_epsilon,
            "rdi_epsilon": self.rdi_epsilon,
        }


def concentration_bound(n_per_class, delta: float) -> ConcentrationBound:
    """Evaluate all bound widths for a vector of per-class sample sizes."""
    n_arr = np.asarray(n_per_class)
    if n_arr.ndim != 1 or n_arr.size == 0:
        raise DataValidationError("n_per_class must be a non-empty 1-D vector")
    if not np.issubdtype(n_arr.dtype, np.integer) or np.any(n_arr < 1):
        raise DataValidationError("n_per_class entries must be positive integers")
    k = int(n_arr.size)
    _check_bound_args(k, delta)
    eps = np.array([per_class_epsilon(int(n), k, delta) for n in n_arr])
    n_min = int(n_arr.min())
    simultaneous = per_class_epsilon(n_min, k, delta)
    return ConcentrationBound(
        delta=delta,
        num_classes=k,
        n_per_class=n_arr.astype(np.int64),
        per_class_epsilons=eps,
        n_min=n_min,
        simultaneous_epsilon=simultaneous,
        rdi_epsilon=2.0 * simultaneous,
    )


# ---------------------------------------------------------------------------
# Monte-Carlo coverage check of the bound
# ---------------------------------------------------------------------------

COVERAGE_DISTRIBUTIONS = ("uniform", "bernoulli_extremes", "point_mass")


def _true_mean(distribution: str) -> float:
    # all three reference distributions are centred at SCORE_SCALE / 2
    return SCORE_SCALE / 2.0


@dataclass
class CoverageResult:
    distribution: str
    num_classes: int
    n_per_class: int
    delta: float
    epsilon: float
    trials: int
    violations: int
    coverage: float
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "distribution": self.distribution,
            "num_classes": self.num_classes,
            "n_per_class": self.n_per_class,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "trials": self.trials,
            "violations": self.violations,
            "coverage": self.coverage,
            "seed": self.seed,
        }


def coverage_experiment(distribution: str, num_classes: int, n_per_class: int,
                        delta: float, trials: int, seed: int = 0) -> CoverageResult:
    """Estimate how often the simultaneous band covers all K true means.

    Each trial draws ``n_per_class`` i.i.d. scores for each of the K
    classes from a known bounded distribution and checks whether every
    empirical class mean lies within ``per_class_epsilon`` of the true
    mean.  The Hoeffding guarantee says the failure rate is at most
    ``delta``; in practice it is far smaller (the bound is loose), so
    observed coverage should sit well above ``1 - delta``.
    """
    if distribution not in COVERAGE_DISTRIBUTIONS:
        raise DataValidationError(
            f"unknown distribution {distribution!r}; "
            f"choose from {COVERAGE_DISTRIBUTIONS}"
        )
    if trials < 1:
        raise DataValidationError(f"trials must be >= 1, got {trials}")
    eps = per_class_epsilon(n_per_class, num_classes, delta)
    mu = _true_mean(distribution)
    rng = np.random.default_rng(seed)

    violations = 0
    done = 0
    # keep each chunk of draws around 10^7 doubles
    chunk = max(1, int(1e7) // max(1, num_classes * n_per_class))
    while done < trials:
        b = min(chunk, trials - done)
        if distribution == "uniform":
            samples = rng.random((b, num_classes, n_per_class)) * SCORE_SCALE
        elif distribution == "bernoulli_extremes":
            samples = (rng.random((b, num_classes, n_per_class)) < 0.5) * SCORE_SCALE
        else:  # point_mass
            samples = np.full((b, num_classes, n_per_class), mu)
        means = samples.mean(axis=2)
        ok = np.all(np.abs(means - mu) <= eps, axis=1)
        violations += int(b - ok.sum())
        done += b

    return CoverageResult(
        distribution=distribution,
        num_classes=num_classes,
        n_per_class=n_per_class,
        delta=delta,
        epsilon=eps,
        trials=trials,
        violations=violations,
        coverage=1.0 - violations / trials,
        seed=seed,
    )
