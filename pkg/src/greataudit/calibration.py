"""Temperature calibration by grid search.

Both calibration criteria sweep the same two-phase temperature grid:

* coarse: T in {0.01} union {0.1, 0.2, ..., 10.0},
* fine:   [T_c - 0.1, T_c + 0.1] in steps of 0.001 around the coarse
  winner, intersected with (0, inf).

Grid temperatures are handled internally as integer milli-units so the
fine phase never drifts off the advertised 0.001 lattice, and ties are
broken toward the smaller temperature at both phases.  The final answer
is the argmax over *every* evaluated point (coarse and fine together),
so when the objective plateaus the reported T* is the smallest evaluated
temperature on the plateau — e.g. 0.001 for an objective that is
constant over the whole grid.

Two objectives are provided:

* accuracy correlation: Spearman rank correlation between per-model
  aggregate scores at T and external clean accuracies;
* ranking stability: for a single model, the worst-case Spearman
  correlation between its per-class ranking at T and at nearby probe
  temperatures ``linspace(T - delta_t, T + delta_t, probe_count)``.
  Grid points at or below ``delta_t`` are excluded so every probe
  temperature stays positive.

Grid points where the objective is undefined (a constant vector on
either side of the correlation) are recorded as NaN in the curve and
skipped by the argmax; calibration fails only if *no* grid point yields
a defined value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .dataset import LogitDataset, ModelRecord
from .errors import DataValidationError, MetricUndefinedError
from .scoring import PerClassProfile, ScoreConfig, local_scores, per_class_scores
from .stats import spearman

_MILLI = 1000


def _default_coarse_milli() -> tuple[int, ...]:
    return (10,) + tuple(range(100, 10001, 100))


@dataclass(frozen=True)
class GridSpec:
    """Temperature search grid; temperatures are quantised to 0.001."""

    coarse: tuple = tuple(m / _MILLI for m in _default_coarse_milli())
    fine_halfwidth: float = 0.1
    fine_step: float = 0.001

    def coarse_milli(self) -> list[int]:
        out = sorted({round(t * _MILLI) for t in self.coarse})
        if not out or out[0] <= 0:
            raise DataValidationError("grid temperatures must be positive")
        return out

    def fine_milli(self, center_milli: int) -> list[int]:
        half = round(self.fine_halfwidth * _MILLI)
        step = round(self.fine_step * _MILLI)
        if step < 1:
            raise DataValidationError("fine_step must be at least 0.001")
        lo = max(1, center_milli - half)
        return list(range(lo, center_milli + half + 1, step))


def _argmax_smallest(values: dict[int, float]) -> int:
    """Key of the largest defined value; ties go to the smallest key."""
    best_m, best_v = None, None
    for m in sorted(values):
        v = values[m]
        if math.isnan(v):
            continue
        if best_v is None or v > best_v:
            best_m, best_v = m, v
    if best_m is None:
        raise MetricUndefinedError(
            "calibration objective is undefined at every grid temperature"
        )
    return best_m


@dataclass
class CalibrationResult:
    method: str
    t_star: float
    rho_at_t_star: float
    coarse_t_star: float
    curve: np.ndarray  # (n_points, 2): temperature, objective (NaN = undefined)
    stability_window: float | None = None
    probe_count: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "t_star": self.t_star,
            "rho_at_t_star": self.rho_at_t_star,
            "coarse_t_star": self.coarse_t_star,
            "curve": [
                [t, None if math.isnan(v) else v] for t, v in self.curve.tolist()
            ],
            "stability_window": self.stability_window,
            "probe_count": self.probe_count,
        }


def save_calibration_json(result: CalibrationResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(result.to_json_dict(), fh, indent=2)
        fh.write("\n")


def _two_phase_search(objective, grid: GridSpec, min_milli: int = 1):
    """Run the coarse+fine sweep of ``objective(T) -> float`` (NaN allowed)."""
    values: dict[int, float] = {}
    coarse = [m for m in grid.coarse_milli() if m >= min_milli]
    if not coarse:
        raise DataValidationError(
            "no coarse grid temperature survives the positivity constraints"
        )
    for m in coarse:
        values[m] = objective(m / _MILLI)
    coarse_best = _argmax_smallest(values)
    for m in grid.fine_milli(coarse_best):
        if m >= min_milli and m not in values:
            values[m] = objective(m / _MILLI)
    best = _argmax_smallest(values)
    curve = np.array([[m / _MILLI, values[m]] for m in sorted(values)])
    return best / _MILLI, values[best], coarse_best / _MILLI, curve


def _as_dataset(d) -> LogitDataset:
    if isinstance(d, LogitDataset):
        return d
    X, y = d
    return LogitDataset(logits=X, labels=y)


# ---------------------------------------------------------------------------
# Objective 1: correlation with external accuracies
# ---------------------------------------------------------------------------

def calibrate_accuracy(datasets, accuracies, activation: str = "sigmoid",
                       grid: GridSpec | None = None) -> CalibrationResult:
    """Pick T maximising Spearman(aggregate scores at T, accuracies)."""
    grid = grid or GridSpec()
    datasets = [_as_dataset(d) for d in datasets]
    acc = np.asarray(accuracies, dtype=np.float64)
    if len(datasets) < 2:
        raise DataValidationError("accuracy calibration needs at least two models")
    if acc.shape != (len(datasets),) or not np.all(np.isfinite(acc)):
        raise DataValidationError(
            f"need one finite accuracy per dataset, got shape {acc.shape}"
        )
    ks = {ds.n_classes for ds in datasets}
    if len(ks) != 1:
        raise DataValidationError(f"datasets disagree on class count: {sorted(ks)}")
    if np.ptp(acc) == 0.0:
        raise MetricUndefinedError(
            "accuracy vector is constant; rank correlation is undefined at every T"
        )

    def objective(t: float) -> float:
        config = ScoreConfig(temperature=t, activation=activation)
        aggs = np.empty(len(datasets))
        for i, ds in enumerate(datasets):
            g = local_scores(ds.logits, ds.labels, config)
            aggs[i] = math.fsum(g) / ds.n_samples
        try:
            return spearman(aggs, acc)
        except MetricUndefinedError:
            return math.nan

    t_star, rho, coarse_t, curve = _two_phase_search(objective, grid)
    return CalibrationResult(
        method="accuracy_correlation",
        t_star=t_star,
        rho_at_t_star=rho,
        coarse_t_star=coarse_t,
        curve=curve,
    )


def calibrate_from_registry(datasets, records: list[ModelRecord],
                            grid: GridSpec | None = None) -> CalibrationResult:
    """Registry-driven wrapper: match datasets to records by model_id."""
    by_id = {r.model_id: r for r in records}
    matched = []
    for ds in datasets:
        if ds.model_id not in by_id:
            raise DataValidationError(f"model {ds.model_id!r} not in registry")
        matched.append(by_id[ds.model_id])
    activations = {r.activation for r in matched}
    if len(activations) != 1:
        raise DataValidationError(
            f"calibration needs a single activation, got {sorted(activations)}"
        )
    return calibrate_accuracy(
        datasets,
        [r.clean_accuracy for r in matched],
        activation=activations.pop(),
        grid=grid,
    )


# ---------------------------------------------------------------------------
# Objective 2: stability of the per-class ranking
# ---------------------------------------------------------------------------

def calibrate_stability(dataset, grid: GridSpec | None = None,
                        delta_t: float = 0.05, probe_count: int = 5,
                        activation: str = "sigmoid") -> CalibrationResult:
    """Pick T where the per-class ranking is least sensitive to T itself."""
    grid = grid or GridSpec()
    ds = _as_dataset(dataset)
    if not (np.isfinite(delta_t) and delta_t >= 0.0):
        raise DataValidationError(f"delta_t must be >= 0, got {delta_t!r}")
    if probe_count < 2:
        raise DataValidationError(f"probe_count must be >= 2, got {probe_count}")
    counts = np.bincount(ds.labels, minlength=ds.n_classes)
    mask = counts > 0
    if int(mask.sum()) < 2:
        raise MetricUndefinedError(
            "stability calibration needs at least two non-empty classes"
        )

    def class_vector(t: float) -> np.ndarray:
        prof = per_class_scores(ds, ScoreConfig(temperature=t, activation=activation))
        return prof.scores[mask]

    def objective(t: float) -> float:
        base = class_vector(t)
        worst = math.inf
        for t_probe in np.linspace(t - delta_t, t + delta_t, probe_count):
            try:
                rho = spearman(base, class_vector(float(t_probe)))
            except MetricUndefinedError:
                return math.nan
            worst = min(worst, rho)
        return worst

    # probes reach down to T - delta_t, so only temperatures strictly above
    # delta_t are searchable
    min_milli = int(math.floor(delta_t * _MILLI)) + 1
    t_star, rho, coarse_t, curve = _two_phase_search(objective, grid, min_milli)
    return CalibrationResult(
        method="ranking_stability",
        t_star=t_star,
        rho_at_t_star=rho,
        coarse_t_star=coarse_t,
        curve=curve,
        stability_window=delta_t,
        probe_count=probe_count,
    )


def rescore_at(datasets, t_star: float,
               activation: str = "sigmoid") -> list[PerClassProfile]:
    """Recompute per-class profiles at a calibrated temperature."""
    config = ScoreConfig(temperature=t_star, activation=activation)
    return [per_class_scores(_as_dataset(d), config) for d in datasets]


# ---------------------------------------------------------------------------
# Estimator-style wrappers
# ---------------------------------------------------------------------------

class AccuracyCorrelationCalibrator(BaseEstimator):
    """Temperature calibrator driven by external accuracies.

    Parameters
    ----------
    grid : GridSpec, optional
    activation : {'sigmoid', 'softmax'}, default='sigmoid'

    Attributes
    ----------
    t_star_ : float
    rho_ : float
        Objective value at ``t_star_``.
    curve_ : ndarray of shape (n_grid, 2)
    result_ : CalibrationResult
    """

    def __init__(self, grid: GridSpec | None = None, activation: str = "sigmoid"):
        self.grid = grid
        self.activation = activation

    def fit(self, datasets, accuracies):
        result = calibrate_accuracy(
            datasets, accuracies, activation=self.activation, grid=self.grid
        )
        self.result_ = result
        self.t_star_ = result.t_star
        self.rho_ = result.rho_at_t_star
        self.curve_ = result.curve
        return self

    def transform(self, datasets) -> list[PerClassProfile]:
        return rescore_at(datasets, self.t_star_, activation=self.activation)


class RankingStabilityCalibrator(BaseEstimator):
    """Single-model temperature calibrator using ranking self-consistency."""

    def __init__(self, grid: GridSpec | None = None, delta_t: float = 0.05,
                 probe_count: int = 5, activation: str = "sigmoid"):
        self.grid = grid
        self.delta_t = delta_t
        self.probe_count = probe_count
        self.activation = activation

    def fit(self, dataset, y=None):
        result = calibrate_stability(
            dataset,
            grid=self.grid,
            delta_t=self.delta_t,
            probe_count=self.probe_count,
            activation=self.activation,
        )
        self.result_ = result
        self.t_star_ = result.t_star
        self.rho_ = result.rho_at_t_star
        self.curve_ = result.curve
        return self

    def transform(self, datasets) -> list[PerClassProfile]:
        return rescore_at(datasets, self.t_star_, activation=self.activation)
