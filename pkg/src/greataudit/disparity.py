"""Disparity metrics over per-class score profiles.

All metrics operate on the *defined* classes of a profile (classes with at
least one sample).  They need at least two of those to be meaningful;
otherwise :class:`MetricUndefinedError` is raised rather than silently
returning 0 — an audit that cannot see two classes has nothing to say
about disparity.

Metrics
-------
RDI
    Robustness disparity index: max minus min per-class score.
NRGC
    Normalised robustness Gini coefficient,
    ``sum_ij |s_i - s_j| / (2 K^2 mean)`` — 0 for perfectly even profiles,
    approaching 1 as the mass concentrates on few classes.  A profile of
    all-zero scores has no meaningful relative dispersion; the metric is
    fixed at 0 there and the report is flagged degenerate.
WCR
    Worst-class robustness: the minimum per-class score, together with the
    class attaining it (ties broken toward the lowest class index).
FP-GREAT
    Fairness-penalised score ``mean - lambda * RDI`` with the *unweighted*
    mean over defined classes, lambda defaulting to 0.5.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import MetricUndefinedError, DataValidationError
from .scoring import PerClassProfile

DEFAULT_LAMBDA = 0.5


def _defined_scores(profile: PerClassProfile, min_defined: int = 2) -> np.ndarray:
    mask = profile.defined_mask()
    n_def = int(mask.sum())
    if n_def < min_defined:
        raise MetricUndefinedError(
            f"metric needs at least {min_defined} non-empty classes, "
            f"got {n_def} (model {profile.model_id or '?'})"
        )
    return profile.scores[mask]


def defined_mean(profile: PerClassProfile) -> float:
    """Unweighted mean score over defined classes."""
    vals = _defined_scores(profile, min_defined=1)
    return math.fsum(vals) / vals.size


def rdi(profile: PerClassProfile) -> float:
    """Robustness disparity index: spread of the per-class scores."""
    vals = _defined_scores(profile)
    return float(vals.max() - vals.min())


def nrgc(profile: PerClassProfile) -> float:
    """Normalised robustness Gini coefficient.

    Computed via the sorted O(K log K) identity
    ``sum_ij |s_i - s_j| = 2 * sum_i (2i - K + 1) * s_(i)`` (ascending
    order, 0-based i) rather than the literal O(K^2) double sum.
    """
    vals = np.sort(_defined_scores(profile))
    k = vals.size
    mean = math.fsum(vals) / k
    if mean == 0.0:
        return 0.0
    half_sum = math.fsum((2 * i - k + 1) * v for i, v in enumerate(vals))
    return half_sum / (k * k * mean)


def wcr(profile: PerClassProfile) -> tuple[float, int]:
    """Worst-class robustness and its class index (lowest index on ties)."""
    _defined_scores(profile)  # enforce >= 2 defined classes
    vals = np.where(profile.defined_mask(), profile.scores, np.inf)
    idx = int(np.argmin(vals))  # argmin returns the first minimum
    return float(vals[idx]), idx


def best_class(profile: PerClassProfile) -> tuple[float, int]:
    """Best per-class score and its class index (lowest index on ties)."""
    _defined_scores(profile)
    vals = np.where(profile.defined_mask(), profile.scores, -np.inf)
    idx = int(np.argmax(vals))
    return float(vals[idx]), idx


def fp_great(profile: PerClassProfile, lam: float = DEFAULT_LAMBDA) -> float:
    """Fairness-penalised aggregate: unweighted mean minus ``lam`` * RDI."""
    if lam < 0:
        raise DataValidationError(f"lambda must be non-negative, got {lam}")
    return defined_mean(profile) - lam * rdi(profile)


@dataclass
class DisparityReport:
    """All disparity metrics of one profile, plus context for reporting."""

    model_id: str
    rdi: float
    nrgc: float
    wcr: float
    wcr_class: int
    wcr_class_name: str
    best_score: float
    best_class: int
    best_class_name: str
    mean_score: float          # unweighted mean over defined classes
    aggregate: float           # sample-weighted mean (profile aggregate)
    fp_great: float
    lam: float
    defined_class_count: int
    degenerate: bool

    def to_json_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "rdi": self.rdi,
            "nrgc": self.nrgc,
            "wcr": self.wcr,
            "wcr_class": self.wcr_class,
            "wcr_class_name": self.wcr_class_name,
            "best_score": self.best_score,
            "best_class": self.best_class,
            "best_class_name": self.best_class_name,
            "mean_score": self.mean_score,
            "aggregate": self.aggregate,
            "fp_great": self.fp_great,
            "lambda": self.lam,
            "defined_class_count": self.defined_class_count,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "DisparityReport":
        return cls(
            model_id=d["model_id"],
            rdi=d["rdi"],
            nrgc=d["nrgc"],
            wcr=d["wcr"],
            wcr_class=d["wcr_class"],
            wcr_class_name=d["wcr_class_name"],
            best_score=d["best_score"],
            best_class=d["best_class"],
            best_class_name=d["best_class_name"],
            mean_score=d["mean_score"],
            aggregate=d["aggregate"],
            fp_great=d["fp_great"],
            lam=d["lambda"],
            defined_class_count=d["defined_class_count"],
            degenerate=d["degenerate"],
        )


def audit(profile: PerClassProfile, lam: float = DEFAULT_LAMBDA) -> DisparityReport:
    """Compute every disparity metric of a profile in one pass."""
    mean = defined_mean(profile)
    spread = rdi(profile)
    worst_val, worst_idx = wcr(profile)
    best_val, best_idx = best_class(profile)
    return DisparityReport(
        model_id=profile.model_id,
        rdi=spread,
        nrgc=nrgc(profile),
        wcr=worst_val,
        wcr_class=worst_idx,
        wcr_class_name=profile.class_name(worst_idx),
        best_score=best_val,
        best_class=best_idx,
        best_class_name=profile.class_name(best_idx),
        mean_score=mean,
        aggregate=profile.aggregate,
        fp_great=mean - lam * spread,
        lam=lam,
        defined_class_count=int(profile.defined_mask().sum()),
        degenerate=(mean == 0.0),
    )


def save_report_json(report: DisparityReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
        fh.write("\n")


def vulnerability_summary(profiles: list[PerClassProfile]) -> dict:
    """Tally which classes are worst/best across a collection of models.

    Returns a JSON-ready dict with per-model assignments and per-class
    counts (keys are class names).  Ties inside a model go to the lowest
    class index, as in :func:`wcr`.
    """
    if not profiles:
        raise DataValidationError("vulnerability summary needs at least one profile")
    models = []
    worst_counts: dict[str, int] = {}
    best_counts: dict[str, int] = {}
    for prof in profiles:
        _, w_idx = wcr(prof)
        _, b_idx = best_class(prof)
        w_name, b_name = prof.class_name(w_idx), prof.class_name(b_idx)
        models.append({
            "model_id": prof.model_id,
            "worst_class": w_idx,
            "worst_class_name": w_name,
            "best_class": b_idx,
            "best_class_name": b_name,
        })
        worst_counts[w_name] = worst_counts.get(w_name, 0) + 1
        best_counts[b_name] = best_counts.get(b_name, 0) + 1
    return {
        "n_models": len(profiles),
        "models": models,
        "worst_class_counts": dict(
            sorted(worst_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        ),
        "best_class_counts": dict(
            sorted(best_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        ),
    }


def _dense_ranks_desc(values: list[float]) -> list[int]:
    # 1-based competition order: position in the descending sort, ties kept
    # in input order (stable), so equal values get distinct consecutive ranks
    order = sorted(range(len(values)), key=lambda i: -values[i])
    ranks = [0] * len(values)
    for pos, i in enumerate(order, start=1):
        ranks[i] = pos
    return ranks


def fairness_rerank(reports: list[DisparityReport]) -> list[dict]:
    """Rank models by plain aggregate vs. fairness-penalised score.

    Returns one row per input report (input order preserved) with 1-based
    ranks under both orderings and the rank delta (positive = the model
    drops when fairness is priced in).
    """
    if len(reports) < 2:
        raise MetricUndefinedError("re-ranking needs at least two models")
    agg_ranks = _dense_ranks_desc([r.aggregate for r in reports])
    fp_ranks = _dense_ranks_desc([r.fp_great for r in reports])
    rows = []
    for rep, ra, rf in zip(reports, agg_ranks, fp_ranks):
        rows.append({
            "model_id": rep.model_id,
            "aggregate": rep.aggregate,
            "fp_great": rep.fp_great,
            "aggregate_rank": ra,
            "fp_great_rank": rf,
            "rank_delta": rf - ra,
        })
    return rows
