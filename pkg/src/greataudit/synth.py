"""Synthetic logit datasets with prescribed per-class scores.

Every sample of class k gets the same logit row, built so that its local
score equals the requested target: the true class receives logit ``a``
and every other class a common baseline, with ``a`` chosen by inverting
the activation margin.  For sigmoid the inversion is closed-form; for
softmax the margin

    h(u) = (e^u - 1) / (e^u + K - 1)        (true logit u, others 0)

is strictly increasing in u, and u is found by bisection.  A target of
exactly 0 is encoded as a strictly misclassified row (true logit below a
designated competitor) rather than a fragile zero-margin tie.

Targets must lie in ``[0, sqrt(pi/2))``; the upper end is open because
the activation only saturates in the limit.  Generated logits are
quantised to float32 (the binary storage width) on the way out, so a
dataset scores identically whether used in memory or after a
save/load round trip, and generation is byte-deterministic in the spec.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logit as _logit

from .dataset import ACTIVATIONS, LogitDataset
from .errors import DataValidationError, InfeasibleTargetError
from .scoring import SCORE_SCALE


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic model/dataset pair."""

    model_id: str
    num_classes: int
    n_per_class: int | tuple[int, ...] = 1000
    targets: tuple[float, ...] | None = None
    activation: str = "sigmoid"
    temperature: float = 1.0
    seed: int = 0
    dataset_id: str = ""
    class_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.num_classes < 2:
            raise DataValidationError(
                f"need at least 2 classes, got {self.num_classes}"
            )
        if self.activation not in ACTIVATIONS:
            raise DataValidationError(f"unknown activation {self.activation!r}")
        if not (np.isfinite(self.temperature) and self.temperature > 0):
            raise DataValidationError(f"bad temperature {self.temperature!r}")

    def resolved_counts(self) -> np.ndarray:
        if isinstance(self.n_per_class, (int, np.integer)):
            counts = np.full(self.num_classes, int(self.n_per_class), dtype=np.int64)
        else:
            counts = np.asarray(self.n_per_class, dtype=np.int64)
            if counts.shape != (self.num_classes,):
                raise DataValidationError(
                    f"n_per_class must be scalar or length {self.num_classes}"
                )
        if np.any(counts < 0) or counts.sum() == 0:
            raise DataValidationError("class counts must be >= 0 and not all zero")
        return counts

    def resolved_targets(self) -> np.ndarray:
        if self.targets is None:
            rng = np.random.default_rng(self.seed)
            t = rng.uniform(0.0, 0.99 * SCORE_SCALE, self.num_classes)
        else:
            t = np.asarray(self.targets, dtype=np.float64)
            if t.shape != (self.num_classes,):
                raise DataValidationError(
                    f"targets must have length {self.num_classes}"
                )
        for k, v in enumerate(t):
            if not np.isfinite(v) or v < 0.0 or v >= SCORE_SCALE:
                raise InfeasibleTargetError(
                    f"target {v!r} for class {k} outside [0, sqrt(pi/2))"
                )
        return t

    def to_json_dict(self) -> dict:
        n = self.n_per_class
        return {
            "model_id": self.model_id,
            "dataset_id": self.dataset_id,
            "num_classes": self.num_classes,
            "n_per_class": int(n) if isinstance(n, (int, np.integer)) else list(n),
            "targets": None if self.targets is None else list(self.targets),
            "activation": self.activation,
            "temperature": self.temperature,
            "seed": self.seed,
            "class_names": None if self.class_names is None else list(self.class_names),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SyntheticSpec":
        n = d.get("n_per_class", 1000)
        targets = d.get("targets")
        names = d.get("class_names")
        return cls(
            model_id=d["model_id"],
            dataset_id=d.get("dataset_id", ""),
            num_classes=d["num_classes"],
            n_per_class=n if isinstance(n, int) else tuple(n),
            targets=None if targets is None else tuple(targets),
            activation=d.get("activation", "sigmoid"),
            temperature=d.get("temperature", 1.0),
            seed=d.get("seed", 0),
            class_names=None if names is None else tuple(names),
        )


def load_spec_json(path) -> SyntheticSpec:
    with open(path) as fh:
        try:
            return SyntheticSpec.from_json_dict(json.load(fh))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataValidationError(f"{path}: bad synthetic spec: {exc}") from None


def margin_inverse(target: float, num_classes: int, activation: str) -> float:
    """True-class logit (at T=1, others at the baseline) achieving ``target``.

    The returned value is the logit *gap* in activation space: for sigmoid
    the row is ``(+a, -a, ..., -a)``; for softmax ``(u, 0, ..., 0)``.
    """
    if not (0.0 <= target < SCORE_SCALE):
        raise InfeasibleTargetError(
            f"target {target!r} outside [0, sqrt(pi/2))"
        )
    t = target / SCORE_SCALE  # required probability margin in [0, 1)
    if t == 0.0:
        return 0.0
    if activation == "sigmoid":
        # margin of (+a, -a, ...) is 2*sigmoid(a) - 1, so a = logit((1+t)/2)
        return float(_logit(0.5 + 0.5 * t))
    # softmax: bisect the strictly increasing margin h(u)
    k = num_classes

    def h(u: float) -> float:
        e = math.exp(u)
        return (e - 1.0) / (e + k - 1.0)

    lo, hi = 0.0, 1.0
    while h(hi) < t:
        hi *= 2.0
        if hi > 1e4:  # cannot happen for t < 1, but keep the loop bounded
            raise InfeasibleTargetError(f"target {target!r} saturates the activation")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) < t:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _class_row(k: int, target: float, spec: SyntheticSpec) -> np.ndarray:
    """Constant logit row for class k (at the spec temperature)."""
    kk, t_scale = spec.num_classes, spec.temperature
    row = np.zeros(kk, dtype=np.float64)
    if target == 0.0:
        # strictly misclassified: the next class wins outright
        competitor = (k + 1) % kk
        if spec.activation == "sigmoid":
            row[:] = -1.0
        row[competitor] = 1.0
        row[k] = -1.0
        return row * t_scale
    gap = margin_inverse(target, kk, spec.activation)
    if spec.activation == "sigmoid":
        row[:] = -gap
    row[k] = gap
    return row * t_scale


def generate(spec: SyntheticSpec) -> LogitDataset:
    """Materialise the dataset described by ``spec``.

    Rows are grouped by class in ascending order; identical specs produce
    identical arrays (and therefore byte-identical files).
    """
    counts = spec.resolved_counts()
    targets = spec.resolved_targets()
    rows = []
    labels = []
    for k in range(spec.num_classes):
        if counts[k] == 0:
            continue
        row = _class_row(k, float(targets[k]), spec)
        rows.append(np.tile(row, (counts[k], 1)))
        labels.append(np.full(counts[k], k, dtype=np.int64))
    logits = np.concatenate(rows, axis=0)
    # quantise to the binary storage width so in-memory and on-disk scores agree
    logits = logits.astype(np.float32).astype(np.float64)
    return LogitDataset(
        logits=logits,
        labels=np.concatenate(labels),
        model_id=spec.model_id,
        dataset_id=spec.dataset_id,
        class_names=None if spec.class_names is None else list(spec.class_names),
    )
