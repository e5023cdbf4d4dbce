"""Containers and file I/O for logit matrices and model metadata.

A dataset is a dense float64 matrix of raw (pre-activation) logits with one
row per sample, plus integer class labels.  Two on-disk encodings are
supported:

* a human-readable CSV with header ``label,logit_0,...,logit_{K-1}`` and
  logits printed with 9 significant digits, and
* a binary interchange layout: a small JSON manifest next to two flat
  little-endian payload files (``<stem>.f32`` row-major float32 logits and
  ``<stem>.labels.u32`` uint32 labels).

The binary layout is the producer/consumer boundary for external logit
exporters, so the manifest is validated strictly (shape, byte sizes,
endianness) before anything is interpreted.  Logits are widened to float64
on load; all downstream arithmetic is double precision regardless of the
storage width.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataValidationError

CSV_LOGIT_FORMAT = "%.9g"

THREAT_MODELS = ("l2", "linf")
ACTIVATIONS = ("sigmoid", "softmax")


@dataclass
class ModelRecord:
    """Metadata for one model in an accuracy registry."""

    model_id: str
    clean_accuracy: float
    robustbench_accuracy: float
    threat_model: str
    activation: str

    def __post_init__(self):
        if not self.model_id:
            raise DataValidationError("model_id must be non-empty")
        if self.threat_model not in THREAT_MODELS:
            raise DataValidationError(
                f"unknown threat_model {self.threat_model!r} for {self.model_id}"
            )
        if self.activation not in ACTIVATIONS:
            raise DataValidationError(
                f"unknown activation {self.activation!r} for {self.model_id}"
            )
        for name in ("clean_accuracy", "robustbench_accuracy"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0.0 or v > 100.0:
                raise DataValidationError(
                    f"{name}={v!r} out of range [0, 100] for {self.model_id}"
                )


@dataclass
class LogitDataset:
    """A logit matrix with labels.

    Parameters
    ----------
    logits : ndarray of shape (n_samples, n_classes)
        Raw pre-activation outputs, float64.
    labels : ndarray of shape (n_samples,)
        Ground-truth class indices in ``[0, n_classes)``.
    model_id, dataset_id : str
        Free-form identifiers carried through reports and file manifests.
    class_names : list of str, optional
        Human-readable class names, length ``n_classes``.
    """

    logits: np.ndarray
    labels: np.ndarray
    model_id: str = ""
    dataset_id: str = ""
    class_names: list[str] | None = None

    def __post_init__(self):
        try:
            self.logits = np.asarray(self.logits, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise DataValidationError(f"logits are not numeric: {exc}") from None
        if self.logits.ndim != 2:
            raise DataValidationError(
                f"logits must be 2-D (got ndim={self.logits.ndim}); "
                "ragged rows are rejected"
            )
        if self.logits.shape[0] == 0 or self.logits.shape[1] == 0:
            raise DataValidationError("dataset is empty")
        bad = np.flatnonzero(~np.all(np.isfinite(self.logits), axis=1))
        if bad.size:
            raise DataValidationError(
                f"non-finite logit in row {bad[0]} (and {bad.size - 1} more)"
            )

        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != self.logits.shape[0]:
            raise DataValidationError(
                f"labels must be 1-D with length {self.logits.shape[0]} "
                f"(got shape {labels.shape})"
            )
        if not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.floor(labels)):
                raise DataValidationError("labels must be integers")
        self.labels = labels.astype(np.int64)
        k = self.logits.shape[1]
        bad = np.flatnonzero((self.labels < 0) | (self.labels >= k))
        if bad.size:
            raise DataValidationError(
                f"label {self.labels[bad[0]]} out of range [0, {k}) in row {bad[0]}"
            )
        if self.class_names is not None:
            self.class_names = list(self.class_names)
            if len(self.class_names) != k:
                raise DataValidationError(
                    f"class_names has length {len(self.class_names)}, expected {k}"
                )

    @property
    def n_samples(self) -> int:
        return self.logits.shape[0]

    @property
    def n_classes(self) -> int:
        return self.logits.shape[1]

    def class_name(self, k: int) -> str:
        if self.class_names is not None:
            return self.class_names[k]
        return str(k)

    def partition_by_class(self) -> "ClassPartition":
        return partition_by_class(self)


@dataclass
class ClassPartition:
    """Row indices of a dataset grouped by true class.

    ``indices[k]`` holds the (ascending) positions of all samples whose
    label is ``k``; empty classes get empty arrays.  The groups are
    disjoint and cover every row exactly once.
    """

    n_classes: int
    indices: list[np.ndarray] = field(repr=False)
    counts: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.array([idx.size for idx in self.indices], dtype=np.int64)


def partition_by_class(ds: LogitDataset) -> ClassPartition:
    """Group sample indices by label."""
    order = np.argsort(ds.labels, kind="stable")
    sorted_labels = ds.labels[order]
    # boundaries of each label block in the stable sort
    starts = np.searchsorted(sorted_labels, np.arange(ds.n_classes), side="left")
    stops = np.searchsorted(sorted_labels, np.arange(ds.n_classes), side="right")
    indices = [order[a:b] for a, b in zip(starts, stops)]
    return ClassPartition(n_classes=ds.n_classes, indices=indices)


# ---------------------------------------------------------------------------
# CSV encoding
# ---------------------------------------------------------------------------

def _csv_header(k: int) -> list[str]:
    return ["label"] + [f"logit_{j}" for j in range(k)]


def save_csv(ds: LogitDataset, path: str | os.PathLike) -> None:
    """Write a dataset as CSV (``label,logit_0,...``), logits at 9 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_csv_header(ds.n_classes))
        for y, row in zip(ds.labels, ds.logits):
            writer.writerow([int(y)] + [CSV_LOGIT_FORMAT % v for v in row])


def load_csv(path, model_id: str = "", dataset_id: str = "",
             class_names=None) -> LogitDataset:
    """Load a CSV dataset, validating the header and every row.

    Errors name the offending file line (the header is line 1).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError(f"{path}: file is empty") from None
        if len(header) < 2 or header[0] != "label":
            raise DataValidationError(
                f"{path}: line 1: expected header 'label,logit_0,...' "
                f"(got {','.join(header[:3])}...)"
            )
        k = len(header) - 1
        if header != _csv_header(k):
            raise DataValidationError(
                f"{path}: line 1: logit columns must be named logit_0..logit_{k-1} in order"
            )
        labels, rows = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue  # tolerate a trailing blank line
            if len(rec) != k + 1:
                raise DataValidationError(
                    f"{path}: line {lineno}: expected {k + 1} fields, got {len(rec)}"
                )
            try:
                labels.append(int(rec[0]))
                rows.append([float(v) for v in rec[1:]])
            except ValueError as exc:
                raise DataValidationError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise DataValidationError(f"{path}: no data rows")
    try:
        return LogitDataset(
            logits=np.array(rows, dtype=np.float64),
            labels=np.array(labels, dtype=np.int64),
            model_id=model_id,
            dataset_id=dataset_id,
            class_names=class_names,
        )
    except DataValidationError as exc:
        raise DataValidationError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Binary interchange encoding (manifest + flat payloads)
# ---------------------------------------------------------------------------

MANIFEST_REQUIRED = (
    "num_samples", "num_classes", "model_id", "dataset_id",
    "endianness", "logits_file", "labels_file",
)


def save_binary(ds: LogitDataset, manifest_path: str | os.PathLike) -> None:
    """Write ``manifest.json`` plus ``<stem>.f32`` / ``<stem>.labels.u32``.

    Logits are stored as little-endian float32 row-major; labels as
    little-endian uint32.  Values are narrowed with a plain cast, so a
    write→read→write cycle is byte-identical.
    """
    manifest_path = os.fspath(manifest_path)
    stem, ext = os.path.splitext(manifest_path)
    if ext != ".json":
        raise DataValidationError(f"manifest path must end in .json: {manifest_path}")
    base = os.path.basename(stem)
    manifest = {
        "num_samples": int(ds.n_samples),
        "num_classes": int(ds.n_classes),
        "model_id": ds.model_id,
        "dataset_id": ds.dataset_id,
        "class_names": ds.class_names,
        "endianness": "little",
        "logits_file": base + ".f32",
        "labels_file": base + ".labels.u32",
    }
    out_dir = os.path.dirname(manifest_path) or "."
    ds.logits.astype("<f4").tofile(os.path.join(out_dir, manifest["logits_file"]))
    ds.labels.astype("<u4").tofile(os.path.join(out_dir, manifest["labels_file"]))
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_binary(manifest_path: str | os.PathLike) -> LogitDataset:
    """Load a binary dataset, checking the manifest against the payload bytes."""
    manifest_path = os.fspath(manifest_path)
    with open(manifest_path) as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataValidationError(f"{manifest_path}: bad JSON: {exc}") from None
    for key in MANIFEST_REQUIRED:
        if key not in manifest:
            raise DataValidationError(f"{manifest_path}: manifest missing {key!r}")
    if manifest["endianness"] != "little":
        raise DataValidationError(
            f"{manifest_path}: unsupported endianness {manifest['endianness']!r}"
        )
    n = manifest["num_samples"]
    k = manifest["num_classes"]
    if not (isinstance(n, int) and isinstance(k, int)) or n <= 0 or k <= 0:
        raise DataValidationError(
            f"{manifest_path}: num_samples/num_classes must be positive integers"
        )
    base = os.path.dirname(manifest_path) or "."
    logits_path = os.path.join(base, manifest["logits_file"])
    labels_path = os.path.join(base, manifest["labels_file"])
    for p, expect in ((logits_path, 4 * n * k), (labels_path, 4 * n)):
        if not os.path.exists(p):
            raise DataValidationError(f"{manifest_path}: payload {p} not found")
        size = os.path.getsize(p)
        if size != expect:
            raise DataValidationError(
                f"{p}: payload is {size} bytes, manifest implies {expect}"
            )
    logits = np.fromfile(logits_path, dtype="<f4").reshape(n, k).astype(np.float64)
    labels = np.fromfile(labels_path, dtype="<u4").astype(np.int64)
    try:
        return LogitDataset(
            logits=logits,
            labels=labels,
            model_id=manifest["model_id"],
            dataset_id=manifest["dataset_id"],
            class_names=manifest.get("class_names"),
        )
    except DataValidationError as exc:
        raise DataValidationError(f"{manifest_path}: {exc}") from None


def load_logit_dataset(path, format: str | None = None, **kwargs) -> LogitDataset:
    """Load a dataset in either encoding.

    ``format`` is ``"csv"`` or ``"binary"``; when omitted it is inferred
    from the extension (``.json`` manifests are binary, anything else CSV).
    """
    if format is None:
        format = "binary" if os.fspath(path).endswith(".json") else "csv"
    if format == "csv":
        return load_csv(path, **kwargs)
    if format == "binary":
        return load_binary(path)
    raise DataValidationError(f"unknown dataset format {format!r}")


# ---------------------------------------------------------------------------
# Accuracy registry
# ---------------------------------------------------------------------------

def load_registry(path) -> list[ModelRecord]:
    """Load a JSON array of model records; model_ids must be unique."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataValidationError(f"{path}: bad JSON: {exc}") from None
    if not isinstance(raw, list):
        raise DataValidationError(f"{path}: registry must be a JSON array")
    records = []
    seen = set()
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise DataValidationError(f"{path}: entry {i} is not an object")
        try:
            rec = ModelRecord(
                model_id=entry["model_id"],
                clean_accuracy=float(entry["clean_accuracy"]),
                robustbench_accuracy=float(entry["robustbench_accuracy"]),
                threat_model=entry["threat_model"],
                activation=entry["activation"],
            )
        except KeyError as exc:
            raise DataValidationError(f"{path}: entry {i} missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise DataValidationError(f"{path}: entry {i}: {exc}") from None
        if rec.model_id in seen:
            raise DataValidationError(f"{path}: duplicate model_id {rec.model_id!r}")
        seen.add(rec.model_id)
        records.append(rec)
    return records


def save_registry(records, path) -> None:
    payload = [
        {
            "model_id": r.model_id,
            "clean_accuracy": r.clean_accuracy,
            "robustbench_accuracy": r.robustbench_accuracy,
            "threat_model": r.threat_model,
            "activation": r.activation,
        }
        for r in records
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
