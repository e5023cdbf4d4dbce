"""Command-line harness.

Subcommands
-----------
score      Score one logit dataset; emits a profile JSON and per-class CSV.
audit      Score a set of models and emit the full disparity audit
           (audit CSV, per-model reports, vulnerability summary, plot data).
bounds     Evaluate finite-sample confidence widths (and sample-size inversion).
calibrate  Temperature search (accuracy-correlation or ranking-stability),
           then a full audit at the calibrated temperature.
synth      Materialise synthetic datasets from a spec file or a bundled fixture.
coverage   Monte-Carlo check of the concentration bound's coverage.

Global flags (valid on every subcommand): ``--output-dir``, ``--seed``,
``--format {csv,json}``.  Exit codes: 0 success, 1 a requested metric is
undefined for the input, 2 invalid input.  If a run dies after writing
some outputs, a ``FAILED`` marker file with the error text is left in the
output directory.

Floats in CSV outputs use ``repr`` (shortest round-trip) encoding, so
re-parsing a report reproduces the in-memory values bit for bit.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .calibration import (GridSpec, calibrate_from_registry, calibrate_stability,
                          save_calibration_json)
from .dataset import (LogitDataset, load_logit_dataset, load_registry,
                      save_binary, save_csv, save_registry)
from .disparity import (DEFAULT_LAMBDA, audit, fairness_rerank, save_report_json,
                        vulnerability_summary)
from .errors import DataValidationError, MetricUndefinedError
from .scoring import (ScoreConfig, per_class_scores, save_profile_csv,
                      save_profile_json)
from .stats import (concentration_bound, coverage_experiment, per_class_epsilon,
                    rdi_epsilon, required_samples, COVERAGE_DISTRIBUTIONS)
from .synth import generate, load_spec_json


def _f(x) -> str:
    """Shortest round-trip decimal encoding for CSV cells."""
    return repr(float(x))


class OutputDir:
    """Tracks emitted files so a failing run can leave a FAILED marker."""

    def __init__(self, path):
        self.path = Path(path)
        self.emitted: list[str] = []

    def file(self, *parts) -> Path:
        p = self.path.joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.emitted.append(str(p))
        return p

    def clear_marker(self):
        marker = self.path / "FAILED"
        if marker.exists():
            marker.unlink()

    def mark_failed(self, message: str):
        if self.emitted:
            self.path.mkdir(parents=True, exist_ok=True)
            (self.path / "FAILED").write_text(message + "\n")


# ---------------------------------------------------------------------------
# dataset discovery
# ---------------------------------------------------------------------------

def _is_manifest(path: Path) -> bool:
    try:
        with open(path) as fh:
            d = json.load(fh)
        return isinstance(d, dict) and "num_samples" in d and "logits_file" in d
    except (OSError, json.JSONDecodeError):
        return False


def _collect_datasets(args) -> list[LogitDataset]:
    paths: list[Path] = []
    if args.manifest:
        base = Path(args.manifest).parent
        with open(args.manifest) as fh:
            try:
                listing = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataValidationError(f"{args.manifest}: bad JSON: {exc}") from None
        if isinstance(listing, dict):
            listing = listing.get("datasets", [])
        if not isinstance(listing, list):
            raise DataValidationError(f"{args.manifest}: expected a list of paths")
        paths = [base / p for p in listing]
    elif args.datasets:
        root = Path(args.datasets)
        if not root.is_dir():
            raise DataValidationError(f"{root} is not a directory")
        for p in sorted(root.iterdir()):
            if p.suffix == ".csv":
                paths.append(p)
            elif p.suffix == ".json" and _is_manifest(p):
                paths.append(p)
        if not paths:
            raise DataValidationError(f"no datasets found in {root}")
    else:
        raise DataValidationError("provide --datasets DIR or --manifest FILE")

    out = []
    for p in paths:
        ds = load_logit_dataset(p)
        if not ds.model_id:
            ds.model_id = p.stem
        out.append(ds)
    ids = [ds.model_id for ds in out]
    if len(set(ids)) != len(ids):
        raise DataValidationError(f"duplicate model ids in inputs: {sorted(ids)}")
    return out


def _registry_map(args):
    if getattr(args, "registry", None):
        return {r.model_id: r for r in load_registry(args.registry)}
    return {}


# ---------------------------------------------------------------------------
# audit emission (shared between cmd_audit and cmd_calibrate)
# ---------------------------------------------------------------------------

AUDIT_COLUMNS = ("model_id", "rb_acc", "gs", "calibrated_gs", "rdi", "nrgc",
                 "wcr", "wcr_class", "fp_great")


def _emit_audit(out: OutputDir, datasets, registry, temperature, lam,
                fallback_activation):
    def config_for(ds, t):
        rec = registry.get(ds.model_id)
        act = rec.activation if rec else fallback_activation
        return ScoreConfig(temperature=t, activation=act)

    # table order: registry accuracy descending, unregistered models last
    datasets = sorted(
        datasets,
        key=lambda ds: (
            -(registry[ds.model_id].robustbench_accuracy
              if ds.model_id in registry else -1.0),
            ds.model_id,
        ),
    )

    # the CSV is written incrementally so a failing model leaves the rows
    # audited so far on disk (plus the FAILED marker)
    entries = []
    with open(out.file("audit.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AUDIT_COLUMNS)
        for ds in datasets:
            base_prof = per_class_scores(ds, config_for(ds, 1.0))
            prof = (base_prof if temperature == 1.0
                    else per_class_scores(ds, config_for(ds, temperature)))
            rep = audit(prof, lam=lam)
            rec = registry.get(ds.model_id)
            entries.append((ds, rec, base_prof, prof, rep))
            writer.writerow([
                ds.model_id,
                _f(rec.robustbench_accuracy) if rec else "",
                _f(base_prof.aggregate),
                _f(prof.aggregate),
                _f(rep.rdi),
                _f(rep.nrgc),
                _f(rep.wcr),
                rep.wcr_class_name,
                _f(rep.fp_great),
            ])
            fh.flush()

    for ds, rec, base_prof, prof, rep in entries:
        save_report_json(rep, out.file("reports", f"{ds.model_id}.json"))
        save_profile_json(prof, out.file("profiles", f"{ds.model_id}.json"))

    profiles = [e[3] for e in entries]
    reports = [e[4] for e in entries]

    summary = vulnerability_summary(profiles)
    with open(out.file("vulnerability_summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")

    _emit_plot_data(out, entries, profiles, reports)
    return entries


def _emit_plot_data(out: OutputDir, entries, profiles, reports):
    ks = {p.n_classes for p in profiles}
    if len(ks) == 1:
        prof0 = profiles[0]
        names = [prof0.class_name(k) for k in range(prof0.n_classes)]
        with open(out.file("heatmap.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model_id"] + names)
            for prof in profiles:
                writer.writerow(
                    [prof.model_id]
                    + ["" if not c else _f(s)
                       for s, c in zip(prof.scores, prof.counts)]
                )
    else:
        print(f"warning: models disagree on class count {sorted(ks)}; "
              "skipping heatmap.csv", file=sys.stderr)

    with open(out.file("pareto.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model_id", "rb_acc", "aggregate", "rdi", "fp_great"])
        for ds, rec, base_prof, prof, rep in entries:
            writer.writerow([
                ds.model_id,
                _f(rec.robustbench_accuracy) if rec else "",
                _f(prof.aggregate), _f(rep.rdi), _f(rep.fp_great),
            ])

    if len(reports) >= 2:
        with open(out.file("reranking.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model_id", "aggregate", "fp_great",
                             "aggregate_rank", "fp_great_rank", "rank_delta"])
            for row in fairness_rerank(reports):
                writer.writerow([
                    row["model_id"], _f(row["aggregate"]), _f(row["fp_great"]),
                    row["aggregate_rank"], row["fp_great_rank"], row["rank_delta"],
                ])
    else:
        print("warning: fewer than two models; skipping reranking.csv",
              file=sys.stderr)

    with open(out.file("radar.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model_id", "metric", "value"])
        for rep in reports:
            for metric in ("aggregate", "mean_score", "rdi", "nrgc", "wcr",
                           "fp_great"):
                writer.writerow([rep.model_id, metric, _f(getattr(rep, metric))])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_score(args, out: OutputDir):
    names = args.class_names.split(",") if args.class_names else None
    ds = load_logit_dataset(args.dataset, class_names=names)
    if args.model_id:
        ds.model_id = args.model_id
    if not ds.model_id:
        ds.model_id = Path(args.dataset).stem
    config = ScoreConfig(temperature=args.temperature, activation=args.activation)
    prof = per_class_scores(ds, config)
    save_profile_json(prof, out.file(f"{ds.model_id}_profile.json"))
    save_profile_csv(prof, out.file(f"{ds.model_id}_per_class.csv"))
    defined = int(prof.defined_mask().sum())
    print(f"{ds.model_id}: aggregate={prof.aggregate:.6f} over "
          f"{ds.n_samples} samples, {defined}/{ds.n_classes} classes defined "
          f"(T={config.temperature:g}, {config.activation})")


def cmd_audit(args, out: OutputDir):
    datasets = _collect_datasets(args)
    registry = _registry_map(args)
    entries = _emit_audit(out, datasets, registry, args.temperature, args.lam,
                          args.activation)
    print(f"audited {len(entries)} models at T={args.temperature:g} "
          f"-> {out.path / 'audit.csv'}")


def cmd_calibrate(args, out: OutputDir):
    datasets = _collect_datasets(args)
    registry = _registry_map(args)
    grid = GridSpec()
    if args.method == "accuracy":
        if not registry:
            raise DataValidationError("--method accuracy requires --registry")
        records = []
        for ds in datasets:
            if ds.model_id not in registry:
                raise DataValidationError(
                    f"model {ds.model_id!r} missing from registry"
                )
            records.append(registry[ds.model_id])
        result = calibrate_from_registry(datasets, records, grid=grid)
        activation = records[0].activation
    else:
        if len(datasets) != 1:
            raise DataValidationError(
                "--method stability calibrates a single model "
                f"(got {len(datasets)} datasets)"
            )
        rec = registry.get(datasets[0].model_id)
        activation = rec.activation if rec else args.activation
        result = calibrate_stability(
            datasets[0], grid=grid, delta_t=args.delta_t,
            probe_count=args.probe_count, activation=activation,
        )

    save_calibration_json(result, out.file("calibration.json"))
    with open(out.file("calibration_curve.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["temperature", "objective"])
        for t, v in result.curve:
            writer.writerow([_f(t), "" if np.isnan(v) else _f(v)])

    _emit_audit(out, datasets, registry, result.t_star, args.lam, activation)
    print(f"{result.method}: t_star={result.t_star:g} "
          f"objective={result.rho_at_t_star:.6f}; audit re-run at t_star")


def cmd_bounds(args, out: OutputDir):
    if args.counts:
        try:
            counts = np.array([int(v) for v in args.counts.split(",")], dtype=np.int64)
        except ValueError as exc:
            raise DataValidationError(f"--counts: {exc}") from None
        bound = concentration_bound(counts, args.delta)
        payload = bound.to_json_dict()
        k, n_min = bound.num_classes, bound.n_min
    else:
        if args.n is None or args.num_classes is None:
            raise DataValidationError("provide --counts or both --n and --num-classes")
        k, n_min = args.num_classes, args.n
        payload = {
            "n": args.n,
            "num_classes": k,
            "delta": args.delta,
            "per_class_epsilon": per_class_epsilon(args.n, k, args.delta),
            "rdi_epsilon": rdi_epsilon(args.n, k, args.delta),
        }
    if args.epsilon is not None:
        payload["target_epsilon"] = args.epsilon
        payload["required_samples"] = required_samples(args.epsilon, k, args.delta)

    if args.format == "json":
        with open(out.file("bounds.json"), "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        flat = {kk: v for kk, v in payload.items() if not isinstance(v, list)}
        with open(out.file("bounds.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(flat))
            writer.writerow([v if isinstance(v, int) else _f(v)
                             for v in flat.values()])

    # decay of the width with per-class sample size, for plotting
    sweep = sorted({int(round(m * 10**e)) for e in range(1, 5)
                    for m in (1, 1.5, 2, 3, 5, 7)} | {10**5, n_min})
    with open(out.file("bounds_curve.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "per_class_epsilon", "rdi_epsilon"])
        for n in sweep:
            writer.writerow([n, _f(per_class_epsilon(n, k, args.delta)),
                             _f(rdi_epsilon(n, k, args.delta))])

    eps = payload.get("per_class_epsilon",
                      payload.get("simultaneous_epsilon"))
    print(f"epsilon={eps:.6f} (K={k}, n={n_min}, delta={args.delta:g})")


def cmd_synth(args, out: OutputDir):
    if args.fixture:
        if args.fixture == "cifar10":
            specs = fixtures.cifar10_specs(
                n_per_class=args.n_per_class or 1000,
                temperature=args.temperature,
            )
            registry = fixtures.cifar10_registry()
        else:
            specs = fixtures.imagenet_specs(
                n_per_class=args.n_per_class or 2,
                temperature=args.temperature,
            )
            registry = fixtures.imagenet_registry()
        save_registry(registry, out.file("registry.json"))
    elif args.spec:
        spec = load_spec_json(args.spec)
        if args.n_per_class:
            spec = type(spec).from_json_dict(
                {**spec.to_json_dict(), "n_per_class": args.n_per_class}
            )
        specs = [spec]
    else:
        raise DataValidationError("provide --spec FILE or --fixture NAME")

    for spec in specs:
        ds = generate(spec)
        if args.format == "csv":
            save_csv(ds, out.file(f"{spec.model_id}.csv"))
        else:
            save_binary(ds, out.file(f"{spec.model_id}.json"))
            out.emitted.append(str(out.path / f"{spec.model_id}.f32"))
            out.emitted.append(str(out.path / f"{spec.model_id}.labels.u32"))
    print(f"wrote {len(specs)} dataset(s) to {out.path}")


def cmd_coverage(args, out: OutputDir):
    result = coverage_experiment(
        distribution=args.distribution,
        num_classes=args.num_classes,
        n_per_class=args.n,
        delta=args.delta,
        trials=args.trials,
        seed=args.seed,
    )
    payload = result.to_json_dict()
    if args.format == "json":
        with open(out.file("coverage.json"), "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        with open(out.file("coverage.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(payload))
            writer.writerow([v if isinstance(v, (int, str)) else _f(v)
                             for v in payload.values()])
    print(f"{args.distribution}: coverage={result.coverage:.4f} "
          f"(target >= {1 - args.delta:g}, epsilon={result.epsilon:.6f}, "
          f"{result.trials} trials)")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=".",
                        help="directory for emitted files (default: .)")
    common.add_argument("--seed", type=int, default=0,
                        help="RNG seed for randomised commands")
    common.add_argument("--format", choices=("csv", "json"), default="json",
                        help="report encoding where a choice exists; for "
                             "synth, csv selects CSV datasets instead of binary")

    parser = argparse.ArgumentParser(
        prog="greataudit",
        description="Per-class certified-robustness auditing of classifier logits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", parents=[common],
                       help="score one dataset and emit its per-class profile")
    p.add_argument("--dataset", required=True,
                   help="CSV file or binary manifest JSON")
    p.add_argument("--model-id", default="")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--activation", choices=("sigmoid", "softmax"),
                   default="sigmoid")
    p.add_argument("--class-names", default="",
                   help="comma-separated class names (CSV datasets only)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("audit", parents=[common],
                       help="full disparity audit over a set of models")
    p.add_argument("--datasets", help="directory of dataset files")
    p.add_argument("--manifest", help="JSON list of dataset paths")
    p.add_argument("--registry", help="model registry JSON")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--activation", choices=("sigmoid", "softmax"),
                   default="sigmoid",
                   help="activation for models absent from the registry")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("calibrate", parents=[common],
                       help="temperature search, then an audit at t_star")
    p.add_argument("--datasets")
    p.add_argument("--manifest")
    p.add_argument("--registry")
    p.add_argument("--method", choices=("accuracy", "stability"),
                   default="accuracy")
    p.add_argument("--delta-t", type=float, default=0.05,
                   help="stability probe half-width")
    p.add_argument("--probe-count", type=int, default=5)
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--activation", choices=("sigmoid", "softmax"),
                   default="sigmoid")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("bounds", parents=[common],
                       help="finite-sample confidence widths")
    p.add_argument("--n", type=int, help="per-class sample count")
    p.add_argument("--num-classes", type=int)
    p.add_argument("--counts", help="comma-separated per-class counts")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--epsilon", type=float,
                   help="also invert: samples needed for this width")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("synth", parents=[common],
                       help="generate synthetic datasets with known profiles")
    p.add_argument("--spec", help="SyntheticSpec JSON file")
    p.add_argument("--fixture", choices=("cifar10", "imagenet"),
                   help="bundled reference profiles")
    p.add_argument("--n-per-class", type=int)
    p.add_argument("--temperature", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("coverage", parents=[common],
                       help="Monte-Carlo coverage of the concentration bound")
    p.add_argument("--distribution", choices=COVERAGE_DISTRIBUTIONS,
                   default="uniform")
    p.add_argument("--num-classes", type=int, default=10)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=cmd_coverage)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = OutputDir(args.output_dir)
    out.clear_marker()
    try:
        args.func(args, out)
    except MetricUndefinedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        out.mark_failed(str(exc))
        return 1
    except (DataValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        out.mark_failed(str(exc))
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
