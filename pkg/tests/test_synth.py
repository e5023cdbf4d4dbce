import json
import math

import numpy as np
import pytest

from greataudit import (
    DataValidationError,
    InfeasibleTargetError,
    SCORE_SCALE,
    ScoreConfig,
    SyntheticSpec,
    generate,
    margin_inverse,
    per_class_scores,
)
from greataudit.dataset import save_binary, load_binary
from greataudit.synth import load_spec_json


def softmax_gap_closed_form(t: float, k: int) -> float:
    # independent route: with logits (u, 0, ..., 0) the margin is
    # (e^u - 1)/(e^u + k - 1) = t  =>  u = ln((1 + t(k-1)) / (1 - t))
    return math.log((1.0 + t * (k - 1.0)) / (1.0 - t))


class TestMarginInverse:
    def test_sigmoid_closed_form(self):
        for t in (0.01, 0.25, 0.5, 0.9, 0.999):
            a = margin_inverse(t * SCORE_SCALE, 2, "sigmoid")
            # margin of the row (+a, -a) under sigmoid is tanh(a/2)
            assert math.tanh(a / 2.0) == pytest.approx(t, abs=1e-12)

    def test_softmax_bisection_matches_log_formula(self):
        for k in (2, 3, 10, 100, 1000):
            for t in (1e-6, 0.01, 0.3, 0.7, 0.99, 0.9999):
                u = margin_inverse(t * SCORE_SCALE, k, "softmax")
                assert u == pytest.approx(softmax_gap_closed_form(t, k), rel=1e-9)

    def test_zero_target_gap_is_zero(self):
        assert margin_inverse(0.0, 10, "sigmoid") == 0.0
        assert margin_inverse(0.0, 10, "softmax") == 0.0

    def test_infeasible_targets(self):
        for bad in (-0.1, SCORE_SCALE, SCORE_SCALE + 1.0, math.inf):
            with pytest.raises(InfeasibleTargetError):
                margin_inverse(bad, 10, "sigmoid")


class TestGenerate:
    @pytest.mark.parametrize("activation", ["sigmoid", "softmax"])
    def test_round_trip_targets(self, activation):
        targets = (0.02, 0.3, 0.9, 1.1, 0.0)
        spec = SyntheticSpec(model_id="m", num_classes=5, n_per_class=8,
                             targets=targets, activation=activation)
        ds = generate(spec)
        prof = per_class_scores(ds, ScoreConfig(activation=activation))
        # float32 storage quantisation costs at most ~1e-6 of score
        np.testing.assert_allclose(prof.scores, targets, atol=5e-6)

    def test_zero_target_is_exactly_zero(self):
        spec = SyntheticSpec(model_id="m", num_classes=4, n_per_class=3,
                             targets=(0.5, 0.0, 0.5, 0.5))
        prof = per_class_scores(generate(spec), ScoreConfig())
        assert prof.scores[1] == 0.0
        # and the row is strictly misclassified, not a tie
        ds = generate(spec)
        row = ds.logits[ds.labels == 1][0]
        assert row[2] > row[1]  # the designated competitor wins

    def test_temperature_scaling_cancels(self):
        targets = (0.2, 0.8)
        hot = SyntheticSpec(model_id="m", num_classes=2, n_per_class=4,
                            targets=targets, temperature=3.7)
        prof = per_class_scores(generate(hot), ScoreConfig(temperature=3.7))
        np.testing.assert_allclose(prof.scores, targets, atol=5e-6)

    def test_uneven_and_empty_classes(self):
        spec = SyntheticSpec(model_id="m", num_classes=3, n_per_class=(4, 0, 2),
                             targets=(0.1, 0.2, 0.3))
        ds = generate(spec)
        assert ds.n_samples == 6
        assert np.bincount(ds.labels, minlength=3).tolist() == [4, 0, 2]
        prof = per_class_scores(ds, ScoreConfig())
        assert math.isnan(prof.scores[1])

    def test_all_zero_counts_rejected(self):
        spec = SyntheticSpec(model_id="m", num_classes=2, n_per_class=(0, 0))
        with pytest.raises(DataValidationError):
            generate(spec)

    def test_default_targets_are_seeded(self):
        a = generate(SyntheticSpec(model_id="m", num_classes=6, n_per_class=2, seed=5))
        b = generate(SyntheticSpec(model_id="m", num_classes=6, n_per_class=2, seed=5))
        c = generate(SyntheticSpec(model_id="m", num_classes=6, n_per_class=2, seed=6))
        np.testing.assert_array_equal(a.logits, b.logits)
        assert not np.array_equal(a.logits, c.logits)

    def test_generation_is_byte_deterministic(self, tmp_path):
        spec = SyntheticSpec(model_id="m", num_classes=10, n_per_class=50, seed=3)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_binary(generate(spec), p1)
        save_binary(generate(spec), p2)
        assert (tmp_path / "a.f32").read_bytes() == (tmp_path / "b.f32").read_bytes()
        assert (tmp_path / "a.labels.u32").read_bytes() == \
               (tmp_path / "b.labels.u32").read_bytes()

    def test_storage_round_trip_preserves_scores_exactly(self, tmp_path):
        # logits are quantised to float32 at generation time, so saving and
        # loading the binary form must not move any score at all
        spec = SyntheticSpec(model_id="m", num_classes=7, n_per_class=9, seed=11)
        ds = generate(spec)
        save_binary(ds, tmp_path / "d.json")
        back = load_binary(tmp_path / "d.json")
        np.testing.assert_array_equal(ds.logits, back.logits)
        a = per_class_scores(ds, ScoreConfig())
        b = per_class_scores(back, ScoreConfig())
        np.testing.assert_array_equal(a.scores, b.scores)

    def test_rows_grouped_by_class_ascending(self):
        ds = generate(SyntheticSpec(model_id="m", num_classes=4, n_per_class=3))
        assert np.all(np.diff(ds.labels) >= 0)


class TestSpecSerialization:
    def test_json_round_trip(self, tmp_path):
        spec = SyntheticSpec(model_id="m", num_classes=3, n_per_class=(1, 2, 3),
                             targets=(0.1, 0.2, 0.3), activation="softmax",
                             temperature=2.5, seed=9, dataset_id="d",
                             class_names=("a", "b", "c"))
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec.to_json_dict()))
        assert load_spec_json(path) == spec

    def test_defaults_fill_in(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({"model_id": "m", "num_classes": 4}))
        spec = load_spec_json(path)
        assert spec.n_per_class == 1000
        assert spec.targets is None
        assert spec.activation == "sigmoid"

    def test_bad_spec_raises(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text("{\"num_classes\": 4}")
        with pytest.raises(DataValidationError):
            load_spec_json(path)

    def test_validation_in_constructor(self):
        with pytest.raises(DataValidationError):
            SyntheticSpec(model_id="m", num_classes=1)
        with pytest.raises(InfeasibleTargetError):
            SyntheticSpec(model_id="m", num_classes=2,
                          targets=(0.5, 2.0)).resolved_targets()
