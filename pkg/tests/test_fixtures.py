"""The frozen reference profiles must actually reproduce the published
summary tables when pushed through the full synthesise-score-audit path."""

import numpy as np
import pytest

from greataudit import (
    SCORE_SCALE,
    ScoreConfig,
    audit,
    generate,
    per_class_scores,
    spearman,
)
from greataudit.fixtures import (
    CIFAR10_CLASS_NAMES,
    CIFAR10_REFERENCE,
    IMAGENET_BEST_ID,
    IMAGENET_REFERENCE,
    IMAGENET_SPECIAL_INDICES,
    cifar10_registry,
    cifar10_specs,
    imagenet_class_names,
    imagenet_registry,
    imagenet_specs,
    imagenet_targets,
)

from golden import (
    CIFAR10_PER_CLASS_TABLE,
    CIFAR10_TABLE,
    EXPECTED_SPEARMAN_GS_VS_RB,
    EXPECTED_SPEARMAN_IMAGENET,
    IMAGENET_TABLE,
    TOL,
)


class TestFeasibility:
    def test_cifar10_targets_in_range(self):
        for mid, (rb, targets) in CIFAR10_REFERENCE.items():
            assert len(targets) == 10
            assert 0.0 < rb < 100.0
            for t in targets:
                assert 0.0 <= t < SCORE_SCALE

    def test_imagenet_targets_in_range_and_shaped(self):
        for mid, (_, mean, worst, spread, worst_id) in IMAGENET_REFERENCE.items():
            targets = imagenet_targets(mid)
            w_idx = IMAGENET_SPECIAL_INDICES[worst_id]
            b_idx = IMAGENET_SPECIAL_INDICES[IMAGENET_BEST_ID]
            assert np.all((targets >= 0.0) & (targets < SCORE_SCALE))
            assert targets[w_idx] == pytest.approx(worst)
            assert targets[b_idx] == pytest.approx(worst + spread)
            assert targets.min() == targets[w_idx]
            assert targets.max() == targets[b_idx]
            assert targets.mean() == pytest.approx(mean, abs=1e-12)
            # filler sits strictly between the extremes
            filler = np.delete(targets, [w_idx, b_idx])
            assert worst < filler[0] < worst + spread

    def test_registries_align_with_references(self):
        recs = {r.model_id: r for r in cifar10_registry()}
        assert set(recs) == set(CIFAR10_REFERENCE)
        for mid, (rb, _) in CIFAR10_REFERENCE.items():
            assert recs[mid].robustbench_accuracy == rb
            assert recs[mid].threat_model == "l2"
        irecs = {r.model_id: r for r in imagenet_registry()}
        assert all(r.activation == "softmax" for r in irecs.values())


@pytest.fixture(scope="module")
def profiles():
    config = ScoreConfig(temperature=1.0, activation="sigmoid")
    return {
        spec.model_id: per_class_scores(generate(spec), config)
        for spec in cifar10_specs(n_per_class=50)
    }


@pytest.fixture(scope="module")
def reports():
    config = ScoreConfig(temperature=1.0, activation="softmax")
    out = {}
    for spec in imagenet_specs(n_per_class=2):
        out[spec.model_id] = audit(per_class_scores(generate(spec), config))
    return out


class TestCifar10Reproduction:

    def test_per_class_table(self, profiles):
        for mid, row in CIFAR10_PER_CLASS_TABLE.items():
            got = profiles[mid].scores
            for k, published in enumerate(row):
                assert got[k] == pytest.approx(published, abs=TOL), \
                    f"{mid} class {CIFAR10_CLASS_NAMES[k]}"

    def test_summary_table(self, profiles):
        for mid, (rb, agg, rdi_v, nrgc_v, wcr_v, wcr_name, fp) in \
                CIFAR10_TABLE.items():
            rep = audit(profiles[mid])
            assert rep.aggregate == pytest.approx(agg, abs=TOL), mid
            assert rep.rdi == pytest.approx(rdi_v, abs=TOL), mid
            assert rep.nrgc == pytest.approx(nrgc_v, abs=TOL), mid
            assert rep.wcr == pytest.approx(wcr_v, abs=TOL), mid
            assert rep.wcr_class_name == wcr_name, mid
            assert rep.fp_great == pytest.approx(fp, abs=TOL), mid

    def test_score_accuracy_correlation(self, profiles):
        aggs = [profiles[mid].aggregate for mid in CIFAR10_REFERENCE]
        rbs = [rb for rb, _ in CIFAR10_REFERENCE.values()]
        rho = spearman(aggs, rbs)
        assert rho == pytest.approx(EXPECTED_SPEARMAN_GS_VS_RB, abs=5e-4)


class TestImagenetReproduction:
    def test_summary_table(self, reports):
        for mid, (rb, agg, rdi_v, wcr_v, synset, fp) in IMAGENET_TABLE.items():
            rep = reports[mid]
            assert rep.aggregate == pytest.approx(agg, abs=TOL), mid
            assert rep.rdi == pytest.approx(rdi_v, abs=TOL), mid
            assert rep.wcr == pytest.approx(wcr_v, abs=TOL), mid
            assert rep.wcr_class_name == synset, mid
            assert rep.fp_great == pytest.approx(fp, abs=TOL), mid

    def test_best_class_is_shared(self, reports):
        for rep in reports.values():
            assert rep.best_class_name == IMAGENET_BEST_ID

    def test_score_accuracy_correlation(self, reports):
        mids = list(IMAGENET_REFERENCE)
        aggs = [reports[m].aggregate for m in mids]
        rbs = [IMAGENET_REFERENCE[m][0] for m in mids]
        assert spearman(aggs, rbs) == pytest.approx(
            EXPECTED_SPEARMAN_IMAGENET, abs=1e-12)

    def test_class_names_mark_special_synsets(self):
        names = imagenet_class_names()
        assert names[60] == "n01756291"
        assert names[525] == "n04525038"
        assert names[999] == "n12057211"
        assert names[10] == "class_10"
        assert len(set(names)) == 1000
