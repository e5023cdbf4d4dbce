"""Bundled reference audit: per-class profiles for public robust models.

Two model zoos are frozen here as score targets for the synthetic
generator, so the full pipeline (synthesis -> scoring -> disparity ->
calibration) can be exercised end to end without network access or GPU
inference:

* 17 CIFAR-10 l2-robust checkpoints (RobustBench-style ids), scored with
  a sigmoid head at T=1 over 1000 samples per class;
* 5 ImageNet linf-robust checkpoints, softmax head, 1000 classes.

The CIFAR-10 per-class means are stored in full; for ImageNet only the
summary shape of each profile is stored (aggregate mean, worst-class
score, spread, and the identities of the extreme classes) and the
remaining 998 classes share the implied filler value, which preserves
every aggregate/disparity statistic derived from mean, min and max.
"""

from __future__ import annotations

import numpy as np

from .dataset import ModelRecord
from .synth import SyntheticSpec

CIFAR10_CLASS_NAMES = (
    "airplane", "automobile", "bird", "cat", "deer",
    "dog", "frog", "horse", "ship", "truck",
)

# model_id -> (robustbench l2 accuracy @ eps=0.5, per-class mean scores)
CIFAR10_REFERENCE = {
    "Rebuffi_extra": (82.32, (
        0.52842, 0.61614, 0.37294, 0.28302, 0.34134,
        0.36786, 0.44108, 0.56217, 0.55287, 0.58202,
    )),
    "Gowal_extra": (80.53, (
        0.54900, 0.63600, 0.39100, 0.28800, 0.34900,
        0.36800, 0.45900, 0.59100, 0.57000, 0.59800,
    )),
    "Rebuffi_70_ddpm": (80.42, (
        0.41389, 0.52655, 0.30157, 0.16627, 0.28232,
        0.22080, 0.42969, 0.47800, 0.49333, 0.49902,
    )),
    "Augustin_WRN_ext": (78.79, (
        0.57937, 0.65429, 0.46343, 0.33506, 0.43020,
        0.44445, 0.51842, 0.59795, 0.61308, 0.62143,
    )),
    "Rebuffi_28_ddpm": (78.80, (
        0.39090, 0.50244, 0.26470, 0.14371, 0.24761,
        0.20085, 0.39611, 0.44471, 0.46136, 0.46838,
    )),
    "Sehwag_Proxy": (77.24, (
        0.22656, 0.27665, 0.20056, 0.06027, 0.15360,
        0.07168, 0.34069, 0.36256, 0.31341, 0.31693,
    )),
    "Augustin_WRN": (76.25, (
        0.48567, 0.62758, 0.43481, 0.24229, 0.40400,
        0.34557, 0.54800, 0.57704, 0.58365, 0.58461,
    )),
    "Rade_R18": (76.15, (
        0.37300, 0.47219, 0.24429, 0.15700, 0.23839,
        0.21121, 0.37465, 0.41962, 0.43672, 0.44121,
    )),
    "Rebuffi_R18": (75.86, (
        0.32426, 0.44696, 0.22728, 0.12112, 0.21511,
        0.17613, 0.34314, 0.38726, 0.39817, 0.37862,
    )),
    "Gowal2020": (74.50, (
        0.11242, 0.12243, 0.08231, 0.06130, 0.09844,
        0.04618, 0.11820, 0.16721, 0.15318, 0.14593,
    )),
    "Sehwag_R18": (74.41, (
        0.19707, 0.23257, 0.12900, 0.05377, 0.11489,
        0.06065, 0.26097, 0.30181, 0.27183, 0.23973,
    )),
    "Wu2020": (73.66, (
        0.10444, 0.13416, 0.07844, 0.06242, 0.09125,
        0.04697, 0.09742, 0.15811, 0.11641, 0.15788,
    )),
    "Augustin2020": (72.91, (
        0.52597, 0.65245, 0.44027, 0.21773, 0.41912,
        0.33574, 0.53709, 0.58202, 0.58437, 0.58778,
    )),
    "Engstrom2019": (69.24, (
        0.11456, 0.23182, 0.09219, 0.03782, 0.07684,
        0.02397, 0.10171, 0.16768, 0.15756, 0.25818,
    )),
    "Rice2020": (67.68, (
        0.10675, 0.20016, 0.07444, 0.03139, 0.07868,
        0.03094, 0.10719, 0.15130, 0.15640, 0.23100,
    )),
    "Rony2019": (66.44, (
        0.21237, 0.37041, 0.19264, 0.09571, 0.10674,
        0.12892, 0.23161, 0.29831, 0.30613, 0.27775,
    )),
    "Ding_MMA": (66.09, (
        0.08358, 0.12771, 0.07427, 0.03902, 0.06431,
        0.04745, 0.08991, 0.16594, 0.08990, 0.08042,
    )),
}

# model_id -> (robustbench linf accuracy @ eps=4/255,
#              aggregate mean, worst score, spread max-min, worst synset)
IMAGENET_REFERENCE = {
    "Salman_WRN50-2": (38.14, 0.545, 0.009, 1.231, "n01756291"),
    "Salman_R50":     (34.96, 0.444, 0.003, 1.198, "n04525038"),
    "Engstrom2019":   (29.22, 0.446, 0.003, 1.196, "n03710637"),
    "Wong2020":       (26.24, 0.360, 0.000, 1.148, "n04525038"),
    "Salman_R18":     (25.32, 0.280, 0.000, 1.126, "n04525038"),
}

IMAGENET_NUM_CLASSES = 1000

# fixed positions of the classes that show up as extremes; every other
# index i is a generic "class_i"
IMAGENET_SPECIAL_INDICES = {
    "n01756291": 60,   # sidewinder rattlesnake
    "n04525038": 525,  # velvet fabric
    "n03710637": 637,  # maillot
    "n12057211": 999,  # yellow lady's slipper — the best class for all five
}
IMAGENET_BEST_ID = "n12057211"


def imagenet_class_names() -> tuple[str, ...]:
    names = [f"class_{i}" for i in range(IMAGENET_NUM_CLASSES)]
    for synset, idx in IMAGENET_SPECIAL_INDICES.items():
        names[idx] = synset
    return tuple(names)


def imagenet_targets(model_id: str) -> np.ndarray:
    """Per-class score targets reproducing a model's profile shape.

    The worst class gets the minimum, the common best class the maximum
    (min + spread), and the other 998 classes share the filler value
    that makes the aggregate mean come out right.  The filler always
    lies strictly between the extremes, so argmin/argmax land on the
    intended classes.
    """
    rb, mean, worst, spread, worst_id = IMAGENET_REFERENCE[model_id]
    k = IMAGENET_NUM_CLASSES
    best = worst + spread
    filler = (k * mean - worst - best) / (k - 2)
    targets = np.full(k, filler, dtype=np.float64)
    targets[IMAGENET_SPECIAL_INDICES[worst_id]] = worst
    targets[IMAGENET_SPECIAL_INDICES[IMAGENET_BEST_ID]] = best
    return targets


def cifar10_registry() -> list[ModelRecord]:
    return [
        ModelRecord(
            model_id=mid,
            clean_accuracy=rb,
            robustbench_accuracy=rb,
            threat_model="l2",
            activation="sigmoid",
        )
        for mid, (rb, _) in CIFAR10_REFERENCE.items()
    ]


def imagenet_registry() -> list[ModelRecord]:
    return [
        ModelRecord(
            model_id=mid,
            clean_accuracy=ref[0],
            robustbench_accuracy=ref[0],
            threat_model="linf",
            activation="softmax",
        )
        for mid, ref in IMAGENET_REFERENCE.items()
    ]


def cifar10_specs(n_per_class: int = 1000,
                  temperature: float = 1.0) -> list[SyntheticSpec]:
    """Synthetic-dataset specs reproducing the CIFAR-10 reference profiles."""
    return [
        SyntheticSpec(
            model_id=mid,
            dataset_id="cifar10_ref",
            num_classes=10,
            n_per_class=n_per_class,
            targets=targets,
            activation="sigmoid",
            temperature=temperature,
            class_names=CIFAR10_CLASS_NAMES,
        )
        for mid, (_, targets) in CIFAR10_REFERENCE.items()
    ]


def imagenet_specs(n_per_class: int = 2,
                   temperature: float = 1.0) -> list[SyntheticSpec]:
    """Synthetic-dataset specs reproducing the ImageNet reference profiles."""
    names = imagenet_class_names()
    return [
        SyntheticSpec(
            model_id=mid,
            dataset_id="imagenet_ref",
            num_classes=IMAGENET_NUM_CLASSES,
            n_per_class=n_per_class,
            targets=tuple(imagenet_targets(mid)),
            activation="softmax",
            temperature=temperature,
            class_names=names,
        )
        for mid in IMAGENET_REFERENCE
    ]
