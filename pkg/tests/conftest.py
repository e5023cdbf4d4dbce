import sys
from pathlib import Path

import numpy as np
import pytest

# make the test-side helper modules (golden, families) importable
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_dataset(rng, n, k, spread=3.0, empty_classes=()):
    """Gaussian logits with roughly uniform labels; some classes optionally empty."""
    from greataudit import LogitDataset

    allowed = np.array([c for c in range(k) if c not in set(empty_classes)])
    labels = allowed[rng.integers(0, allowed.size, size=n)]
    logits = rng.normal(0.0, spread, size=(n, k))
    return LogitDataset(logits=logits, labels=labels)
