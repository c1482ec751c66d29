import numpy as np
import pytest

from synbench.data import ToySpec, generate_toy_corpus


@pytest.fixture(scope="session")
def toy_corpus():
    """Small shared corpus: 2 labels, 60 patients x 10 images at 32px."""
    spec = ToySpec(n_patients=60, labels=["disc", "bar"], images_per_patient=10,
                   resolution=32, noise_level=0.1)
    return generate_toy_corpus(spec, seed=11)


@pytest.fixture(scope="session")
def toy_corpus_combos():
    """Corpus restricted to the two one-hot combos, for conditional-GAN work."""
    spec = ToySpec(n_patients=80, labels=["disc", "bar"], images_per_patient=10,
                   resolution=32, noise_level=0.08, combos=["10", "01"])
    return generate_toy_corpus(spec, seed=23)


def pair_count_auroc(scores, labels):
    """Brute-force AUROC oracle: fraction of (pos, neg) pairs correctly ordered,
    ties counting one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    pos = scores[labels]
    neg = scores[~labels]
    if len(pos) == 0 or len(neg) == 0:
        return None
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))
