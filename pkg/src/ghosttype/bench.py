"""The standard synthetic benchmark used by the acceptance suite.

Fixed recipe: seed 1234, 12 simulated users x 150 phrases from the
bundled corpus, default simulator parameters, user-disjoint 9/1/2
train/val/test split, and 5x random-offset augmentation of the training
split only.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset, split_dataset
from .simulate import (
    SimConfig,
    augment_offsets,
    bundled_corpus_path,
    generate_dataset,
    load_corpus,
)

BENCHMARK_SEED = 1234


def standard_benchmark(corpus_path=None, seed: int = BENCHMARK_SEED,
                       n_users: int = 12, phrases_per_user: int = 150,
                       augment_copies: int = 5) -> tuple[Dataset, Dataset, Dataset]:
    """Returns (augmented train, val, test)."""
    phrases = load_corpus(corpus_path or bundled_corpus_path())
    cfg = SimConfig(n_users=n_users, phrases_per_user=phrases_per_user, seed=seed)
    full = generate_dataset(cfg, phrases)
    train, val, test = split_dataset(full, n_test_users=2, n_val_users=1, seed=seed)
    if augment_copies > 0:
        train = augment_offsets(train, copies=augment_copies,
                                rng=np.random.default_rng(seed + 1))
    return train, val, test
