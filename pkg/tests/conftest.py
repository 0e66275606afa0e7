"""Shared fixtures: tiny lexical-resource writers and the synthetic
two-cluster word world the engine and acceptance tests run on."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from lexloop.classifier import TrainConfig
from lexloop.embedding import EmbeddingStore, save_vectors
from lexloop.engine import IterationConfig
from lexloop.lexicon import Lexicon, LexiconEntry, save_gloss_lexicon
from lexloop.strategies import StrategyKind


def write_lines(path: Path, lines) -> Path:
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    return path


@dataclass
class SyntheticWorld:
    """Two gaussian clusters of words, each word glossed by itself so the
    classifier features equal the word's own vector."""

    dim: int
    pool_words: list[str]
    test_words: list[str]
    truth: dict[str, int]  # labels for pool and test words
    vectors: dict[str, np.ndarray]
    lexicon_path: Path
    vectors_path: Path
    truth_path: Path
    testset_path: Path


def build_world(
    root: Path,
    n_pool: int = 500,
    n_test: int = 100,
    dim: int = 8,
    separation: float = 3.0,
    seed: int = 20240817,
) -> SyntheticWorld:
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    offset = separation / (2.0 * math.sqrt(dim))
    means = {0: np.full(dim, -offset), 1: np.full(dim, offset)}

    pool = [f"w{i:03d}" for i in range(n_pool)]
    test = [f"t{i:03d}" for i in range(n_test)]
    truth: dict[str, int] = {}
    vectors: dict[str, np.ndarray] = {}
    for i, word in enumerate(pool + test):
        label = i % 2
        truth[word] = label
        vectors[word] = rng.normal(means[label], 1.0)

    entries = {w: LexiconEntry(word=w, glosses=[("a", w)]) for w in pool + test}
    lexicon_path = root / "lexicon.tsv"
    save_gloss_lexicon(Lexicon(entries), lexicon_path)
    vectors_path = root / "vectors.txt"
    save_vectors(EmbeddingStore(dim, vectors), vectors_path)
    truth_path = write_lines(root / "truth.tsv", (f"{w}\t{truth[w]}" for w in pool))
    testset_path = write_lines(root / "testset.tsv", (f"{w}\t{truth[w]}" for w in test))
    return SyntheticWorld(
        dim=dim,
        pool_words=pool,
        test_words=test,
        truth=truth,
        vectors=vectors,
        lexicon_path=lexicon_path,
        vectors_path=vectors_path,
        truth_path=truth_path,
        testset_path=testset_path,
    )


@pytest.fixture(scope="session")
def world(tmp_path_factory) -> SyntheticWorld:
    """The full-size world: 500 pool words, 100 test words, 8 dims."""
    return build_world(tmp_path_factory.mktemp("world"))


@pytest.fixture
def small_world(tmp_path) -> SyntheticWorld:
    """A fast world for engine/server tests."""
    return build_world(tmp_path / "small", n_pool=80, n_test=20, dim=4, seed=7)


def fast_train_config(**overrides) -> TrainConfig:
    base = dict(epochs=6, lr_drop_epoch=3, batch_size=8, seed=0)
    base.update(overrides)
    return TrainConfig(**base)


def fast_iteration_config(
    strategy: str = "entropy",
    seed: int = 0,
    iterations: int = 2,
    pos_quota: int = 5,
    neg_quota: int = 5,
    cap: int = 20,
    cal_k: int = 10,
    warm_start: bool = False,
    train: TrainConfig | None = None,
) -> IterationConfig:
    return IterationConfig(
        iterations=iterations,
        pos_quota=pos_quota,
        neg_quota=neg_quota,
        cap=cap,
        strategy=StrategyKind(strategy, cal_k=cal_k),
        seed=seed,
        warm_start=warm_start,
        train=train or fast_train_config(),
    )
