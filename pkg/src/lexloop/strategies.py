"""The four acquisition strategies that pick the next word to annotate.

All selections are deterministic given their inputs: score ties break
lexicographically by word, and the random strategy draws from a caller-owned
seeded generator. Every function returns a member of the unlabeled pool.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .classifier import ClassifierModel, forward
from .embedding import l2_distance

VALID_STRATEGIES = ("entropy", "coreset", "cal", "random")

PROB_CLAMP = 1e-7  # probabilities clamped into [PROB_CLAMP, 1-PROB_CLAMP] for KL


@dataclass(frozen=True)
class StrategyKind:
    name: str
    cal_k: int = 10

    def __post_init__(self):
        if self.name not in VALID_STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.name!r}: expected one of {', '.join(VALID_STRATEGIES)}"
            )
        if self.cal_k < 1:
            raise ValueError("cal_k must be >= 1")


@dataclass(frozen=True)
class PoolView:
    """Read-only snapshot the strategies score against.

    features feed the classifier; strategy_vectors define the geometry for
    distance-based selection. labels ride along for callers that want them
    but no strategy consumes gold labels.
    """

    unlabeled: tuple[str, ...]
    labeled: tuple[str, ...]
    features: Mapping[str, np.ndarray]
    strategy_vectors: Mapping[str, np.ndarray]
    model: ClassifierModel | None = None
    labels: Mapping[str, int] | None = None

    def __post_init__(self):
        overlap = set(self.unlabeled) & set(self.labeled)
        if overlap:
            raise ValueError(f"words in both pools: {sorted(overlap)[:5]}")


def _require_unlabeled(view: PoolView) -> None:
    if not view.unlabeled:
        raise ValueError("unlabeled pool is empty")


def _require_labeled(view: PoolView, strategy: str) -> None:
    if not view.labeled:
        raise ValueError(f"{strategy} requires labeled seeds")


def select_entropy(view: PoolView) -> str:
    """Most uncertain word: probability closest to 0.5."""
    _require_unlabeled(view)
    if view.model is None:
        raise ValueError("entropy requires a trained model")
    probs = {w: forward(view.model, view.features[w]) for w in view.unlabeled}
    return min(view.unlabeled, key=lambda w: (abs(probs[w] - 0.5), w))


def select_coreset(view: PoolView) -> str:
    """Word farthest (max over pool of min distance) from the labeled set."""
    _require_unlabeled(view)
    _require_labeled(view, "coreset")
    labeled_vecs = [view.strategy_vectors[v] for v in view.labeled]

    def min_dist(w: str) -> float:
        vec = view.strategy_vectors[w]
        return min(l2_distance(vec, lv) for lv in labeled_vecs)

    return min(view.unlabeled, key=lambda w: (-min_dist(w), w))


def bernoulli_kl(p: float, q: float) -> float:
    """KL(Bern(p) || Bern(q)) in nats, with both probabilities clamped."""
    p = min(max(p, PROB_CLAMP), 1.0 - PROB_CLAMP)
    q = min(max(q, PROB_CLAMP), 1.0 - PROB_CLAMP)
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


def select_cal(view: PoolView, k: int = 10) -> str:
    """Word most contrastive to its nearest labeled neighbors.

    For each candidate, the k nearest labeled words by strategy-space
    distance (k capped at the labeled pool size) vote via the mean
    KL(neighbor prediction || candidate prediction); the largest mean wins.
    """
    _require_unlabeled(view)
    _require_labeled(view, "cal")
    if view.model is None:
        raise ValueError("cal requires a trained model")
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, len(view.labeled))

    neighbor_probs = {v: forward(view.model, view.features[v]) for v in view.labeled}

    def score(w: str) -> float:
        vec = view.strategy_vectors[w]
        by_dist = sorted(
            view.labeled, key=lambda v: (l2_distance(vec, view.strategy_vectors[v]), v)
        )
        p_w = forward(view.model, view.features[w])
        return sum(bernoulli_kl(neighbor_probs[v], p_w) for v in by_dist[:k]) / k

    return min(view.unlabeled, key=lambda w: (-score(w), w))


def select_random(view: PoolView, rng: random.Random) -> str:
    """Uniform draw over the unlabeled pool from the caller's generator."""
    _require_unlabeled(view)
    return view.unlabeled[rng.randrange(len(view.unlabeled))]


def select(kind: StrategyKind, view: PoolView, rng: random.Random) -> str:
    """Dispatch by strategy name."""
    if kind.name == "entropy":
        return select_entropy(view)
    if kind.name == "coreset":
        return select_coreset(view)
    if kind.name == "cal":
        return select_cal(view, kind.cal_k)
    return select_random(view, rng)
