"""Pretrained word vectors and the feature encodings built from them.

Two encodings are produced per word: the classifier input (mean of the
vectors of its aggregated gloss tokens) and the strategy-space vector used
for distance-based selection (the word's own vector, falling back to the
gloss mean).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lexicon import Lexicon, NotInLexicon, ParseError, tokenize

log = logging.getLogger(__name__)


class EmbeddingStore:
    """Immutable token -> vector map with a fixed dimension."""

    def __init__(self, dim: int, vectors: dict[str, np.ndarray]):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        for token, vec in vectors.items():
            if vec.shape != (dim,):
                raise ValueError(
                    f"vector for {token!r} has shape {vec.shape}, expected ({dim},)"
                )
        self.dim = dim
        self._vectors = vectors

    def __contains__(self, token: str) -> bool:
        return token in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def get(self, token: str) -> np.ndarray | None:
        return self._vectors.get(token)

    def __getitem__(self, token: str) -> np.ndarray:
        return self._vectors[token]


def load_vectors(path: str | Path) -> EmbeddingStore:
    """Load a text vector file: header "count dim", then "token v1 ... vdim" rows.

    A row with the wrong number of values raises ParseError at its line; a
    repeated token keeps the last row and logs a warning.
    """
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("expected header 'count dim'", path, 1)
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise ParseError(f"non-integer header {header!r}", path, 1) from None
        if dim <= 0:
            raise ParseError(f"non-positive dimension {dim}", path, 1)
        for line_no, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise ParseError(
                    f"row for {token!r} has {len(values)} values, expected {dim}",
                    path,
                    line_no,
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise ParseError(f"non-numeric value in row for {token!r}", path, line_no) from None
            if token in vectors:
                log.warning("%s:%d: duplicate token %r, keeping last", path, line_no, token)
            vectors[token] = vec
    if len(vectors) != count:
        log.warning("%s: header count %d but parsed %d rows", path, count, len(vectors))
    return EmbeddingStore(dim, vectors)


def save_vectors(store: EmbeddingStore, path: str | Path) -> None:
    """Write the store back in the same text format (exact float round-trip)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(store)} {store.dim}\n")
        for token in store._vectors:
            row = " ".join(repr(v) for v in store[token].tolist())
            fh.write(f"{token} {row}\n")


@dataclass(frozen=True)
class WordEmbedding:
    """A feature vector plus the fraction of gloss tokens it was built from."""

    values: np.ndarray
    coverage: float


def embed_word(word: str, lexicon: Lexicon, store: EmbeddingStore) -> WordEmbedding:
    """Encode a word as the mean vector of its aggregated gloss tokens.

    Gloss tokens missing from the store are skipped. If none are found the
    word's own vector is used, or the zero vector as a last resort; both
    fallbacks carry coverage 0.
    """
    if word not in lexicon:
        raise NotInLexicon(word)
    tokens = tokenize(lexicon[word].gloss_text())
    found = [store[t] for t in tokens if t in store]
    if found:
        coverage = len(found) / len(tokens)
        values = np.mean(np.stack(found), axis=0)
    elif word in store:
        coverage = 0.0
        values = store[word].copy()
    else:
        coverage = 0.0
        values = np.zeros(store.dim)
    if coverage < 1.0:
        log.debug("gloss coverage for %r: %.2f (%d/%d tokens)",
                  word, coverage, len(found), len(tokens))
    return WordEmbedding(values=values, coverage=coverage)


def strategy_vector(word: str, lexicon: Lexicon, store: EmbeddingStore) -> np.ndarray:
    """Geometry-space vector: the word's own vector, else its gloss mean."""
    own = store.get(word)
    if own is not None:
        return own.copy()
    return embed_word(word, lexicon, store).values


def l2_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Euclidean distance between two equal-length vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    diff = x - y
    return float(np.sqrt(np.sum(diff * diff)))
