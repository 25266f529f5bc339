"""Semantic-fidelity quality scores for synthetic samples.

A sample's quality q is the cosine similarity between its embedding and its
source sentence's embedding, clamped to [0, 1]. The embedding provider is
pluggable; the native provider is a deterministic character-3-gram hashed
TF-IDF vectorizer good enough for desk-scale verification.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

import numpy as np

from .corpus import Dataset
from .generation import BackendError, SyntheticSample

_NGRAM = 3
_DIM = 1024


class EmbedBackend(Protocol):
    """Maps a batch of texts to fixed-dimension vectors, deterministically."""

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


@dataclass
class ScoredPool:
    """The full synthetic pool with quality set on every sample."""

    samples: list[SyntheticSample]
    source: Dataset
    config_fingerprint: str = ""


def _cosine_clamped(a: np.ndarray, b: np.ndarray) -> float:
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise BackendError("embed backend returned a zero-norm vector")
    if np.array_equal(a, b):
        # cos(v, v) = 1 by definition; avoids float round-off on the norm.
        return 1.0
    cosine = float(a @ b) / (norm_a * norm_b)
    return min(1.0, max(0.0, cosine))


def quality_score(source_text: str, variant_text: str, backend: EmbedBackend) -> float:
    """Quality q in [0, 1] of a variant relative to its source; q=1 iff equal texts."""
    if not source_text or not variant_text:
        raise ValueError("quality_score requires non-empty texts")
    vectors = np.asarray(backend.embed([source_text, variant_text]), dtype=float)
    if vectors.ndim != 2 or vectors.shape[0] != 2:
        raise BackendError(f"embed backend returned shape {vectors.shape} for 2 texts")
    return _cosine_clamped(vectors[0], vectors[1])


def score_pool(samples: Sequence[SyntheticSample], source: Dataset,
               backend: EmbedBackend, batch_size: int = 256,
               config_fingerprint: str = "") -> ScoredPool:
    """Score every sample against its source sentence, preserving order."""
    by_id = {item.id: item for item in source.items}
    for index, sample in enumerate(samples):
        if sample.source_id not in by_id:
            raise BackendError(f"sample {index}: source id {sample.source_id!r} "
                               f"not in the source dataset")

    texts: list[str] = []
    positions: dict[str, int] = {}
    for sample in samples:
        for text in (by_id[sample.source_id].text, sample.text):
            if text not in positions:
                positions[text] = len(texts)
                texts.append(text)

    chunks = []
    for start in range(0, len(texts), batch_size):
        batch = texts[start:start + batch_size]
        try:
            vectors = np.asarray(backend.embed(batch), dtype=float)
        except BackendError:
            raise
        except Exception as exc:
            raise BackendError(f"embed backend failed on batch starting at text "
                               f"{start}: {exc}") from exc
        if vectors.ndim != 2 or vectors.shape[0] != len(batch):
            raise BackendError(f"embed backend returned shape {vectors.shape} "
                               f"for {len(batch)} texts")
        chunks.append(vectors)
    matrix = np.concatenate(chunks, axis=0) if chunks else np.zeros((0, 1))

    scored = []
    for index, sample in enumerate(samples):
        a = matrix[positions[by_id[sample.source_id].text]]
        b = matrix[positions[sample.text]]
        try:
            q = _cosine_clamped(a, b)
        except BackendError as exc:
            raise BackendError(f"sample {index} ({sample.source_id!r}): {exc}") from exc
        scored.append(replace(sample, quality=q))
    return ScoredPool(samples=scored, source=source, config_fingerprint=config_fingerprint)


def _char_ngrams(text: str) -> list[str]:
    # Single-space padding so every non-empty text has at least one 3-gram.
    padded = f" {text} "
    return [padded[i:i + _NGRAM] for i in range(len(padded) - _NGRAM + 1)]


def _bucket(ngram: str) -> int:
    return zlib.crc32(ngram.encode("utf-8")) % _DIM


class NativeEmbedBackend:
    """Character-3-gram hashed TF-IDF embedder, dimension 1024, L2-normalized.

    IDF is learned from a reference corpus with the smoothed formula
    ln((1+N)/(1+df)) + 1 per hash bucket. Hashing uses CRC-32, which is
    stable across platforms and processes.
    """

    def __init__(self, idf: np.ndarray) -> None:
        self._idf = idf

    @classmethod
    def build(cls, reference_texts: Sequence[str]) -> "NativeEmbedBackend":
        if not reference_texts:
            raise ValueError("reference corpus must be non-empty")
        df = np.zeros(_DIM, dtype=float)
        for text in reference_texts:
            for bucket in {_bucket(g) for g in _char_ngrams(text)}:
                df[bucket] += 1.0
        n_docs = len(reference_texts)
        idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
        return cls(idf=idf)

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), _DIM), dtype=float)
        for row, text in enumerate(texts):
            if not text:
                continue  # zero vector; scoring raises on zero norm
            counts: dict[int, int] = {}
            for gram in _char_ngrams(text):
                bucket = _bucket(gram)
                counts[bucket] = counts.get(bucket, 0) + 1
            for bucket, count in counts.items():
                out[row, bucket] = count * self._idf[bucket]
            norm = math.sqrt(float(out[row] @ out[row]))
            if norm > 0.0:
                out[row] /= norm
        return out
