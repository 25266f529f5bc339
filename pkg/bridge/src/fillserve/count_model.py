"""Deterministic corpus-statistics provider: no model weights, no downloads.

Fill candidates are corpus tokens ranked by interpolated left-bigram,
right-bigram, and unigram probabilities; scores are log-probabilities.
Embeddings are raw (unnormalized) hashed character-3-gram TF-IDF vectors;
normalization is the client's job.
"""

from __future__ import annotations

import csv
import json
import math
import re
import zlib
from pathlib import Path

_TOKEN_RE = re.compile(r"\w+|[^\w\s]+", re.UNICODE)
_EMBED_DIM = 512
_W_LEFT, _W_RIGHT, _W_UNIGRAM = 0.4, 0.4, 0.2


def read_texts(path: str | Path, format: str) -> list[str]:
    """Texts from a dataset file: the ``text`` key (JSONL) or column (CSV)."""
    path = Path(path)
    texts: list[str] = []
    if format == "jsonl":
        with path.open("r", encoding="utf-8") as handle:
            for number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                if "text" not in record:
                    raise ValueError(f"{path}:{number}: record has no 'text' key")
                texts.append(str(record["text"]))
    elif format == "csv":
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            if not reader.fieldnames or "text" not in reader.fieldnames:
                raise ValueError(f"{path}: no 'text' column")
            texts.extend(row["text"] for row in reader)
    else:
        raise ValueError(f"unknown format {format!r}")
    if not texts:
        raise ValueError(f"{path}: no texts found")
    return texts


class CountModel:
    """Fill + embed provider built from corpus token and 3-gram statistics."""

    def __init__(self, texts: list[str]) -> None:
        self._unigrams: dict[str, int] = {}
        self._after: dict[str, dict[str, int]] = {}
        self._before: dict[str, dict[str, int]] = {}
        self._total = 0
        for text in texts:
            tokens = _TOKEN_RE.findall(text)
            for i, token in enumerate(tokens):
                self._unigrams[token] = self._unigrams.get(token, 0) + 1
                self._total += 1
                if i + 1 < len(tokens):
                    nxt = tokens[i + 1]
                    self._after.setdefault(token, {})
                    self._after[token][nxt] = self._after[token].get(nxt, 0) + 1
                    self._before.setdefault(nxt, {})
                    self._before[nxt][token] = self._before[nxt].get(token, 0) + 1
        if not self._unigrams:
            raise ValueError("corpus produced an empty vocabulary")
        self._after_totals = {t: sum(c.values()) for t, c in self._after.items()}
        self._before_totals = {t: sum(c.values()) for t, c in self._before.items()}
        self._by_frequency = sorted(self._unigrams,
                                    key=lambda t: (-self._unigrams[t], t))
        # document frequency per hash bucket for the embed side
        self._df = [0] * _EMBED_DIM
        for text in texts:
            for bucket in {self._bucket(g) for g in self._grams(text)}:
                self._df[bucket] += 1
        self._n_docs = len(texts)

    @classmethod
    def from_corpus_file(cls, path: str | Path, format: str) -> "CountModel":
        return cls(read_texts(path, format))

    # -- fill ------------------------------------------------------------

    def _probability(self, token: str, left: str | None, right: str | None) -> float:
        p = _W_UNIGRAM * self._unigrams[token] / self._total
        if left is not None and left in self._after:
            p += _W_LEFT * self._after[left].get(token, 0) / self._after_totals[left]
        if right is not None and right in self._before:
            p += _W_RIGHT * self._before[right].get(token, 0) / self._before_totals[right]
        return p

    def fill(self, tokens, masked_positions, k) -> list[list[tuple[str, float]]]:
        results = []
        for position in masked_positions:
            left = tokens[position - 1] if position > 0 else None
            right = tokens[position + 1] if position + 1 < len(tokens) else None
            pool = set()
            if left is not None and left in self._after:
                pool.update(self._after[left])
            if right is not None and right in self._before:
                pool.update(self._before[right])
            extras = []
            for token in self._by_frequency:
                if len(extras) >= k:
                    break
                if token not in pool:
                    extras.append(token)
            scored = [(token, math.log(self._probability(token, left, right)))
                      for token in pool | set(extras)]
            scored.sort(key=lambda pair: (-pair[1], pair[0]))
            top = scored[:k]
            if len(top) < k:
                top = top + [top[-1]] * (k - len(top))
            results.append(top)
        return results

    # -- embed -----------------------------------------------------------

    @staticmethod
    def _grams(text: str) -> list[str]:
        padded = f" {text} "
        return [padded[i:i + 3] for i in range(len(padded) - 2)]

    @staticmethod
    def _bucket(gram: str) -> int:
        return zlib.crc32(gram.encode("utf-8")) % _EMBED_DIM

    def embed(self, texts) -> list[list[float]]:
        vectors = []
        for text in texts:
            vector = [0.0] * _EMBED_DIM
            if text:
                for gram in self._grams(text):
                    bucket = self._bucket(gram)
                    idf = math.log((1 + self._n_docs) / (1 + self._df[bucket])) + 1
                    vector[bucket] += idf
            vectors.append(vector)
        return vectors
