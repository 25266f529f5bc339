"""Masked-token variant generation with a character-similarity diversity gate.

Each source sentence yields exactly ``n`` synthetic variants: a fraction of
its tokens is masked, a fill backend proposes top-k candidates per masked
position, and one candidate per position is drawn at random. Variants too
similar to their source (or duplicating an earlier variant of the same
source) are rejected and regenerated with fresh masks; after the retry
budget is exhausted the most diverse rejected candidate is kept and flagged
``degraded`` so the n-per-source cardinality always holds.
"""

from __future__ import annotations

import difflib
import random
import re
from dataclasses import dataclass
from hashlib import blake2b
from typing import Protocol, Sequence

from .corpus import Dataset, LabeledComment


class BackendError(RuntimeError):
    """A fill or embed backend failed or returned an invalid response."""


_TOKEN_RE = re.compile(r"\w+|[^\w\s]+", re.UNICODE)

# Interpolation weights for the native backend's candidate scores.
_W_LEFT = 0.4
_W_RIGHT = 0.4
_W_UNIGRAM = 0.2


def tokenize(text: str) -> list[str]:
    """Split text into word and punctuation-run tokens (whitespace discarded)."""
    if not text.strip():
        raise ValueError("cannot tokenize empty text")
    return _TOKEN_RE.findall(text)


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens with single spaces; the fixed point of tokenize/detokenize."""
    return " ".join(tokens)


def diversity_ratio(a: str, b: str) -> float:
    """Ratcliff/Obershelp character similarity 2*M/(|a|+|b|) in [0, 1].

    Computed over the lexicographically ordered pair: the matcher's greedy
    decomposition is order-sensitive, and the gate needs a symmetric score.
    Equals 1.0 exactly iff the strings are equal.
    """
    if a > b:
        a, b = b, a
    return difflib.SequenceMatcher(None, a, b, autojunk=False).ratio()


@dataclass(frozen=True)
class GenerationConfig:
    """Knobs of the generation stage; defaults follow the reference setup."""

    mask_ratio: float = 0.25
    variants_per_source: int = 10
    top_k: int = 20
    max_similarity: float = 0.95
    retry_budget: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.mask_ratio <= 1.0:
            raise ValueError(f"mask_ratio must be in (0, 1], got {self.mask_ratio}")
        if self.variants_per_source < 1:
            raise ValueError("variants_per_source must be positive")
        if self.top_k < 1:
            raise ValueError("top_k must be positive")
        if not 0.0 <= self.max_similarity < 1.0:
            raise ValueError(f"max_similarity must be in [0, 1), got {self.max_similarity}")
        if self.retry_budget < 0:
            raise ValueError("retry_budget must be non-negative")


@dataclass(frozen=True)
class MaskedSequence:
    tokens: tuple[str, ...]
    masked_positions: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.masked_positions:
            raise ValueError("masked_positions must be non-empty")
        if list(self.masked_positions) != sorted(set(self.masked_positions)):
            raise ValueError("masked_positions must be strictly increasing")
        if self.masked_positions[-1] >= len(self.tokens) or self.masked_positions[0] < 0:
            raise ValueError("masked position out of range")


@dataclass(frozen=True)
class SyntheticSample:
    """One generated variant, carrying its source's labels."""

    source_id: str
    variant_index: int
    text: str
    similarity_to_source: float
    labels: tuple[int, ...]
    degraded: bool = False
    quality: float | None = None


class FillBackend(Protocol):
    """Provider of masked-token candidates.

    ``fill`` returns, for each masked position, exactly ``k`` (token, score)
    pairs in descending score order. Providers with fewer than ``k`` known
    candidates at a position pad by repeating the last one.
    """

    def fill(self, tokens: Sequence[str], masked_positions: Sequence[int],
             k: int) -> list[list[tuple[str, float]]]: ...


def mask_count(mask_ratio: float, length: int) -> int:
    """Number of positions to mask: max(1, round(ratio * length)), half-up."""
    return max(1, int(mask_ratio * length + 0.5))


def _sample_positions(rng: random.Random, length: int, count: int) -> list[int]:
    # Partial Fisher-Yates driven only by rng.random(), so streams stay
    # reproducible across Python versions.
    indices = list(range(length))
    for i in range(count):
        j = i + int(rng.random() * (length - i))
        indices[i], indices[j] = indices[j], indices[i]
    return sorted(indices[:count])


def mask_sequence(tokens: Sequence[str], mask_ratio: float,
                  rng: random.Random) -> MaskedSequence:
    """Choose mask positions uniformly without replacement."""
    if not tokens:
        raise ValueError("cannot mask an empty token sequence")
    count = mask_count(mask_ratio, len(tokens))
    positions = _sample_positions(rng, len(tokens), count)
    return MaskedSequence(tokens=tuple(tokens), masked_positions=tuple(positions))


def _choose(rng: random.Random, candidates: list[tuple[str, float]]) -> str:
    # Uniform draw over the distinct candidate tokens; padding repeats would
    # otherwise skew the draw toward the lowest-ranked candidate.
    distinct = list(dict.fromkeys(token for token, _ in candidates))
    return distinct[int(rng.random() * len(distinct))]


def generate_variants(source: LabeledComment, config: GenerationConfig,
                      backend: FillBackend, rng: random.Random) -> list[SyntheticSample]:
    """Produce exactly ``config.variants_per_source`` variants of one source."""
    tokens = tokenize(source.text)
    reference = detokenize(tokens)
    variants: list[SyntheticSample] = []
    seen_texts: set[str] = set()

    for variant_index in range(config.variants_per_source):
        best_rejected: tuple[float, str] | None = None
        accepted = None
        for _attempt in range(config.retry_budget + 1):
            masked = mask_sequence(tokens, config.mask_ratio, rng)
            try:
                candidates = backend.fill(tokens, masked.masked_positions, config.top_k)
            except Exception as exc:
                raise BackendError(f"fill backend failed for source "
                                   f"{source.id!r}: {exc}") from exc
            if len(candidates) != len(masked.masked_positions):
                raise BackendError(f"fill backend returned {len(candidates)} candidate "
                                   f"lists for {len(masked.masked_positions)} positions "
                                   f"(source {source.id!r})")
            new_tokens = list(tokens)
            for position, position_candidates in zip(masked.masked_positions, candidates):
                if not position_candidates:
                    raise BackendError(f"fill backend returned no candidates at position "
                                       f"{position} (source {source.id!r})")
                new_tokens[position] = _choose(rng, position_candidates)
            text = detokenize(new_tokens)
            similarity = diversity_ratio(text, reference)
            if similarity <= config.max_similarity and text not in seen_texts:
                accepted = SyntheticSample(source_id=source.id, variant_index=variant_index,
                                           text=text, similarity_to_source=similarity,
                                           labels=source.labels)
                break
            if best_rejected is None or similarity < best_rejected[0]:
                best_rejected = (similarity, text)
        if accepted is None:
            # Retry budget exhausted: keep the most diverse rejected candidate
            # so the per-source cardinality still holds.
            similarity, text = best_rejected
            accepted = SyntheticSample(source_id=source.id, variant_index=variant_index,
                                       text=text, similarity_to_source=similarity,
                                       labels=source.labels, degraded=True)
        seen_texts.add(accepted.text)
        variants.append(accepted)
    return variants


def source_rng(seed: int, source_id: str) -> random.Random:
    """Per-source random stream keyed by (seed, source id).

    Streams are independent of iteration order, so fanning generation out
    across workers cannot change the output.
    """
    digest = blake2b(f"{seed}\x1f{source_id}".encode("utf-8"), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def generate_corpus(dataset: Dataset, config: GenerationConfig,
                    backend: FillBackend) -> list[SyntheticSample]:
    """Generate variants for every item: exactly n * |dataset| samples.

    Output order is source order x variant index. Backend failures are
    aggregated and reported with their source ids.
    """
    if not dataset.items:
        raise ValueError("cannot generate from an empty dataset")
    samples: list[SyntheticSample] = []
    failures: list[str] = []
    for item in dataset.items:
        rng = source_rng(config.seed, item.id)
        try:
            samples.extend(generate_variants(item, config, backend, rng))
        except BackendError as exc:
            failures.append(f"{item.id}: {exc}")
    if failures:
        raise BackendError(f"fill backend failed for {len(failures)} source(s): "
                           + "; ".join(failures[:5])
                           + ("; ..." if len(failures) > 5 else ""))
    return samples


class NativeFillBackend:
    """Deterministic fill model built from corpus token statistics.

    Candidates for a masked position are every corpus token, ranked by an
    interpolation of the left bigram frequency, the right bigram frequency,
    and the unigram frequency. At sequence boundaries the missing bigram
    term is dropped. The vocabulary is closed over the training corpus.

    Safe for concurrent queries: counts are frozen after training and the
    per-context memo only ever stores the same deterministic value for a
    key (padded_positions is a diagnostic and may drift under races).
    """

    def __init__(self) -> None:
        self._unigrams: dict[str, int] = {}
        self._followers: dict[str, dict[str, int]] = {}
        self._predecessors: dict[str, dict[str, int]] = {}
        self._total_tokens = 0
        self._unigram_rank: list[str] = []
        self._cache: dict[tuple[str | None, str | None, int], list[tuple[str, float]]] = {}
        self.padded_positions = 0  # positions whose candidate list needed padding

    @classmethod
    def train(cls, dataset: Dataset) -> "NativeFillBackend":
        if not dataset.items:
            raise ValueError("cannot train on an empty dataset")
        backend = cls()
        for item in dataset.items:
            tokens = tokenize(item.text)
            for i, token in enumerate(tokens):
                backend._unigrams[token] = backend._unigrams.get(token, 0) + 1
                backend._total_tokens += 1
                if i + 1 < len(tokens):
                    nxt = tokens[i + 1]
                    backend._followers.setdefault(token, {})
                    backend._followers[token][nxt] = backend._followers[token].get(nxt, 0) + 1
                    backend._predecessors.setdefault(nxt, {})
                    backend._predecessors[nxt][token] = backend._predecessors[nxt].get(token, 0) + 1
        backend._unigram_rank = sorted(backend._unigrams,
                                       key=lambda t: (-backend._unigrams[t], t))
        return backend

    def _score(self, token: str, left: str | None, right: str | None) -> float:
        score = _W_UNIGRAM * self._unigrams[token] / self._total_tokens
        if left is not None and left in self._followers:
            following = self._followers[left]
            score += _W_LEFT * following.get(token, 0) / sum(following.values())
        if right is not None and right in self._predecessors:
            preceding = self._predecessors[right]
            score += _W_RIGHT * preceding.get(token, 0) / sum(preceding.values())
        return score

    def _candidates(self, left: str | None, right: str | None,
                    k: int) -> list[tuple[str, float]]:
        key = (left, right, k)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        pool: set[str] = set()
        if left is not None and left in self._followers:
            pool.update(self._followers[left])
        if right is not None and right in self._predecessors:
            pool.update(self._predecessors[right])
        # Tokens outside the bigram pool score on unigram frequency alone, so
        # only the k most frequent of them can reach the top k overall.
        extras = []
        for token in self._unigram_rank:
            if len(extras) >= k:
                break
            if token not in pool:
                extras.append(token)
        scored = [(token, self._score(token, left, right)) for token in pool | set(extras)]
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        top = scored[:k]
        if len(top) < k:
            self.padded_positions += 1
            top = top + [top[-1]] * (k - len(top))
        self._cache[key] = top
        return top

    def fill(self, tokens: Sequence[str], masked_positions: Sequence[int],
             k: int) -> list[list[tuple[str, float]]]:
        results = []
        for position in masked_positions:
            left = tokens[position - 1] if position > 0 else None
            right = tokens[position + 1] if position + 1 < len(tokens) else None
            results.append(self._candidates(left, right, k))
        return results
