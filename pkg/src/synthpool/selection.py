"""Selection of the high-quality synthetic subset and merge into the final dataset.

Two strategies: *oversampling* fills per-category positive-count targets from
the q >= QSYNT pool, rarest categories first; *augmentation* keeps every
sample with q >= QSYNT, no targets. Under-fulfilled targets are an expected
outcome at high thresholds (the eligible pool depletes), not an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .corpus import ClassStats, Dataset, DatasetError, LabeledComment, class_stats
from .generation import SyntheticSample

STRATEGIES = ("oversampling", "augmentation")


@dataclass(frozen=True)
class SelectionPolicy:
    strategy: str
    threshold: float  # minimum quality QSYNT
    targets: Mapping[str, int] | None = None

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}, "
                             f"expected one of {STRATEGIES}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.strategy == "oversampling" and self.targets is None:
            raise ValueError("oversampling requires per-category targets")
        if self.strategy == "augmentation" and self.targets is not None:
            raise ValueError("augmentation takes no targets")


@dataclass
class SelectionResult:
    """The selected subset plus the class statistics of the merged dataset."""

    selected: list[SyntheticSample]
    added_positives: dict[str, int]
    stats_before: ClassStats
    stats_after: ClassStats
    synthetic_fraction: float
    unmet_targets: dict[str, int] = field(default_factory=dict)
    threshold: float = 0.0
    strategy: str = ""


def compute_targets(stats: ClassStats, cap_multiplier: float = 10.0) -> dict[str, int]:
    """Per-category positive-count targets for oversampling.

    Each category is raised toward the majority category's positive count,
    but never beyond cap_multiplier times its own current count (so tiny
    categories are not swamped by synthetic data).
    """
    if cap_multiplier < 1.0:
        raise ValueError(f"cap_multiplier must be >= 1, got {cap_multiplier}")
    ceiling = max(stats.positives)
    targets = {}
    for category, count in zip(stats.categories, stats.positives):
        targets[category] = max(count, min(ceiling, int(cap_multiplier * count)))
    return targets


def _sample_key(sample: SyntheticSample) -> tuple[str, int]:
    return (sample.source_id, sample.variant_index)


def _check_scored(samples, schema_width: int) -> None:
    for index, sample in enumerate(samples):
        if sample.quality is None:
            raise ValueError(f"sample {index} ({sample.source_id!r}) has no quality score")
        if len(sample.labels) != schema_width:
            raise ValueError(f"sample {index} ({sample.source_id!r}) label width "
                             f"{len(sample.labels)} does not match schema")


def _result(selected: list[SyntheticSample], before: ClassStats,
            policy: SelectionPolicy, unmet: dict[str, int]) -> SelectionResult:
    added = {category: 0 for category in before.categories}
    for sample in selected:
        for category, bit in zip(before.categories, sample.labels):
            added[category] += bit
    total_after = before.total + len(selected)
    after = ClassStats(categories=before.categories,
                       positives=tuple(before.positives[i] + added[c]
                                       for i, c in enumerate(before.categories)),
                       total=total_after)
    return SelectionResult(selected=selected, added_positives=added,
                           stats_before=before, stats_after=after,
                           synthetic_fraction=len(selected) / total_after,
                           unmet_targets=unmet, threshold=policy.threshold,
                           strategy=policy.strategy)


def select_oversampling(pool, policy: SelectionPolicy) -> SelectionResult:
    """Greedy class-balancing selection from the q >= QSYNT pool.

    Categories are processed in ascending current-positive-count order so the
    scarcest classes get first pick. Within a category, eligible samples are
    taken in descending quality, ties broken by (source id, variant index).
    A multi-label sample counts toward every category it is positive for, so
    a category's deficit reflects samples already selected for earlier ones.
    """
    if policy.strategy != "oversampling":
        raise ValueError("policy strategy must be 'oversampling'")
    before = class_stats(pool.source)
    _check_scored(pool.samples, pool.source.schema.width)
    targets = dict(policy.targets)
    missing = set(before.categories) - targets.keys()
    if missing:
        raise ValueError(f"targets missing categories: {', '.join(sorted(missing))}")
    for i, category in enumerate(before.categories):
        if targets[category] < before.positives[i]:
            raise ValueError(f"target for {category!r} ({targets[category]}) is below "
                             f"the current positive count ({before.positives[i]})")

    order = sorted(range(len(before.categories)),
                   key=lambda i: before.positives[i])  # ties keep schema order
    eligible = [s for s in pool.samples if s.quality >= policy.threshold]
    selected: list[SyntheticSample] = []
    chosen: set[tuple[str, int]] = set()
    added = {category: 0 for category in before.categories}
    unmet: dict[str, int] = {}

    for index in order:
        category = before.categories[index]
        deficit = targets[category] - before.positives[index] - added[category]
        if deficit <= 0:
            continue
        ranked = sorted((s for s in eligible
                         if s.labels[index] and _sample_key(s) not in chosen),
                        key=lambda s: (-s.quality, s.source_id, s.variant_index))
        for sample in ranked:
            if deficit <= 0:
                break
            chosen.add(_sample_key(sample))
            selected.append(sample)
            for j, c in enumerate(before.categories):
                added[c] += sample.labels[j]
            deficit -= 1
        if deficit > 0:
            unmet[category] = deficit

    return _result(selected, before, policy, unmet)


def select_augmentation(pool, policy: SelectionPolicy) -> SelectionResult:
    """Keep every sample with q >= QSYNT; no targets, no caps."""
    if policy.strategy != "augmentation":
        raise ValueError("policy strategy must be 'augmentation'")
    before = class_stats(pool.source)
    _check_scored(pool.samples, pool.source.schema.width)
    selected = [s for s in pool.samples if s.quality >= policy.threshold]
    return _result(selected, before, policy, {})


def select(pool, policy: SelectionPolicy) -> SelectionResult:
    if policy.strategy == "oversampling":
        return select_oversampling(pool, policy)
    return select_augmentation(pool, policy)


def merge(dataset: Dataset, result: SelectionResult) -> Dataset:
    """Merged dataset: the originals, then the selected synthetic samples.

    Synthetic items get ids ``<source_id>#<variant_index>`` and are appended
    in (source id, variant index) order.
    """
    original_ids = {item.id for item in dataset.items}
    synthetic: list[LabeledComment] = []
    seen: set[str] = set()
    for sample in sorted(result.selected, key=_sample_key):
        new_id = f"{sample.source_id}#{sample.variant_index}"
        if new_id in original_ids:
            raise DatasetError(f"synthetic id {new_id!r} collides with an original id")
        if new_id in seen:
            raise DatasetError(f"duplicate synthetic id {new_id!r}")
        seen.add(new_id)
        synthetic.append(LabeledComment(id=new_id, language=dataset.schema.language,
                                        text=sample.text, labels=sample.labels))
    return Dataset(schema=dataset.schema, items=[*dataset.items, *synthetic],
                   split=dataset.split)
