import random

import pytest

from synthpool import (CategorySchema, ClassStats, Dataset, DatasetError,
                       LabeledComment, SelectionPolicy, SyntheticSample,
                       class_stats, compute_targets, merge, select_augmentation,
                       select_oversampling)
from synthpool.scoring import ScoredPool

# ---------------------------------------------------------------------------
# Independent greedy-by-q reference: one pick at a time, recomputing
# eligibility from scratch, with a linear max scan instead of sorting.


def reference_oversampling(samples, categories, original_counts, targets, threshold):
    selected = []
    chosen = set()
    counts = dict(original_counts)
    for category in sorted(categories, key=lambda c: original_counts[c]):
        index = categories.index(category)
        while counts[category] < targets[category]:
            best = None
            for sample in samples:
                key = (sample.source_id, sample.variant_index)
                if key in chosen or sample.quality < threshold:
                    continue
                if not sample.labels[index]:
                    continue
                rank = (-sample.quality, sample.source_id, sample.variant_index)
                if best is None or rank < best[0]:
                    best = (rank, sample)
            if best is None:
                break
            sample = best[1]
            chosen.add((sample.source_id, sample.variant_index))
            selected.append(sample)
            for j, c in enumerate(categories):
                counts[c] += sample.labels[j]
    return selected


def _pool(samples, schema, n_items=None):
    by_source = {}
    for s in samples:
        by_source.setdefault(s.source_id, s.labels)
    items = [LabeledComment(id=sid, language=schema.language,
                            text=f"source text for {sid}", labels=labels)
             for sid, labels in by_source.items()]
    dataset = Dataset(schema=schema, items=items)
    return ScoredPool(samples=list(samples), source=dataset)


def _sample(sid, vi, labels, q):
    return SyntheticSample(source_id=sid, variant_index=vi, text=f"{sid}/{vi}",
                           similarity_to_source=0.5, labels=labels, quality=q)


# -- compute_targets ------------------------------------------------------------

def _stats(categories, positives, total):
    return ClassStats(categories=tuple(categories), positives=tuple(positives),
                      total=total)


def test_targets_majority_is_ceiling():
    targets = compute_targets(_stats(["A", "B"], [100, 20], 120), cap_multiplier=10)
    assert targets == {"A": 100, "B": 100}


def test_targets_cap_binds():
    targets = compute_targets(_stats(["A", "B"], [100, 5], 105), cap_multiplier=10)
    assert targets == {"A": 100, "B": 50}


def test_targets_single_category_noop():
    targets = compute_targets(_stats(["A"], [42], 42), cap_multiplier=10)
    assert targets == {"A": 42}


def test_targets_never_below_current():
    stats = _stats(["A", "B", "C"], [9, 3, 0], 12)
    targets = compute_targets(stats, cap_multiplier=2.5)
    for category, count in zip(stats.categories, stats.positives):
        assert targets[category] >= count
    assert targets == {"A": 9, "B": 7, "C": 0}


def test_targets_reject_cap_below_one():
    with pytest.raises(ValueError):
        compute_targets(_stats(["A"], [5], 5), cap_multiplier=0.5)


# -- select_oversampling ----------------------------------------------------------

@pytest.fixture
def two_cat_schema():
    return CategorySchema(language="java", categories=("A", "B"))


def test_oversampling_takes_highest_q(two_cat_schema):
    samples = [
        _sample("s1", 0, (0, 1), 0.99),
        _sample("s1", 1, (0, 1), 0.97),
        _sample("s1", 2, (0, 1), 0.96),
        _sample("s2", 0, (1, 0), 0.99),
    ]
    pool = _pool(samples, two_cat_schema)
    before = class_stats(pool.source)
    targets = {"A": before.positive_count("A"),
               "B": before.positive_count("B") + 2}
    policy = SelectionPolicy(strategy="oversampling", threshold=0.9, targets=targets)
    result = select_oversampling(pool, policy)
    assert [(s.source_id, s.variant_index) for s in result.selected] == \
        [("s1", 0), ("s1", 1)]
    assert result.added_positives == {"A": 0, "B": 2}


def test_oversampling_threshold_saturation(pharo_pool):
    stats = class_stats(pharo_pool.source)
    policy = SelectionPolicy(strategy="oversampling", threshold=1.0,
                             targets=compute_targets(stats))
    result = select_oversampling(pharo_pool, policy)
    assert result.selected == []
    assert result.stats_after == stats
    assert result.synthetic_fraction == 0.0


def test_oversampling_zero_threshold_fills_deficits(two_cat_schema):
    samples = [_sample("s1", i, (0, 1), 0.1 + 0.05 * i) for i in range(8)]
    samples.append(_sample("s2", 0, (1, 0), 0.5))
    pool = _pool(samples, two_cat_schema)
    before = class_stats(pool.source)
    targets = {"A": before.positive_count("A"), "B": before.positive_count("B") + 5}
    policy = SelectionPolicy(strategy="oversampling", threshold=0.0, targets=targets)
    result = select_oversampling(pool, policy)
    assert len(result.selected) == 5
    assert result.unmet_targets == {}


def test_oversampling_reports_unmet_targets(two_cat_schema):
    samples = [_sample("s1", 0, (0, 1), 0.99)]
    pool = _pool(samples, two_cat_schema)
    before = class_stats(pool.source)
    targets = {"A": before.positive_count("A"), "B": before.positive_count("B") + 4}
    policy = SelectionPolicy(strategy="oversampling", threshold=0.9, targets=targets)
    result = select_oversampling(pool, policy)
    assert len(result.selected) == 1
    assert result.unmet_targets == {"B": 3}


def test_oversampling_never_selects_fully_met_samples(pharo_pool):
    # No selected sample may have every positive category already at target
    # when it is picked; check the weaker post-hoc form on a real pool.
    stats = class_stats(pharo_pool.source)
    targets = compute_targets(stats)
    policy = SelectionPolicy(strategy="oversampling", threshold=0.8, targets=targets)
    result = select_oversampling(pharo_pool, policy)
    counts = dict(zip(stats.categories, stats.positives))
    for sample in result.selected:
        positive = [c for c, bit in zip(stats.categories, sample.labels) if bit]
        assert any(counts[c] < targets[c] for c in positive)
        for c in positive:
            counts[c] += 1


def test_oversampling_matches_reference_randomized(tiny_schema):
    rng = random.Random(4242)
    categories = tiny_schema.categories
    for trial in range(200):
        n_samples = rng.randint(0, 20)
        samples = []
        for i in range(n_samples):
            labels = tuple(rng.randint(0, 1) for _ in categories)
            if not any(labels):
                labels = (1,) + labels[1:]
            samples.append(_sample(f"s{rng.randint(0, 6)}", i, labels,
                                   round(rng.random(), 3)))
        if not samples:
            continue
        pool = _pool(samples, tiny_schema)
        before = class_stats(pool.source)
        original = dict(zip(before.categories, before.positives))
        targets = {c: original[c] + rng.randint(0, 6) for c in categories}
        threshold = round(rng.random(), 2)
        policy = SelectionPolicy(strategy="oversampling", threshold=threshold,
                                 targets=targets)
        result = select_oversampling(pool, policy)
        expected = reference_oversampling(samples, categories, original,
                                          targets, threshold)
        assert [(s.source_id, s.variant_index) for s in result.selected] == \
            [(s.source_id, s.variant_index) for s in expected], f"trial {trial}"


def test_oversampling_rejects_target_below_current(two_cat_schema):
    samples = [_sample("s1", 0, (1, 1), 0.9)]
    pool = _pool(samples, two_cat_schema)
    policy = SelectionPolicy(strategy="oversampling", threshold=0.5,
                             targets={"A": 0, "B": 5})
    with pytest.raises(ValueError, match="below"):
        select_oversampling(pool, policy)


def test_oversampling_requires_scored_pool(two_cat_schema):
    unscored = SyntheticSample(source_id="s1", variant_index=0, text="x",
                               similarity_to_source=0.5, labels=(1, 0))
    pool = _pool([unscored], two_cat_schema)
    policy = SelectionPolicy(strategy="oversampling", threshold=0.5,
                             targets={"A": 1, "B": 0})
    with pytest.raises(ValueError, match="quality"):
        select_oversampling(pool, policy)


# -- select_augmentation -----------------------------------------------------------

def test_augmentation_filter_semantics(two_cat_schema):
    samples = [_sample("s1", 0, (1, 0), 0.99), _sample("s1", 1, (1, 0), 0.9),
               _sample("s1", 2, (1, 0), 0.6)]
    pool = _pool(samples, two_cat_schema)
    policy = SelectionPolicy(strategy="augmentation", threshold=0.8)
    result = select_augmentation(pool, policy)
    assert len(result.selected) == 2
    assert all(s.quality >= 0.8 for s in result.selected)


def test_augmentation_empty_pool_empty_selection(two_cat_schema, tiny_schema):
    source = Dataset(schema=two_cat_schema,
                     items=[LabeledComment(id="s", language="java", text="x",
                                           labels=(1, 0))])
    pool = ScoredPool(samples=[], source=source)
    policy = SelectionPolicy(strategy="augmentation", threshold=0.5)
    result = select_augmentation(pool, policy)
    assert result.selected == []
    assert result.synthetic_fraction == 0.0


def test_augmentation_low_threshold_mostly_synthetic(pharo_pool):
    # At the lowest sweep threshold the merged dataset is dominated by
    # synthetic samples (> 80%), the depletion pattern the sweep exists to map.
    policy = SelectionPolicy(strategy="augmentation", threshold=0.70)
    result = select_augmentation(pharo_pool, policy)
    assert result.synthetic_fraction > 0.8


def test_augmentation_nested_and_monotone(pharo_pool):
    sweep = (0.70, 0.80, 0.90, 0.925, 0.95, 0.975)
    previous_keys = None
    previous_count = None
    for threshold in sweep:
        policy = SelectionPolicy(strategy="augmentation", threshold=threshold)
        result = select_augmentation(pharo_pool, policy)
        keys = {(s.source_id, s.variant_index) for s in result.selected}
        if previous_keys is not None:
            assert keys <= previous_keys
            assert len(keys) <= previous_count
        previous_keys, previous_count = keys, len(keys)


def test_policy_validation():
    with pytest.raises(ValueError):
        SelectionPolicy(strategy="oversampling", threshold=0.5)  # no targets
    with pytest.raises(ValueError):
        SelectionPolicy(strategy="augmentation", threshold=0.5, targets={"A": 1})
    with pytest.raises(ValueError):
        SelectionPolicy(strategy="augmentation", threshold=1.5)
    with pytest.raises(ValueError):
        SelectionPolicy(strategy="undersampling", threshold=0.5)


# -- merge ---------------------------------------------------------------------

def test_merge_order_and_ids(two_cat_schema):
    samples = [_sample("s2", 1, (0, 1), 0.9), _sample("s1", 0, (1, 0), 0.95),
               _sample("s2", 0, (0, 1), 0.85)]
    pool = _pool(samples, two_cat_schema)
    policy = SelectionPolicy(strategy="augmentation", threshold=0.8)
    result = select_augmentation(pool, policy)
    merged = merge(pool.source, result)
    assert len(merged) == len(pool.source.items) + 3
    original_ids = [i.id for i in pool.source.items]
    assert [i.id for i in merged.items[:len(original_ids)]] == original_ids
    assert [i.id for i in merged.items[len(original_ids):]] == \
        ["s1#0", "s2#0", "s2#1"]


def test_merge_empty_selection_is_identity(two_cat_schema, pharo_pool):
    stats = class_stats(pharo_pool.source)
    policy = SelectionPolicy(strategy="augmentation", threshold=1.0)
    result = select_augmentation(pharo_pool, policy)
    merged = merge(pharo_pool.source, result)
    assert merged.items == pharo_pool.source.items


def test_merge_id_collision(two_cat_schema):
    source = Dataset(schema=two_cat_schema,
                     items=[LabeledComment(id="s1#0", language="java", text="x",
                                           labels=(1, 0)),
                            LabeledComment(id="s1", language="java", text="y",
                                           labels=(1, 0))])
    sample = _sample("s1", 0, (1, 0), 0.9)
    pool = ScoredPool(samples=[sample], source=source)
    policy = SelectionPolicy(strategy="augmentation", threshold=0.5)
    result = select_augmentation(pool, policy)
    with pytest.raises(DatasetError, match="collides"):
        merge(source, result)


def test_merge_stats_match_result_stats(pharo_pool):
    stats = class_stats(pharo_pool.source)
    policy = SelectionPolicy(strategy="oversampling", threshold=0.85,
                             targets=compute_targets(stats))
    result = select_oversampling(pharo_pool, policy)
    merged = merge(pharo_pool.source, result)
    assert class_stats(merged) == result.stats_after


def test_balance_direction_on_fixture(pharo_pool):
    # Oversampling raises the minimum per-category positive ratio.
    stats = class_stats(pharo_pool.source)
    policy = SelectionPolicy(strategy="oversampling", threshold=0.90,
                             targets=compute_targets(stats))
    result = select_oversampling(pharo_pool, policy)
    assert min(result.stats_after.ratios) > min(stats.ratios)
