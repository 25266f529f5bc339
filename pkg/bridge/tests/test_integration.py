"""The generation/scoring pipeline runs against this service unchanged."""

import sys
from pathlib import Path

import pytest

synthpool = pytest.importorskip("synthpool")

from synthpool import GenerationConfig, write_dataset
from synthpool.pipeline import config_from_mapping, read_pool, run
from synthpool.toycorpus import build_corpus

CORPUS = Path(__file__).parent / "data" / "corpus.jsonl"


def _endpoint(corpus_path):
    return (f"{sys.executable} -m fillserve.cli serve --provider count "
            f"--corpus {corpus_path} --format jsonl")


def test_pipeline_against_service(tmp_path):
    dataset = build_corpus("python", size=15, seed=8)
    data_path = tmp_path / "train.jsonl"
    write_dataset(dataset, data_path, "jsonl")
    config = config_from_mapping({}, {
        "dataset": str(data_path), "schema": "python", "seed": 2,
        "backend": "external", "endpoint": _endpoint(data_path),
        "strategy": "augmentation", "qsynt": 0.5,
        "out": str(tmp_path / "out"),
    })
    report = run(config)
    pool = read_pool(tmp_path / "out" / "scored_pool.jsonl")
    assert len(pool) == 10 * len(dataset)
    assert all(s.quality is not None and 0.0 <= s.quality <= 1.0 for s in pool)
    assert all(s.degraded or s.similarity_to_source <= 0.95 for s in pool)
    assert report["pool"]["size"] == 10 * len(dataset)


def test_external_backend_deterministic(tmp_path):
    dataset = build_corpus("python", size=8, seed=8)
    data_path = tmp_path / "train.jsonl"
    write_dataset(dataset, data_path, "jsonl")
    for out in ("a", "b"):
        run(config_from_mapping({}, {
            "dataset": str(data_path), "schema": "python", "seed": 4,
            "backend": "external", "endpoint": _endpoint(data_path),
            "strategy": "augmentation", "qsynt": 0.8,
            "out": str(tmp_path / out),
        }))
    assert (tmp_path / "a" / "scored_pool.jsonl").read_bytes() == \
        (tmp_path / "b" / "scored_pool.jsonl").read_bytes()
