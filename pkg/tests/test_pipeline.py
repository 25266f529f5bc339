import json

import pytest

from synthpool import write_dataset, load_dataset
from synthpool.pipeline import (ConfigError, DEFAULT_SWEEP, PipelineConfig,
                                StageError, config_from_mapping, dsyo_filename,
                                read_pool, resume_from_pool, run, write_pool)
from synthpool.report import pool_report, render_text
from synthpool.toycorpus import build_corpus
from synthpool.cli import main as cli_main


@pytest.fixture(scope="module")
def small_split(tmp_path_factory):
    dataset = build_corpus("python", size=40, seed=5)
    path = tmp_path_factory.mktemp("data") / "train.jsonl"
    write_dataset(dataset, path, "jsonl")
    return dataset, path


def _config(path, out, **kwargs):
    overrides = {"dataset": str(path), "schema": "python", "out": str(out),
                 "seed": 1, "strategy": "oversampling"}
    overrides.update(kwargs)
    return config_from_mapping({}, overrides)


# -- config --------------------------------------------------------------------

def test_config_defaults_to_paper_sweep(small_split, tmp_path):
    _, path = small_split
    config = _config(path, tmp_path)
    assert config.thresholds == DEFAULT_SWEEP


def test_config_qsynt_overrides_sweep(small_split, tmp_path):
    _, path = small_split
    config = _config(path, tmp_path, qsynt=0.8)
    assert config.thresholds == (0.8,)


def test_config_empty_sweep_rejected(small_split, tmp_path):
    _, path = small_split
    with pytest.raises(ConfigError, match="sweep"):
        config_from_mapping({"dataset": {"path": str(path), "schema": "python"},
                             "selection": {"sweep": []}},
                            {"out": str(tmp_path)})


def test_config_requires_dataset(tmp_path):
    with pytest.raises(ConfigError, match="dataset"):
        config_from_mapping({}, {"schema": "python", "out": str(tmp_path)})


def test_config_external_requires_endpoint(small_split, tmp_path):
    _, path = small_split
    with pytest.raises(ConfigError, match="endpoint"):
        _config(path, tmp_path, backend="external")


def test_config_toml_with_cli_override(small_split, tmp_path):
    _, path = small_split
    toml_path = tmp_path / "run.toml"
    toml_path.write_text(
        f'[dataset]\npath = "{path}"\nschema = "python"\n'
        '[generation]\nmask_ratio = 0.5\nseed = 3\n'
        '[selection]\nstrategy = "augmentation"\nqsynt = 0.7\n'
        f'[output]\ndir = "{tmp_path / "o"}"\n')
    from synthpool.pipeline import load_toml
    raw = load_toml(toml_path)
    config = config_from_mapping(raw, {"seed": 9})
    assert config.generation.mask_ratio == 0.5
    assert config.generation.seed == 9  # flag beats file
    assert config.strategy == "augmentation"
    assert config.thresholds == (0.7,)


def test_bad_generation_value_is_config_error(small_split, tmp_path):
    _, path = small_split
    with pytest.raises(ConfigError, match="mask_ratio"):
        _config(path, tmp_path, mask_ratio=1.5)


# -- pool file round-trip --------------------------------------------------------

def test_pool_file_round_trip(tmp_path, pharo_pool):
    path = tmp_path / "pool.jsonl"
    subset = pharo_pool.samples[:50]
    write_pool(subset, path)
    assert read_pool(path) == list(subset)
    record = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
    assert set(record) == {"source_id", "variant_index", "text", "similarity",
                           "q", "labels", "degraded"}


# -- full runs --------------------------------------------------------------------

def test_run_writes_all_artifacts(small_split, tmp_path):
    dataset, path = small_split
    config = _config(path, tmp_path / "out")
    report = run(config)
    out = tmp_path / "out"
    assert (out / "pool.jsonl").exists()
    assert (out / "scored_pool.jsonl").exists()
    for threshold in DEFAULT_SWEEP:
        assert (out / dsyo_filename("oversampling", threshold, "jsonl")).exists()
    assert (out / "report.json").exists()
    assert (out / "report.txt").exists()
    pool = read_pool(out / "scored_pool.jsonl")
    assert len(pool) == 10 * len(dataset)
    assert report["pool"]["size"] == 10 * len(dataset)
    assert len(report["selections"]) == len(DEFAULT_SWEEP)


def test_run_reports_monotone_fraction(small_split, tmp_path):
    _, path = small_split
    config = _config(path, tmp_path / "out")
    report = run(config)
    fractions = [s["synthetic_fraction"] for s in report["selections"]]
    assert fractions == sorted(fractions, reverse=True)


def test_run_deterministic_bytes(small_split, tmp_path):
    _, path = small_split
    report_a = run(_config(path, tmp_path / "a", seed=4))
    report_b = run(_config(path, tmp_path / "b", seed=4))
    for name in ("pool.jsonl", "scored_pool.jsonl", "report.json", "report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name
    assert report_a == report_b


def test_run_seed_changes_pool(small_split, tmp_path):
    _, path = small_split
    run(_config(path, tmp_path / "a", seed=4))
    run(_config(path, tmp_path / "b", seed=5))
    assert (tmp_path / "a" / "pool.jsonl").read_bytes() != \
        (tmp_path / "b" / "pool.jsonl").read_bytes()


def test_emitted_datasets_round_trip(small_split, tmp_path):
    dataset, path = small_split
    config = _config(path, tmp_path / "out", qsynt=0.8)
    run(config)
    merged_path = tmp_path / "out" / dsyo_filename("oversampling", 0.8, "jsonl")
    merged = load_dataset(merged_path, "jsonl", dataset.schema)
    copy = tmp_path / "copy.jsonl"
    write_dataset(merged, copy, "jsonl")
    assert load_dataset(copy, "jsonl", dataset.schema).items == merged.items
    assert merged_path.read_bytes() == copy.read_bytes()


def test_resume_from_scored_pool(small_split, tmp_path):
    _, path = small_split
    config = _config(path, tmp_path / "out", qsynt=0.8)
    full = run(config)
    resumed = resume_from_pool(config, tmp_path / "out" / "scored_pool.jsonl")
    assert resumed["selections"] == full["selections"]


def test_resume_rejects_unscored_pool(small_split, tmp_path):
    dataset, path = small_split
    config = _config(path, tmp_path / "out", qsynt=0.8)
    from synthpool import GenerationConfig, NativeFillBackend, generate_corpus
    samples = generate_corpus(dataset, GenerationConfig(seed=1),
                              NativeFillBackend.train(dataset))
    pool_path = tmp_path / "unscored.jsonl"
    write_pool(samples, pool_path)
    with pytest.raises(StageError, match="unscored"):
        resume_from_pool(config, pool_path)


def test_run_missing_dataset_is_stage_error(tmp_path):
    config = _config(tmp_path / "nope.jsonl", tmp_path / "out", qsynt=0.8)
    with pytest.raises(StageError) as excinfo:
        run(config)
    assert excinfo.value.stage == "load"


# -- reports -----------------------------------------------------------------------

def test_histogram_mass_conservation(pharo_pool):
    report = pool_report(pharo_pool.samples)
    assert sum(report["quality_histogram"]["counts"]) == len(pharo_pool.samples)
    assert sum(count for _, count in report["token_length_histogram"]) == \
        len(pharo_pool.samples)
    assert sum(e["count"] for e in report["length_quality"]) == \
        len(pharo_pool.samples)


def test_histogram_single_bin_for_constant_q(tiny_dataset):
    from synthpool import SyntheticSample
    samples = [SyntheticSample(source_id="t0", variant_index=i, text="same text",
                               similarity_to_source=0.5, labels=(1, 0, 0),
                               quality=1.0) for i in range(5)]
    report = pool_report(samples)
    counts = report["quality_histogram"]["counts"]
    assert counts[-1] == 5
    assert sum(counts) == 5


def test_render_text_contains_tables(pharo_pool):
    from synthpool.report import stats_fragment
    from synthpool import class_stats
    report = {"source": stats_fragment(class_stats(pharo_pool.source)),
              "pool": pool_report(pharo_pool.samples), "selections": []}
    text = render_text(report)
    assert "pool: 8860 samples" in text
    assert "q bin" in text
    assert "token length" in text


# -- CLI ----------------------------------------------------------------------------

def test_cli_stats(small_split, capsys):
    _, path = small_split
    code = cli_main(["stats", "--dataset", str(path), "--schema", "python"])
    assert code == 0
    out = capsys.readouterr().out
    assert "source dataset: 40 items" in out
    assert "usage" in out


def test_cli_run_single_threshold(small_split, tmp_path, capsys):
    _, path = small_split
    code = cli_main(["run", "--dataset", str(path), "--schema", "python",
                     "--qsynt", "0.8", "--strategy", "augmentation",
                     "--seed", "2", "--out", str(tmp_path / "cli_out")])
    assert code == 0
    assert (tmp_path / "cli_out" / "dsyo_augmentation_q0.8.jsonl").exists()


def test_cli_stage_pipeline(small_split, tmp_path, capsys):
    _, path = small_split
    out = str(tmp_path / "staged")
    common = ["--dataset", str(path), "--schema", "python", "--seed", "2",
              "--out", out]
    assert cli_main(["generate", *common]) == 0
    assert cli_main(["score", *common]) == 0
    assert cli_main(["select", *common, "--qsynt", "0.8",
                     "--strategy", "oversampling"]) == 0
    assert (tmp_path / "staged" / "dsyo_oversampling_q0.8.jsonl").exists()


def test_cli_missing_dataset_fails_with_stage_tag(tmp_path, capsys):
    code = cli_main(["run", "--dataset", str(tmp_path / "nope.csv"),
                     "--schema", "java", "--qsynt", "0.8",
                     "--out", str(tmp_path / "out")])
    assert code == 1
    assert "error [load]" in capsys.readouterr().err


def test_cli_sweep_defaults(small_split, tmp_path):
    _, path = small_split
    code = cli_main(["sweep", "--dataset", str(path), "--schema", "python",
                     "--strategy", "augmentation", "--seed", "2",
                     "--out", str(tmp_path / "sweep_out")])
    assert code == 0
    for threshold in DEFAULT_SWEEP:
        assert (tmp_path / "sweep_out" /
                dsyo_filename("augmentation", threshold, "jsonl")).exists()
