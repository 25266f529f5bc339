"""End-to-end orchestration: generate -> score -> select -> merge, plus reports.

Per-stage artifacts are written eagerly (a failed selection never discards a
finished generation pass) and stages are resumable from the scored-pool
JSONL. With the native backends, every written byte is a pure function of
(config, seed).
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import report as report_mod
from .bridge import BridgeConnection, ExternalEmbedBackend, ExternalFillBackend
from .corpus import (CategorySchema, Dataset, DatasetError, class_stats,
                     load_dataset, write_dataset)
from .generation import (GenerationConfig, NativeFillBackend, SyntheticSample,
                         generate_corpus)
from .scoring import NativeEmbedBackend, ScoredPool, score_pool
from .selection import SelectionPolicy, compute_targets, merge, select

DEFAULT_SWEEP = (0.70, 0.80, 0.90, 0.925, 0.95, 0.975)

POOL_FILE = "pool.jsonl"
SCORED_POOL_FILE = "scored_pool.jsonl"
REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"


class ConfigError(ValueError):
    """Invalid or inconsistent pipeline configuration."""


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for CLI reporting."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(message)
        self.stage = stage


@dataclass
class PipelineConfig:
    dataset_path: Path
    dataset_format: str
    schema: CategorySchema
    split: str = "train"
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    backend: str = "native"
    endpoint: str | None = None
    strategy: str = "oversampling"
    qsynt: float | None = None
    sweep: tuple[float, ...] | None = None
    cap_multiplier: float = 10.0
    out_dir: Path = Path("out")
    write_reports: bool = True

    def __post_init__(self) -> None:
        self.dataset_path = Path(self.dataset_path)
        self.out_dir = Path(self.out_dir)
        if self.backend not in ("native", "external"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.backend == "external" and not self.endpoint:
            raise ConfigError("external backend requires an endpoint")
        if self.qsynt is not None and not 0.0 <= self.qsynt <= 1.0:
            raise ConfigError(f"qsynt must be in [0, 1], got {self.qsynt}")
        if self.sweep is not None:
            if not self.sweep:
                raise ConfigError("sweep list is empty and no qsynt threshold is set")
            for value in self.sweep:
                if not 0.0 <= value <= 1.0:
                    raise ConfigError(f"sweep value {value} outside [0, 1]")

    @property
    def thresholds(self) -> tuple[float, ...]:
        if self.sweep is not None:
            return tuple(self.sweep)
        if self.qsynt is not None:
            return (self.qsynt,)
        raise ConfigError("no qsynt threshold and no sweep configured")

    def fingerprint(self) -> str:
        payload = {
            "generation": {f.name: getattr(self.generation, f.name)
                           for f in fields(self.generation)},
            "backend": self.backend,
            "language": self.schema.language,
            "categories": list(self.schema.categories),
            "split": self.split,
        }
        digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8"))
        return digest.hexdigest()[:16]


def load_toml(path: str | Path) -> dict:
    with Path(path).open("rb") as handle:
        return tomllib.load(handle)


def config_from_mapping(raw: dict, overrides: dict | None = None) -> PipelineConfig:
    """Build a PipelineConfig from a TOML mapping plus flat CLI overrides.

    Override keys mirror the CLI flags (``dataset``, ``schema``, ``backend``,
    ``endpoint``, ``seed``, ``qsynt``, ``strategy``, ``out`` and the
    generation scalars); a present key beats the TOML value.
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    dataset_section = dict(raw.get("dataset", {}))
    generation_section = dict(raw.get("generation", {}))
    backend_section = dict(raw.get("backend", {}))
    selection_section = dict(raw.get("selection", {}))
    output_section = dict(raw.get("output", {}))

    path = overrides.get("dataset", dataset_section.get("path"))
    if not path:
        raise ConfigError("no dataset path configured")
    fmt = overrides.get("format", dataset_section.get("format"))
    if not fmt:
        fmt = "jsonl" if str(path).endswith(".jsonl") else "csv"
    language = overrides.get("schema", dataset_section.get("schema"))
    if not language:
        raise ConfigError("no schema configured")
    categories = dataset_section.get("categories")
    schema = (CategorySchema(language=language, categories=tuple(categories))
              if categories else CategorySchema.challenge(language))

    gen_kwargs = {}
    for key, flag in (("mask_ratio", "mask_ratio"), ("variants_per_source", "variants"),
                      ("top_k", "top_k"), ("max_similarity", "max_similarity"),
                      ("retry_budget", "retries"), ("seed", "seed")):
        value = overrides.get(flag, generation_section.get(key))
        if value is not None:
            gen_kwargs[key] = value
    try:
        generation = GenerationConfig(**gen_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    sweep = selection_section.get("sweep")
    qsynt = overrides.get("qsynt", selection_section.get("qsynt"))
    if "qsynt" in overrides:
        sweep = None  # an explicit threshold beats a configured sweep
    if qsynt is None and sweep is None:
        sweep = list(DEFAULT_SWEEP)

    return PipelineConfig(
        dataset_path=Path(path),
        dataset_format=fmt,
        schema=schema,
        split=overrides.get("split", dataset_section.get("split", "train")),
        generation=generation,
        backend=overrides.get("backend", backend_section.get("kind", "native")),
        endpoint=overrides.get("endpoint", backend_section.get("endpoint")),
        strategy=overrides.get("strategy", selection_section.get("strategy", "oversampling")),
        qsynt=qsynt,
        sweep=tuple(sweep) if sweep is not None else None,
        cap_multiplier=overrides.get("cap", selection_section.get("cap_multiplier", 10.0)),
        out_dir=Path(overrides.get("out", output_section.get("dir", "out"))),
        write_reports=output_section.get("reports", True),
    )


def write_pool(samples, path: str | Path) -> None:
    """Scored-pool JSONL: one record per sample, insertion order preserved."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for sample in samples:
            handle.write(json.dumps({
                "source_id": sample.source_id,
                "variant_index": sample.variant_index,
                "text": sample.text,
                "similarity": sample.similarity_to_source,
                "q": sample.quality,
                "labels": list(sample.labels),
                "degraded": sample.degraded,
            }, ensure_ascii=False) + "\n")


def read_pool(path: str | Path) -> list[SyntheticSample]:
    samples = []
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{line_number}: invalid JSON: {exc.msg}") from exc
            samples.append(SyntheticSample(
                source_id=raw["source_id"],
                variant_index=int(raw["variant_index"]),
                text=raw["text"],
                similarity_to_source=float(raw["similarity"]),
                labels=tuple(int(b) for b in raw["labels"]),
                degraded=bool(raw["degraded"]),
                quality=None if raw.get("q") is None else float(raw["q"]),
            ))
    return samples


class _Backends:
    def __init__(self, config: PipelineConfig, dataset: Dataset) -> None:
        self._connection = None
        if config.backend == "native":
            self.fill = NativeFillBackend.train(dataset)
            self.embed = NativeEmbedBackend.build([item.text for item in dataset.items])
        else:
            self._connection = BridgeConnection.connect(config.endpoint)
            self.fill = ExternalFillBackend(self._connection)
            self.embed = ExternalEmbedBackend(self._connection)

    def close(self) -> None:
        if self._connection is not None:
            self._connection.close()


def _threshold_slug(value: float) -> str:
    return format(value, "g")


def dsyo_filename(strategy: str, threshold: float, fmt: str) -> str:
    return f"dsyo_{strategy}_q{_threshold_slug(threshold)}.{fmt}"


def run(config: PipelineConfig) -> dict:
    """Run the full pipeline and return the report mapping."""
    config.out_dir.mkdir(parents=True, exist_ok=True)

    try:
        dataset = load_dataset(config.dataset_path, config.dataset_format,
                               config.schema, split=config.split)
    except DatasetError as exc:
        raise StageError("load", str(exc)) from exc

    backends = _Backends(config, dataset)
    try:
        try:
            samples = generate_corpus(dataset, config.generation, backends.fill)
        except Exception as exc:
            raise StageError("generate", str(exc)) from exc
        write_pool(samples, config.out_dir / POOL_FILE)

        try:
            pool = score_pool(samples, dataset, backends.embed,
                              config_fingerprint=config.fingerprint())
        except Exception as exc:
            raise StageError("score", str(exc)) from exc
        write_pool(pool.samples, config.out_dir / SCORED_POOL_FILE)
    finally:
        backends.close()

    return select_and_report(config, dataset, pool)


def select_and_report(config: PipelineConfig, dataset: Dataset,
                      pool: ScoredPool) -> dict:
    """Selection stage over all configured thresholds, plus report emission."""
    stats = class_stats(dataset)
    selections = []
    for threshold in config.thresholds:
        try:
            if config.strategy == "oversampling":
                policy = SelectionPolicy(strategy="oversampling", threshold=threshold,
                                         targets=compute_targets(stats, config.cap_multiplier))
            else:
                policy = SelectionPolicy(strategy="augmentation", threshold=threshold)
            result = select(pool, policy)
            merged = merge(dataset, result)
            write_dataset(merged, config.out_dir /
                          dsyo_filename(config.strategy, threshold, config.dataset_format),
                          config.dataset_format)
        except Exception as exc:
            raise StageError("select", f"threshold {threshold:g}: {exc}") from exc
        selections.append(report_mod.selection_fragment(result))

    report = {
        "config_fingerprint": config.fingerprint(),
        "source": report_mod.stats_fragment(stats),
        "pool": report_mod.pool_report(pool.samples),
        "selections": selections,
    }
    if config.write_reports:
        try:
            (config.out_dir / REPORT_JSON).write_text(
                json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
            (config.out_dir / REPORT_TEXT).write_text(
                report_mod.render_text(report), encoding="utf-8")
        except OSError as exc:
            raise StageError("report", str(exc)) from exc
    return report


def resume_from_pool(config: PipelineConfig, pool_path: str | Path) -> dict:
    """Selection + report from an existing scored-pool file."""
    try:
        dataset = load_dataset(config.dataset_path, config.dataset_format,
                               config.schema, split=config.split)
    except DatasetError as exc:
        raise StageError("load", str(exc)) from exc
    samples = read_pool(pool_path)
    unscored = sum(1 for s in samples if s.quality is None)
    if unscored:
        raise StageError("select", f"pool file {pool_path} has {unscored} unscored "
                                   f"samples; run the score stage first")
    pool = ScoredPool(samples=samples, source=dataset,
                      config_fingerprint=config.fingerprint())
    return select_and_report(config, dataset, pool)
