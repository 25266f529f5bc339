"""Command-line interface: stats, generate, score, select, run, sweep.

Every subcommand accepts ``--config FILE`` (TOML) plus flat flag overrides
for each scalar field; flags beat the config file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline
from .corpus import DatasetError, class_stats, load_dataset
from .generation import BackendError, generate_corpus
from .pipeline import (ConfigError, PipelineConfig, StageError,
                       config_from_mapping, load_toml)
from .report import render_text, stats_fragment
from .scoring import score_pool


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--dataset", help="dataset file (CSV or JSONL)")
    parser.add_argument("--format", choices=["csv", "jsonl"], help="dataset format")
    parser.add_argument("--schema", choices=["java", "python", "pharo"],
                        help="challenge schema to validate against")
    parser.add_argument("--split", choices=["train", "test"])
    parser.add_argument("--backend", choices=["native", "external"])
    parser.add_argument("--endpoint", help="external backend: tcp://host:port or a command line")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--mask-ratio", dest="mask_ratio", type=float)
    parser.add_argument("--variants", type=int, help="variants per source sentence")
    parser.add_argument("--top-k", dest="top_k", type=int)
    parser.add_argument("--max-similarity", dest="max_similarity", type=float)
    parser.add_argument("--retries", type=int, help="diversity retry budget")
    parser.add_argument("--qsynt", type=float, help="minimum quality threshold")
    parser.add_argument("--strategy", choices=["oversampling", "augmentation"])
    parser.add_argument("--cap", type=float, help="per-category target cap multiplier")
    parser.add_argument("--out", help="output directory")


def _build_config(args: argparse.Namespace, **extra) -> PipelineConfig:
    raw = load_toml(args.config) if args.config else {}
    overrides = {key: getattr(args, key, None)
                 for key in ("dataset", "format", "schema", "split", "backend",
                             "endpoint", "seed", "mask_ratio", "variants", "top_k",
                             "max_similarity", "retries", "qsynt", "strategy",
                             "cap", "out")}
    overrides.update(extra)
    return config_from_mapping(raw, overrides)


def _fail(stage: str, message: str) -> int:
    print(f"error [{stage}]: {message}", file=sys.stderr)
    return 1


def cmd_stats(args) -> int:
    config = _build_config(args, qsynt=1.0)  # selection config unused here
    try:
        dataset = load_dataset(config.dataset_path, config.dataset_format,
                               config.schema, split=config.split)
        stats = class_stats(dataset)
    except DatasetError as exc:
        return _fail("load", str(exc))
    print(render_text({"source": stats_fragment(stats)}), end="")
    return 0


def cmd_generate(args) -> int:
    config = _build_config(args, qsynt=1.0)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    try:
        dataset = load_dataset(config.dataset_path, config.dataset_format,
                               config.schema, split=config.split)
    except DatasetError as exc:
        return _fail("load", str(exc))
    backends = pipeline._Backends(config, dataset)
    try:
        samples = generate_corpus(dataset, config.generation, backends.fill)
    except (BackendError, ValueError) as exc:
        return _fail("generate", str(exc))
    finally:
        backends.close()
    pool_path = config.out_dir / pipeline.POOL_FILE
    pipeline.write_pool(samples, pool_path)
    degraded = sum(1 for s in samples if s.degraded)
    print(f"wrote {len(samples)} samples ({degraded} degraded) to {pool_path}")
    return 0


def cmd_score(args) -> int:
    config = _build_config(args, qsynt=1.0)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    pool_path = Path(args.pool) if args.pool else config.out_dir / pipeline.POOL_FILE
    try:
        dataset = load_dataset(config.dataset_path, config.dataset_format,
                               config.schema, split=config.split)
        samples = pipeline.read_pool(pool_path)
    except DatasetError as exc:
        return _fail("load", str(exc))
    backends = pipeline._Backends(config, dataset)
    try:
        pool = score_pool(samples, dataset, backends.embed,
                          config_fingerprint=config.fingerprint())
    except BackendError as exc:
        return _fail("score", str(exc))
    finally:
        backends.close()
    scored_path = config.out_dir / pipeline.SCORED_POOL_FILE
    pipeline.write_pool(pool.samples, scored_path)
    print(f"wrote {len(pool.samples)} scored samples to {scored_path}")
    return 0


def cmd_select(args) -> int:
    config = _build_config(args)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    pool_path = Path(args.pool) if args.pool else config.out_dir / pipeline.SCORED_POOL_FILE
    try:
        report = pipeline.resume_from_pool(config, pool_path)
    except StageError as exc:
        return _fail(exc.stage, str(exc))
    except (ConfigError, DatasetError) as exc:
        return _fail("config", str(exc))
    print(render_text(report), end="")
    return 0


def _run_pipeline(args, sweep_default: bool) -> int:
    try:
        config = _build_config(args)
        if sweep_default and args.qsynt is None:
            config.sweep = config.sweep or pipeline.DEFAULT_SWEEP
            config.qsynt = None
        _ = config.thresholds
    except ConfigError as exc:
        return _fail("config", str(exc))
    try:
        report = pipeline.run(config)
    except StageError as exc:
        return _fail(exc.stage, str(exc))
    print(render_text(report), end="")
    print(f"artifacts written to {config.out_dir}")
    return 0


def cmd_run(args) -> int:
    return _run_pipeline(args, sweep_default=False)


def cmd_sweep(args) -> int:
    return _run_pipeline(args, sweep_default=True)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="synthpool",
        description="Quality-gated synthetic oversampling for multi-label text corpora")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, handler, doc in (
            ("stats", cmd_stats, "per-category positive counts and ratios"),
            ("generate", cmd_generate, "generate the synthetic pool"),
            ("score", cmd_score, "quality-score an existing pool"),
            ("select", cmd_select, "select and merge from a scored pool"),
            ("run", cmd_run, "full pipeline with one threshold or a configured sweep"),
            ("sweep", cmd_sweep, "full pipeline over the quality-threshold sweep")):
        p = sub.add_parser(name, help=doc)
        _add_common_flags(p)
        if name in ("score", "select"):
            p.add_argument("--pool", help="pool JSONL to read (defaults into --out)")
        p.set_defaults(handler=handler)

    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        return _fail("config", str(exc))


if __name__ == "__main__":
    sys.exit(main())
