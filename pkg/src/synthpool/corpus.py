"""Loading, validation, statistics, and serialization of multi-label comment datasets.

Datasets are CSV (header ``id,text,<cat1>,...,<catN>``) or JSONL (keys
``id``, ``text``, ``labels``), UTF-8 throughout. Text is stored verbatim:
downstream generation and diversity scoring depend on surface form.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

LANGUAGES = ("java", "python", "pharo")
SPLITS = ("train", "test")
FORMATS = ("csv", "jsonl")

# Category schemas of the challenge corpora: 7 for java, 5 for python, 6 for pharo.
CHALLENGE_CATEGORIES: dict[str, tuple[str, ...]] = {
    "java": ("summary", "ownership", "expand", "usage", "pointer", "deprecation", "rational"),
    "python": ("usage", "parameters", "developmentnotes", "expand", "summary"),
    "pharo": ("keyimplementationpoints", "example", "responsibilities", "intent",
              "keymessages", "collaborators"),
}


class DatasetError(ValueError):
    """Raised for malformed records, schema mismatches, or invalid datasets."""


@dataclass(frozen=True)
class CategorySchema:
    """Ordered category names for one corpus language; defines label-vector width."""

    language: str
    categories: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.language not in LANGUAGES:
            raise DatasetError(f"unknown language {self.language!r}, expected one of {LANGUAGES}")
        if not self.categories:
            raise DatasetError("schema needs at least one category")
        if len(set(self.categories)) != len(self.categories):
            raise DatasetError("category names must be unique within a schema")

    @property
    def width(self) -> int:
        return len(self.categories)

    @classmethod
    def challenge(cls, language: str) -> "CategorySchema":
        """The challenge schema for a language (java=7, python=5, pharo=6 categories)."""
        if language not in CHALLENGE_CATEGORIES:
            raise DatasetError(f"no challenge schema for language {language!r}")
        return cls(language=language, categories=CHALLENGE_CATEGORIES[language])


@dataclass(frozen=True)
class LabeledComment:
    """One source observation: a comment text with its multi-label bit-vector."""

    id: str
    language: str
    text: str
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.id:
            raise DatasetError("empty id")
        if not self.text.strip():
            raise DatasetError(f"id {self.id!r}: text empty after whitespace trimming")
        if any(bit not in (0, 1) for bit in self.labels):
            raise DatasetError(f"id {self.id!r}: labels must be 0/1 bits")
        if not any(self.labels):
            raise DatasetError(f"id {self.id!r}: all-zero label vector")


@dataclass
class Dataset:
    """An ordered collection of labeled comments sharing one schema."""

    schema: CategorySchema
    items: list[LabeledComment]
    split: str = "train"

    def __post_init__(self) -> None:
        if self.split not in SPLITS:
            raise DatasetError(f"unknown split {self.split!r}, expected one of {SPLITS}")
        for item in self.items:
            if item.language != self.schema.language:
                raise DatasetError(f"id {item.id!r}: language {item.language!r} does not match "
                                   f"schema language {self.schema.language!r}")
            if len(item.labels) != self.schema.width:
                raise DatasetError(f"id {item.id!r}: label width {len(item.labels)} does not "
                                   f"match schema width {self.schema.width}")

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class ClassStats:
    """Per-category positive counts and ratios over a dataset."""

    categories: tuple[str, ...]
    positives: tuple[int, ...]
    total: int

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(count / self.total for count in self.positives)

    def positive_count(self, category: str) -> int:
        return self.positives[self.categories.index(category)]

    def positive_ratio(self, category: str) -> float:
        return self.positive_count(category) / self.total

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "positives": dict(zip(self.categories, self.positives)),
            "ratios": dict(zip(self.categories, self.ratios)),
        }


def class_stats(dataset: Dataset) -> ClassStats:
    """Count positive labels per category; ratios are count/total exactly."""
    if not dataset.items:
        raise DatasetError("empty dataset")
    counts = [0] * dataset.schema.width
    for item in dataset.items:
        for i, bit in enumerate(item.labels):
            counts[i] += bit
    return ClassStats(categories=dataset.schema.categories,
                      positives=tuple(counts), total=len(dataset.items))


def _parse_bit(value, where: str) -> int:
    if isinstance(value, bool):
        raise DatasetError(f"{where}: label must be 0 or 1, got {value!r}")
    if isinstance(value, int):
        if value in (0, 1):
            return value
        raise DatasetError(f"{where}: label must be 0 or 1, got {value!r}")
    if isinstance(value, str) and value.strip() in ("0", "1"):
        return int(value.strip())
    raise DatasetError(f"{where}: label must be 0 or 1, got {value!r}")


def _record(raw_id, raw_text, raw_labels, language: str, where: str) -> LabeledComment:
    if not isinstance(raw_id, str) or not raw_id:
        raise DatasetError(f"{where}: missing or empty id")
    if not isinstance(raw_text, str):
        raise DatasetError(f"{where}: text must be a string")
    bits = tuple(_parse_bit(v, where) for v in raw_labels)
    try:
        return LabeledComment(id=raw_id, language=language, text=raw_text, labels=bits)
    except DatasetError as exc:
        raise DatasetError(f"{where}: {exc}") from exc


def load_dataset(path: str | Path, format: str, schema: CategorySchema,
                 split: str = "train") -> Dataset:
    """Load a dataset from ``path``, validating every record against the schema.

    Any record violating an invariant (all-zero labels, duplicate id, wrong
    label width, bad 0/1 value) aborts the load with the offending row number;
    nothing is silently repaired.
    """
    path = Path(path)
    if format not in FORMATS:
        raise DatasetError(f"unknown format {format!r}, expected one of {FORMATS}")
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")

    items: list[LabeledComment] = []
    seen: set[str] = set()

    def add(item: LabeledComment, where: str) -> None:
        if item.id in seen:
            raise DatasetError(f"{where}: duplicate id {item.id!r}")
        seen.add(item.id)
        items.append(item)

    if format == "csv":
        expected_header = ["id", "text", *schema.categories]
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise DatasetError(f"{path}: empty file, expected header row") from None
            if header != expected_header:
                raise DatasetError(f"{path}: header {header!r} does not match schema "
                                   f"{expected_header!r}")
            for row_number, row in enumerate(reader, start=2):
                where = f"{path}:{row_number}"
                if len(row) != 2 + schema.width:
                    raise DatasetError(f"{where}: expected {2 + schema.width} fields, "
                                       f"got {len(row)}")
                add(_record(row[0], row[1], row[2:], schema.language, where), where)
    else:
        with path.open("r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                where = f"{path}:{line_number}"
                try:
                    raw = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DatasetError(f"{where}: invalid JSON: {exc.msg}") from exc
                if not isinstance(raw, dict):
                    raise DatasetError(f"{where}: expected a JSON object")
                missing = {"id", "text", "labels"} - raw.keys()
                if missing:
                    raise DatasetError(f"{where}: missing keys: {', '.join(sorted(missing))}")
                labels = raw["labels"]
                if not isinstance(labels, list) or len(labels) != schema.width:
                    raise DatasetError(f"{where}: labels must be a list of length "
                                       f"{schema.width}")
                add(_record(raw["id"], raw["text"], labels, schema.language, where), where)

    return Dataset(schema=schema, items=items, split=split)


def write_dataset(dataset: Dataset, path: str | Path, format: str) -> None:
    """Write a dataset so that ``load_dataset`` reproduces it item-for-item."""
    path = Path(path)
    if format not in FORMATS:
        raise DatasetError(f"unknown format {format!r}, expected one of {FORMATS}")
    if format == "csv":
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["id", "text", *dataset.schema.categories])
            for item in dataset.items:
                writer.writerow([item.id, item.text, *item.labels])
    else:
        with path.open("w", encoding="utf-8") as handle:
            for item in dataset.items:
                record = {"id": item.id, "text": item.text, "labels": list(item.labels)}
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
