"""Deterministic demo corpora shaped like the NLBSE code-comment datasets.

Real challenge files are not bundled; these generators produce seeded
stand-ins with the same category schemas, train-split sizes of the same
magnitude, and similarly skewed positive-label ratios, so the pipeline can
be exercised and demonstrated offline. Texts are formulaic code-comment
sentences (mostly 10-35 tokens) assembled from small slot vocabularies.
"""

from __future__ import annotations

import random

from .corpus import CategorySchema, Dataset, LabeledComment

# 80% train splits at the published corpus sizes.
TRAIN_SIZES = {"java": 5276, "python": 1326, "pharo": 886}

# Stand-in positive-label marginals, skewed like the real corpora
# (one dominant category per language, one rare one).
CATEGORY_RATIOS: dict[str, dict[str, float]] = {
    "java": {"summary": 0.47, "ownership": 0.07, "expand": 0.15, "usage": 0.31,
             "pointer": 0.20, "deprecation": 0.05, "rational": 0.13},
    "python": {"usage": 0.31, "parameters": 0.32, "developmentnotes": 0.22,
               "expand": 0.26, "summary": 0.43},
    "pharo": {"keyimplementationpoints": 0.17, "example": 0.44,
              "responsibilities": 0.36, "intent": 0.24, "keymessages": 0.16,
              "collaborators": 0.06},
}

_NOUNS = ["value", "values", "result", "results", "index", "list", "buffer",
          "stream", "node", "cache", "key", "map", "handle", "token", "lock",
          "queue", "record", "field", "flag", "state", "entry", "entries"]
_ADJS = ["given", "current", "new", "internal", "default", "cached", "shared",
         "empty", "valid", "active", "pending", "original"]
_VERBS = ["returns", "computes", "updates", "creates", "removes", "checks",
          "loads", "stores", "resets", "copies", "builds", "clears"]
_NAMES = ["builder", "parser", "reader", "writer", "manager", "helper",
          "adapter", "monitor", "scheduler", "resolver", "iterator", "visitor"]

_BODIES = [
    "it {verb} the {adj} {noun} of the {noun} and {verb} the {adj} {noun}",
    "the {noun} is read from the {adj} {noun} before the {noun} is updated",
    "when the {noun} is {adj} the {name} {verb} a new {noun} for the caller",
    "the {adj} {noun} holds the {noun} that the {name} {verb} on each pass",
    "callers must not modify the {noun} while the {name} {verb} the {noun}",
    "if the {noun} is empty the {name} {verb} the {adj} {noun} instead",
    "the {name} keeps a {adj} {noun} so repeated calls reuse the same {noun}",
    "each {noun} maps to the {adj} {noun} produced by the {name}",
    "note that the {noun} may be {adj} when the {name} has not started yet",
    "the answer depends on the {adj} {noun} stored in the {noun}",
]

_LEADS = {
    "summary": ["{verb} the {adj} {noun} of this {name} .",
                "a {adj} {name} for the {noun} of each {noun} ."],
    "usage": ["use the {name} to access the {adj} {noun} .",
              "call this before reading the {noun} from the {name} ."],
    "expand": ["in more detail the {name} tracks every {adj} {noun} .",
               "specifically the {noun} is split into {adj} {noun} first ."],
    "ownership": ["maintained by the {name} team .",
                  "author of record is the {name} group ."],
    "pointer": ["see the {name} class for the {adj} {noun} .",
                "refer to the {name} documentation for the {noun} format ."],
    "deprecation": ["deprecated , use the {adj} {name} instead .",
                    "this {name} is obsolete and will be removed ."],
    "rational": ["chosen because the {adj} {noun} is cheaper to {verb} .",
                 "this design avoids a {adj} {noun} in the {name} ."],
    "parameters": ["the first argument names the {adj} {noun} to {verb} .",
                   "takes a {noun} and an optional {adj} {noun} ."],
    "developmentnotes": ["todo : the {noun} should become a {adj} {noun} .",
                         "fixme : the {name} still leaks the {adj} {noun} ."],
    "keyimplementationpoints": ["internally the {name} {verb} a {adj} {noun} .",
                                "the core loop {verb} the {noun} in place ."],
    "example": ["for example the {name} {verb} the {adj} {noun} .",
                "example : create a {name} then {verb} the {noun} ."],
    "responsibilities": ["this {name} is responsible for the {adj} {noun} .",
                         "i represent the {adj} {noun} of a {noun} ."],
    "intent": ["the intent is to keep the {noun} {adj} at all times .",
               "meant to hide the {adj} {noun} from callers ."],
    "keymessages": ["the main message {verb} the {adj} {noun} .",
                    "send this message to {verb} the {noun} ."],
    "collaborators": ["works together with the {name} and the {name} .",
                      "collaborates with the {name} that owns the {noun} ."],
}


def _fill(template: str, rng: random.Random) -> str:
    out = []
    for word in template.split():
        if word == "{noun}":
            out.append(rng.choice(_NOUNS))
        elif word == "{adj}":
            out.append(rng.choice(_ADJS))
        elif word == "{verb}":
            out.append(rng.choice(_VERBS))
        elif word == "{name}":
            out.append(rng.choice(_NAMES))
        else:
            out.append(word)
    return " ".join(out)


def _labels(categories, ratios, rng: random.Random) -> tuple[int, ...]:
    bits = [1 if rng.random() < ratios[c] else 0 for c in categories]
    if not any(bits):
        pick = rng.choices(range(len(categories)),
                           weights=[ratios[c] for c in categories])[0]
        bits[pick] = 1
    return tuple(bits)


def _text(categories, bits, rng: random.Random) -> str:
    primary = rng.choice([c for c, bit in zip(categories, bits) if bit])
    parts = [_fill(rng.choice(_LEADS[primary]), rng)]
    target = max(6, min(40, int(rng.gauss(20, 7))))
    while len(" ".join(parts).split()) < target:
        parts.append(_fill(rng.choice(_BODIES), rng) + " .")
    return " ".join(parts)


def build_corpus(language: str, size: int | None = None, seed: int = 2026,
                 split: str = "train") -> Dataset:
    """Build a seeded demo corpus for one language schema."""
    schema = CategorySchema.challenge(language)
    ratios = CATEGORY_RATIOS[language]
    if size is None:
        size = TRAIN_SIZES[language]
    rng = random.Random(f"{language}/{split}/{seed}")
    items = []
    for i in range(size):
        bits = _labels(schema.categories, ratios, rng)
        items.append(LabeledComment(id=f"{language}_{split}_{i:05d}",
                                    language=language,
                                    text=_text(schema.categories, bits, rng),
                                    labels=bits))
    return Dataset(schema=schema, items=items, split=split)
