import pytest

from synthpool import (CategorySchema, Dataset, GenerationConfig, LabeledComment,
                       NativeFillBackend, generate_corpus, score_pool)
from synthpool.scoring import NativeEmbedBackend
from synthpool.toycorpus import build_corpus


@pytest.fixture
def java_schema():
    return CategorySchema.challenge("java")


@pytest.fixture
def tiny_schema():
    return CategorySchema(language="python", categories=("alpha", "beta", "gamma"))


@pytest.fixture
def tiny_dataset(tiny_schema):
    texts = [
        "returns the cached value of the current entry",
        "use the parser to read the next record from the stream",
        "checks whether the given index is still valid",
        "builds a new buffer and copies the shared state into it",
    ]
    labels = [(1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1)]
    items = [LabeledComment(id=f"t{i}", language="python", text=t, labels=l)
             for i, (t, l) in enumerate(zip(texts, labels))]
    return Dataset(schema=tiny_schema, items=items)


@pytest.fixture(scope="session")
def pharo_split():
    return build_corpus("pharo")


@pytest.fixture(scope="session")
def pharo_pool(pharo_split):
    backend = NativeFillBackend.train(pharo_split)
    samples = generate_corpus(pharo_split, GenerationConfig(), backend)
    embedder = NativeEmbedBackend.build([item.text for item in pharo_split.items])
    return score_pool(samples, pharo_split, embedder)


@pytest.fixture(scope="session")
def hundred_split():
    return build_corpus("python", size=100, seed=7)
