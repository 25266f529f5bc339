"""Quality-gated synthetic oversampling and augmentation for multi-label text corpora."""

from .corpus import (CategorySchema, ClassStats, Dataset, DatasetError,
                     LabeledComment, class_stats, load_dataset, write_dataset)
from .generation import (BackendError, FillBackend, GenerationConfig,
                         MaskedSequence, NativeFillBackend, SyntheticSample,
                         detokenize, diversity_ratio, generate_corpus,
                         generate_variants, mask_sequence, tokenize)
from .scoring import (EmbedBackend, NativeEmbedBackend, ScoredPool,
                      quality_score, score_pool)
from .selection import (SelectionPolicy, SelectionResult, compute_targets,
                        merge, select, select_augmentation, select_oversampling)

__version__ = "0.1.0"

__all__ = [
    "CategorySchema", "ClassStats", "Dataset", "DatasetError", "LabeledComment",
    "class_stats", "load_dataset", "write_dataset",
    "BackendError", "FillBackend", "GenerationConfig", "MaskedSequence",
    "NativeFillBackend", "SyntheticSample", "detokenize", "diversity_ratio",
    "generate_corpus", "generate_variants", "mask_sequence", "tokenize",
    "EmbedBackend", "NativeEmbedBackend", "ScoredPool", "quality_score", "score_pool",
    "SelectionPolicy", "SelectionResult", "compute_targets", "merge", "select",
    "select_augmentation", "select_oversampling",
    "__version__",
]
