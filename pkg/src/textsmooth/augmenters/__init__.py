from .compose import (
    ROUTE_PLAIN,
    ROUTE_SMOOTH,
    SmoothingStreamSpec,
    StreamItem,
    compose_with_smoothing,
    smoothing_stream,
)
from .eda import (
    EDA_OPS,
    EdaConfig,
    default_stopwords,
    default_synonym_table,
    eda_augment,
    load_stopwords,
    load_synonym_table,
)
from .external import import_external, write_augmented_tsv
from .mlm_replace import mlm_replace_augment

__all__ = [
    "ROUTE_PLAIN",
    "ROUTE_SMOOTH",
    "SmoothingStreamSpec",
    "StreamItem",
    "compose_with_smoothing",
    "smoothing_stream",
    "EDA_OPS",
    "EdaConfig",
    "default_stopwords",
    "default_synonym_table",
    "eda_augment",
    "load_stopwords",
    "load_synonym_table",
    "import_external",
    "write_augmented_tsv",
    "mlm_replace_augment",
]
