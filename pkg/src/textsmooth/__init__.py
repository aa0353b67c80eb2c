"""textsmooth: soft-label text augmentation via MLM-smoothed token distributions."""

from .repr_core import (
    DEFAULT_LAMBDA,
    EmbeddingMatrix,
    OneHotSequence,
    SmoothedSequence,
    TokenDistribution,
    interpolate,
    mix_embeddings,
    mixup_pair,
    one_hot_encode,
)

__version__ = "0.1.0"
