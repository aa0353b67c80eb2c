from .base import (
    BackendDescriptor,
    EncodedText,
    ForwardResult,
    MLMBackend,
    SmoothingRequest,
    softmax_rows,
)
from .config import CHECKPOINT_CACHE_ENV, build_backend, load_backend_config
from .micro import (
    MICRO_VOCAB,
    MicroBackend,
    MicroConfig,
    MicroEncoder,
    MicroTokenizer,
    init_micro_weights,
    zero_micro_weights,
)

__all__ = [
    "BackendDescriptor",
    "EncodedText",
    "ForwardResult",
    "MLMBackend",
    "SmoothingRequest",
    "softmax_rows",
    "CHECKPOINT_CACHE_ENV",
    "build_backend",
    "load_backend_config",
    "MICRO_VOCAB",
    "MicroBackend",
    "MicroConfig",
    "MicroEncoder",
    "MicroTokenizer",
    "init_micro_weights",
    "zero_micro_weights",
]
