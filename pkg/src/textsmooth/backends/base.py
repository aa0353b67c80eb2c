"""Backend abstraction for whole-sentence token smoothing.

A backend owns a tokenizer and a masked language model. Smoothing runs the
model once per request over the *unmasked* input, with dropout enabled so
stochastic unit dropping plays the role of explicit mask tokens, and returns
a per-position probability distribution over the vocabulary.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .. import repr_core
from ..errors import ShapeMismatch

TextLike = Union[str, Tuple[str, str]]


@dataclass(frozen=True)
class BackendDescriptor:
    """Static facts about a loaded backend."""

    name: str
    vocab_size: int
    embed_size: int
    max_seq_len: int
    dropout_active: bool = True
    temperature: float = 1.0

    def __post_init__(self):
        if min(self.vocab_size, self.embed_size, self.max_seq_len) <= 0:
            raise ShapeMismatch("vocab_size, embed_size and max_seq_len must be positive")
        if self.temperature <= 0:
            raise ShapeMismatch(f"temperature must be positive, got {self.temperature}")


@dataclass(frozen=True)
class EncodedText:
    """One tokenized example: ids plus positional/segment/special metadata."""

    token_ids: np.ndarray
    position_ids: np.ndarray
    segment_ids: np.ndarray
    special_mask: np.ndarray
    original_text: TextLike = ""

    def __post_init__(self):
        ids = np.asarray(self.token_ids, dtype=np.int64)
        pos = np.asarray(self.position_ids, dtype=np.int64)
        seg = np.asarray(self.segment_ids, dtype=np.int64)
        special = np.asarray(self.special_mask, dtype=bool)
        for name, arr in (("token_ids", ids), ("position_ids", pos),
                          ("segment_ids", seg), ("special_mask", special)):
            object.__setattr__(self, name, arr)
        lengths = {a.shape for a in (ids, pos, seg, special)}
        if len(lengths) != 1 or ids.ndim != 1 or ids.size == 0:
            raise ShapeMismatch(f"encoded sequences must be equal-length 1-D, got {lengths}")
        if np.any(pos < 0):
            raise ShapeMismatch("position ids must be non-negative")
        if not np.all(np.isin(seg, (0, 1))):
            raise ShapeMismatch("segment ids must be 0 or 1")

    @property
    def seq_len(self) -> int:
        return int(self.token_ids.shape[0])

    def with_token_ids(self, token_ids: Sequence[int]) -> "EncodedText":
        return EncodedText(
            token_ids=np.asarray(token_ids, dtype=np.int64),
            position_ids=self.position_ids,
            segment_ids=self.segment_ids,
            special_mask=self.special_mask,
            original_text=self.original_text,
        )


@dataclass(frozen=True)
class SmoothingRequest:
    """One smoothing call: which text, which dropout draw."""

    text: TextLike
    seed: int = 0
    resample: bool = True


class ForwardResult(NamedTuple):
    hidden: np.ndarray  # (seq_len, embed_size)
    logits: np.ndarray  # (seq_len, vocab_size)


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Numerically stable row-wise softmax in float64."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=-1, keepdims=True)


class MLMBackend(ABC):
    """Common smoothing pipeline over an abstract encoder.

    Subclasses implement tokenization and one model forward; everything
    above that (softmax, interpolation, special-token policy, the forward
    call counter) is shared. Backends are read-only after load, so
    concurrent smoothing calls are safe as long as each carries its own
    seed; the call counter is lock-protected.
    """

    def __init__(self, descriptor: BackendDescriptor, keep_specials_onehot: bool = True):
        self.descriptor = descriptor
        self.keep_specials_onehot = keep_specials_onehot
        self._forward_calls = 0
        self._counter_lock = threading.Lock()
        self._smooth_cache: dict = {}
        self._cache_lock = threading.Lock()

    # -- subclass surface --------------------------------------------------

    @abstractmethod
    def encode(self, text: TextLike) -> EncodedText:
        """Tokenize a sentence or sentence pair, adding delimiters."""

    @abstractmethod
    def _forward(self, enc: EncodedText, seed: int, dropout: bool) -> ForwardResult:
        """Run the encoder once; return last-layer hidden states and MLM logits."""

    @abstractmethod
    def embedding_matrix(self) -> repr_core.EmbeddingMatrix:
        """The backend's word-embedding table (tied input/output)."""

    # -- shared pipeline ----------------------------------------------------

    def _count_forward(self) -> None:
        with self._counter_lock:
            self._forward_calls += 1

    @property
    def forward_calls(self) -> int:
        """Number of encoder passes since load (test instrumentation)."""
        with self._counter_lock:
            return self._forward_calls

    def _resolve_dropout(self, dropout: Optional[bool]) -> bool:
        return self.descriptor.dropout_active if dropout is None else bool(dropout)

    def forward_hidden(self, enc: EncodedText, seed: int,
                       dropout: Optional[bool] = None) -> np.ndarray:
        """Last-layer hidden states, (seq_len, embed_size)."""
        return self._forward(enc, seed, self._resolve_dropout(dropout)).hidden

    def smooth_encoded(self, enc: EncodedText, seed: int,
                       dropout: Optional[bool] = None) -> repr_core.SmoothedSequence:
        """Per-position vocabulary distributions from one encoder pass.

        The input ids are fed through unchanged (no mask substitution);
        temperature rescales the logits before the softmax.
        """
        result = self._forward(enc, seed, self._resolve_dropout(dropout))
        rows = softmax_rows(result.logits / self.descriptor.temperature)
        return repr_core.SmoothedSequence.from_rows(
            rows, source_seed=seed, origin=f"{self.descriptor.name}.smooth"
        )

    def smooth(self, req: SmoothingRequest) -> repr_core.SmoothedSequence:
        """Smooth a request; resample=False reuses the first draw for a text.

        The default (resample=True) takes a fresh dropout draw per call, the
        per-epoch dynamic-masking behavior; the cache-once mode exists for
        speed and for ablating the resampling cadence.
        """
        if not req.resample:
            key = req.text if isinstance(req.text, str) else tuple(req.text)
            with self._cache_lock:
                cached = self._smooth_cache.get(key)
            if cached is not None:
                return cached
            result = self.smooth_encoded(self.encode(req.text), req.seed)
            with self._cache_lock:
                self._smooth_cache.setdefault(key, result)
            return result
        return self.smooth_encoded(self.encode(req.text), req.seed)

    def interpolate_encoded(self, enc: EncodedText, seed: int, lam: float,
                            dropout: Optional[bool] = None) -> repr_core.SmoothedSequence:
        """Smooth, then pull each row back toward its one-hot anchor."""
        lam = repr_core.check_lambda(lam)
        onehot = repr_core.one_hot_encode(enc.token_ids, self.descriptor.vocab_size)
        smoothed = self.smooth_encoded(enc, seed, dropout)
        return repr_core.interpolate(
            onehot, smoothed, lam,
            special_mask=enc.special_mask,
            keep_specials=self.keep_specials_onehot,
        )

    def smooth_and_interpolate(self, req: SmoothingRequest,
                               lam: float) -> repr_core.SmoothedSequence:
        return self.interpolate_encoded(self.encode(req.text), req.seed, lam)
