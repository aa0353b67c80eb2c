"""Representation algebra for soft token inputs.

One-hot sequences, per-position vocabulary distributions, convex
interpolation between the two, and distribution-to-embedding mixing.
All operations are pure functions; arrays are never mutated in place.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import IndexOutOfVocab, LambdaOutOfRange, ShapeMismatch

logger = logging.getLogger(__name__)

# Absolute drift allowed on a distribution's total mass before we repair it.
NORMALIZATION_TOL = 1e-6

DEFAULT_LAMBDA = 0.1


def _as_2d_float(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D (seq_len, vocab) matrix, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class TokenDistribution:
    """A probability vector over the vocabulary for one sequence position."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ShapeMismatch(f"probs must be a non-empty 1-D vector, got shape {probs.shape}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ShapeMismatch("probs must be finite and non-negative")
        if abs(float(probs.sum()) - 1.0) > NORMALIZATION_TOL:
            raise ShapeMismatch(f"probs sum to {probs.sum():.9f}, not 1 within {NORMALIZATION_TOL}")

    @property
    def vocab_size(self) -> int:
        return int(self.probs.shape[0])


@dataclass(frozen=True)
class OneHotSequence:
    """A sequence of one-hot rows, stored as indices plus implied density."""

    indices: np.ndarray
    vocab_size: int

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", indices)
        if indices.ndim != 1 or indices.size == 0:
            raise ShapeMismatch("a one-hot sequence needs at least one position")
        if self.vocab_size <= 0:
            raise ShapeMismatch(f"vocab_size must be positive, got {self.vocab_size}")
        bad = (indices < 0) | (indices >= self.vocab_size)
        if np.any(bad):
            raise IndexOutOfVocab(
                f"token ids {indices[bad].tolist()} outside [0, {self.vocab_size})"
            )

    @property
    def seq_len(self) -> int:
        return int(self.indices.shape[0])

    def dense(self) -> np.ndarray:
        """Materialize the full (seq_len, vocab_size) 0/1 matrix."""
        rows = np.zeros((self.seq_len, self.vocab_size), dtype=np.float64)
        rows[np.arange(self.seq_len), self.indices] = 1.0
        return rows

    def row(self, i: int) -> TokenDistribution:
        return TokenDistribution(self.dense()[i])


@dataclass(frozen=True)
class SmoothedSequence:
    """Per-position vocabulary distributions for one encoded text."""

    rows: np.ndarray
    source_seed: int = 0
    lambda_used: Optional[float] = None

    def __post_init__(self):
        rows = _as_2d_float(self.rows)
        object.__setattr__(self, "rows", rows)
        validate_distribution_rows(rows)

    @classmethod
    def from_rows(cls, rows, source_seed: int = 0,
                  lambda_used: Optional[float] = None,
                  origin: str = "") -> "SmoothedSequence":
        """Build a sequence, repairing (and logging) small mass drift.

        Rows whose total mass drifts from 1 by more than the tolerance are
        renormalized with a warning; negative or non-finite mass is a hard
        error. Silent repair would hide backend bugs, so the repair is loud.
        """
        rows = _as_2d_float(rows)
        if np.any(rows < 0) or not np.all(np.isfinite(rows)):
            raise ShapeMismatch(f"distribution rows must be finite and non-negative ({origin})")
        sums = rows.sum(axis=1)
        drifted = np.abs(sums - 1.0) > NORMALIZATION_TOL
        if np.any(drifted):
            logger.warning(
                "renormalizing %d/%d distribution rows (max drift %.3e) %s",
                int(drifted.sum()), rows.shape[0], float(np.abs(sums - 1.0).max()),
                f"from {origin}" if origin else "",
            )
            rows = rows / sums[:, None]
        return cls(rows=rows, source_seed=source_seed, lambda_used=lambda_used)

    @property
    def seq_len(self) -> int:
        return int(self.rows.shape[0])

    @property
    def vocab_size(self) -> int:
        return int(self.rows.shape[1])

    def row(self, i: int) -> TokenDistribution:
        return TokenDistribution(self.rows[i])


@dataclass(frozen=True)
class EmbeddingMatrix:
    """A (vocab_size, embed_size) table of word embeddings."""

    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", weights)
        if weights.ndim != 2 or weights.shape[0] <= 0 or weights.shape[1] <= 0:
            raise ShapeMismatch(f"embedding matrix must be 2-D with positive dims, got {weights.shape}")
        if not np.all(np.isfinite(weights)):
            raise ShapeMismatch("embedding matrix must be finite")

    @property
    def vocab_size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def embed_size(self) -> int:
        return int(self.weights.shape[1])


def validate_distribution_rows(rows: np.ndarray, tol: float = NORMALIZATION_TOL) -> None:
    """Raise unless every row is a probability distribution within ``tol``."""
    rows = _as_2d_float(rows)
    if np.any(rows < 0) or not np.all(np.isfinite(rows)):
        raise ShapeMismatch("distribution rows must be finite and non-negative")
    sums = rows.sum(axis=1)
    worst = float(np.abs(sums - 1.0).max())
    if worst > tol:
        raise ShapeMismatch(f"distribution rows drift from unit mass by {worst:.3e} > {tol}")


def check_lambda(lam: float) -> float:
    """Validate an interpolation weight; out-of-range is an error, not a clamp."""
    lam = float(lam)
    if not (0.0 <= lam <= 1.0) or not np.isfinite(lam):
        raise LambdaOutOfRange(f"interpolation weight must lie in [0, 1], got {lam}")
    return lam


def one_hot_encode(token_ids: Sequence[int], vocab_size: int) -> OneHotSequence:
    """Encode token ids as a one-hot sequence over a vocabulary."""
    return OneHotSequence(indices=np.asarray(list(token_ids), dtype=np.int64),
                          vocab_size=int(vocab_size))


def interpolate(onehot: OneHotSequence, smoothed: SmoothedSequence, lam: float,
                special_mask: Optional[Sequence[bool]] = None,
                keep_specials: bool = True) -> SmoothedSequence:
    """Convex combination ``lam * onehot + (1 - lam) * smoothed`` per row.

    Positions flagged in ``special_mask`` stay pure one-hot while the
    keep-specials policy is active; delimiter distributions carry no task
    content. Endpoints are exact: lam=1 returns the one-hot rows, lam=0
    returns the smoothed rows (at non-special positions).
    """
    lam = check_lambda(lam)
    if onehot.seq_len != smoothed.seq_len or onehot.vocab_size != smoothed.vocab_size:
        raise ShapeMismatch(
            f"one-hot {onehot.seq_len}x{onehot.vocab_size} vs "
            f"smoothed {smoothed.seq_len}x{smoothed.vocab_size}"
        )
    dense = onehot.dense()
    if lam == 1.0:
        mixed = dense
    elif lam == 0.0:
        mixed = smoothed.rows.copy()
    else:
        mixed = lam * dense + (1.0 - lam) * smoothed.rows
    if special_mask is not None:
        mask = np.asarray(special_mask, dtype=bool)
        if mask.shape != (onehot.seq_len,):
            raise ShapeMismatch(f"special_mask length {mask.shape} != seq_len {onehot.seq_len}")
        if keep_specials:
            mixed[mask] = dense[mask]
    return SmoothedSequence.from_rows(
        mixed, source_seed=smoothed.source_seed, lambda_used=lam, origin="interpolate"
    )


def mix_embeddings(dist_seq, emb):
    """Weighted sum of word embeddings under per-position distributions.

    Row i of the result is sum_v dist[i, v] * emb[v]; feeding one-hot rows
    reduces to a plain embedding lookup. Accepts the wrapper types from this
    module, numpy arrays, or torch tensors (the trainer routes its batched,
    differentiable path through here), and returns the matching array kind.
    """
    rows = dist_seq
    if isinstance(dist_seq, OneHotSequence):
        rows = dist_seq.dense()
    elif isinstance(dist_seq, SmoothedSequence):
        rows = dist_seq.rows
    weights = emb.weights if isinstance(emb, EmbeddingMatrix) else emb
    if rows.ndim < 2 or weights.ndim != 2:
        raise ShapeMismatch(
            f"need (..., vocab) distributions and a 2-D embedding table, "
            f"got {tuple(rows.shape)} and {tuple(weights.shape)}"
        )
    if rows.shape[-1] != weights.shape[0]:
        raise ShapeMismatch(
            f"vocab dim {rows.shape[-1]} does not match embedding rows {weights.shape[0]}"
        )
    return rows @ weights


def mixup_pair(x_i, x_j, y_i, y_j, lam: float):
    """Generic mixup of two feature-target pairs.

    Kept as a tested primitive: when both targets coincide the label is a
    fixed point for every lam, which is exactly the reduction that turns
    pairwise mixup into single-example interpolation against the one-hot row.
    """
    lam = check_lambda(lam)
    x_i, x_j = np.asarray(x_i, dtype=np.float64), np.asarray(x_j, dtype=np.float64)
    y_i, y_j = np.asarray(y_i, dtype=np.float64), np.asarray(y_j, dtype=np.float64)
    if x_i.shape != x_j.shape:
        raise ShapeMismatch(f"feature shapes differ: {x_i.shape} vs {x_j.shape}")
    if y_i.shape != y_j.shape:
        raise ShapeMismatch(f"target shapes differ: {y_i.shape} vs {y_j.shape}")
    return lam * x_i + (1.0 - lam) * x_j, lam * y_i + (1.0 - lam) * y_j
