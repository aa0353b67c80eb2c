"""Mask-and-replace augmentation with an MLM backend.

Masks a ratio of the non-special positions, predicts each masked position
with the backend (dropout off, explicit mask tokens, one forward pass), and
samples replacements from the truncated top-k of the predicted distribution.
Unmasked positions are never touched, so the Hamming distance between input
and output token ids is bounded by the number of masked positions.
"""

from __future__ import annotations

import math
import numpy as np

from ..backends.base import MLMBackend
from ..errors import ConfigError, EmptyText
from ..records import AugmentedExample, LabeledExample

DEFAULT_TOP_K = 10


def _sample_replacement(probs: np.ndarray, banned: set[int], top_k: int,
                        argmax: bool, rng: np.random.Generator) -> int:
    probs = probs.copy()
    probs[sorted(banned)] = 0.0
    if probs.sum() <= 0:
        raise EmptyText("no non-special candidate tokens with positive probability")
    if argmax:
        return int(probs.argmax())
    k = min(top_k, int((probs > 0).sum()))
    top = np.sort(np.argpartition(probs, -k)[-k:])  # canonical candidate order
    weights = probs[top] / probs[top].sum()
    return int(rng.choice(top, p=weights))


def _decode_parts(backend: MLMBackend, enc, new_ids: np.ndarray):
    content = ~enc.special_mask
    if enc.segment_ids.max() == 0:
        return backend.decode(new_ids[content])
    part_a = new_ids[content & (enc.segment_ids == 0)]
    part_b = new_ids[content & (enc.segment_ids == 1)]
    return (backend.decode(part_a), backend.decode(part_b))


def mlm_replace_augment(ex: LabeledExample, mask_ratio: float, seed: int,
                        backend: MLMBackend,
                        top_k: int = DEFAULT_TOP_K,
                        argmax: bool = False) -> AugmentedExample:
    """Replace ceil(mask_ratio * L_non_special) tokens with MLM predictions."""
    if not (0.0 < mask_ratio < 1.0):
        raise ConfigError(f"mask_ratio must lie in (0, 1), got {mask_ratio}")
    if top_k < 1:
        raise ConfigError(f"top_k must be >= 1, got {top_k}")
    enc = backend.encode(ex.text)
    maskable = np.flatnonzero(~enc.special_mask)
    if maskable.size == 0:
        raise EmptyText("no maskable (non-special) position in the input")
    n_masked = math.ceil(mask_ratio * maskable.size)
    rng = np.random.default_rng(seed)
    positions = rng.choice(maskable, size=n_masked, replace=False)

    masked_ids = enc.token_ids.copy()
    masked_ids[positions] = backend.mask_token_id
    dists = backend.smooth_encoded(enc.with_token_ids(masked_ids), seed, dropout=False)

    banned = backend.special_token_ids()
    new_ids = enc.token_ids.copy()
    for pos in sorted(int(p) for p in positions):
        new_ids[pos] = _sample_replacement(dists.rows[pos], banned, top_k, argmax, rng)

    return AugmentedExample(
        base=ex,
        augmented_text=_decode_parts(backend, enc, new_ids),
        augmenter_name="mlm_replace",
        seed=seed,
    )
