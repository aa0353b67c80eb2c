"""Pretrained MLM backend on top of Hugging Face transformers.

Loading is lazy and fully optional: environments without the transformers
package or without a staged checkpoint raise BackendUnavailable instead of
failing at import. Dropout draws are seeded through a forked RNG scope so
smoothing never perturbs the global torch RNG stream used by training.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np
import torch

from ..errors import BackendUnavailable, EmptyInput, SequenceTooLong
from ..repr_core import EmbeddingMatrix
from .base import BackendDescriptor, EncodedText, ForwardResult, MLMBackend, TextLike


class PretrainedBackend(MLMBackend):
    """Wraps an AutoModelForMaskedLM checkpoint (e.g. a BERT base model).

    The MLM prediction head of the checkpoint produces the logits that are
    softmaxed into smoothed rows, mirroring how the method is run on a real
    pretrained encoder; the word-embedding table feeds the mixing path.
    """

    def __init__(self, checkpoint: str,
                 max_seq_len: int = 128,
                 dropout_active: bool = True,
                 dropout_override: Optional[float] = None,
                 temperature: float = 1.0,
                 keep_specials_onehot: bool = True,
                 local_files_only: bool = True):
        try:
            from transformers import AutoModelForMaskedLM, AutoTokenizer
        except ImportError as exc:
            raise BackendUnavailable(
                "the 'transformers' package is required for the pretrained backend"
            ) from exc
        try:
            self.hf_tokenizer = AutoTokenizer.from_pretrained(
                checkpoint, local_files_only=local_files_only)
            self.model = AutoModelForMaskedLM.from_pretrained(
                checkpoint, local_files_only=local_files_only)
        except Exception as exc:
            raise BackendUnavailable(f"cannot load checkpoint {checkpoint!r}: {exc}") from exc
        self.model.eval()
        if dropout_override is not None:
            for module in self.model.modules():
                if isinstance(module, torch.nn.Dropout):
                    module.p = float(dropout_override)
        embeddings = self.model.get_input_embeddings().weight
        vocab_size = len(self.hf_tokenizer)
        if embeddings.shape[0] != vocab_size:
            raise BackendUnavailable(
                f"embedding rows {embeddings.shape[0]} != tokenizer vocab {vocab_size}"
            )
        super().__init__(
            BackendDescriptor(
                name=checkpoint,
                vocab_size=vocab_size,
                embed_size=int(embeddings.shape[1]),
                max_seq_len=max_seq_len,
                dropout_active=dropout_active,
                temperature=temperature,
            ),
            keep_specials_onehot=keep_specials_onehot,
        )

    @property
    def mask_token_id(self) -> int:
        mask_id = self.hf_tokenizer.mask_token_id
        if mask_id is None:
            raise BackendUnavailable("tokenizer declares no mask token")
        return int(mask_id)

    def special_token_ids(self) -> set[int]:
        return set(int(i) for i in self.hf_tokenizer.all_special_ids)

    def decode(self, ids: Iterable[int], skip_specials: bool = True) -> str:
        return self.hf_tokenizer.decode(list(ids), skip_special_tokens=skip_specials)

    def encode(self, text: TextLike) -> EncodedText:
        if isinstance(text, str):
            args, stored = (text,), text
        else:
            parts = tuple(text)
            if len(parts) != 2:
                raise EmptyInput(f"expected a sentence or a pair, got {len(parts)} parts")
            args, stored = parts, parts
        if any(not part.strip() for part in args):
            raise EmptyInput("text tokenizes to zero content tokens")
        encoding = self.hf_tokenizer(*args, return_special_tokens_mask=True)
        ids = encoding["input_ids"]
        if len(ids) > self.descriptor.max_seq_len:
            raise SequenceTooLong(
                f"{len(ids)} tokens exceed max_seq_len {self.descriptor.max_seq_len}"
            )
        segments = encoding.get("token_type_ids") or [0] * len(ids)
        return EncodedText(
            token_ids=np.asarray(ids, dtype=np.int64),
            position_ids=np.arange(len(ids), dtype=np.int64),
            segment_ids=np.asarray(segments, dtype=np.int64),
            special_mask=np.asarray(encoding["special_tokens_mask"], dtype=bool),
            original_text=stored,
        )

    def _forward(self, enc: EncodedText, seed: int, dropout: bool) -> ForwardResult:
        self._count_forward()
        inputs = {
            "input_ids": torch.from_numpy(enc.token_ids[None, :]),
            "token_type_ids": torch.from_numpy(enc.segment_ids[None, :]),
            "position_ids": torch.from_numpy(enc.position_ids[None, :]),
        }
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(int(seed) & 0x7FFF_FFFF_FFFF_FFFF)
            self.model.train(dropout)
            try:
                with torch.no_grad():
                    out = self.model(**inputs, output_hidden_states=True)
            finally:
                self.model.eval()
        return ForwardResult(
            hidden=out.hidden_states[-1][0].numpy(),
            logits=out.logits[0].numpy(),
        )

    def embedding_matrix(self) -> EmbeddingMatrix:
        table = self.model.get_input_embeddings().weight.detach().numpy().copy()
        return EmbeddingMatrix(table)
