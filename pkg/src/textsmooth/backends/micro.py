"""Self-contained micro MLM backend for hermetic tests and experiments.

A 64-token vocabulary, a 2-layer / 2-head transformer encoder with tied
input/output embeddings, and fixed weights checked in as a tensor archive,
so every numeric property of the smoothing pipeline is testable without
downloading a checkpoint. Dropout is driven by an explicit generator per
call: the global torch RNG is never touched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from ..errors import BackendUnavailable, EmptyInput, SequenceTooLong
from ..repr_core import EmbeddingMatrix
from .archive import load_archive, save_archive
from .base import BackendDescriptor, EncodedText, ForwardResult, MLMBackend, TextLike

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"

MICRO_VOCAB: Tuple[str, ...] = (
    PAD, UNK, CLS, SEP, MASK,
    ".", ",", "?",
    "the", "a", "of", "this", "that", "is", "was", "it", "i", "my",
    "and", "not", "very", "so", "but",
    "what", "who", "how", "where", "which",
    "movie", "film", "shirt", "fruit", "quality", "story", "plot",
    "price", "service", "food", "time", "man", "woman",
    "good", "bad", "great", "terrible", "poor", "high", "low", "average",
    "fine", "nice", "boring", "favorite", "pear", "apple",
    "love", "hate", "like", "best", "worst", "funny", "dull", "fresh", "stale",
)

_TOKEN_RE = re.compile(r"[a-z']+|[^a-z\s]")

DEFAULT_ARCHIVE_NAME = "micro_mlm.tsa"
DEFAULT_WEIGHTS_SEED = 314159


@dataclass(frozen=True)
class MicroConfig:
    vocab_size: int = 64
    embed_size: int = 16
    num_layers: int = 2
    num_heads: int = 2
    ffn_size: int = 32
    max_seq_len: int = 32
    dropout_rate: float = 0.1
    layernorm_eps: float = 1e-12


class MicroTokenizer:
    """Lowercasing whitespace/punctuation tokenizer over a fixed word list."""

    def __init__(self, vocab: Sequence[str] = MICRO_VOCAB):
        self.vocab = tuple(vocab)
        self.token_to_id = {tok: i for i, tok in enumerate(self.vocab)}
        for special in (PAD, UNK, CLS, SEP, MASK):
            if special not in self.token_to_id:
                raise BackendUnavailable(f"tokenizer vocab is missing {special}")
        self.pad_id = self.token_to_id[PAD]
        self.unk_id = self.token_to_id[UNK]
        self.cls_id = self.token_to_id[CLS]
        self.sep_id = self.token_to_id[SEP]
        self.mask_id = self.token_to_id[MASK]
        self.special_ids = {self.pad_id, self.unk_id, self.cls_id, self.sep_id, self.mask_id}

    def tokenize(self, text: str) -> list[str]:
        return _TOKEN_RE.findall(text.lower())

    def tokens_to_ids(self, tokens: Iterable[str]) -> list[int]:
        return [self.token_to_id.get(tok, self.unk_id) for tok in tokens]

    def ids_to_tokens(self, ids: Iterable[int]) -> list[str]:
        return [self.vocab[i] for i in ids]

    def decode(self, ids: Iterable[int], skip_specials: bool = True) -> str:
        tokens = self.ids_to_tokens(ids)
        if skip_specials:
            tokens = [t for t in tokens if t not in (PAD, UNK, CLS, SEP, MASK)]
        return " ".join(tokens)


def seeded_dropout(x: torch.Tensor, p: float, training: bool,
                   generator: Optional[torch.Generator] = None) -> torch.Tensor:
    """Inverted dropout with an optional explicit generator."""
    if not training or p <= 0.0:
        return x
    noise = torch.rand(x.shape, generator=generator, dtype=x.dtype, device=x.device)
    keep = (noise >= p).to(x.dtype)
    return x * keep / (1.0 - p)


def _layer_norm(x: torch.Tensor, gamma: torch.Tensor, beta: torch.Tensor,
                eps: float) -> torch.Tensor:
    mean = x.mean(dim=-1, keepdim=True)
    var = x.var(dim=-1, unbiased=False, keepdim=True)
    return (x - mean) / torch.sqrt(var + eps) * gamma + beta


class MicroLayer(nn.Module):
    """One post-layernorm encoder block: multi-head self-attention + GELU FFN."""

    def __init__(self, config: MicroConfig):
        super().__init__()
        e, f = config.embed_size, config.ffn_size
        if e % config.num_heads != 0:
            raise BackendUnavailable(f"embed_size {e} not divisible by {config.num_heads} heads")
        self.num_heads = config.num_heads
        self.head_dim = e // config.num_heads
        self.dropout_rate = config.dropout_rate
        self.eps = config.layernorm_eps
        zeros, ones = torch.zeros, torch.ones
        self.wq = nn.Parameter(zeros(e, e))
        self.bq = nn.Parameter(zeros(e))
        self.wk = nn.Parameter(zeros(e, e))
        self.bk = nn.Parameter(zeros(e))
        self.wv = nn.Parameter(zeros(e, e))
        self.bv = nn.Parameter(zeros(e))
        self.wo = nn.Parameter(zeros(e, e))
        self.bo = nn.Parameter(zeros(e))
        self.attn_gamma = nn.Parameter(ones(e))
        self.attn_beta = nn.Parameter(zeros(e))
        self.w1 = nn.Parameter(zeros(e, f))
        self.b1 = nn.Parameter(zeros(f))
        self.w2 = nn.Parameter(zeros(f, e))
        self.b2 = nn.Parameter(zeros(e))
        self.ffn_gamma = nn.Parameter(ones(e))
        self.ffn_beta = nn.Parameter(zeros(e))

    def forward(self, x: torch.Tensor, attention_mask: Optional[torch.Tensor],
                dropout: bool, generator: Optional[torch.Generator]) -> torch.Tensor:
        batch, seq_len, e = x.shape
        heads, hd = self.num_heads, self.head_dim

        def split(t: torch.Tensor) -> torch.Tensor:
            return t.view(batch, seq_len, heads, hd).transpose(1, 2)

        q = split(x @ self.wq + self.bq)
        k = split(x @ self.wk + self.bk)
        v = split(x @ self.wv + self.bv)
        scores = q @ k.transpose(-1, -2) / (hd ** 0.5)
        if attention_mask is not None:
            # mask shape (batch, seq): 0 marks padding keys
            bias = (1.0 - attention_mask.to(x.dtype))[:, None, None, :] * -1e9
            scores = scores + bias
        attn = torch.softmax(scores, dim=-1)
        attn = seeded_dropout(attn, self.dropout_rate, dropout, generator)
        context = (attn @ v).transpose(1, 2).reshape(batch, seq_len, e)
        context = context @ self.wo + self.bo
        context = seeded_dropout(context, self.dropout_rate, dropout, generator)
        x = _layer_norm(x + context, self.attn_gamma, self.attn_beta, self.eps)

        ffn = torch.nn.functional.gelu(x @ self.w1 + self.b1) @ self.w2 + self.b2
        ffn = seeded_dropout(ffn, self.dropout_rate, dropout, generator)
        return _layer_norm(x + ffn, self.ffn_gamma, self.ffn_beta, self.eps)


class MicroEncoder(nn.Module):
    """Token + position + segment embeddings followed by encoder blocks.

    Shared between the frozen smoothing backend and the trainable
    classifier; the classifier feeds pre-mixed embeddings through
    ``inputs_embeds`` for the soft-distribution input path.
    """

    def __init__(self, config: MicroConfig):
        super().__init__()
        self.config = config
        v, e = config.vocab_size, config.embed_size
        self.word_embeddings = nn.Parameter(torch.zeros(v, e))
        self.position_embeddings = nn.Parameter(torch.zeros(config.max_seq_len, e))
        self.segment_embeddings = nn.Parameter(torch.zeros(2, e))
        self.emb_gamma = nn.Parameter(torch.ones(e))
        self.emb_beta = nn.Parameter(torch.zeros(e))
        self.layers = nn.ModuleList(MicroLayer(config) for _ in range(config.num_layers))

    def forward(self, input_ids: Optional[torch.Tensor] = None,
                inputs_embeds: Optional[torch.Tensor] = None,
                position_ids: Optional[torch.Tensor] = None,
                segment_ids: Optional[torch.Tensor] = None,
                attention_mask: Optional[torch.Tensor] = None,
                dropout: bool = False,
                generator: Optional[torch.Generator] = None) -> torch.Tensor:
        if (input_ids is None) == (inputs_embeds is None):
            raise BackendUnavailable("pass exactly one of input_ids / inputs_embeds")
        if input_ids is not None:
            inputs_embeds = self.word_embeddings[input_ids]
        batch, seq_len, _ = inputs_embeds.shape
        if seq_len > self.config.max_seq_len:
            raise SequenceTooLong(f"sequence length {seq_len} > {self.config.max_seq_len}")
        if position_ids is None:
            position_ids = torch.arange(seq_len).expand(batch, seq_len)
        if segment_ids is None:
            segment_ids = torch.zeros(batch, seq_len, dtype=torch.long)
        x = (inputs_embeds
             + self.position_embeddings[position_ids]
             + self.segment_embeddings[segment_ids])
        x = _layer_norm(x, self.emb_gamma, self.emb_beta, self.config.layernorm_eps)
        x = seeded_dropout(x, self.config.dropout_rate, dropout, generator)
        for layer in self.layers:
            x = layer(x, attention_mask, dropout, generator)
        return x


def init_micro_weights(config: MicroConfig = MicroConfig(),
                       seed: int = DEFAULT_WEIGHTS_SEED,
                       scale: float = 0.02) -> Dict[str, np.ndarray]:
    """Deterministic random init matching MicroEncoder's state dict."""
    rng = np.random.default_rng(seed)
    shapes = {name: tuple(param.shape)
              for name, param in MicroEncoder(config).state_dict().items()}
    weights: Dict[str, np.ndarray] = {}
    for name, shape in shapes.items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf.startswith(("b", "attn_beta", "ffn_beta")) or leaf in ("emb_beta",):
            weights[name] = np.zeros(shape, dtype=np.float32)
        elif leaf in ("emb_gamma", "attn_gamma", "ffn_gamma"):
            weights[name] = np.ones(shape, dtype=np.float32)
        else:
            weights[name] = rng.normal(0.0, scale, size=shape).astype(np.float32)
    return weights


def zero_micro_weights(config: MicroConfig = MicroConfig()) -> Dict[str, np.ndarray]:
    """All-zero weights (gammas included); maps every input to zero hidden."""
    return {name: np.zeros(tuple(param.shape), dtype=np.float32)
            for name, param in MicroEncoder(config).state_dict().items()}


def default_archive_path() -> Path:
    return Path(str(resources.files("textsmooth").joinpath("assets", DEFAULT_ARCHIVE_NAME)))


class MicroBackend(MLMBackend):
    """MLM backend over the micro encoder with tied output embeddings."""

    def __init__(self, weights: Optional[Dict[str, np.ndarray]] = None,
                 config: MicroConfig = MicroConfig(),
                 vocab: Optional[Sequence[str]] = None,
                 name: str = "micro",
                 dropout_active: bool = True,
                 temperature: float = 1.0,
                 keep_specials_onehot: bool = True):
        super().__init__(
            BackendDescriptor(
                name=name,
                vocab_size=config.vocab_size,
                embed_size=config.embed_size,
                max_seq_len=config.max_seq_len,
                dropout_active=dropout_active,
                temperature=temperature,
            ),
            keep_specials_onehot=keep_specials_onehot,
        )
        self.config = config
        self.encoder = MicroEncoder(config)
        if weights is None:
            weights = load_archive(default_archive_path())
        self.load_weights(weights)
        self.encoder.requires_grad_(False)
        if vocab is None and config.vocab_size == len(MICRO_VOCAB):
            vocab = MICRO_VOCAB
        self.tokenizer = MicroTokenizer(vocab) if vocab is not None else None

    # -- weights -------------------------------------------------------------

    def load_weights(self, weights: Dict[str, np.ndarray]) -> None:
        state = {name: torch.as_tensor(np.asarray(arr, dtype=np.float32))
                 for name, arr in weights.items()}
        self.encoder.load_state_dict(state)

    def export_weights(self) -> Dict[str, np.ndarray]:
        return {name: param.detach().numpy().copy()
                for name, param in self.encoder.state_dict().items()}

    @classmethod
    def from_archive(cls, path: Optional[str | Path] = None, **kwargs) -> "MicroBackend":
        return cls(weights=load_archive(path or default_archive_path()), **kwargs)

    @classmethod
    def zeros(cls, config: MicroConfig = MicroConfig(), **kwargs) -> "MicroBackend":
        return cls(weights=zero_micro_weights(config), config=config, **kwargs)

    # -- tokenizer-facing API --------------------------------------------------

    def _require_tokenizer(self) -> MicroTokenizer:
        if self.tokenizer is None:
            raise BackendUnavailable(
                "this micro backend has no tokenizer; construct EncodedText directly"
            )
        return self.tokenizer

    @property
    def mask_token_id(self) -> int:
        return self._require_tokenizer().mask_id

    def special_token_ids(self) -> set[int]:
        return set(self._require_tokenizer().special_ids)

    def decode(self, ids: Iterable[int], skip_specials: bool = True) -> str:
        return self._require_tokenizer().decode(ids, skip_specials=skip_specials)

    def encode(self, text: TextLike) -> EncodedText:
        tok = self._require_tokenizer()
        if isinstance(text, str):
            parts = (text,)
        else:
            parts = tuple(text)
            if len(parts) != 2:
                raise EmptyInput(f"expected a sentence or a pair, got {len(parts)} parts")
        token_lists = [tok.tokens_to_ids(tok.tokenize(part)) for part in parts]
        if any(len(ids) == 0 for ids in token_lists):
            raise EmptyInput("text tokenizes to zero content tokens")
        ids = [tok.cls_id] + token_lists[0] + [tok.sep_id]
        segments = [0] * len(ids)
        special = [True] + [False] * len(token_lists[0]) + [True]
        if len(token_lists) == 2:
            ids += token_lists[1] + [tok.sep_id]
            segments += [1] * (len(token_lists[1]) + 1)
            special += [False] * len(token_lists[1]) + [True]
        if len(ids) > self.config.max_seq_len:
            raise SequenceTooLong(
                f"{len(ids)} tokens exceed max_seq_len {self.config.max_seq_len}"
            )
        return EncodedText(
            token_ids=np.asarray(ids, dtype=np.int64),
            position_ids=np.arange(len(ids), dtype=np.int64),
            segment_ids=np.asarray(segments, dtype=np.int64),
            special_mask=np.asarray(special, dtype=bool),
            original_text=text if isinstance(text, str) else parts,
        )

    # -- model ----------------------------------------------------------------

    def _forward(self, enc: EncodedText, seed: int, dropout: bool) -> ForwardResult:
        self._count_forward()
        generator = torch.Generator().manual_seed(int(seed) & 0x7FFF_FFFF_FFFF_FFFF)
        ids = torch.from_numpy(enc.token_ids[None, :])
        with torch.no_grad():
            hidden = self.encoder(
                input_ids=ids,
                position_ids=torch.from_numpy(enc.position_ids[None, :]),
                segment_ids=torch.from_numpy(enc.segment_ids[None, :]),
                dropout=dropout,
                generator=generator,
            )[0]
            logits = hidden @ self.encoder.word_embeddings.T
        return ForwardResult(hidden=hidden.numpy(), logits=logits.numpy())

    def embedding_matrix(self) -> EmbeddingMatrix:
        return EmbeddingMatrix(self.encoder.word_embeddings.detach().numpy().copy())


def write_default_archive(path: Optional[str | Path] = None,
                          seed: int = DEFAULT_WEIGHTS_SEED) -> Path:
    """Regenerate the checked-in micro weights archive (used by scripts/)."""
    target = Path(path) if path is not None else default_archive_path()
    save_archive(target, init_micro_weights(seed=seed))
    return target
