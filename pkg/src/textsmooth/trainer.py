"""Classifier fine-tuning on soft token inputs, plus evaluation/aggregation.

The classifier's input layer accepts either token ids (embedding lookup) or
per-position vocabulary distributions (embedding mixing); both feed the same
encoder and head. Training optionally routes every example through
smooth-and-interpolate with a fresh dropout draw per epoch; development and
test evaluation always run on plain one-hot inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from torch import nn

from . import repr_core
from .augmenters.compose import ROUTE_SMOOTH, SmoothingStreamSpec, StreamItem
from .backends.base import EncodedText, MLMBackend
from .backends.micro import MicroBackend, MicroConfig, MicroEncoder, seeded_dropout
from .errors import (
    BackendUnavailable,
    ConfigError,
    EmptyDataset,
    EmptyList,
    LabelMismatch,
)
from .records import LabeledExample
from .seeding import stable_seed


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 8
    batch_size: int = 8
    learning_rate: float = 4e-5
    lam: float = repr_core.DEFAULT_LAMBDA
    seed: int = 0
    smoothing_enabled: bool = True
    smoothing_resample: bool = True  # fresh dropout draw per epoch vs cache-once
    eval_uses_onehot: bool = True

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        repr_core.check_lambda(self.lam)
        if not self.eval_uses_onehot:
            raise ConfigError("evaluation always uses one-hot inputs; "
                              "smoothing is a training-time path only")


class AggregateStats(NamedTuple):
    mean: float
    std: float
    degenerate: bool  # true when only one value was aggregated


def aggregate(per_seed: Sequence[float]) -> AggregateStats:
    """Mean and sample standard deviation (n-1) of repeated accuracies."""
    values = [float(v) for v in per_seed]
    if not values:
        raise EmptyList("cannot aggregate zero accuracies")
    mean = sum(values) / len(values)
    if len(values) == 1:
        return AggregateStats(mean=mean, std=0.0, degenerate=True)
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return AggregateStats(mean=mean, std=math.sqrt(var), degenerate=False)


@dataclass(frozen=True)
class RunResult:
    """Per-seed accuracies plus their aggregate for one experiment cell."""

    per_seed_accuracy: Tuple[float, ...]
    mean: float
    std: float
    config_fingerprint: str
    method: str = ""
    dataset: str = ""
    failed: bool = False
    error: Optional[str] = None

    @classmethod
    def from_accuracies(cls, accuracies: Sequence[float], config_fingerprint: str,
                        method: str = "", dataset: str = "",
                        failed: bool = False, error: Optional[str] = None) -> "RunResult":
        stats = aggregate(accuracies)
        return cls(
            per_seed_accuracy=tuple(float(a) for a in accuracies),
            mean=stats.mean, std=stats.std,
            config_fingerprint=config_fingerprint,
            method=method, dataset=dataset, failed=failed, error=error,
        )

    def to_json(self) -> str:
        payload = {"schema": "textsmooth.run_result/v1", **asdict(self)}
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunResult":
        payload = json.loads(text)
        payload.pop("schema", None)
        payload["per_seed_accuracy"] = tuple(payload["per_seed_accuracy"])
        return cls(**payload)


def config_fingerprint(*configs) -> str:
    """Stable hex digest of one or more config mappings/dataclasses.

    Unordered collections are sorted before hashing so the digest does not
    depend on hash randomization across processes.
    """
    def canonical(obj):
        if isinstance(obj, (set, frozenset)):
            return sorted(str(v) for v in obj)
        return str(obj)

    blob = json.dumps([asdict(c) if hasattr(c, "__dataclass_fields__") else dict(c)
                       for c in configs], sort_keys=True, default=canonical)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# -- classifier ---------------------------------------------------------------


class MicroClassifier(nn.Module):
    """Micro encoder plus a linear head on the first-position hidden state."""

    def __init__(self, config: MicroConfig, num_labels: int, head_seed: int = 0):
        super().__init__()
        self.config = config
        self.num_labels = num_labels
        self.encoder = MicroEncoder(config)
        head_gen = torch.Generator().manual_seed(head_seed & 0x7FFF_FFFF_FFFF_FFFF)
        self.head_weight = nn.Parameter(
            torch.empty(config.embed_size, num_labels).normal_(0.0, 0.02, generator=head_gen))
        self.head_bias = nn.Parameter(torch.zeros(num_labels))

    def forward(self, input_ids: Optional[torch.Tensor] = None,
                dists: Optional[torch.Tensor] = None,
                position_ids: Optional[torch.Tensor] = None,
                segment_ids: Optional[torch.Tensor] = None,
                attention_mask: Optional[torch.Tensor] = None,
                dropout: bool = False,
                generator: Optional[torch.Generator] = None) -> torch.Tensor:
        if (input_ids is None) == (dists is None):
            raise ConfigError("pass exactly one of input_ids (lookup) / dists (mixing)")
        if dists is not None:
            inputs_embeds = repr_core.mix_embeddings(dists, self.encoder.word_embeddings)
            hidden = self.encoder(
                inputs_embeds=inputs_embeds, position_ids=position_ids,
                segment_ids=segment_ids, attention_mask=attention_mask,
                dropout=dropout, generator=generator)
        else:
            hidden = self.encoder(
                input_ids=input_ids, position_ids=position_ids,
                segment_ids=segment_ids, attention_mask=attention_mask,
                dropout=dropout, generator=generator)
        cls_state = hidden[:, 0]
        cls_state = seeded_dropout(cls_state, self.config.dropout_rate, dropout, generator)
        return cls_state @ self.head_weight + self.head_bias


class PretrainedClassifier(nn.Module):
    """Sequence classifier over a pretrained checkpoint with a mixing path."""

    def __init__(self, checkpoint: str, num_labels: int, local_files_only: bool = True):
        super().__init__()
        try:
            from transformers import AutoModelForSequenceClassification
        except ImportError as exc:
            raise BackendUnavailable(
                "the 'transformers' package is required for the pretrained classifier"
            ) from exc
        try:
            self.model = AutoModelForSequenceClassification.from_pretrained(
                checkpoint, num_labels=num_labels, local_files_only=local_files_only)
        except Exception as exc:
            raise BackendUnavailable(f"cannot load checkpoint {checkpoint!r}: {exc}") from exc
        self.num_labels = num_labels

    def forward(self, input_ids=None, dists=None, position_ids=None,
                segment_ids=None, attention_mask=None, dropout: bool = False,
                generator=None) -> torch.Tensor:
        self.model.train(dropout)
        kwargs = {"attention_mask": attention_mask, "token_type_ids": segment_ids,
                  "position_ids": position_ids}
        if dists is not None:
            table = self.model.get_input_embeddings().weight
            kwargs["inputs_embeds"] = repr_core.mix_embeddings(dists.to(table.dtype), table)
        else:
            kwargs["input_ids"] = input_ids
        out = self.model(**{k: v for k, v in kwargs.items() if v is not None})
        self.model.eval()
        return out.logits


@dataclass
class ClassifierHandle:
    """Bundles the model with the backend that encodes/smooths its inputs."""

    model: nn.Module
    backend: MLMBackend
    num_labels: int
    label_set: Optional[Tuple[str, ...]] = None
    _encode_cache: Dict = field(default_factory=dict, repr=False)

    def encode_cached(self, text) -> EncodedText:
        key = text if isinstance(text, str) else tuple(text)
        if key not in self._encode_cache:
            self._encode_cache[key] = self.backend.encode(text)
        return self._encode_cache[key]

    def label_index(self, label: str) -> int:
        if self.label_set is None:
            raise LabelMismatch("label set not fixed yet; train first or pass label_set")
        try:
            return self.label_set.index(label)
        except ValueError:
            raise LabelMismatch(f"label {label!r} not in {self.label_set}") from None


def build_classifier(backend: Union[MLMBackend, "BackendDescriptor"], num_labels: int,
                     label_set: Optional[Sequence[str]] = None,
                     head_seed: int = 0) -> ClassifierHandle:
    """Construct a classifier for the backend family.

    The classifier owns its own copy of the encoder weights (embedding table
    included); the smoothing backend stays frozen while the classifier is
    fully fine-tuned.
    """
    from .backends.base import BackendDescriptor

    if num_labels < 2:
        raise ConfigError(f"need at least 2 labels, got {num_labels}")
    if label_set is not None and len(label_set) != num_labels:
        raise ConfigError(f"label_set has {len(label_set)} labels, expected {num_labels}")
    if isinstance(backend, BackendDescriptor):
        backend = (MicroBackend() if backend.name == "micro"
                   else _pretrained_backend_from_name(backend))
    if isinstance(backend, MicroBackend):
        model = MicroClassifier(backend.config, num_labels, head_seed=head_seed)
        model.encoder.load_state_dict(
            {k: torch.as_tensor(v) for k, v in backend.export_weights().items()})
    else:
        model = PretrainedClassifier(backend.descriptor.name, num_labels)
    return ClassifierHandle(
        model=model, backend=backend, num_labels=num_labels,
        label_set=tuple(label_set) if label_set is not None else None,
    )


def _pretrained_backend_from_name(descriptor) -> MLMBackend:
    from .backends.pretrained import PretrainedBackend

    return PretrainedBackend(descriptor.name, max_seq_len=descriptor.max_seq_len,
                             dropout_active=descriptor.dropout_active,
                             temperature=descriptor.temperature)


# -- batching -----------------------------------------------------------------


def _pad_id(backend: MLMBackend) -> int:
    if isinstance(backend, MicroBackend):
        return backend.tokenizer.pad_id if backend.tokenizer else 0
    pad = getattr(getattr(backend, "hf_tokenizer", None), "pad_token_id", None)
    return int(pad) if pad is not None else 0


def collate_ids(encs: Sequence[EncodedText], pad_id: int):
    """Pad encoded examples to a rectangular id batch."""
    width = max(e.seq_len for e in encs)
    batch = len(encs)
    ids = np.full((batch, width), pad_id, dtype=np.int64)
    positions = np.zeros((batch, width), dtype=np.int64)
    segments = np.zeros((batch, width), dtype=np.int64)
    mask = np.zeros((batch, width), dtype=np.int64)
    for row, enc in enumerate(encs):
        n = enc.seq_len
        ids[row, :n] = enc.token_ids
        positions[row, :n] = enc.position_ids
        positions[row, n:] = np.arange(n, width)
        segments[row, :n] = enc.segment_ids
        mask[row, :n] = 1
    return (torch.from_numpy(ids), torch.from_numpy(positions),
            torch.from_numpy(segments), torch.from_numpy(mask))


def _dist_batch(row_seqs: Sequence[np.ndarray], vocab_size: int, pad_id: int,
                width: int) -> torch.Tensor:
    batch = np.zeros((len(row_seqs), width, vocab_size), dtype=np.float32)
    batch[:, :, pad_id] = 1.0  # padded positions stay one-hot on PAD
    for row, rows in enumerate(row_seqs):
        batch[row, :rows.shape[0], :] = rows
    return torch.from_numpy(batch)


def _as_stream_items(train_set) -> Tuple[List[StreamItem], Optional[float]]:
    if isinstance(train_set, SmoothingStreamSpec):
        return list(train_set.items), train_set.lam
    return [it if isinstance(it, StreamItem) else StreamItem(it) for it in train_set], None


# -- training / evaluation ------------------------------------------------------


@dataclass
class TrainOutcome:
    dev_trace: List[float]
    best_epoch: int
    best_dev_accuracy: float


def _resolve_labels(handle: ClassifierHandle, items: Sequence[StreamItem],
                    dev_set: Sequence[LabeledExample]) -> None:
    train_labels = {it.example.label for it in items}
    dev_labels = {ex.label for ex in dev_set}
    if handle.label_set is None:
        handle.label_set = tuple(sorted(train_labels | dev_labels))
    stray = (train_labels | dev_labels) - set(handle.label_set)
    if stray:
        raise LabelMismatch(f"labels {sorted(stray)} not in {handle.label_set}")
    if len(handle.label_set) != handle.num_labels:
        raise LabelMismatch(
            f"classifier has {handle.num_labels} outputs but label set is {handle.label_set}"
        )


def train(handle: ClassifierHandle, train_set, dev_set: Sequence[LabeledExample],
          cfg: TrainConfig) -> TrainOutcome:
    """Fine-tune the classifier; returns the per-epoch dev accuracy trace.

    ``train_set`` is a list of LabeledExample (smoothed uniformly when
    cfg.smoothing_enabled) or a SmoothingStreamSpec whose per-item routes and
    interpolation weight take precedence. Each smoothed example gets a fresh
    dropout draw per epoch, derived from (cfg.seed, epoch, item index);
    cfg.smoothing_resample=False pins every epoch to the first draw.
    Model selection keeps the best-dev epoch (earliest on ties).
    """
    items, stream_lam = _as_stream_items(train_set)
    if not items:
        raise EmptyDataset("training set is empty")
    if not dev_set:
        raise EmptyDataset("development set is empty")
    _resolve_labels(handle, items, dev_set)
    lam = cfg.lam if stream_lam is None else stream_lam
    model, backend = handle.model, handle.backend
    pad_id = _pad_id(backend)
    vocab_size = backend.descriptor.vocab_size

    torch.manual_seed(stable_seed(cfg.seed, "train"))
    shuffle_rng = random.Random(stable_seed(cfg.seed, "shuffle"))
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)

    encs = [handle.encode_cached(it.example.text) for it in items]
    labels_all = [handle.label_index(it.example.label) for it in items]

    def routed_through_smoothing(i: int) -> bool:
        # stream items carry their own routes; plain lists follow the config
        if stream_lam is not None:
            return items[i].route == ROUTE_SMOOTH
        return cfg.smoothing_enabled

    best_state, best_acc, best_epoch = None, -1.0, -1
    dev_trace: List[float] = []
    for epoch in range(cfg.epochs):
        order = list(range(len(items)))
        shuffle_rng.shuffle(order)
        model.train()
        for start in range(0, len(order), cfg.batch_size):
            chunk = order[start:start + cfg.batch_size]
            ids, positions, segments, mask = collate_ids([encs[i] for i in chunk], pad_id)
            labels = torch.tensor([labels_all[i] for i in chunk], dtype=torch.long)
            optimizer.zero_grad()
            if any(routed_through_smoothing(i) for i in chunk):
                # mixed batches ride the mixing path; unsmoothed items enter
                # as exact one-hot rows, which match the lookup path
                row_seqs = []
                for i in chunk:
                    enc = encs[i]
                    if routed_through_smoothing(i):
                        draw = epoch if cfg.smoothing_resample else 0
                        seed_ex = stable_seed(cfg.seed, draw, i)
                        dist = backend.interpolate_encoded(enc, seed_ex, lam)
                        row_seqs.append(dist.rows.astype(np.float32))
                    else:
                        onehot = repr_core.one_hot_encode(enc.token_ids, vocab_size)
                        row_seqs.append(onehot.dense().astype(np.float32))
                dists = _dist_batch(row_seqs, vocab_size, pad_id, ids.shape[1])
                logits = model(dists=dists, position_ids=positions, segment_ids=segments,
                               attention_mask=mask, dropout=True)
            else:
                logits = model(input_ids=ids, position_ids=positions, segment_ids=segments,
                               attention_mask=mask, dropout=True)
            loss = torch.nn.functional.cross_entropy(logits, labels)
            loss.backward()
            optimizer.step()
        acc = evaluate(handle, dev_set)
        dev_trace.append(acc)
        if acc > best_acc:
            best_acc, best_epoch = acc, epoch
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
    if best_state is not None:
        model.load_state_dict(best_state)
    return TrainOutcome(dev_trace=dev_trace, best_epoch=best_epoch, best_dev_accuracy=best_acc)


def evaluate(handle: ClassifierHandle, test_set: Sequence[LabeledExample],
             batch_size: int = 32) -> float:
    """Accuracy under argmax with plain id-lookup inputs (never smoothed)."""
    if not test_set:
        raise EmptyDataset("evaluation set is empty")
    if handle.label_set is None:
        raise LabelMismatch("label set not fixed; call train() or set label_set")
    model, backend = handle.model, handle.backend
    pad_id = _pad_id(backend)
    model.eval()
    correct = 0
    with torch.no_grad():
        for start in range(0, len(test_set), batch_size):
            chunk = test_set[start:start + batch_size]
            encs = [handle.encode_cached(ex.text) for ex in chunk]
            ids, positions, segments, mask = collate_ids(encs, pad_id)
            logits = model(input_ids=ids, position_ids=positions, segment_ids=segments,
                           attention_mask=mask, dropout=False)
            predictions = logits.argmax(dim=-1)
            targets = torch.tensor([handle.label_index(ex.label) for ex in chunk])
            correct += int((predictions == targets).sum())
    return correct / len(test_set)


# -- checkpointing ---------------------------------------------------------------


def save_checkpoint(handle: ClassifierHandle, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save({
        "state_dict": handle.model.state_dict(),
        "num_labels": handle.num_labels,
        "label_set": handle.label_set,
    }, path)


def load_checkpoint(path: str | Path, backend: MLMBackend) -> ClassifierHandle:
    payload = torch.load(Path(path), weights_only=False)
    handle = build_classifier(backend, payload["num_labels"],
                              label_set=payload["label_set"])
    handle.model.load_state_dict(payload["state_dict"])
    return handle
