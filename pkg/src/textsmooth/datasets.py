"""Dataset ingestion and low-resource subsampling.

Two input dialects are supported and both normalize to lists of
LabeledExample with textualized labels:

* ``tsv``: one example per line, ``label<TAB>text`` (pair tasks add a
  third field). Used for SST-2- and TREC-style distributions.
* ``snips``: a split is a directory holding parallel ``seq.in`` (one
  utterance per line) and ``label`` (one intent per line) files.

Numeric class labels are replaced with their text versions through a
checked-in mapping (assets/label_maps.json) or a per-spec override.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ConfigError,
    InsufficientClassExamples,
    MissingFile,
    ParseError,
    UnknownLabel,
)
from .records import LabeledExample
from .seeding import stable_seed

logger = logging.getLogger(__name__)

DIALECTS = ("tsv", "snips")


def builtin_label_maps() -> Dict[str, Dict[str, str]]:
    path = resources.files("textsmooth").joinpath("assets", "label_maps.json")
    return json.loads(path.read_text(encoding="utf-8"))


@dataclass(frozen=True)
class DatasetSpec:
    """Where a dataset lives and how to read it."""

    name: str
    train_path: str
    dev_path: str
    test_path: str
    label_set: Tuple[str, ...]
    text_arity: int = 1
    dialect: str = "tsv"
    label_map: Optional[Mapping[str, str]] = None

    def __post_init__(self):
        if not self.label_set:
            raise ConfigError("label_set must be non-empty")
        if len(set(self.label_set)) != len(self.label_set):
            raise ConfigError(f"duplicate labels in label_set: {self.label_set}")
        object.__setattr__(self, "label_set", tuple(self.label_set))
        if self.text_arity not in (1, 2):
            raise ConfigError(f"text_arity must be 1 or 2, got {self.text_arity}")
        if self.dialect not in DIALECTS:
            raise ConfigError(f"dialect must be one of {DIALECTS}, got {self.dialect!r}")
        if self.label_map is None:
            object.__setattr__(
                self, "label_map", builtin_label_maps().get(self.name.lower(), {}))

    @property
    def num_labels(self) -> int:
        return len(self.label_set)

    def textualize(self, raw_label: str) -> str:
        label = self.label_map.get(raw_label, raw_label)
        if label not in self.label_set:
            raise UnknownLabel(
                f"label {raw_label!r} (textualized {label!r}) not in {self.label_set}")
        return label


def load_dataset_spec(path: str | Path) -> DatasetSpec:
    """Read a dataset spec from a TOML file; relative paths resolve beside it."""
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib

    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"dataset spec not found: {path}")
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    try:
        paths = raw["paths"]
        resolved = {
            split: str((path.parent / p) if not Path(p).is_absolute() else Path(p))
            for split, p in paths.items()
        }
        return DatasetSpec(
            name=raw["name"],
            train_path=resolved["train"],
            dev_path=resolved["dev"],
            test_path=resolved["test"],
            label_set=tuple(raw["label_set"]),
            text_arity=int(raw.get("text_arity", 1)),
            dialect=raw.get("dialect", "tsv"),
            label_map=raw.get("label_map"),
        )
    except KeyError as exc:
        raise ConfigError(f"dataset spec {path} is missing key {exc}") from exc


def _read_tsv_split(path: Path, spec: DatasetSpec) -> List[LabeledExample]:
    examples = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            fields = line.split("\t")
            if len(fields) != 1 + spec.text_arity:
                raise ParseError(
                    f"expected {1 + spec.text_arity} tab-separated fields, got {len(fields)}",
                    path=str(path), line=lineno)
            label = spec.textualize(fields[0])
            text = fields[1] if spec.text_arity == 1 else (fields[1], fields[2])
            try:
                examples.append(LabeledExample(text=text, label=label))
            except Exception as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from exc
    return examples


def _read_snips_split(path: Path, spec: DatasetSpec) -> List[LabeledExample]:
    seq_path, label_path = path / "seq.in", path / "label"
    for required in (seq_path, label_path):
        if not required.is_file():
            raise MissingFile(f"snips split needs {required}")
    texts = seq_path.read_text(encoding="utf-8").splitlines()
    labels = label_path.read_text(encoding="utf-8").splitlines()
    if len(texts) != len(labels):
        raise ParseError(
            f"seq.in has {len(texts)} lines but label has {len(labels)}", path=str(path))
    examples = []
    for lineno, (text, raw_label) in enumerate(zip(texts, labels), start=1):
        if not text.strip():
            raise ParseError("empty utterance", path=str(seq_path), line=lineno)
        examples.append(LabeledExample(text=text, label=spec.textualize(raw_label.strip())))
    return examples


def load_split(spec: DatasetSpec, split: str) -> List[LabeledExample]:
    path = Path(getattr(spec, f"{split}_path"))
    if spec.dialect == "snips":
        if not path.is_dir():
            raise MissingFile(f"snips split directory not found: {path}")
        return _read_snips_split(path, spec)
    if not path.is_file():
        raise MissingFile(f"{split} split not found: {path}")
    return _read_tsv_split(path, spec)


def load_dataset(spec: DatasetSpec) -> Tuple[List[LabeledExample],
                                             List[LabeledExample],
                                             List[LabeledExample]]:
    """Load train/dev/test and report their sizes."""
    splits = tuple(load_split(spec, split) for split in ("train", "dev", "test"))
    logger.info("%s: train=%d dev=%d test=%d",
                spec.name, len(splits[0]), len(splits[1]), len(splits[2]))
    return splits


def _subsample_split(examples: Sequence[LabeledExample], n_per_class: int,
                     seed: int, label_order: Sequence[str]) -> List[LabeledExample]:
    by_label: Dict[str, List[int]] = {}
    for idx, ex in enumerate(examples):
        by_label.setdefault(ex.label, []).append(idx)
    chosen: List[int] = []
    rng = np.random.default_rng(seed)
    for label in label_order:
        indices = by_label.get(label, [])
        if len(indices) < n_per_class:
            raise InsufficientClassExamples(
                f"class {label!r} has {len(indices)} examples, need {n_per_class}")
        picks = rng.choice(len(indices), size=n_per_class, replace=False)
        chosen.extend(indices[i] for i in sorted(picks))
    return [examples[i] for i in chosen]


def subsample(train: Sequence[LabeledExample], dev: Sequence[LabeledExample],
              n_per_class: int, seed: int,
              label_order: Optional[Sequence[str]] = None
              ) -> Tuple[List[LabeledExample], List[LabeledExample]]:
    """Draw exactly n examples per class per split, uniformly without replacement."""
    if n_per_class < 1:
        raise ConfigError(f"n_per_class must be positive, got {n_per_class}")
    if label_order is None:
        label_order = sorted({ex.label for ex in train} | {ex.label for ex in dev})
    train_small = _subsample_split(train, n_per_class, stable_seed(seed, "train"), label_order)
    dev_small = _subsample_split(dev, n_per_class, stable_seed(seed, "dev"), label_order)
    return train_small, dev_small
