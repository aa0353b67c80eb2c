"""Low-resource experiment orchestration.

One experiment = (dataset, method, n_per_class, repetitions). Each
repetition derives its own seed from the master seed, subsamples the
train/dev splits, builds the method's training stream, fine-tunes a fresh
classifier and evaluates on the full test set. Aggregates are persisted as
one JSON file per configuration plus an appended CSV index.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .augmenters import (
    EdaConfig,
    compose_with_smoothing,
    eda_augment,
    import_external,
    mlm_replace_augment,
    smoothing_stream,
)
from .backends.base import MLMBackend
from .datasets import DatasetSpec, load_dataset, subsample
from .errors import ConfigError, InsufficientClassExamples
from .records import AugmentedExample, LabeledExample
from .seeding import stable_seed
from .trainer import (
    RunResult,
    TrainConfig,
    build_classifier,
    config_fingerprint,
    evaluate,
    train,
)

logger = logging.getLogger(__name__)

BASE_METHODS = ("none", "text_smoothing", "eda", "mlm_replace")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    method: str = "none"
    compose_smoothing: bool = False
    n_per_class: int = 10
    repetitions: int = 15
    lam: float = 0.1
    master_seed: int = 0
    epochs: int = 8
    batch_size: int = 8
    learning_rate: float = 4e-5
    external_path: Optional[str] = None
    eda: EdaConfig = field(default_factory=EdaConfig)
    mask_ratio: float = 0.15

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.n_per_class < 1:
            raise ConfigError(f"n_per_class must be >= 1, got {self.n_per_class}")
        if not (self.method in BASE_METHODS or self.method.startswith("external:")):
            raise ConfigError(
                f"method must be one of {BASE_METHODS} or 'external:<name>', got {self.method!r}")
        if self.method.startswith("external:") and not self.external_path:
            raise ConfigError("external methods need external_path")
        if self.compose_smoothing and self.method in ("none", "text_smoothing"):
            raise ConfigError(
                "compose_smoothing needs a discrete base method (not none/text_smoothing)")

    @property
    def method_label(self) -> str:
        return self.method + ("+smoothing" if self.compose_smoothing else "")

    def fingerprint(self) -> str:
        return config_fingerprint(self)


def _augment_split(cfg: ExperimentConfig, originals: Sequence[LabeledExample],
                   backend: MLMBackend, seed: int) -> List[AugmentedExample]:
    if cfg.method == "eda":
        out: List[AugmentedExample] = []
        for idx, ex in enumerate(originals):
            out.extend(eda_augment(ex, cfg.eda, stable_seed(seed, "eda", idx)))
        return out
    if cfg.method == "mlm_replace":
        return [
            mlm_replace_augment(ex, cfg.mask_ratio, stable_seed(seed, "mlm", idx), backend)
            for idx, ex in enumerate(originals)
        ]
    if cfg.method.startswith("external:"):
        name = cfg.method.split(":", 1)[1]
        pool = import_external(cfg.external_path, name)
        return _sample_external(pool, cfg.n_per_class, seed, cfg.dataset.label_set)
    raise ConfigError(f"method {cfg.method!r} produces no augmented examples")


def _sample_external(pool: Sequence[AugmentedExample], n_per_class: int, seed: int,
                     label_order: Sequence[str]) -> List[AugmentedExample]:
    """Class-balanced draw from an externally produced augmentation pool."""
    import numpy as np

    by_label: dict[str, list[int]] = {}
    for idx, aug in enumerate(pool):
        by_label.setdefault(aug.label, []).append(idx)
    rng = np.random.default_rng(stable_seed(seed, "external"))
    chosen: List[AugmentedExample] = []
    for label in label_order:
        indices = by_label.get(label, [])
        if len(indices) < n_per_class:
            raise InsufficientClassExamples(
                f"external pool has {len(indices)} examples for {label!r}, need {n_per_class}")
        picks = rng.choice(len(indices), size=n_per_class, replace=False)
        chosen.extend(pool[indices[i]] for i in sorted(picks))
    return chosen


def build_training_input(cfg: ExperimentConfig, originals: Sequence[LabeledExample],
                         backend: MLMBackend, seed: int):
    """The per-repetition training stream and matching TrainConfig.

    Data amounts: plain and smoothing-only runs see 1x the subsampled set;
    any run with a discrete augmenter (composed or not) sees 2x, so composed
    methods and their discrete baselines always consume equal amounts.
    """
    train_cfg = TrainConfig(
        epochs=cfg.epochs, batch_size=cfg.batch_size, learning_rate=cfg.learning_rate,
        lam=cfg.lam, seed=seed, smoothing_enabled=False,
    )
    if cfg.method == "none":
        return list(originals), train_cfg
    if cfg.method == "text_smoothing":
        return smoothing_stream(list(originals), cfg.lam), train_cfg
    augmented = _augment_split(cfg, originals, backend, seed)
    if cfg.compose_smoothing:
        # originals + augmented variants, every item routed through smoothing
        return compose_with_smoothing(augmented, cfg.lam, originals=list(originals)), train_cfg
    return list(originals) + [aug.as_example() for aug in augmented], train_cfg


def run_experiment(cfg: ExperimentConfig, backend: MLMBackend,
                   out_dir: Optional[str | Path] = None) -> RunResult:
    """Run all repetitions; persist the aggregate (partial on failure)."""
    fingerprint = cfg.fingerprint()
    train_full, dev_full, test_full = load_dataset(cfg.dataset)
    accuracies: List[float] = []
    try:
        for rep in range(1, cfg.repetitions + 1):
            seed_rep = stable_seed(cfg.master_seed, rep)
            train_small, dev_small = subsample(
                train_full, dev_full, cfg.n_per_class, seed_rep,
                label_order=cfg.dataset.label_set)
            stream, train_cfg = build_training_input(cfg, train_small, backend, seed_rep)
            handle = build_classifier(
                backend, cfg.dataset.num_labels, label_set=cfg.dataset.label_set,
                head_seed=stable_seed(seed_rep, "head"))
            train(handle, stream, dev_small, train_cfg)
            accuracy = evaluate(handle, test_full)
            accuracies.append(accuracy)
            logger.info("%s/%s rep %d/%d: accuracy %.4f",
                        cfg.dataset.name, cfg.method_label, rep, cfg.repetitions, accuracy)
    except Exception as exc:
        if accuracies and out_dir is not None:
            partial = RunResult.from_accuracies(
                accuracies, fingerprint, method=cfg.method_label,
                dataset=cfg.dataset.name, failed=True, error=f"{type(exc).__name__}: {exc}")
            persist_result(partial, out_dir)
        raise
    result = RunResult.from_accuracies(
        accuracies, fingerprint, method=cfg.method_label, dataset=cfg.dataset.name)
    if out_dir is not None:
        persist_result(result, out_dir)
    return result


def persist_result(result: RunResult, out_dir: str | Path) -> Path:
    """Write run-<fingerprint>.json and append a row to index.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"run-{result.config_fingerprint}.json"
    path.write_text(result.to_json(), encoding="utf-8")
    index = out_dir / "index.csv"
    fresh = not index.exists()
    with open(index, "a", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(["fingerprint", "dataset", "method", "repetitions",
                             "mean", "std", "failed"])
        writer.writerow([result.config_fingerprint, result.dataset, result.method,
                         len(result.per_seed_accuracy), f"{result.mean:.6f}",
                         f"{result.std:.6f}", str(result.failed).lower()])
    return path


def load_results(in_dir: str | Path) -> List[RunResult]:
    in_dir = Path(in_dir)
    results = []
    for path in sorted(in_dir.glob("run-*.json")):
        results.append(RunResult.from_json(path.read_text(encoding="utf-8")))
    return results
