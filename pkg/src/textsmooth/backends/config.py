"""Backend selection from config mappings or TOML files.

Schema::

    kind = "micro" | "pretrained"
    checkpoint_path / checkpoint_id = "..."   # pretrained only
    max_seq_len = 128                          # optional
    dropout_active = true                      # optional
    dropout_override = 0.1                     # optional, pretrained only
    temperature = 1.0                          # optional
    keep_specials_onehot = true                # optional
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Mapping

from ..errors import ConfigError
from .base import MLMBackend
from .micro import MicroBackend

CHECKPOINT_CACHE_ENV = "TEXTSMOOTH_CHECKPOINT_DIR"

_KNOWN_KEYS = {
    "kind", "checkpoint_path", "checkpoint_id", "max_seq_len", "dropout_active",
    "dropout_override", "temperature", "keep_specials_onehot", "weights_path",
}


def load_backend_config(path: str | Path) -> dict[str, Any]:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib

    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"backend config not found: {path}")
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def build_backend(config: Mapping[str, Any]) -> MLMBackend:
    unknown = set(config) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown backend config keys: {sorted(unknown)}")
    kind = config.get("kind", "micro")
    common = {
        "dropout_active": bool(config.get("dropout_active", True)),
        "temperature": float(config.get("temperature", 1.0)),
        "keep_specials_onehot": bool(config.get("keep_specials_onehot", True)),
    }
    if kind == "micro":
        if "max_seq_len" in config and int(config["max_seq_len"]) != 32:
            raise ConfigError("the micro backend's max_seq_len is fixed at 32 by its weights")
        if "weights_path" in config:
            return MicroBackend.from_archive(config["weights_path"], **common)
        return MicroBackend(**common)
    if kind == "pretrained":
        checkpoint = config.get("checkpoint_path") or config.get("checkpoint_id")
        if not checkpoint:
            raise ConfigError("pretrained backend needs checkpoint_path or checkpoint_id")
        cache_dir = os.environ.get(CHECKPOINT_CACHE_ENV)
        if cache_dir and not os.path.isabs(str(checkpoint)):
            candidate = Path(cache_dir) / str(checkpoint)
            if candidate.exists():
                checkpoint = str(candidate)
        from .pretrained import PretrainedBackend

        return PretrainedBackend(
            str(checkpoint),
            max_seq_len=int(config.get("max_seq_len", 128)),
            dropout_override=config.get("dropout_override"),
            **common,
        )
    raise ConfigError(f"unknown backend kind {kind!r} (expected 'micro' or 'pretrained')")
