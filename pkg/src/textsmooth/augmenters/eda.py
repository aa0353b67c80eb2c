"""The four classic discrete-text augmentation operations.

Synonym replacement, random insertion, random swap and random deletion,
driven by a bundled synonym table and stopword list so runs are hermetic.
Every operation preserves the label and is deterministic under a fixed seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

from ..errors import ConfigError, EmptyText, MissingFile, NoSynonymSource, ParseError
from ..records import AugmentedExample, LabeledExample
from ..seeding import stable_seed

EDA_OPS = ("synonym_replacement", "random_insertion", "random_swap", "random_deletion")
_SYNONYM_OPS = frozenset({"synonym_replacement", "random_insertion"})

SynonymTable = Mapping[str, Tuple[str, ...]]


def load_synonym_table(path: str | Path) -> Dict[str, Tuple[str, ...]]:
    """Parse a `word<TAB>syn1,syn2,...` file into a lookup table."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"synonym table not found: {path}")
    table: Dict[str, Tuple[str, ...]] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(f"expected word<TAB>synonyms, got {len(fields)} fields",
                             path=str(path), line=lineno)
        word, synonyms = fields[0].strip(), tuple(
            s.strip() for s in fields[1].split(",") if s.strip())
        if not word or not synonyms:
            raise ParseError("empty word or synonym list", path=str(path), line=lineno)
        table[word] = synonyms
    return table


def load_stopwords(path: str | Path) -> FrozenSet[str]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"stopword list not found: {path}")
    return frozenset(w.strip() for w in path.read_text(encoding="utf-8").split() if w.strip())


def _asset(name: str) -> Path:
    return Path(str(resources.files("textsmooth").joinpath("assets", name)))


def default_synonym_table() -> Dict[str, Tuple[str, ...]]:
    return load_synonym_table(_asset("synonyms.tsv"))


def default_stopwords() -> FrozenSet[str]:
    return load_stopwords(_asset("stopwords.txt"))


@dataclass(frozen=True)
class EdaConfig:
    """Knobs for the four operations.

    alpha controls the per-sentence edit strength: n = max(1, round(alpha*L))
    edited tokens for replacement/insertion/swap, and the per-token deletion
    probability for random_deletion.
    """

    alpha: float = 0.1
    ops_enabled: FrozenSet[str] = frozenset(EDA_OPS)
    num_aug_per_example: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ops_enabled", frozenset(self.ops_enabled))
        if not (0.0 < self.alpha <= 1.0):
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        unknown = self.ops_enabled - set(EDA_OPS)
        if unknown:
            raise ConfigError(f"unknown EDA ops: {sorted(unknown)}")
        if not self.ops_enabled:
            raise ConfigError("at least one EDA op must be enabled")
        if self.num_aug_per_example < 1:
            raise ConfigError("num_aug_per_example must be >= 1")


def _synonym_replacement(words: List[str], n: int, rng: random.Random,
                         synonyms: SynonymTable, stopwords: FrozenSet[str]) -> List[str]:
    new_words = list(words)
    candidates = sorted({w for w in words if w.lower() not in stopwords
                         and w.lower() in synonyms})
    rng.shuffle(candidates)
    replaced = 0
    for word in candidates:
        choice = rng.choice(synonyms[word.lower()])
        new_words = [choice if w == word else w for w in new_words]
        replaced += 1
        if replaced >= n:
            break
    return new_words


def _random_insertion(words: List[str], n: int, rng: random.Random,
                      synonyms: SynonymTable, stopwords: FrozenSet[str]) -> List[str]:
    new_words = list(words)
    sources = [w for w in words if w.lower() not in stopwords and w.lower() in synonyms]
    if not sources:
        return new_words
    for _ in range(n):
        word = rng.choice(sources)
        insert = rng.choice(synonyms[word.lower()])
        new_words.insert(rng.randrange(len(new_words) + 1), insert)
    return new_words


def _random_swap(words: List[str], n: int, rng: random.Random) -> List[str]:
    new_words = list(words)
    if len(new_words) < 2:
        return new_words
    for _ in range(n):
        i, j = rng.sample(range(len(new_words)), 2)
        new_words[i], new_words[j] = new_words[j], new_words[i]
    return new_words


def _random_deletion(words: List[str], p: float, rng: random.Random) -> List[str]:
    # keep-one guard: never emit empty text
    kept = [w for w in words if rng.random() >= p]
    if not kept:
        return [rng.choice(words)]
    return kept


def _augment_sentence(sentence: str, op: str, cfg: EdaConfig, rng: random.Random,
                      synonyms: Optional[SynonymTable],
                      stopwords: FrozenSet[str]) -> str:
    words = sentence.split()
    if not words:
        raise EmptyText(f"cannot augment empty text: {sentence!r}")
    n = max(1, round(cfg.alpha * len(words)))
    if op == "synonym_replacement":
        out = _synonym_replacement(words, n, rng, synonyms, stopwords)
    elif op == "random_insertion":
        out = _random_insertion(words, n, rng, synonyms, stopwords)
    elif op == "random_swap":
        out = _random_swap(words, n, rng)
    else:
        out = _random_deletion(words, cfg.alpha, rng)
    return " ".join(out)


def eda_augment(ex: LabeledExample, cfg: EdaConfig, seed: int,
                synonyms: Optional[SynonymTable] = None,
                stopwords: Optional[FrozenSet[str]] = None) -> List[AugmentedExample]:
    """Produce cfg.num_aug_per_example variants, one random enabled op each.

    ``synonyms=None`` loads the bundled table unless no synonym-needing op is
    enabled; passing an empty mapping signals "no source" and is an error
    when synonym replacement or insertion is requested.
    """
    needs_synonyms = bool(cfg.ops_enabled & _SYNONYM_OPS)
    if synonyms is None and needs_synonyms:
        synonyms = default_synonym_table()
    if needs_synonyms and not synonyms:
        raise NoSynonymSource(
            f"ops {sorted(cfg.ops_enabled & _SYNONYM_OPS)} need a synonym table"
        )
    if stopwords is None:
        stopwords = default_stopwords()
    parts = (ex.text,) if isinstance(ex.text, str) else tuple(ex.text)
    ops = sorted(cfg.ops_enabled)
    results = []
    for k in range(cfg.num_aug_per_example):
        rng = random.Random(stable_seed(seed, k))
        op = rng.choice(ops)
        new_parts = tuple(
            _augment_sentence(part, op, cfg, rng, synonyms, stopwords) for part in parts
        )
        text = new_parts[0] if isinstance(ex.text, str) else new_parts
        results.append(AugmentedExample(
            base=ex, augmented_text=text, augmenter_name=f"eda:{op}", seed=seed,
        ))
    return results
