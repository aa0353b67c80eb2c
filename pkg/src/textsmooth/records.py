"""Labeled-example records shared by augmenters, trainer and harness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .errors import EmptyText

TextLike = Union[str, Tuple[str, str]]


def _text_parts(text: TextLike) -> Tuple[str, ...]:
    return (text,) if isinstance(text, str) else tuple(text)


@dataclass(frozen=True)
class LabeledExample:
    """Raw text (a sentence or a sentence pair) with a textual label."""

    text: TextLike
    label: str

    def __post_init__(self):
        parts = _text_parts(self.text)
        if len(parts) not in (1, 2) or any(not p.strip() for p in parts):
            raise EmptyText(f"example text must be a non-empty sentence or pair: {self.text!r}")
        if not isinstance(self.text, str):
            object.__setattr__(self, "text", parts)

    @property
    def arity(self) -> int:
        return 1 if isinstance(self.text, str) else 2


@dataclass(frozen=True)
class AugmentedExample:
    """An augmenter's output, keeping provenance and the source example.

    The label is always inherited from the base example; augmenters never
    touch labels.
    """

    base: LabeledExample
    augmented_text: TextLike
    augmenter_name: str
    seed: Optional[int] = None

    @property
    def label(self) -> str:
        return self.base.label

    def as_example(self) -> LabeledExample:
        return LabeledExample(text=self.augmented_text, label=self.base.label)
