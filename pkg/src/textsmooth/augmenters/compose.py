"""Composition of discrete augmenters with training-time smoothing.

A composed run trains on each original text plus each augmented text, all
routed through smooth-and-interpolate. The stream records its own size
bookkeeping so baseline runs can be matched to the same per-epoch data
amount (the combined stream is 2x the original set when every original has
exactly one augmented variant).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from ..errors import EmptyDataset
from ..records import AugmentedExample, LabeledExample
from ..repr_core import check_lambda

ROUTE_SMOOTH = "smooth"
ROUTE_PLAIN = "plain"


@dataclass(frozen=True)
class StreamItem:
    example: LabeledExample
    route: str = ROUTE_PLAIN
    provenance: str = "original"


@dataclass(frozen=True)
class SmoothingStreamSpec:
    """A training stream description: which texts, how each one is fed in."""

    items: Tuple[StreamItem, ...]
    lam: float
    n_original: int
    n_augmented: int

    @property
    def size(self) -> int:
        return len(self.items)

    @property
    def multiplier(self) -> float:
        """Per-epoch data amount relative to the original set alone."""
        return self.size / self.n_original if self.n_original else float("nan")


def compose_with_smoothing(examples: Sequence[AugmentedExample], lam: float,
                           originals: Optional[Sequence[LabeledExample]] = None
                           ) -> SmoothingStreamSpec:
    """Route originals plus their augmented variants through smoothing.

    By default originals are recovered from the (deduplicated,
    order-preserving) base examples; k originals with one variant each yield
    a 2k-item stream. Pass ``originals`` explicitly when the augmented
    examples came from an external file whose bases are not the real
    source texts.
    """
    lam = check_lambda(lam)
    if not examples:
        raise EmptyDataset("composition needs at least one augmented example")
    if originals is None:
        originals = []
        seen = set()
        for aug in examples:
            key = (aug.base.text, aug.base.label)
            if key not in seen:
                seen.add(key)
                originals.append(aug.base)
    items = [StreamItem(ex, route=ROUTE_SMOOTH, provenance="original") for ex in originals]
    items += [
        StreamItem(aug.as_example(), route=ROUTE_SMOOTH, provenance=aug.augmenter_name)
        for aug in examples
    ]
    return SmoothingStreamSpec(
        items=tuple(items), lam=lam,
        n_original=len(originals), n_augmented=len(examples),
    )


def smoothing_stream(originals: Sequence[LabeledExample], lam: float) -> SmoothingStreamSpec:
    """A smoothing-only stream (no discrete augmentation), 1x data amount."""
    lam = check_lambda(lam)
    if not originals:
        raise EmptyDataset("stream needs at least one example")
    return SmoothingStreamSpec(
        items=tuple(StreamItem(ex, route=ROUTE_SMOOTH) for ex in originals),
        lam=lam, n_original=len(originals), n_augmented=0,
    )
