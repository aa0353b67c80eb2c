"""Import/export of augmented examples in the exchange TSV format.

One example per line, UTF-8, no header: `label<TAB>text` for single-sentence
tasks, `label<TAB>text_a<TAB>text_b` for pair tasks. Tabs and newlines are
forbidden inside fields. This is the path by which augmentation methods not
implemented in-repo (back-translation, generative baselines) enter the
composition experiments.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, List

from ..errors import EmptyText, MissingFile, ParseError
from ..records import AugmentedExample, LabeledExample


def import_external(path: str | Path, augmenter_name: str) -> List[AugmentedExample]:
    """Parse an exchange TSV; every row carries the supplied provenance name."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"augmented-data file not found: {path}")
    out: List[AugmentedExample] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            fields = line.split("\t")
            if len(fields) == 2:
                text: str | tuple = fields[1]
            elif len(fields) == 3:
                text = (fields[1], fields[2])
            else:
                raise ParseError(
                    f"expected 2 or 3 tab-separated fields, got {len(fields)}",
                    path=str(path), line=lineno,
                )
            try:
                base = LabeledExample(text=text, label=fields[0])
            except EmptyText as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from exc
            out.append(AugmentedExample(
                base=base, augmented_text=base.text, augmenter_name=augmenter_name,
            ))
    return out


def write_augmented_tsv(examples: Iterable[AugmentedExample], path: str | Path) -> int:
    """Write examples in the exchange format; returns the row count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for ex in examples:
            parts = (ex.augmented_text,) if isinstance(ex.augmented_text, str) \
                else tuple(ex.augmented_text)
            fields = (ex.label, *parts)
            for fieldval in fields:
                if "\t" in fieldval or "\n" in fieldval:
                    raise ParseError(f"tab/newline inside field: {fieldval!r}", path=str(path))
            fh.write("\t".join(fields) + "\n")
            count += 1
    return count
