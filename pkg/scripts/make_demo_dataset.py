#!/usr/bin/env python3
"""Generate a small demo sentiment dataset over the micro-backend vocabulary.

Writes train/dev/test TSVs plus a ready-to-use dataset spec TOML, so the CLI
can be exercised without downloading anything:

    python3 scripts/make_demo_dataset.py --out demo_data
    textsmooth run --dataset demo_data/dataset.toml --method none \
        --n-per-class 8 --reps 3 --epochs 10 --learning-rate 2e-2 --out runs/
"""

import argparse
from pathlib import Path

import numpy as np

POSITIVE = ["good", "great", "nice", "fine", "best"]
NEGATIVE = ["bad", "terrible", "poor", "worst", "boring"]
PATTERNS = [
    "the movie was {} .",
    "this film is {} .",
    "it was so {} .",
    "that story is {} .",
    "my favorite film was {} .",
]


def write_split(path: Path, per_class: int, rng) -> None:
    rows = []
    for label, words in (("0", NEGATIVE), ("1", POSITIVE)):
        for _ in range(per_class):
            pattern = PATTERNS[int(rng.integers(len(PATTERNS)))]
            word = words[int(rng.integers(len(words)))]
            rows.append(f"{label}\t{pattern.format(word)}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


SPEC_TEMPLATE = """\
name = "sst-2"
dialect = "tsv"
text_arity = 1
label_set = ["negative", "positive"]

[paths]
train = "train.tsv"
dev = "dev.tsv"
test = "test.tsv"
"""


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_data")
    parser.add_argument("--seed", type=int, default=13)
    parser.add_argument("--train-per-class", type=int, default=40)
    parser.add_argument("--dev-per-class", type=int, default=15)
    parser.add_argument("--test-per-class", type=int, default=25)
    args = parser.parse_args()

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    write_split(root / "train.tsv", args.train_per_class, rng)
    write_split(root / "dev.tsv", args.dev_per_class, rng)
    write_split(root / "test.tsv", args.test_per_class, rng)
    (root / "dataset.toml").write_text(SPEC_TEMPLATE, encoding="utf-8")
    print(f"wrote demo dataset under {root}/ (spec: {root / 'dataset.toml'})")


if __name__ == "__main__":
    main()
