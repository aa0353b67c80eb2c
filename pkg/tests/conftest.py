import numpy as np
import pytest

from textsmooth.backends import MicroBackend
from textsmooth.records import LabeledExample

POSITIVE_WORDS = ["good", "great", "nice", "fine", "best"]
NEGATIVE_WORDS = ["bad", "terrible", "poor", "worst", "boring"]
PATTERNS = [
    "the movie was {} .",
    "this film is {} .",
    "it was so {} .",
    "that story is {} .",
    "my favorite film was {} .",
]


def make_sentiment_examples(words, label, count, offset=0):
    return [
        LabeledExample(
            PATTERNS[(offset + i) % len(PATTERNS)].format(words[(offset + i) % len(words)]),
            label,
        )
        for i in range(count)
    ]


@pytest.fixture(scope="session")
def micro_backend():
    return MicroBackend()


@pytest.fixture(scope="session")
def zero_backend():
    return MicroBackend.zeros()


@pytest.fixture()
def separable_splits():
    train = (make_sentiment_examples(POSITIVE_WORDS, "positive", 10)
             + make_sentiment_examples(NEGATIVE_WORDS, "negative", 10))
    dev = (make_sentiment_examples(POSITIVE_WORDS, "positive", 6, offset=2)
           + make_sentiment_examples(NEGATIVE_WORDS, "negative", 6, offset=2))
    test = (make_sentiment_examples(POSITIVE_WORDS, "positive", 8, offset=1)
            + make_sentiment_examples(NEGATIVE_WORDS, "negative", 8, offset=1))
    return train, dev, test


def write_tsv(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for fields in rows:
            fh.write("\t".join(fields) + "\n")
    return path


def write_sentiment_dataset(root, n_train_per_class=40, n_dev_per_class=15,
                            n_test_per_class=25, numeric_labels=True):
    """A synthetic SST-2-style TSV dataset over the micro vocabulary."""
    rng = np.random.default_rng(99)

    def rows(per_class, salt):
        out = []
        for label_id, words in ((0, NEGATIVE_WORDS), (1, POSITIVE_WORDS)):
            for i in range(per_class):
                pattern = PATTERNS[int(rng.integers(len(PATTERNS)))]
                word = words[int(rng.integers(len(words)))]
                label = str(label_id) if numeric_labels else ("negative", "positive")[label_id]
                out.append((label, pattern.format(word)))
        return out

    write_tsv(root / "train.tsv", rows(n_train_per_class, 0))
    write_tsv(root / "dev.tsv", rows(n_dev_per_class, 1))
    write_tsv(root / "test.tsv", rows(n_test_per_class, 2))
    return root


def write_trivial_sentiment_dataset(root, n_train_per_class=25, n_dev_per_class=12,
                                    n_test_per_class=10):
    """Trivially separable TSV dataset: one fixed sentence per class.

    Every split repeats the same two sentences, so any class-balanced
    subsample carries the complete decision rule and a fitted model is
    perfect on the full test split by construction.
    """

    def rows(per_class):
        out = []
        for label_id, word in ((0, "bad"), (1, "good")):
            out.extend((str(label_id), f"the movie was {word} .") for _ in range(per_class))
        return out

    write_tsv(root / "train.tsv", rows(n_train_per_class))
    write_tsv(root / "dev.tsv", rows(n_dev_per_class))
    write_tsv(root / "test.tsv", rows(n_test_per_class))
    return root


def write_dataset_spec_toml(path, name, root, label_set, dialect="tsv",
                            label_map_lines=()):
    lines = [
        f'name = "{name}"',
        f'dialect = "{dialect}"',
        "text_arity = 1",
        "label_set = [" + ", ".join(f'"{l}"' for l in label_set) + "]",
        "",
        "[paths]",
        f'train = "{root}/train.tsv"' if dialect == "tsv" else f'train = "{root}/train"',
        f'dev = "{root}/dev.tsv"' if dialect == "tsv" else f'dev = "{root}/dev"',
        f'test = "{root}/test.tsv"' if dialect == "tsv" else f'test = "{root}/test"',
    ]
    if label_map_lines:
        lines += ["", "[label_map]", *label_map_lines]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
