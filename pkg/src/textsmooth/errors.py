"""Exception hierarchy shared across the package.

Three families map onto the CLI exit codes: configuration problems (exit 2),
data problems (exit 3) and backend problems (exit 4).
"""


class TextSmoothError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(TextSmoothError):
    """Invalid configuration or arguments (CLI exit code 2)."""


class DataError(TextSmoothError):
    """Invalid or missing input data (CLI exit code 3)."""


class BackendError(TextSmoothError):
    """Model backend failures (CLI exit code 4)."""


# -- representation algebra ------------------------------------------------

class IndexOutOfVocab(ConfigError):
    """A token id lies outside [0, vocab_size)."""


class ShapeMismatch(ConfigError):
    """Operands disagree on sequence length or vocabulary size."""


class LambdaOutOfRange(ConfigError):
    """Interpolation weight lies outside [0, 1]; never clamped."""


# -- encoding / backends ---------------------------------------------------

class EmptyInput(DataError):
    """Text tokenizes to zero content tokens."""


class SequenceTooLong(DataError):
    """Encoded sequence exceeds the backend's maximum length."""


class BackendUnavailable(BackendError):
    """Backend cannot be loaded (missing checkpoint, missing dependency)."""


# -- augmenters ------------------------------------------------------------

class EmptyText(DataError):
    """An augmenter received text with no usable tokens."""


class NoSynonymSource(ConfigError):
    """Synonym-based augmentation requested but no synonym table is loaded."""


class ParseError(DataError):
    """A data file failed to parse; carries file and line number."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class MissingFile(DataError):
    """A required input file does not exist."""


# -- trainer / harness -----------------------------------------------------

class LabelMismatch(DataError):
    """Train/dev/test splits disagree on the label set."""


class EmptyDataset(DataError):
    """A split or stream that must be non-empty is empty."""


class EmptyList(DataError):
    """Aggregation over zero values."""


class UnknownLabel(DataError):
    """A label is not in the dataset's declared label set."""


class InsufficientClassExamples(DataError):
    """A class has fewer examples than the requested subsample size."""


class EmptyResults(DataError):
    """Table emission was asked to render zero results."""


class AxisMismatch(DataError):
    """Results do not share a consistent method x dataset grid."""
