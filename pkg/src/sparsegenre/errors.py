"""Exception hierarchy.

Every error raised by the package derives from :class:`SparseGenreError`, so
callers (the CLI in particular) can catch one type and print a single line.
"""


class SparseGenreError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __str__(self):
        return f"{self.code}: {super().__str__()}"


# audio_io
class UnsupportedFormat(SparseGenreError):
    code = "unsupported_format"


class CorruptFile(SparseGenreError):
    code = "corrupt_file"


class EmptyAudio(SparseGenreError):
    code = "empty_audio"


class EmptyDataset(SparseGenreError):
    code = "empty_dataset"


class InvalidSpec(SparseGenreError):
    code = "invalid_spec"


class ZeroPowerSignal(SparseGenreError):
    code = "zero_power_signal"


class MixedSampleRates(SparseGenreError):
    code = "mixed_sample_rates"


# dsp / features
class TooShort(SparseGenreError):
    code = "too_short"


class ClipTooShort(SparseGenreError):
    code = "clip_too_short"


class BadLength(SparseGenreError):
    code = "bad_length"


class TooManyFrames(SparseGenreError):
    code = "too_many_frames"


# solvers / classifier
class BadShape(SparseGenreError):
    code = "bad_shape"


class DimensionMismatch(SparseGenreError):
    code = "dimension_mismatch"


class ZeroVector(SparseGenreError):
    code = "zero_vector"


class BadColumns(SparseGenreError):
    code = "bad_columns"


class EmptyClass(SparseGenreError):
    code = "empty_class"


class ModelFormatError(SparseGenreError):
    code = "model_format"


# evaluation
class TooFewSamples(SparseGenreError):
    code = "too_few_samples"


class BadSizes(SparseGenreError):
    code = "bad_sizes"


class UnknownLabel(SparseGenreError):
    code = "unknown_label"


class ConfigError(SparseGenreError):
    code = "config"
