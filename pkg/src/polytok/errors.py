"""Exception hierarchy for the toolkit.

Every domain error derives from PolytokError; the CLI maps PolytokError to
exit code 2 (validation) and anything else to exit code 3 (runtime).
"""

from __future__ import annotations


class PolytokError(Exception):
    """Base class for all toolkit errors."""


class RegistryError(PolytokError):
    """Malformed registry file, duplicate codes, or bad pin configuration."""


class WeightingError(PolytokError):
    """Weight computation cannot proceed (empty registry, no usable data)."""


class SamplingError(PolytokError):
    """Corpus store cannot serve the sample plan."""


class PretokenizeError(PolytokError):
    """Unknown pretokenizer profile."""


class TrainError(PolytokError):
    """Tokenizer training cannot proceed (e.g. empty corpus)."""


class TokenizerFormatError(PolytokError):
    """Tokenizer file is malformed, inconsistent, or of an unknown version."""


class AdaptationError(PolytokError):
    """Vocabulary adaptation failure: format mismatch, bad dimensions, or
    an empty shared set where one is required."""


class MetricsError(PolytokError):
    """Verdict/curve processing failure (unparseable verdict, empty set,
    or a candidate curve that never reaches the baseline threshold)."""


class InputError(PolytokError):
    """A CLI input path is missing or unreadable."""
