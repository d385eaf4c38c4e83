"""Pretokenization: regex-driven splitting of text into merge-local chunks.

BPE merges are counted and applied strictly inside these chunks, never across
them. The default profile is the GPT-4o split pattern ("o200k"): contraction
suffixes, letter runs with an optional leading non-letter, digit runs capped
at three, punctuation runs, and whitespace/newline handling. No normalization
of any kind is applied before splitting.
"""

from __future__ import annotations

import regex

from .errors import PretokenizeError

O200K_PATTERN = "|".join(
    [
        r"""[^\r\n\p{L}\p{N}]?[\p{Lu}\p{Lt}\p{Lm}\p{Lo}\p{M}]*[\p{Ll}\p{Lm}\p{Lo}\p{M}]+(?i:'s|'t|'re|'ve|'m|'ll|'d)?""",
        r"""[^\r\n\p{L}\p{N}]?[\p{Lu}\p{Lt}\p{Lm}\p{Lo}\p{M}]+[\p{Ll}\p{Lm}\p{Lo}\p{M}]*(?i:'s|'t|'re|'ve|'m|'ll|'d)?""",
        r"""\p{N}{1,3}""",
        r""" ?[^\s\p{L}\p{N}]+[\r\n/]*""",
        r"""\s*[\r\n]+""",
        r"""\s+(?!\S)""",
        r"""\s+""",
    ]
)

_PROFILES: dict[str, "regex.Pattern[str]"] = {
    "o200k": regex.compile(O200K_PATTERN),
}


def get_profile(profile: str) -> "regex.Pattern[str]":
    try:
        return _PROFILES[profile]
    except KeyError:
        known = ", ".join(sorted(_PROFILES))
        raise PretokenizeError(
            f"unknown pretokenizer profile {profile!r} (known: {known})"
        ) from None


def pretokenize_str(text: str, profile: str = "o200k") -> list[str]:
    """Split text into chunks; their concatenation equals the input."""
    pat = get_profile(profile)
    return pat.findall(text)


def pretokenize(text: str, profile: str = "o200k") -> list[bytes]:
    """Split text into UTF-8 byte chunks whose concatenation equals the
    input bytes."""
    return [c.encode("utf-8") for c in pretokenize_str(text, profile)]
