"""Visible byte-to-unicode mapping used when serializing token bytes.

Byte-level vocabularies need a lossless, printable text form. We use the
standard mapping popularized by GPT-2-style byte-level BPE: byte values that
are "visible" (0x21-0x7E, 0xA1-0xAC, 0xAE-0xFF) map to the code point of the
same value; every other byte value b maps to chr(256 + k) where k counts the
non-visible bytes in ascending order. The full table is documented in
docs/tokenizer_format.md.
"""

from __future__ import annotations


def _build_tables() -> tuple[dict[int, str], dict[str, int]]:
    visible = (
        list(range(0x21, 0x7F)) + list(range(0xA1, 0xAD)) + list(range(0xAE, 0x100))
    )
    visible_set = set(visible)
    byte_to_char: dict[int, str] = {}
    k = 0
    for b in range(256):
        if b in visible_set:
            byte_to_char[b] = chr(b)
        else:
            byte_to_char[b] = chr(256 + k)
            k += 1
    char_to_byte = {c: b for b, c in byte_to_char.items()}
    return byte_to_char, char_to_byte


BYTE_TO_CHAR, CHAR_TO_BYTE = _build_tables()


def token_bytes_to_str(data: bytes) -> str:
    """Render token bytes in the visible mapped alphabet."""
    return "".join(BYTE_TO_CHAR[b] for b in data)


def str_to_token_bytes(text: str) -> bytes:
    """Inverse of token_bytes_to_str; raises ValueError on foreign characters."""
    try:
        return bytes(CHAR_TO_BYTE[c] for c in text)
    except KeyError as exc:
        raise ValueError(f"character {exc.args[0]!r} is not in the byte mapping") from None
