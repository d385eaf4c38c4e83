"""Scripting bindings over polytok artifact files.

Training pipelines shell out to the polytok CLI; this package lets ML
scripts consume the resulting artifacts in-process without it. It speaks the
documented file formats only (see docs/formats.md in the toolkit repo) and
exposes five operations: load(), BoundTokenizer.encode(), .decode(),
.compression_tpb(), and apply_adaptation(). Results agree byte-for-byte with
CLI outputs on identical inputs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

import numpy as np
import regex
from numpy.random import Generator, Philox

__version__ = "0.1.0"  # versioned in lockstep with the polytok core

FORMAT_VERSION = "polytok-tokenizer/1"

_O200K = regex.compile(
    "|".join(
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
)

_PROFILES = {"o200k": _O200K}

EMB_MAGIC = b"EMB1"


class BindingsError(Exception):
    """Base class; subclasses name the primary error category they carry."""


class TokenizerFormatError(BindingsError):
    pass


class AdaptationError(BindingsError):
    pass


def _byte_char_tables() -> tuple[dict[int, str], dict[str, int]]:
    visible = set(range(0x21, 0x7F)) | set(range(0xA1, 0xAD)) | set(range(0xAE, 0x100))
    byte_to_char: dict[int, str] = {}
    k = 0
    for b in range(256):
        if b in visible:
            byte_to_char[b] = chr(b)
        else:
            byte_to_char[b] = chr(256 + k)
            k += 1
    return byte_to_char, {c: b for b, c in byte_to_char.items()}


_BYTE_TO_CHAR, _CHAR_TO_BYTE = _byte_char_tables()


def _chars_to_bytes(text: str) -> bytes:
    try:
        return bytes(_CHAR_TO_BYTE[c] for c in text)
    except KeyError as exc:
        raise TokenizerFormatError(
            f"character {exc.args[0]!r} is outside the byte mapping"
        ) from None


class BoundTokenizer:
    """Immutable view of a trained tokenizer file; shareable across threads."""

    def __init__(self, doc: dict):
        version = doc.get("version")
        if version != FORMAT_VERSION:
            raise TokenizerFormatError(
                f"unsupported tokenizer format {version!r} (expected {FORMAT_VERSION})"
            )
        profile = doc.get("pretokenizer_id", "o200k")
        if profile not in _PROFILES:
            raise TokenizerFormatError(f"unknown pretokenizer profile {profile!r}")
        self._pattern = _PROFILES[profile]
        self.special_tokens = tuple(doc.get("special_tokens", []))
        n_special = len(self.special_tokens)

        id_to_bytes: list[bytes | None] = [None] * n_special
        id_to_bytes.extend(bytes([b]) for b in range(256))
        bytes_to_id = {bytes([b]): n_special + b for b in range(256)}
        ranks: dict[tuple[int, int], tuple[int, int]] = {}
        for rank, entry in enumerate(doc.get("merges", [])):
            parts = entry.split(" ")
            if len(parts) != 2:
                raise TokenizerFormatError(f"merge {rank}: malformed entry {entry!r}")
            left, right = (_chars_to_bytes(p) for p in parts)
            left_id, right_id = bytes_to_id.get(left), bytes_to_id.get(right)
            if left_id is None or right_id is None:
                raise TokenizerFormatError(f"merge {rank}: unknown operand")
            new_id = len(id_to_bytes)
            merged = left + right
            id_to_bytes.append(merged)
            bytes_to_id[merged] = new_id
            ranks[(left_id, right_id)] = (rank, new_id)
        declared = doc.get("vocab", {})
        expected = {
            "".join(_BYTE_TO_CHAR[b] for b in id_to_bytes[i]): i  # type: ignore[union-attr]
            for i in range(n_special, len(id_to_bytes))
        }
        if declared != expected:
            raise TokenizerFormatError("vocab table disagrees with the merge list")
        self._id_to_bytes = id_to_bytes
        self._ranks = ranks
        self._n_special = n_special
        self._cache: dict[bytes, tuple[int, ...]] = {}

    @property
    def vocab_size(self) -> int:
        return len(self._id_to_bytes)

    def _encode_chunk(self, chunk: bytes) -> tuple[int, ...]:
        cached = self._cache.get(chunk)
        if cached is not None:
            return cached
        syms = [self._n_special + b for b in chunk]
        while len(syms) > 1:
            best = None
            for i in range(len(syms) - 1):
                entry = self._ranks.get((syms[i], syms[i + 1]))
                if entry is not None and (best is None or entry[0] < best[0]):
                    best = (entry[0], syms[i], syms[i + 1], entry[1])
            if best is None:
                break
            _, left, right, new_id = best
            out: list[int] = []
            i = 0
            while i < len(syms):
                if i + 1 < len(syms) and syms[i] == left and syms[i + 1] == right:
                    out.append(new_id)
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            syms = out
        result = tuple(syms)
        if len(self._cache) >= (1 << 20):
            self._cache.clear()
        self._cache[chunk] = result
        return result

    def encode(self, text: str | bytes) -> list[int]:
        """Token ids for text; arbitrary bytes survive via surrogate escapes."""
        if isinstance(text, bytes):
            data = text.decode("utf-8", errors="surrogateescape")
        else:
            data = text
        ids: list[int] = []
        for match in self._pattern.finditer(data):
            chunk = match.group().encode("utf-8", errors="surrogateescape")
            ids.extend(self._encode_chunk(chunk))
        return ids

    def decode_bytes(self, ids: Iterable[int]) -> bytes:
        parts = []
        for token_id in ids:
            if not 0 <= token_id < len(self._id_to_bytes):
                raise TokenizerFormatError(f"token id {token_id} out of range")
            data = self._id_to_bytes[token_id]
            if data is None:
                data = self.special_tokens[token_id].encode("utf-8")
            parts.append(data)
        return b"".join(parts)

    def decode(self, ids: Iterable[int]) -> str:
        return self.decode_bytes(ids).decode("utf-8", errors="replace")

    def compression_tpb(self, texts: Iterable[str]) -> float:
        """Tokens per UTF-8 byte over the given texts (lower is better)."""
        tokens = 0
        total = 0
        for text in texts:
            tokens += len(self.encode(text))
            total += len(text.encode("utf-8"))
        if total == 0:
            raise BindingsError("compression_tpb needs at least one non-empty text")
        return tokens / total


def load(path: str | Path) -> BoundTokenizer:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise TokenizerFormatError(f"cannot read tokenizer file {path}: {exc}") from None
    return BoundTokenizer(doc)


def _load_embeddings(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:4] != EMB_MAGIC:
        raise AdaptationError(f"{path}: not an EMB1 embedding file")
    rows, dim, _ = np.frombuffer(raw[4:16], dtype="<u4")
    expected = 16 + int(rows) * int(dim) * 4
    if len(raw) != expected:
        raise AdaptationError(f"{path}: truncated embedding file")
    return np.frombuffer(raw[16:], dtype="<f4").reshape(int(rows), int(dim)).copy()


def _parse_plan(path: Path):
    shared: list[tuple[int, int]] = []
    novel: list[int] = []
    mode: dict | None = None
    for line in path.read_text(encoding="utf-8").split("\n"):
        if not line.strip():
            continue
        if line.startswith("#mode="):
            body = line[len("#mode="):].strip()
            if body == "mean":
                mode = {"kind": "mean"}
            elif body.startswith("random"):
                mode = {"kind": "random", "mean": 0.0, "std": None}
                for part in body.split()[1:]:
                    key, _, value = part.partition("=")
                    if key == "mean":
                        mode["mean"] = float(value)
                    elif key == "std":
                        mode["std"] = None if value == "shared" else float(value)
                    else:
                        raise AdaptationError(f"unknown init parameter {key!r}")
            else:
                raise AdaptationError(f"unknown plan mode {body!r}")
            continue
        if line.startswith("#"):
            continue
        fields = line.split("\t")
        if fields[0] == "S" and len(fields) == 3:
            shared.append((int(fields[1]), int(fields[2])))
        elif fields[0] == "N" and len(fields) == 2:
            novel.append(int(fields[1]))
        elif fields[0] == "D" and len(fields) == 2:
            pass  # dropped rows do not affect the new table
        else:
            raise AdaptationError(f"malformed plan record {line!r}")
    if mode is None:
        raise AdaptationError("plan file is missing the #mode= header")
    return shared, novel, mode


def apply_adaptation(
    plan_path: str | Path,
    embeddings_path: str | Path,
    seed: int,
    out_path: str | Path,
) -> None:
    """Build and write the adapted embedding table for a saved plan.

    Reproduces the CLI's output bit-for-bit: shared rows copy exactly, mean
    init averages shared rows in float64, and random init draws novel row n
    from Generator(Philox(key=[seed, n])).
    """
    if not 0 <= seed < 2**64:
        raise AdaptationError(f"seed must fit an unsigned 64-bit integer, got {seed}")
    shared, novel, mode = _parse_plan(Path(plan_path))
    old = _load_embeddings(Path(embeddings_path))
    new_size = len(shared) + len(novel)
    covered = sorted([n for _, n in shared] + novel)
    if covered != list(range(new_size)):
        raise AdaptationError("plan does not cover every new id exactly once")
    dim = old.shape[1]
    out = np.zeros((new_size, dim), dtype=np.float32)
    for old_id, new_id in shared:
        if old_id >= old.shape[0]:
            raise AdaptationError(
                f"plan references old id {old_id} but the table has {old.shape[0]} rows"
            )
        out[new_id] = old[old_id]

    if novel:
        shared_old = [o for o, _ in shared]
        if mode["kind"] == "mean":
            if not shared_old:
                raise AdaptationError("mean init requires a non-empty shared set")
            out_row = old[shared_old].astype(np.float64).mean(axis=0).astype(np.float32)
            for new_id in novel:
                out[new_id] = out_row
        else:
            if mode["std"] is None:
                if not shared_old:
                    raise AdaptationError(
                        "random init with derived std requires a non-empty shared set"
                    )
                std = old[shared_old].astype(np.float64).std(axis=0)
            else:
                std = np.full(dim, float(mode["std"]), dtype=np.float64)
            for new_id in novel:
                key = np.array([seed, new_id], dtype=np.uint64)
                rng = Generator(Philox(key=key))
                out[new_id] = (mode["mean"] + std * rng.standard_normal(dim)).astype(
                    np.float32
                )

    header = EMB_MAGIC + np.array([new_size, dim, 0], dtype="<u4").tobytes()
    Path(out_path).write_bytes(header + np.ascontiguousarray(out, dtype="<f4").tobytes())
