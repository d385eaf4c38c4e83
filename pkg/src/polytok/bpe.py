"""Byte-level BPE: training, encoding, decoding, and the tokenizer file format.

Vocabulary layout: a reserved block of special tokens occupies ids 0..S-1,
the 256 single-byte tokens occupy ids S..S+255, and merged tokens follow in
merge-creation order, so ids are dense and every byte string is encodable.

Training repeatedly merges the globally most frequent adjacent pair within
pretoken chunks, stopping when the vocabulary is full or no pair reaches
min_frequency. Frequency ties break by the smallest (min operand id,
max operand id, left operand id), which makes the merge list an exact
function of the corpus and config.
"""

from __future__ import annotations

import functools
import heapq
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

from .bytemap import str_to_token_bytes, token_bytes_to_str
from .errors import TokenizerFormatError, TrainError
from .pretokenize import get_profile

FORMAT_VERSION = "polytok-tokenizer/1"

DEFAULT_SPECIAL_TOKENS = (
    "<|pad|>",
    "<|bos|>",
    "<|eos|>",
    "<|unk|>",
    "<|spare_0|>",
    "<|spare_1|>",
    "<|spare_2|>",
    "<|spare_3|>",
)

_CHUNK_CACHE_LIMIT = 1 << 20


@dataclass(frozen=True)
class TrainConfig:
    vocab_size: int
    min_frequency: int = 5
    pretokenizer_id: str = "o200k"
    special_tokens: tuple[str, ...] = DEFAULT_SPECIAL_TOKENS

    def validate(self) -> None:
        if self.min_frequency < 1:
            raise TrainError(f"min_frequency must be >= 1, got {self.min_frequency}")
        if len(set(self.special_tokens)) != len(self.special_tokens):
            raise TrainError("special token names must be unique")
        floor = 256 + len(self.special_tokens)
        if self.vocab_size <= floor:
            raise TrainError(
                f"vocab_size must exceed {floor} (256 bytes + {len(self.special_tokens)} specials), "
                f"got {self.vocab_size}"
            )
        get_profile(self.pretokenizer_id)


class Encoding(NamedTuple):
    """Token ids plus the (start, end) byte span each token covers."""

    ids: list[int]
    byte_spans: list[tuple[int, int]]


class Tokenizer:
    """Immutable trained tokenizer; encode/decode are safe to share."""

    def __init__(
        self,
        merges: list[tuple[bytes, bytes]],
        special_tokens: tuple[str, ...] = DEFAULT_SPECIAL_TOKENS,
        pretokenizer_id: str = "o200k",
    ):
        self.special_tokens = tuple(special_tokens)
        self.pretokenizer_id = pretokenizer_id
        self._pattern = get_profile(pretokenizer_id)

        n_special = len(self.special_tokens)
        self._special_ids = {name: i for i, name in enumerate(self.special_tokens)}
        if len(self._special_ids) != n_special:
            raise TokenizerFormatError("special token names must be unique")

        # id -> bytes (None for specials, which carry no byte content)
        self._id_to_bytes: list[bytes | None] = [None] * n_special
        self._id_to_bytes.extend(bytes([b]) for b in range(256))
        self._bytes_to_id: dict[bytes, int] = {
            bytes([b]): n_special + b for b in range(256)
        }
        # (left_id, right_id) -> (rank, merged_id)
        self._ranks: dict[tuple[int, int], tuple[int, int]] = {}
        self.merges: list[tuple[bytes, bytes]] = []
        for rank, (left, right) in enumerate(merges):
            left_id = self._bytes_to_id.get(left)
            right_id = self._bytes_to_id.get(right)
            if left_id is None or right_id is None:
                raise TokenizerFormatError(
                    f"merge {rank}: operands must be base bytes or outputs of earlier merges"
                )
            merged = left + right
            if merged in self._bytes_to_id:
                raise TokenizerFormatError(f"merge {rank}: token {merged!r} already exists")
            new_id = len(self._id_to_bytes)
            self._id_to_bytes.append(merged)
            self._bytes_to_id[merged] = new_id
            self._ranks[(left_id, right_id)] = (rank, new_id)
            self.merges.append((left, right))
        self._chunk_cache: dict[bytes, tuple[int, ...]] = {}

    @property
    def vocab_size(self) -> int:
        return len(self._id_to_bytes)

    @property
    def vocab(self) -> dict[bytes, int]:
        """token bytes -> id, excluding the named special tokens."""
        return dict(self._bytes_to_id)

    def special_id(self, name: str) -> int:
        try:
            return self._special_ids[name]
        except KeyError:
            raise TokenizerFormatError(f"unknown special token {name!r}") from None

    def token_bytes(self, token_id: int) -> bytes | None:
        if not 0 <= token_id < len(self._id_to_bytes):
            raise TokenizerFormatError(
                f"token id {token_id} out of range (vocab size {len(self._id_to_bytes)})"
            )
        return self._id_to_bytes[token_id]

    def _encode_chunk(self, chunk: bytes) -> tuple[int, ...]:
        cached = self._chunk_cache.get(chunk)
        if cached is not None:
            return cached
        n_special = len(self.special_tokens)
        syms = [n_special + b for b in chunk]
        while len(syms) > 1:
            best_rank = None
            best_pair = None
            for i in range(len(syms) - 1):
                entry = self._ranks.get((syms[i], syms[i + 1]))
                if entry is not None and (best_rank is None or entry[0] < best_rank):
                    best_rank = entry[0]
                    best_pair = (syms[i], syms[i + 1])
            if best_pair is None:
                break
            merged_id = self._ranks[best_pair][1]
            syms = _merge_symbols(syms, best_pair[0], best_pair[1], merged_id)
        result = tuple(syms)
        if len(self._chunk_cache) >= _CHUNK_CACHE_LIMIT:
            self._chunk_cache.clear()
        self._chunk_cache[chunk] = result
        return result

    def encode(self, text: str | bytes) -> Encoding:
        """Encode text (or arbitrary bytes) to token ids.

        Invalid UTF-8 is carried through losslessly via surrogate escapes, so
        decode(encode(x).ids) reproduces the input bytes exactly.
        """
        if isinstance(text, bytes):
            data = text.decode("utf-8", errors="surrogateescape")
        else:
            data = text
        ids: list[int] = []
        spans: list[tuple[int, int]] = []
        offset = 0
        for match in self._pattern.finditer(data):
            chunk = match.group().encode("utf-8", errors="surrogateescape")
            for token_id in self._encode_chunk(chunk):
                length = len(self._id_to_bytes[token_id])  # type: ignore[arg-type]
                spans.append((offset, offset + length))
                offset += length
                ids.append(token_id)
        return Encoding(ids=ids, byte_spans=spans)

    def decode(self, ids: Iterable[int]) -> bytes:
        """Concatenate token byte sequences; specials decode to their names."""
        parts = []
        for token_id in ids:
            data = self.token_bytes(token_id)
            if data is None:
                data = self.special_tokens[token_id].encode("utf-8")
            parts.append(data)
        return b"".join(parts)

    def decode_text(self, ids: Iterable[int]) -> str:
        return self.decode(ids).decode("utf-8", errors="replace")

    def save(self, path: str | Path) -> None:
        doc = {
            "version": FORMAT_VERSION,
            "pretokenizer_id": self.pretokenizer_id,
            "special_tokens": list(self.special_tokens),
            "vocab": {
                token_bytes_to_str(self._id_to_bytes[i]): i  # type: ignore[arg-type]
                for i in range(len(self.special_tokens), len(self._id_to_bytes))
            },
            "merges": [
                f"{token_bytes_to_str(left)} {token_bytes_to_str(right)}"
                for left, right in self.merges
            ],
        }
        Path(path).write_text(
            json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "Tokenizer":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise TokenizerFormatError(f"cannot read tokenizer file {path}: {exc}") from None
        version = doc.get("version")
        if version != FORMAT_VERSION:
            raise TokenizerFormatError(
                f"incompatible tokenizer format {version!r} (expected {FORMAT_VERSION})"
            )
        merges = []
        for i, entry in enumerate(doc.get("merges", [])):
            parts = entry.split(" ")
            if len(parts) != 2:
                raise TokenizerFormatError(f"merge {i}: expected 'left right', got {entry!r}")
            try:
                merges.append((str_to_token_bytes(parts[0]), str_to_token_bytes(parts[1])))
            except ValueError as exc:
                raise TokenizerFormatError(f"merge {i}: {exc}") from None
        tok = cls(
            merges=merges,
            special_tokens=tuple(doc.get("special_tokens", [])),
            pretokenizer_id=doc.get("pretokenizer_id", "o200k"),
        )
        declared = doc.get("vocab", {})
        n_special = len(tok.special_tokens)
        expected = {
            token_bytes_to_str(tok._id_to_bytes[i]): i  # type: ignore[arg-type]
            for i in range(n_special, tok.vocab_size)
        }
        if declared != expected:
            raise TokenizerFormatError(
                "vocab table is inconsistent with the merge list and base alphabet"
            )
        return tok


def _merge_symbols(syms: list[int], left: int, right: int, new_id: int) -> list[int]:
    """Replace left-to-right non-overlapping (left, right) pairs with new_id."""
    out: list[int] = []
    i = 0
    n = len(syms)
    while i < n:
        if i + 1 < n and syms[i] == left and syms[i + 1] == right:
            out.append(new_id)
            i += 2
        else:
            out.append(syms[i])
            i += 1
    return out


def _count_chunk_batch(docs: Iterable[str], pretokenizer_id: str) -> Counter:
    pattern = get_profile(pretokenizer_id)
    counts: Counter = Counter()
    for doc in docs:
        counts.update(pattern.findall(doc))
    return counts


def _batched(corpus: Iterable[str], size: int) -> Iterable[list[str]]:
    batch: list[str] = []
    for doc in corpus:
        batch.append(doc)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


def count_chunks(
    corpus: Iterable[str], pretokenizer_id: str, workers: int = 1, batch_size: int = 2000
) -> Counter:
    """Pretoken chunk frequencies over a document stream.

    The corpus is consumed lazily; with workers > 1 it is sharded into
    batches and the shard counters are summed, so the result (and everything
    trained from it) is independent of the worker count.
    """
    if workers <= 1:
        return _count_chunk_batch(corpus, pretokenizer_id)
    counts: Counter = Counter()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for shard in pool.map(
            functools.partial(_count_chunk_batch, pretokenizer_id=pretokenizer_id),
            _batched(corpus, batch_size),
        ):
            counts.update(shard)
    return counts


def train(corpus: Iterable[str], cfg: TrainConfig, workers: int = 1) -> Tokenizer:
    """Train a byte-level BPE tokenizer on a stream of documents."""
    cfg.validate()
    chunk_counts = count_chunks(corpus, cfg.pretokenizer_id, workers=workers)
    if not chunk_counts:
        raise TrainError("training corpus is empty")

    n_special = len(cfg.special_tokens)
    words: list[list[int]] = []
    counts: list[int] = []
    for chunk, cnt in sorted(chunk_counts.items()):
        data = chunk.encode("utf-8")
        words.append([n_special + b for b in data])
        counts.append(cnt)

    pair_counts: dict[tuple[int, int], int] = {}
    pair_words: dict[tuple[int, int], set[int]] = {}
    for wi, syms in enumerate(words):
        cnt = counts[wi]
        for pair in zip(syms, syms[1:]):
            pair_counts[pair] = pair_counts.get(pair, 0) + cnt
            pair_words.setdefault(pair, set()).add(wi)

    # heap entries: (-count, min_id, max_id, left_id, right_id); stale entries
    # are skipped by comparing against the live count on pop
    heap = [
        (-c, min(p), max(p), p[0], p[1]) for p, c in pair_counts.items()
    ]
    heapq.heapify(heap)

    id_to_bytes: list[bytes | None] = [None] * n_special
    id_to_bytes.extend(bytes([b]) for b in range(256))
    merges: list[tuple[bytes, bytes]] = []
    max_merges = cfg.vocab_size - 256 - n_special

    while len(merges) < max_merges and heap:
        neg_count, _, _, left, right = heapq.heappop(heap)
        pair = (left, right)
        count = pair_counts.get(pair, 0)
        if count != -neg_count:
            continue
        if count < cfg.min_frequency:
            break
        new_id = len(id_to_bytes)
        id_to_bytes.append(id_to_bytes[left] + id_to_bytes[right])  # type: ignore[operator]
        merges.append((id_to_bytes[left], id_to_bytes[right]))  # type: ignore[arg-type]

        touched: set[tuple[int, int]] = set()
        affected = pair_words.pop(pair, set())
        for wi in affected:
            syms = words[wi]
            cnt = counts[wi]
            for old_pair in zip(syms, syms[1:]):
                remaining = pair_counts[old_pair] - cnt
                if remaining:
                    pair_counts[old_pair] = remaining
                else:
                    del pair_counts[old_pair]
                touched.add(old_pair)
                bucket = pair_words.get(old_pair)
                if bucket is not None:
                    bucket.discard(wi)
            new_syms = _merge_symbols(syms, left, right, new_id)
            words[wi] = new_syms
            for new_pair in zip(new_syms, new_syms[1:]):
                pair_counts[new_pair] = pair_counts.get(new_pair, 0) + cnt
                pair_words.setdefault(new_pair, set()).add(wi)
                touched.add(new_pair)
        for p in sorted(touched):
            c = pair_counts.get(p)
            if c:
                heapq.heappush(heap, (-c, min(p), max(p), p[0], p[1]))

    return Tokenizer(
        merges=merges,
        special_tokens=cfg.special_tokens,
        pretokenizer_id=cfg.pretokenizer_id,
    )


def iter_corpus_files(paths: Iterable[str | Path]) -> Iterable[str]:
    """Stream documents (one per line, blanks skipped) from text files."""
    for path in paths:
        with Path(path).open("r", encoding="utf-8") as handle:
            for line in handle:
                doc = line.rstrip("\n")
                if doc:
                    yield doc
