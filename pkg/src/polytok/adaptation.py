"""Cross-lingual vocabulary adaptation by tokenizer replacement.

Maps an old embedding table onto a new tokenizer's vocabulary: rows for
shared tokens (identical byte content; specials matched by registered name)
are preserved bit-exactly, and rows for novel tokens are initialized either
with the arithmetic mean of all shared rows or with seeded normal draws.

Embedding file format (EMB1): a 16-byte header -- magic b"EMB1", u32
little-endian row count, u32 little-endian dimension, u32 reserved zero --
followed by row-major little-endian float32 data.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np
from numpy.random import Generator, Philox

from .bpe import Tokenizer
from .errors import AdaptationError
from .sampling import CorpusStore

EMB_MAGIC = b"EMB1"


@dataclass(frozen=True)
class RandomInit:
    """Normal init for novel rows; std=None derives the component-wise
    standard deviation of the shared rows."""

    mean: float = 0.0
    std: float | None = None


@dataclass(frozen=True)
class MeanInit:
    pass


InitMode = Union[RandomInit, MeanInit]


@dataclass(frozen=True)
class EmbeddingTable:
    vectors: np.ndarray  # (V, dim) float32

    def __post_init__(self):
        v = self.vectors
        if v.ndim != 2 or v.dtype != np.float32:
            raise AdaptationError("embedding table must be a 2-D float32 array")
        if not np.isfinite(v).all():
            raise AdaptationError("embedding table contains non-finite values")

    @property
    def rows(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class AdaptationPlan:
    shared: tuple[tuple[int, int], ...]  # (old_id, new_id)
    novel: tuple[int, ...]  # new ids
    dropped: tuple[int, ...]  # old ids
    init_mode: InitMode

    @property
    def new_vocab_size(self) -> int:
        return len(self.shared) + len(self.novel)

    @property
    def old_vocab_size(self) -> int:
        return len(self.shared) + len(self.dropped)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    header = EMB_MAGIC + np.array(
        [table.rows, table.dim, 0], dtype="<u4"
    ).tobytes()
    data = np.ascontiguousarray(table.vectors, dtype="<f4").tobytes()
    Path(path).write_bytes(header + data)


def load_embeddings(path: str | Path) -> EmbeddingTable:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != EMB_MAGIC:
        raise AdaptationError(f"{path}: not an EMB1 embedding file")
    rows, dim, _reserved = np.frombuffer(raw[4:16], dtype="<u4")
    expected = 16 + int(rows) * int(dim) * 4
    if len(raw) != expected:
        raise AdaptationError(
            f"{path}: expected {expected} bytes for {rows}x{dim} floats, got {len(raw)}"
        )
    vectors = np.frombuffer(raw[16:], dtype="<f4").reshape(int(rows), int(dim)).copy()
    return EmbeddingTable(vectors=vectors)


def plan_adaptation(
    old_tok: Tokenizer, new_tok: Tokenizer, mode: InitMode
) -> AdaptationPlan:
    """Match tokens between vocabularies: bytes for regular tokens, names
    for specials."""
    old_by_bytes = {}
    for token_id in range(len(old_tok.special_tokens), old_tok.vocab_size):
        old_by_bytes[old_tok.token_bytes(token_id)] = token_id
    old_special_ids = {name: i for i, name in enumerate(old_tok.special_tokens)}

    shared: list[tuple[int, int]] = []
    novel: list[int] = []
    matched_old: set[int] = set()
    for new_id in range(new_tok.vocab_size):
        if new_id < len(new_tok.special_tokens):
            name = new_tok.special_tokens[new_id]
            old_id = old_special_ids.get(name)
        else:
            old_id = old_by_bytes.get(new_tok.token_bytes(new_id))
        if old_id is None:
            novel.append(new_id)
        else:
            shared.append((old_id, new_id))
            matched_old.add(old_id)
    dropped = [i for i in range(old_tok.vocab_size) if i not in matched_old]
    return AdaptationPlan(
        shared=tuple(shared),
        novel=tuple(novel),
        dropped=tuple(dropped),
        init_mode=mode,
    )


def apply_adaptation(
    plan: AdaptationPlan, old_emb: EmbeddingTable, seed: int = 0
) -> EmbeddingTable:
    """Build the new embedding table from the plan.

    Novel rows under RandomInit come from per-row Philox streams keyed by
    (seed, new_id), so the result is bit-reproducible and independent of any
    parallel fill order.
    """
    if not 0 <= seed < 2**64:
        raise AdaptationError(f"seed must fit an unsigned 64-bit integer, got {seed}")
    if old_emb.rows != plan.old_vocab_size:
        raise AdaptationError(
            f"old embedding table has {old_emb.rows} rows but the plan expects "
            f"{plan.old_vocab_size}"
        )
    dim = old_emb.dim
    out = np.zeros((plan.new_vocab_size, dim), dtype=np.float32)
    for old_id, new_id in plan.shared:
        out[new_id] = old_emb.vectors[old_id]

    if plan.novel:
        shared_old = [old_id for old_id, _ in plan.shared]
        if isinstance(plan.init_mode, MeanInit):
            if not shared_old:
                raise AdaptationError("mean init requires a non-empty shared set")
            shared64 = old_emb.vectors[shared_old].astype(np.float64)
            mean_row = shared64.mean(axis=0).astype(np.float32)
            for new_id in plan.novel:
                out[new_id] = mean_row
        else:
            mean = plan.init_mode.mean
            if plan.init_mode.std is None:
                if not shared_old:
                    raise AdaptationError(
                        "random init with derived std requires a non-empty shared set"
                    )
                shared64 = old_emb.vectors[shared_old].astype(np.float64)
                std = shared64.std(axis=0)
            else:
                std = np.full(dim, float(plan.init_mode.std), dtype=np.float64)
            for new_id in plan.novel:
                key = np.array([seed, new_id], dtype=np.uint64)
                rng = Generator(Philox(key=key))
                row = mean + std * rng.standard_normal(dim)
                out[new_id] = row.astype(np.float32)
    return EmbeddingTable(vectors=out)


def adaptation_report(
    plan: AdaptationPlan,
    new_tok: Tokenizer,
    store: CorpusStore,
    languages: Iterable[str] | None = None,
) -> dict[str, float]:
    """Per language, the fraction of encoded probe tokens that are novel
    (i.e. would start from initialized rather than trained embeddings)."""
    novel_ids = set(plan.novel)
    codes = sorted(languages) if languages is not None else store.languages()
    result: dict[str, float] = {}
    for iso_code in codes:
        total = 0
        novel = 0
        for doc in store.iter_documents(iso_code):
            for token_id in new_tok.encode(doc).ids:
                total += 1
                if token_id in novel_ids:
                    novel += 1
        result[iso_code] = novel / total if total else 0.0
    return result


def _mode_header(mode: InitMode) -> str:
    if isinstance(mode, MeanInit):
        return "#mode=mean"
    if mode.std is None:
        return f"#mode=random mean={format(mode.mean, '.17g')} std=shared"
    return (
        f"#mode=random mean={format(mode.mean, '.17g')} "
        f"std={format(mode.std, '.17g')}"
    )


def _parse_mode_header(line: str) -> InitMode:
    body = line[len("#mode="):].strip()
    if body == "mean":
        return MeanInit()
    if body.startswith("random"):
        mean = 0.0
        std: float | None = None
        for part in body.split()[1:]:
            key, _, value = part.partition("=")
            if key == "mean":
                mean = float(value)
            elif key == "std":
                std = None if value == "shared" else float(value)
            else:
                raise AdaptationError(f"unknown init parameter {key!r}")
        return RandomInit(mean=mean, std=std)
    raise AdaptationError(f"unknown init mode in plan header: {line!r}")


def save_plan(plan: AdaptationPlan, path: str | Path) -> None:
    lines = [_mode_header(plan.init_mode)]
    lines += [f"S\t{o}\t{n}" for o, n in sorted(plan.shared, key=lambda p: p[1])]
    lines += [f"N\t{n}" for n in sorted(plan.novel)]
    lines += [f"D\t{o}" for o in sorted(plan.dropped)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_plan(path: str | Path) -> AdaptationPlan:
    shared: list[tuple[int, int]] = []
    novel: list[int] = []
    dropped: list[int] = []
    mode: InitMode | None = None
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
        if not line.strip():
            continue
        if line.startswith("#mode="):
            mode = _parse_mode_header(line)
            continue
        if line.startswith("#"):
            continue
        fields = line.split("\t")
        try:
            if fields[0] == "S" and len(fields) == 3:
                shared.append((int(fields[1]), int(fields[2])))
            elif fields[0] == "N" and len(fields) == 2:
                novel.append(int(fields[1]))
            elif fields[0] == "D" and len(fields) == 2:
                dropped.append(int(fields[1]))
            else:
                raise ValueError
        except ValueError:
            raise AdaptationError(f"plan line {lineno}: malformed record {line!r}") from None
    if mode is None:
        raise AdaptationError("plan file is missing the #mode= header")
    plan = AdaptationPlan(
        shared=tuple(shared), novel=tuple(novel), dropped=tuple(dropped), init_mode=mode
    )
    new_ids = [n for _, n in plan.shared] + list(plan.novel)
    if sorted(new_ids) != list(range(plan.new_vocab_size)):
        raise AdaptationError("plan does not cover every new id exactly once")
    old_ids = [o for o, _ in plan.shared] + list(plan.dropped)
    if sorted(old_ids) != list(range(plan.old_vocab_size)):
        raise AdaptationError("plan does not cover every old id exactly once")
    return plan
