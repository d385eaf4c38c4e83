"""Per-language compression (tokens per UTF-8 byte) and ratios vs a reference.

Lower tokens-per-byte means a more efficient representation; a ratio below 1
means the candidate tokenizer compresses that language better than the
reference. The headline number is the unweighted (macro) mean of per-language
ratios, so high-resource languages do not dominate.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .bpe import Tokenizer
from .errors import PolytokError
from .sampling import CorpusStore


class EmptyStreamError(PolytokError):
    pass


@dataclass(frozen=True)
class LanguageCompression:
    candidate_tpb: float
    reference_tpb: float
    ratio: float
    bytes_evaluated: int


@dataclass(frozen=True)
class CompressionReport:
    per_language: dict[str, LanguageCompression]
    macro_average_ratio: float


def _measure(tok: Tokenizer, docs: Iterable[str]) -> tuple[int, int]:
    tokens = 0
    total_bytes = 0
    for doc in docs:
        tokens += len(tok.encode(doc).ids)
        total_bytes += len(doc.encode("utf-8"))
    return tokens, total_bytes


def compression(
    tok: Tokenizer, streams: Mapping[str, Iterable[str]]
) -> dict[str, float]:
    """Tokens-per-byte for each language stream."""
    result: dict[str, float] = {}
    for iso_code in sorted(streams):
        tokens, total_bytes = _measure(tok, streams[iso_code])
        if total_bytes == 0:
            raise EmptyStreamError(f"evaluation stream for {iso_code!r} is empty")
        result[iso_code] = tokens / total_bytes
    return result


def compression_ratio(
    candidate: Tokenizer,
    reference: Tokenizer,
    store: CorpusStore,
    languages: Iterable[str] | None = None,
) -> CompressionReport:
    codes = sorted(languages) if languages is not None else store.languages()
    per_language: dict[str, LanguageCompression] = {}
    for iso_code in codes:
        cand_tokens, total_bytes = _measure(candidate, store.iter_documents(iso_code))
        ref_tokens, ref_bytes = _measure(reference, store.iter_documents(iso_code))
        if total_bytes == 0:
            raise EmptyStreamError(f"evaluation stream for {iso_code!r} is empty")
        assert ref_bytes == total_bytes
        cand_tpb = cand_tokens / total_bytes
        ref_tpb = ref_tokens / total_bytes
        per_language[iso_code] = LanguageCompression(
            candidate_tpb=cand_tpb,
            reference_tpb=ref_tpb,
            ratio=cand_tpb / ref_tpb,
            bytes_evaluated=total_bytes,
        )
    if not per_language:
        raise EmptyStreamError("no languages to evaluate")
    macro = sum(r.ratio for r in per_language.values()) / len(per_language)
    return CompressionReport(per_language=per_language, macro_average_ratio=macro)


def write_report(report: CompressionReport, path: str | Path) -> None:
    """`iso<TAB>candidate_tpb<TAB>reference_tpb<TAB>ratio<TAB>bytes` lines,
    terminated by a MACRO summary line."""
    g = lambda x: format(x, ".17g")
    lines = []
    for iso_code in sorted(report.per_language):
        r = report.per_language[iso_code]
        lines.append(
            f"{iso_code}\t{g(r.candidate_tpb)}\t{g(r.reference_tpb)}\t{g(r.ratio)}\t{r.bytes_evaluated}"
        )
    n = len(report.per_language)
    mean_cand = sum(r.candidate_tpb for r in report.per_language.values()) / n
    mean_ref = sum(r.reference_tpb for r in report.per_language.values()) / n
    total = sum(r.bytes_evaluated for r in report.per_language.values())
    lines.append(
        f"MACRO\t{g(mean_cand)}\t{g(mean_ref)}\t{g(report.macro_average_ratio)}\t{total}"
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
