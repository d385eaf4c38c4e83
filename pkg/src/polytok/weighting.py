"""Language weighting and sample planning for tokenizer training corpora.

The universal mode combines the natural data distribution with uniform
weighting inside each script+family bucket: for an unpinned language i,

    raw_i = (data_i / sum of unpinned data) * (1 / |bucket(i)|)
    w_i   = (1 - pinned_total) * raw_i / sum of raw

Pinned languages (e.g. English at 30%) carry exactly their pinned fraction
and are excluded from both the data denominator and bucket membership. The
uniform mode splits (1 - pinned_total) equally among unpinned languages that
have any data. In both modes a language with zero data receives weight zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import WeightingError
from .registry import Registry, derive_buckets

MODES = ("universal", "uniform")


@dataclass(frozen=True)
class WeightTable:
    """Normalized per-language sampling weights."""

    entries: dict[str, float]
    mode: str
    pinned_total: float

    def total(self) -> float:
        return sum(self.entries.values())


@dataclass(frozen=True)
class SamplePlan:
    """Byte budgets per language, conserving the total exactly."""

    bytes_per_language: dict[str, int]
    total_bytes: int
    seed: int


def compute_weights(reg: Registry, mode: str) -> WeightTable:
    if mode not in MODES:
        raise WeightingError(f"unknown weighting mode {mode!r} (expected one of {MODES})")
    if not reg.languages:
        raise WeightingError("registry is empty")
    unpinned = [lang for lang in reg.languages if lang.iso_code not in reg.pinned]
    if not unpinned:
        raise WeightingError("at least one language must be unpinned")
    pinned_total = sum(reg.pinned.values())
    budget = 1.0 - pinned_total

    weights: dict[str, float] = {}
    for code, frac in reg.pinned.items():
        weights[code] = frac

    if mode == "uniform":
        with_data = [lang for lang in unpinned if lang.data_bytes > 0]
        if not with_data:
            raise WeightingError("all unpinned languages have zero data")
        share = budget / len(with_data)
        for lang in unpinned:
            weights[lang.iso_code] = share if lang.data_bytes > 0 else 0.0
    else:
        total_data = sum(lang.data_bytes for lang in unpinned)
        if total_data == 0:
            raise WeightingError("all unpinned languages have zero data")
        bucket_size: dict[str, int] = {}
        for bucket in derive_buckets(unpinned):
            for code in bucket.members:
                bucket_size[code] = len(bucket.members)
        raw: dict[str, float] = {}
        for lang in unpinned:
            w_d = lang.data_bytes / total_data
            w_b = 1.0 / bucket_size[lang.iso_code]
            raw[lang.iso_code] = w_d * w_b
        norm = sum(raw.values())
        for lang in unpinned:
            weights[lang.iso_code] = budget * raw[lang.iso_code] / norm

    ordered = {code: weights[code] for code in sorted(weights)}
    return WeightTable(entries=ordered, mode=mode, pinned_total=pinned_total)


def make_sample_plan(
    wt: "WeightTable | Mapping[str, float]", total_bytes: int, seed: int = 0
) -> SamplePlan:
    """Round weights to integer byte budgets by largest remainder.

    Ties in the fractional remainder break lexicographically by iso_code, so
    the plan is a pure function of (weights, total_bytes).
    """
    if total_bytes <= 0:
        raise WeightingError(f"total_bytes must be positive, got {total_bytes}")
    entries = wt.entries if isinstance(wt, WeightTable) else wt
    floors: dict[str, int] = {}
    fracs: dict[str, float] = {}
    for code, w in entries.items():
        if w < 0:
            raise WeightingError(f"weight for {code!r} must be >= 0, got {w}")
        quota = w * total_bytes
        floors[code] = int(quota)
        fracs[code] = quota - floors[code]
    leftover = total_bytes - sum(floors.values())
    for code in sorted(fracs, key=lambda c: (-fracs[c], c))[:leftover]:
        floors[code] += 1
    return SamplePlan(
        bytes_per_language={code: floors[code] for code in sorted(floors)},
        total_bytes=total_bytes,
        seed=seed,
    )


def write_weight_table(wt: WeightTable, path: str | Path) -> None:
    """One `iso_code<TAB>weight` line per language, 17 significant digits."""
    lines = [f"{code}\t{format(w, '.17g')}" for code, w in sorted(wt.entries.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_weight_entries(path: str | Path) -> dict[str, float]:
    entries: dict[str, float] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise WeightingError(f"weight file line {lineno}: expected 2 fields")
        entries[fields[0]] = float(fields[1])
    if not entries:
        raise WeightingError("weight file contains no entries")
    return entries


def write_sample_plan(plan: SamplePlan, path: str | Path) -> None:
    lines = [f"# total_bytes={plan.total_bytes}", f"# seed={plan.seed}"]
    lines += [f"{code}\t{n}" for code, n in sorted(plan.bytes_per_language.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
