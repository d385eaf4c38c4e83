"""Weighted corpus sampling from a per-language document store.

A CorpusStore is a directory with one subdirectory per iso code, each holding
UTF-8 text files with one document per line (blank lines are ignored).
draw_sample emits whole documents per language, in store order with cyclic
repetition for undersized corpora, until each language's byte budget is met;
the cross-language emission order is a seeded shuffle, so the output stream
is a pure function of (plan, store contents, seed).
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterator

from .errors import SamplingError
from .weighting import SamplePlan


class CorpusStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise SamplingError(f"corpus store {self.root} is not a directory")

    def languages(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if p.is_dir())

    def iter_documents(self, iso_code: str) -> Iterator[str]:
        lang_dir = self.root / iso_code
        if not lang_dir.is_dir():
            raise SamplingError(f"store has no directory for language {iso_code!r}")
        for path in sorted(lang_dir.iterdir()):
            if not path.is_file():
                continue
            for line in path.read_text(encoding="utf-8").split("\n"):
                if line:
                    yield line

    def load_documents(self, iso_code: str) -> list[str]:
        return list(self.iter_documents(iso_code))


def _collect_selections(
    iso_code: str, docs: list[str], budget: int
) -> list[int]:
    """Document indices (cycled in store order) whose sizes reach the budget."""
    if not docs:
        raise SamplingError(f"store is empty for language {iso_code!r}")
    sizes = [len(d.encode("utf-8")) for d in docs]
    if sum(sizes) == 0:
        raise SamplingError(f"store has no non-empty documents for language {iso_code!r}")
    picks: list[int] = []
    emitted = 0
    i = 0
    while emitted < budget:
        idx = i % len(docs)
        picks.append(idx)
        emitted += sizes[idx]
        i += 1
    return picks


def draw_sample(plan: SamplePlan, store: CorpusStore, workers: int = 1) -> Iterator[str]:
    """Yield sampled documents across languages in seeded-shuffle order."""
    active = [
        code
        for code in sorted(plan.bytes_per_language)
        if plan.bytes_per_language[code] > 0
    ]
    available = set(store.languages())
    for code in active:
        if code not in available:
            raise SamplingError(f"store cannot serve language {code!r}")

    if workers > 1 and len(active) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            loaded = list(pool.map(store.load_documents, active))
        docs_by_lang = dict(zip(active, loaded))
    else:
        docs_by_lang = {code: store.load_documents(code) for code in active}

    selections: list[tuple[str, int]] = []
    for code in active:
        picks = _collect_selections(code, docs_by_lang[code], plan.bytes_per_language[code])
        selections.extend((code, idx) for idx in picks)

    rng = random.Random(plan.seed)
    rng.shuffle(selections)
    for code, idx in selections:
        yield docs_by_lang[code][idx]


def write_sample(plan: SamplePlan, store: CorpusStore, path: str | Path, workers: int = 1) -> int:
    """Write the sampled stream as one document per line; returns doc count."""
    count = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        for doc in draw_sample(plan, store, workers=workers):
            handle.write(doc)
            handle.write("\n")
            count += 1
    return count
