"""Language registry: inventory of languages and derived script+family buckets.

The registry file is UTF-8, one record per line, tab-separated:

    iso_code<TAB>language_name<TAB>script<TAB>family<TAB>subgrouping<TAB>cluster<TAB>data_bytes

Lines starting with '#' are comments. Scripts and families are opaque strings
(open-world); the subgrouping column is carried as metadata only. Pinned
weight fractions are supplied by the caller, never by the file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import RegistryError

CLUSTERS = ("Euro", "Asian", "MEIndic", "Unseen")

_CLUSTER_ALIASES = {
    "euro": "Euro",
    "asian": "Asian",
    "meindic": "MEIndic",
    "me-indic": "MEIndic",
    "unseen": "Unseen",
    "-": "Unseen",
}

_ISO_RE = re.compile(r"^[a-z]{3}$")


@dataclass(frozen=True)
class LanguageSpec:
    """One language's identity and how much corpus is available for it."""

    iso_code: str
    script: str
    family: str
    cluster: str
    data_bytes: int
    name: str = ""
    subgrouping: str = ""

    def __post_init__(self):
        if not _ISO_RE.match(self.iso_code):
            raise RegistryError(f"iso_code must be 3 lowercase letters, got {self.iso_code!r}")
        if not self.script or not self.family:
            raise RegistryError(f"{self.iso_code}: script and family must be non-empty")
        if self.cluster not in CLUSTERS:
            raise RegistryError(f"{self.iso_code}: unknown cluster {self.cluster!r}")
        if self.data_bytes < 0:
            raise RegistryError(f"{self.iso_code}: data_bytes must be >= 0")


@dataclass(frozen=True)
class Bucket:
    """Languages sharing both script and family; weighted uniformly inside."""

    key: tuple[str, str]
    members: tuple[str, ...]


@dataclass(frozen=True)
class Registry:
    languages: tuple[LanguageSpec, ...]
    buckets: tuple[Bucket, ...]
    pinned: dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.languages)

    def language(self, iso_code: str) -> LanguageSpec:
        for lang in self.languages:
            if lang.iso_code == iso_code:
                return lang
        raise RegistryError(f"language {iso_code!r} is not registered")

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(lang.iso_code for lang in self.languages)


def derive_buckets(languages: list[LanguageSpec] | tuple[LanguageSpec, ...]) -> list[Bucket]:
    """Partition languages into (script, family) buckets.

    Bucket order is lexicographic by key; members are sorted by iso_code.
    """
    if not languages:
        raise RegistryError("cannot derive buckets from an empty language list")
    groups: dict[tuple[str, str], list[str]] = {}
    for lang in languages:
        groups.setdefault((lang.script, lang.family), []).append(lang.iso_code)
    return [
        Bucket(key=key, members=tuple(sorted(groups[key])))
        for key in sorted(groups)
    ]


def build_registry(
    languages: list[LanguageSpec] | tuple[LanguageSpec, ...],
    pinned: dict[str, float] | None = None,
) -> Registry:
    """Assemble a Registry, validating uniqueness and pin configuration."""
    pinned = dict(pinned or {})
    seen: set[str] = set()
    for lang in languages:
        if lang.iso_code in seen:
            raise RegistryError(f"duplicate iso_code {lang.iso_code!r}")
        seen.add(lang.iso_code)
    for code, frac in pinned.items():
        if code not in seen:
            raise RegistryError(f"pinned language {code!r} is not in the registry")
        if not (0.0 <= frac <= 1.0):
            raise RegistryError(f"pinned fraction for {code!r} must be in [0, 1], got {frac}")
    if pinned and sum(pinned.values()) >= 1.0:
        raise RegistryError(
            f"pinned fractions must sum to less than 1, got {sum(pinned.values())}"
        )
    return Registry(
        languages=tuple(languages),
        buckets=tuple(derive_buckets(languages)),
        pinned=pinned,
    )


def canonical_cluster(raw: str) -> str:
    try:
        return _CLUSTER_ALIASES[raw.strip().lower()]
    except KeyError:
        raise RegistryError(f"unknown cluster {raw!r}") from None


def parse_registry_text(text: str, pinned: dict[str, float] | None = None) -> Registry:
    languages: list[LanguageSpec] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 7:
            raise RegistryError(
                f"line {lineno}: expected 7 tab-separated fields, got {len(fields)}"
            )
        iso, name, script, family, subgrouping, cluster, data_bytes = fields
        try:
            volume = int(data_bytes)
        except ValueError:
            raise RegistryError(
                f"line {lineno}: data_bytes must be an integer, got {data_bytes!r}"
            ) from None
        languages.append(
            LanguageSpec(
                iso_code=iso.strip(),
                name=name.strip(),
                script=script.strip(),
                family=family.strip(),
                subgrouping=subgrouping.strip(),
                cluster=canonical_cluster(cluster),
                data_bytes=volume,
            )
        )
    if not languages:
        raise RegistryError("registry file contains no languages")
    return build_registry(languages, pinned)


def load_registry(path: str | Path, pinned: dict[str, float] | None = None) -> Registry:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise RegistryError(f"cannot read registry file {path}: {exc}") from None
    return parse_registry_text(text, pinned)


def serialize_registry(reg: Registry) -> str:
    """Canonical text form: records sorted by iso_code, one per line."""
    lines = []
    for lang in sorted(reg.languages, key=lambda l: l.iso_code):
        lines.append(
            "\t".join(
                [
                    lang.iso_code,
                    lang.name,
                    lang.script,
                    lang.family,
                    lang.subgrouping,
                    lang.cluster,
                    str(lang.data_bytes),
                ]
            )
        )
    return "\n".join(lines) + "\n"
