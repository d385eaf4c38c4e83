"""Independent reference implementations used as test oracles.

Nothing here imports the package under test. The weighting oracle evaluates
the bucket/data formula directly; the BPE oracle recounts every pair from
scratch at each step; the chunk scanner is a hand-rolled matcher for the
GPT-4o split pattern with the same alternative order and backtracking
behavior as a conventional regex engine.
"""

from __future__ import annotations

import unicodedata

import regex as _regex

# --- weighting -------------------------------------------------------------


def brute_force_weights(
    langs: list[tuple[str, str, str, int]],
    pins: dict[str, float],
    mode: str,
) -> dict[str, float]:
    """Brute-force evaluation of the combined data/bucket weighting.

    langs: (iso, script, family, data_bytes) tuples. Pinned languages carry
    exactly their pinned fraction; unpinned weights normalize to the rest.
    """
    out = dict(pins)
    unpinned = [l for l in langs if l[0] not in pins]
    budget = 1.0 - sum(pins.values())
    if mode == "uniform":
        with_data = [l for l in unpinned if l[3] > 0]
        share = budget / len(with_data)
        for iso, _, _, data in unpinned:
            out[iso] = share if data > 0 else 0.0
        return out
    total = sum(l[3] for l in unpinned)
    members: dict[tuple[str, str], list[str]] = {}
    for iso, script, family, _ in unpinned:
        members.setdefault((script, family), []).append(iso)
    raw = {}
    for iso, script, family, data in unpinned:
        raw[iso] = (data / total) * (1.0 / len(members[(script, family)]))
    norm = sum(raw.values())
    for iso in raw:
        out[iso] = budget * raw[iso] / norm
    return out


def largest_remainder(entries: dict[str, float], total: int) -> dict[str, int]:
    quotas = {code: w * total for code, w in entries.items()}
    floors = {code: int(q) for code, q in quotas.items()}
    leftover = total - sum(floors.values())
    order = sorted(entries, key=lambda c: (-(quotas[c] - floors[c]), c))
    for code in order[:leftover]:
        floors[code] += 1
    return floors


# --- BPE -------------------------------------------------------------------

_ORACLE_O200K = _regex.compile(
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


def naive_bpe_merges(
    docs: list[str],
    vocab_size: int,
    min_frequency: int,
    n_special: int = 0,
) -> list[tuple[bytes, bytes]]:
    """Reference BPE trainer: full pair recount at every step.

    Merge selection: highest count, ties broken by the smallest
    (min operand id, max operand id, left operand id); ids count specials
    first, then the 256 bytes, then merged tokens in creation order.
    """
    chunk_counts: dict[str, int] = {}
    for doc in docs:
        for chunk in _ORACLE_O200K.findall(doc):
            chunk_counts[chunk] = chunk_counts.get(chunk, 0) + 1
    seqs: list[list[bytes]] = []
    freqs: list[int] = []
    for chunk, cnt in sorted(chunk_counts.items()):
        seqs.append([bytes([b]) for b in chunk.encode("utf-8")])
        freqs.append(cnt)

    ids = {bytes([b]): n_special + b for b in range(256)}
    next_id = n_special + 256
    merges: list[tuple[bytes, bytes]] = []
    max_merges = vocab_size - 256 - n_special

    while len(merges) < max_merges:
        pair_counts: dict[tuple[bytes, bytes], int] = {}
        for seq, cnt in zip(seqs, freqs):
            for pair in zip(seq, seq[1:]):
                pair_counts[pair] = pair_counts.get(pair, 0) + cnt
        best = None
        best_key = None
        for pair, cnt in pair_counts.items():
            if cnt < min_frequency:
                continue
            a, b = ids[pair[0]], ids[pair[1]]
            key = (-cnt, min(a, b), max(a, b), a)
            if best_key is None or key < best_key:
                best_key = key
                best = pair
        if best is None:
            break
        merges.append(best)
        merged = best[0] + best[1]
        ids[merged] = next_id
        next_id += 1
        for si, seq in enumerate(seqs):
            out: list[bytes] = []
            k = 0
            while k < len(seq):
                if k + 1 < len(seq) and seq[k] == best[0] and seq[k + 1] == best[1]:
                    out.append(merged)
                    k += 2
                else:
                    out.append(seq[k])
                    k += 1
            seqs[si] = out
    return merges


# --- o200k chunk scanner ----------------------------------------------------

_NEWLINE = "\r\n"
_SUFFIXES = ("s", "t", "re", "ve", "m", "ll", "d")


def _is_space(ch: str) -> bool:
    # regex \s is Unicode White_Space, which excludes the four ASCII
    # information separators that str.isspace() accepts
    return ch.isspace() and ord(ch) not in (0x1C, 0x1D, 0x1E, 0x1F)


def _is_letter(ch: str) -> bool:
    return unicodedata.category(ch)[0] == "L"


def _is_number(ch: str) -> bool:
    return unicodedata.category(ch)[0] == "N"


def _upperish(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return cat in ("Lu", "Lt", "Lm", "Lo") or cat[0] == "M"


def _lowerish(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return cat in ("Ll", "Lm", "Lo") or cat[0] == "M"


def _eat_contraction(text: str, i: int) -> int:
    if i >= len(text) or text[i] != "'":
        return i
    for suffix in _SUFFIXES:
        end = i + 1 + len(suffix)
        if end <= len(text) and text[i + 1 : end].casefold() == suffix:
            return end
    return i


def _prefix_ok(ch: str) -> bool:
    return ch not in _NEWLINE and not _is_letter(ch) and not _is_number(ch)


def _alt_letters1(text: str, i: int) -> int:
    n = len(text)
    for take_prefix in (1, 0):
        if take_prefix and not (i < n and _prefix_ok(text[i])):
            continue
        p = i + take_prefix
        u = p
        while u < n and _upperish(text[u]):
            u += 1
        for k in range(u, p - 1, -1):
            q = k
            while q < n and _lowerish(text[q]):
                q += 1
            if q > k:
                return _eat_contraction(text, q)
    return i


def _alt_letters2(text: str, i: int) -> int:
    n = len(text)
    for take_prefix in (1, 0):
        if take_prefix and not (i < n and _prefix_ok(text[i])):
            continue
        p = i + take_prefix
        u = p
        while u < n and _upperish(text[u]):
            u += 1
        if u == p:
            continue
        q = u
        while q < n and _lowerish(text[q]):
            q += 1
        return _eat_contraction(text, q)
    return i


def _alt_digits(text: str, i: int) -> int:
    n = len(text)
    q = i
    while q < n and q - i < 3 and _is_number(text[q]):
        q += 1
    return q


def _alt_punct(text: str, i: int) -> int:
    n = len(text)
    for take_prefix in (1, 0):
        p = i
        if take_prefix:
            if p < n and text[p] == " ":
                p += 1
            else:
                continue
        q = p
        while q < n and not (_is_space(text[q]) or _is_letter(text[q]) or _is_number(text[q])):
            q += 1
        if q == p:
            continue
        while q < n and text[q] in "\r\n/":
            q += 1
        return q
    return i


def _alt_space_newline(text: str, i: int) -> int:
    n = len(text)
    q = i
    while q < n and _is_space(text[q]):
        q += 1
    for j in range(q - 1, i - 1, -1):
        if text[j] in _NEWLINE:
            return j + 1
    return i


def _alt_space_no_trail(text: str, i: int) -> int:
    n = len(text)
    q = i
    while q < n and _is_space(text[q]):
        q += 1
    run = q - i
    if run == 0:
        return i
    if q == n:
        return q
    if run >= 2:
        return q - 1
    return i


def _alt_space(text: str, i: int) -> int:
    n = len(text)
    q = i
    while q < n and _is_space(text[q]):
        q += 1
    return q


_ALTERNATIVES = (
    _alt_letters1,
    _alt_letters2,
    _alt_digits,
    _alt_punct,
    _alt_space_newline,
    _alt_space_no_trail,
    _alt_space,
)


def scan_o200k(text: str) -> list[str]:
    """Reference chunker for the GPT-4o split pattern."""
    chunks: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        for alt in _ALTERNATIVES:
            j = alt(text, i)
            if j > i:
                chunks.append(text[i:j])
                i = j
                break
        else:  # pragma: no cover - every character class is handled above
            chunks.append(text[i])
            i += 1
    return chunks
